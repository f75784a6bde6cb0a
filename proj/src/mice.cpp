#include "mvi/mice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "mvi/rng.hpp"

namespace mvi {

using nlohmann::json;

void MiceConfig::validate() const {
  if (n_imputations < 1) throw ConfigError("n_imputations must be >= 1");
  if (n_iterations < 1) throw ConfigError("n_iterations must be >= 1");
  if (convergence_tau < 0.0) throw ConfigError("convergence_tau must be >= 0");
  if (infusion && k_clusters < 2)
    throw ConfigError("cluster infusion requires k >= 2");
  hyper.validate();
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ColumnStats {
  Vector mean;    // over observed cells, standardized space
  Vector stddev;  // population convention
  Vector median;
};

ColumnStats observed_stats(const DataMatrix& s) {
  ColumnStats st;
  st.mean.resize(s.cols());
  st.stddev.resize(s.cols());
  st.median.resize(s.cols());
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    std::vector<double> v;
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      if (s.observed(i, j)) v.push_back(s.values(i, j));
    if (v.empty())
      throw UnimputableColumnError(
          "column '" + s.column_names[static_cast<std::size_t>(j)] +
          "' has no observed cells");
    const double mean =
        std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    st.mean(j) = mean;
    st.stddev(j) = std::sqrt(ss / static_cast<double>(v.size()));
    st.median(j) = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  }
  return st;
}

/// Predictor matrix for variable j: all other columns of `current`, then any
/// infusion columns. Row subset given by `rows`.
Matrix build_predictors(const Matrix& current, const Matrix& infusion_cols,
                        Eigen::Index j, const std::vector<Eigen::Index>& rows) {
  const Eigen::Index d = current.cols();
  const Eigen::Index extra = infusion_cols.size() ? infusion_cols.cols() : 0;
  Matrix X(static_cast<Eigen::Index>(rows.size()), d - 1 + extra);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Eigen::Index at = 0;
    for (Eigen::Index c = 0; c < d; ++c) {
      if (c == j) continue;
      X(static_cast<Eigen::Index>(r), at++) = current(rows[r], c);
    }
    for (Eigen::Index c = 0; c < extra; ++c)
      X(static_cast<Eigen::Index>(r), at++) = infusion_cols(rows[r], c);
  }
  return X;
}

struct ChainOutcome {
  Matrix imputed;  // standardized space, missing cells filled
  std::vector<std::unique_ptr<RegressorModel>> models;
  std::vector<double> trace;
};

ChainOutcome run_chain(const DataMatrix& s, const ColumnStats& stats,
                       const Matrix& infusion_cols, const MiceConfig& cfg,
                       int chain_index) {
  const Eigen::Index n = s.rows(), d = s.cols();
  Rng rng(derive_seed(cfg.seed, "chain",
                      {static_cast<std::uint64_t>(chain_index)}));

  std::vector<std::vector<Eigen::Index>> observed_rows(
      static_cast<std::size_t>(d)),
      missing_rows(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      (s.observed(i, j) ? observed_rows : missing_rows)[static_cast<std::size_t>(j)]
          .push_back(i);

  Matrix current = s.values;
  for (Eigen::Index j = 0; j < d; ++j)
    for (auto i : missing_rows[static_cast<std::size_t>(j)])
      current(i, j) = cfg.init == ChainInit::Gaussian
                          ? stats.mean(j) + stats.stddev(j) * rng.next_normal()
                          : stats.median(j);

  ChainOutcome out;
  out.models.resize(static_cast<std::size_t>(d));
  const bool any_missing =
      std::any_of(missing_rows.begin(), missing_rows.end(),
                  [](const auto& v) { return !v.empty(); });

  HyperParams hyper = cfg.hyper;
  for (int t = 0; any_missing && t < cfg.n_iterations; ++t) {
    double change_sum = 0.0;
    std::size_t change_count = 0;
    for (Eigen::Index j = 0; j < d; ++j) {  // fixed ascending visit order
      const auto& obs = observed_rows[static_cast<std::size_t>(j)];
      const auto& mis = missing_rows[static_cast<std::size_t>(j)];
      if (mis.empty()) continue;

      // bootstrap resample of the fitting rows emulates the parameter draw
      std::vector<Eigen::Index> boot(obs.size());
      for (auto& b : boot)
        b = obs[static_cast<std::size_t>(
            rng.next_below(static_cast<std::uint64_t>(obs.size())))];

      const Matrix X = build_predictors(current, infusion_cols, j, boot);
      Vector y(static_cast<Eigen::Index>(boot.size()));
      for (std::size_t r = 0; r < boot.size(); ++r)
        y(static_cast<Eigen::Index>(r)) = current(boot[r], j);

      hyper.seed = derive_seed(cfg.seed, "fit",
                               {static_cast<std::uint64_t>(chain_index),
                                static_cast<std::uint64_t>(t),
                                static_cast<std::uint64_t>(j)});
      auto model = fit_regressor(cfg.regressor, hyper, X, y);

      const Matrix Xmis = build_predictors(current, infusion_cols, j, mis);
      const Vector draws = model->sample_prediction(Xmis, rng);
      for (std::size_t r = 0; r < mis.size(); ++r) {
        change_sum += std::abs(draws(static_cast<Eigen::Index>(r)) -
                               current(mis[r], j));
        current(mis[r], j) = draws(static_cast<Eigen::Index>(r));
        ++change_count;
      }
      out.models[static_cast<std::size_t>(j)] = std::move(model);
    }
    const double mean_change =
        change_sum / static_cast<double>(std::max<std::size_t>(change_count, 1));
    out.trace.push_back(mean_change);
    if (mean_change <= cfg.convergence_tau) break;
  }

  // variables without missing training cells still get a model, so the
  // trained artifact can impute them when they are missing in test data
  std::vector<Eigen::Index> all_rows(static_cast<std::size_t>(n));
  std::iota(all_rows.begin(), all_rows.end(), 0);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (out.models[static_cast<std::size_t>(j)]) continue;
    const Matrix X = build_predictors(current, infusion_cols, j, all_rows);
    Vector y = current.col(j);
    hyper.seed = derive_seed(cfg.seed, "fit_complete",
                             {static_cast<std::uint64_t>(chain_index),
                              static_cast<std::uint64_t>(j)});
    out.models[static_cast<std::size_t>(j)] =
        fit_regressor(cfg.regressor, hyper, X, y);
  }

  out.imputed = std::move(current);
  return out;
}

}  // namespace

FitResult fit_transform(const DataMatrix& train, const MiceConfig& cfg) {
  cfg.validate();
  train.validate();
  const auto fits = static_cast<std::uint64_t>(cfg.n_imputations) *
                    static_cast<std::uint64_t>(cfg.n_iterations) *
                    static_cast<std::uint64_t>(train.cols());
  if (fits > cfg.fit_budget)
    throw BudgetError("fit budget exceeded: " + std::to_string(fits) +
                      " regressor fits > cap " + std::to_string(cfg.fit_budget));

  FitResult result;
  ImputationModel& model = result.model;
  model.config = cfg;
  model.column_names = train.column_names;
  model.standardization = standardize_fit(train);
  const DataMatrix s = standardize_apply(train, model.standardization);
  const ColumnStats stats = observed_stats(s);
  model.init_fill = stats.mean;
  model.cluster_fill = stats.median;

  Matrix infusion_cols;  // n x extra, fixed through the whole fit
  if (cfg.infusion) {
    Matrix median_filled = s.values;
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      for (Eigen::Index i = 0; i < s.rows(); ++i)
        if (!s.observed(i, j)) median_filled(i, j) = stats.median(j);
    model.cluster = kmeans(median_filled, cfg.k_clusters,
                           derive_seed(cfg.seed, "cluster"));
    const Matrix full = infuse(median_filled, *model.cluster, *cfg.infusion);
    infusion_cols = full.rightCols(full.cols() - s.cols());
  }

  Matrix aggregate = Matrix::Zero(train.rows(), train.cols());
  for (int m = 0; m < cfg.n_imputations; ++m) {
    ChainOutcome chain = run_chain(s, stats, infusion_cols, cfg, m);
    aggregate += chain.imputed;
    model.chains.push_back(std::move(chain.models));
    model.convergence_traces.push_back(std::move(chain.trace));
  }
  aggregate /= static_cast<double>(cfg.n_imputations);

  // observed cells pass through bit-identically; only missing cells take the
  // destandardized chain average
  result.imputed = train;
  result.imputed.mask.setOnes();
  for (Eigen::Index j = 0; j < train.cols(); ++j)
    for (Eigen::Index i = 0; i < train.rows(); ++i)
      if (!train.observed(i, j))
        result.imputed.values(i, j) =
            aggregate(i, j) * model.standardization.stds(j) +
            model.standardization.means(j);
  return result;
}

DataMatrix transform(const ImputationModel& model, const DataMatrix& test) {
  if (test.cols() != model.n_variables())
    throw ShapeError("test column count does not match the trained model");
  if (model.chains.empty()) throw DataError("imputation model is not fitted");
  test.validate();

  const DataMatrix s = standardize_apply(test, model.standardization);
  const Eigen::Index n = s.rows(), d = s.cols();

  std::vector<std::vector<Eigen::Index>> missing_rows(
      static_cast<std::size_t>(d));
  bool any_missing = false;
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (!s.observed(i, j)) {
        missing_rows[static_cast<std::size_t>(j)].push_back(i);
        any_missing = true;
      }
  if (!any_missing) return test;

  Matrix base_fill = s.values;
  for (Eigen::Index j = 0; j < d; ++j)
    for (auto i : missing_rows[static_cast<std::size_t>(j)])
      base_fill(i, j) = model.init_fill(j);

  Matrix infusion_cols;
  if (model.cluster) {
    // rows are assigned to the frozen centroids on the median pre-fill,
    // mirroring how the clustering saw the training data
    Matrix median_filled = s.values;
    for (Eigen::Index j = 0; j < d; ++j)
      for (auto i : missing_rows[static_cast<std::size_t>(j)])
        median_filled(i, j) = model.cluster_fill(j);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      labels[static_cast<std::size_t>(i)] =
          model.cluster->assign_row(median_filled.row(i));
    const Matrix full = infuse_labels(median_filled, labels, *model.cluster,
                                      *model.config.infusion);
    infusion_cols = full.rightCols(full.cols() - d);
  }

  Matrix aggregate = Matrix::Zero(n, d);
  for (const auto& chain : model.chains) {
    Matrix current = base_fill;
    for (int t = 0; t < model.config.n_iterations; ++t) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const auto& mis = missing_rows[static_cast<std::size_t>(j)];
        if (mis.empty()) continue;
        const Matrix X = build_predictors(current, infusion_cols, j, mis);
        const Vector pred = chain[static_cast<std::size_t>(j)]->predict(X);
        for (std::size_t r = 0; r < mis.size(); ++r)
          current(mis[r], j) = pred(static_cast<Eigen::Index>(r));
      }
    }
    aggregate += current;
  }
  aggregate /= static_cast<double>(model.chains.size());

  DataMatrix out = test;
  out.mask.setOnes();
  for (Eigen::Index j = 0; j < d; ++j)
    for (auto i : missing_rows[static_cast<std::size_t>(j)])
      out.values(i, j) = aggregate(i, j) * model.standardization.stds(j) +
                         model.standardization.means(j);
  return out;
}

// ---------------------------------------------------------------------------
// persistence

namespace {

constexpr int kSnapshotVersion = 1;

json tree_to_json(const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes)
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  return nodes;
}

RegressionTree tree_from_json(const json& j) {
  RegressionTree t;
  for (const auto& n : j) {
    TreeNode node;
    node.feature = n[0].get<int>();
    node.threshold = n[1].get<double>();
    node.left = n[2].get<int>();
    node.right = n[3].get<int>();
    node.value = n[4].get<double>();
    t.nodes.push_back(node);
  }
  return t;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Matrix matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols =
      rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : Eigen::Index{0};
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]
                    .get<double>();
  return m;
}

json model_to_json(const RegressorModel& m) {
  json out;
  out["kind"] = to_string(m.kind());
  out["residual_std"] = m.residual_std;
  switch (m.kind()) {
    case RegressorKind::Ridge: {
      const auto& r = static_cast<const RidgeModel&>(m);
      out["weights"] = vector_to_json(r.weights);
      out["intercept"] = r.intercept;
      break;
    }
    case RegressorKind::DecisionTree: {
      const auto& t = static_cast<const TreeModel&>(m);
      out["width"] = t.width;
      out["tree"] = tree_to_json(t.tree);
      break;
    }
    case RegressorKind::RandomForest: {
      const auto& f = static_cast<const ForestModel&>(m);
      out["width"] = f.width;
      json trees = json::array();
      for (const auto& t : f.trees) trees.push_back(tree_to_json(t));
      out["trees"] = std::move(trees);
      break;
    }
    case RegressorKind::GradientBoosting: {
      const auto& b = static_cast<const BoostedModel&>(m);
      out["width"] = b.width;
      out["base"] = b.base;
      out["learning_rate"] = b.learning_rate;
      json stages = json::array();
      for (const auto& t : b.stages) stages.push_back(tree_to_json(t));
      out["stages"] = std::move(stages);
      break;
    }
    case RegressorKind::DeepRegressor: {
      const auto& n = static_cast<const MlpModel&>(m);
      json ws = json::array(), bs = json::array();
      for (const auto& w : n.weights) ws.push_back(matrix_to_json(w));
      for (const auto& b : n.biases) bs.push_back(vector_to_json(b));
      out["weights"] = std::move(ws);
      out["biases"] = std::move(bs);
      break;
    }
  }
  return out;
}

std::unique_ptr<RegressorModel> model_from_json(const json& j) {
  const RegressorKind kind = regressor_kind_from_string(j.at("kind"));
  std::unique_ptr<RegressorModel> out;
  switch (kind) {
    case RegressorKind::Ridge: {
      auto m = std::make_unique<RidgeModel>();
      m->weights = vector_from_json(j.at("weights"));
      m->intercept = j.at("intercept").get<double>();
      out = std::move(m);
      break;
    }
    case RegressorKind::DecisionTree: {
      auto m = std::make_unique<TreeModel>();
      m->width = j.at("width").get<Eigen::Index>();
      m->tree = tree_from_json(j.at("tree"));
      out = std::move(m);
      break;
    }
    case RegressorKind::RandomForest: {
      auto m = std::make_unique<ForestModel>();
      m->width = j.at("width").get<Eigen::Index>();
      for (const auto& t : j.at("trees")) m->trees.push_back(tree_from_json(t));
      out = std::move(m);
      break;
    }
    case RegressorKind::GradientBoosting: {
      auto m = std::make_unique<BoostedModel>();
      m->width = j.at("width").get<Eigen::Index>();
      m->base = j.at("base").get<double>();
      m->learning_rate = j.at("learning_rate").get<double>();
      for (const auto& t : j.at("stages")) m->stages.push_back(tree_from_json(t));
      out = std::move(m);
      break;
    }
    case RegressorKind::DeepRegressor: {
      auto m = std::make_unique<MlpModel>();
      for (const auto& w : j.at("weights"))
        m->weights.push_back(matrix_from_json(w));
      for (const auto& b : j.at("biases"))
        m->biases.push_back(vector_from_json(b));
      out = std::move(m);
      break;
    }
  }
  out->residual_std = j.at("residual_std").get<double>();
  return out;
}

json config_to_json(const MiceConfig& c) {
  json out;
  out["regressor"] = to_string(c.regressor);
  out["n_imputations"] = c.n_imputations;
  out["n_iterations"] = c.n_iterations;
  out["convergence_tau"] = c.convergence_tau;
  out["init"] = c.init == ChainInit::Gaussian ? "gaussian" : "median";
  out["k_clusters"] = c.k_clusters;
  out["seed"] = c.seed;
  out["fit_budget"] = c.fit_budget;
  if (c.infusion) out["infusion"] = to_string(*c.infusion);
  out["hyper"] = {{"ridge_lambda", c.hyper.ridge_lambda},
                  {"tree_max_depth", c.hyper.tree_max_depth},
                  {"tree_min_leaf", c.hyper.tree_min_leaf},
                  {"forest_n_trees", c.hyper.forest_n_trees},
                  {"gb_n_stages", c.hyper.gb_n_stages},
                  {"gb_learning_rate", c.hyper.gb_learning_rate},
                  {"gb_max_depth", c.hyper.gb_max_depth},
                  {"mlp_epochs", c.hyper.mlp_epochs},
                  {"mlp_batch", c.hyper.mlp_batch},
                  {"mlp_learning_rate", c.hyper.mlp_learning_rate},
                  {"seed", c.hyper.seed}};
  return out;
}

MiceConfig config_from_json(const json& j) {
  MiceConfig c;
  c.regressor = regressor_kind_from_string(j.at("regressor"));
  c.n_imputations = j.at("n_imputations").get<int>();
  c.n_iterations = j.at("n_iterations").get<int>();
  c.convergence_tau = j.at("convergence_tau").get<double>();
  c.init = j.at("init") == "median" ? ChainInit::Median : ChainInit::Gaussian;
  c.k_clusters = j.at("k_clusters").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.fit_budget = j.at("fit_budget").get<std::uint64_t>();
  if (j.contains("infusion")) c.infusion = infusion_from_string(j.at("infusion"));
  const auto& h = j.at("hyper");
  c.hyper.ridge_lambda = h.at("ridge_lambda").get<double>();
  c.hyper.tree_max_depth = h.at("tree_max_depth").get<int>();
  c.hyper.tree_min_leaf = h.at("tree_min_leaf").get<int>();
  c.hyper.forest_n_trees = h.at("forest_n_trees").get<int>();
  c.hyper.gb_n_stages = h.at("gb_n_stages").get<int>();
  c.hyper.gb_learning_rate = h.at("gb_learning_rate").get<double>();
  c.hyper.gb_max_depth = h.at("gb_max_depth").get<int>();
  c.hyper.mlp_epochs = h.at("mlp_epochs").get<int>();
  c.hyper.mlp_batch = h.at("mlp_batch").get<int>();
  c.hyper.mlp_learning_rate = h.at("mlp_learning_rate").get<double>();
  c.hyper.seed = h.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void save_model(const ImputationModel& model, const std::string& path) {
  json out;
  out["format"] = "mvi-imputation-model";
  out["version"] = kSnapshotVersion;
  out["config"] = config_to_json(model.config);
  out["column_names"] = model.column_names;
  out["means"] = vector_to_json(model.standardization.means);
  out["stds"] = vector_to_json(model.standardization.stds);
  out["init_fill"] = vector_to_json(model.init_fill);
  out["cluster_fill"] = vector_to_json(model.cluster_fill);
  if (model.cluster) {
    out["cluster"] = {{"k", model.cluster->k},
                      {"centroids", matrix_to_json(model.cluster->centroids)},
                      {"sse", model.cluster->sse}};
  }
  json chains = json::array();
  for (const auto& chain : model.chains) {
    json models = json::array();
    for (const auto& m : chain) models.push_back(model_to_json(*m));
    chains.push_back(std::move(models));
  }
  out["chains"] = std::move(chains);
  out["convergence_traces"] = model.convergence_traces;

  std::ofstream f(path);
  if (!f) throw DataError("cannot write model snapshot: " + path);
  f << out.dump();
}

ImputationModel load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot read model snapshot: " + path);
  json in = json::parse(f);
  if (in.value("format", "") != "mvi-imputation-model")
    throw DataError("not an imputation model snapshot: " + path);
  if (in.value("version", -1) != kSnapshotVersion)
    throw DataError("unsupported model snapshot version in " + path);

  ImputationModel model;
  model.config = config_from_json(in.at("config"));
  model.column_names = in.at("column_names").get<std::vector<std::string>>();
  model.standardization.means = vector_from_json(in.at("means"));
  model.standardization.stds = vector_from_json(in.at("stds"));
  model.init_fill = vector_from_json(in.at("init_fill"));
  model.cluster_fill = vector_from_json(in.at("cluster_fill"));
  if (in.contains("cluster")) {
    ClusterModel c;
    c.k = in["cluster"].at("k").get<int>();
    c.centroids = matrix_from_json(in["cluster"].at("centroids"));
    c.sse = in["cluster"].at("sse").get<double>();
    model.cluster = std::move(c);
  }
  for (const auto& chain : in.at("chains")) {
    std::vector<std::unique_ptr<RegressorModel>> models;
    for (const auto& m : chain) models.push_back(model_from_json(m));
    model.chains.push_back(std::move(models));
  }
  model.convergence_traces =
      in.at("convergence_traces").get<std::vector<std::vector<double>>>();
  return model;
}

}  // namespace mvi
