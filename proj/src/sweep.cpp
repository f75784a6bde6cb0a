#include "mvi/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "mvi/rng.hpp"

namespace mvi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr const char* kToolVersion = "0.1.0";
}

// ---------------------------------------------------------------------------
// registry

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for checksum: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

const std::vector<DatasetRegistryEntry>& dataset_registry() {
  static const std::vector<DatasetRegistryEntry> registry = {
      // UCI wine quality (red); 11 physicochemical features + quality target
      {"wine", "winequality-red.csv", 1599, 12, "quality",
       0x5af751e4d987952aULL},
      // UCI dermatology, prepared as CSV: 358 complete rows, 34 features +
      // class target (user-supplied; see README)
      {"dermatology", "dermatology.csv", 358, 35, "class", 0},
  };
  return registry;
}

namespace {

const DatasetRegistryEntry* find_registry(const std::string& name) {
  for (const auto& e : dataset_registry())
    if (e.name == name) return &e;
  return nullptr;
}

}  // namespace

Dataset load_dataset(const std::string& name_or_path,
                     const std::string& target_column,
                     const std::string& data_dir) {
  std::string path = name_or_path;
  std::string target = target_column;
  const DatasetRegistryEntry* entry = find_registry(name_or_path);
  if (entry) {
    path = (fs::path(data_dir) / entry->default_file).string();
    if (target.empty()) target = entry->target_column;
    if (!fs::exists(path))
      throw DataError("registered dataset '" + entry->name +
                      "' expects a user-supplied file at " + path);
    if (entry->checksum != 0 && fnv1a_file(path) != entry->checksum)
      throw DataError("checksum mismatch for dataset file " + path);
  }

  DataMatrix raw = read_csv(path);
  if (entry) {
    if ((entry->expected_rows >= 0 && raw.rows() != entry->expected_rows) ||
        (entry->expected_cols >= 0 && raw.cols() != entry->expected_cols))
      throw DataError("dataset '" + entry->name + "' has shape " +
                      std::to_string(raw.rows()) + "x" +
                      std::to_string(raw.cols()) + ", expected " +
                      std::to_string(entry->expected_rows) + "x" +
                      std::to_string(entry->expected_cols));
  }

  Dataset out;
  out.name = entry ? entry->name : fs::path(path).stem().string();
  if (target.empty()) {
    out.features = std::move(raw);
    return out;
  }

  const auto it =
      std::find(raw.column_names.begin(), raw.column_names.end(), target);
  if (it == raw.column_names.end())
    throw ConfigError("target column '" + target + "' not found in " + path);
  const auto tcol = static_cast<Eigen::Index>(
      std::distance(raw.column_names.begin(), it));

  out.target.resize(static_cast<std::size_t>(raw.rows()));
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    if (!raw.observed(i, tcol))
      throw DataError("target column has missing values in " + path);
    out.target[static_cast<std::size_t>(i)] = raw.values(i, tcol);
  }
  out.features.values.resize(raw.rows(), raw.cols() - 1);
  out.features.mask.resize(raw.rows(), raw.cols() - 1);
  Eigen::Index at = 0;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    if (j == tcol) continue;
    out.features.values.col(at) = raw.values.col(j);
    out.features.mask.col(at) = raw.mask.col(j);
    out.features.column_names.push_back(
        raw.column_names[static_cast<std::size_t>(j)]);
    ++at;
  }
  return out;
}

// ---------------------------------------------------------------------------
// experiment config

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in " + where);
}

}  // namespace

ModelSpec parse_model(const std::string& name) {
  ModelSpec spec;
  spec.display_name = name;
  const auto plus = name.find('+');
  const std::string head = name.substr(0, plus);
  if (head == "median" || head == "knn" || head == "isvd" || head == "mf") {
    if (plus != std::string::npos)
      throw ConfigError("baseline model '" + head + "' takes no infusion");
    spec.is_mice = false;
    spec.baseline = baseline_kind_from_string(head);
    return spec;
  }
  static const std::map<std::string, RegressorKind> mice_names = {
      {"lr-mice", RegressorKind::Ridge},
      {"dt-mice", RegressorKind::DecisionTree},
      {"rf-mice", RegressorKind::RandomForest},
      {"gb-mice", RegressorKind::GradientBoosting},
      {"dr-mice", RegressorKind::DeepRegressor},
  };
  const auto it = mice_names.find(head);
  if (it == mice_names.end())
    throw ConfigError("unknown model '" + name +
                      "' (expected e.g. lr-mice, gb-mice+mcmv, median)");
  spec.regressor = it->second;
  if (plus != std::string::npos)
    spec.infusion = infusion_from_string(name.substr(plus + 1));
  return spec;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open experiment config: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }

  reject_unknown_keys(j, {"schema_version", "dataset", "target", "types",
                          "rates", "models", "split", "seed", "mice",
                          "baseline", "classification", "data_dir"},
                      path);
  if (j.value("schema_version", -1) != 1)
    throw ConfigError("unsupported schema_version in " + path +
                      " (expected 1)");

  ExperimentConfig cfg;
  cfg.dataset = j.at("dataset").get<std::string>();
  cfg.target_column = j.value("target", "");
  for (const auto& t : j.at("types"))
    cfg.types.push_back(missing_kind_from_string(t.get<std::string>()));
  for (const auto& r : j.at("rates")) {
    const int rate = r.get<int>();
    if (rate <= 0 || rate > 95)
      throw ConfigError("rate " + std::to_string(rate) + " out of (0,95]");
    cfg.rates_percent.push_back(rate);
  }
  for (const auto& m : j.at("models"))
    cfg.models.push_back(parse_model(m.get<std::string>()));
  if (cfg.types.empty() || cfg.rates_percent.empty() || cfg.models.empty())
    throw ConfigError("types, rates and models must be non-empty");

  if (j.contains("split")) {
    reject_unknown_keys(j["split"], {"train_fraction"}, "split");
    cfg.split.train_fraction = j["split"].value("train_fraction", 0.70);
  }
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.split.seed = cfg.seed;
  cfg.evaluate_classification = j.value("classification", false);
  cfg.data_dir = j.value("data_dir", "data");

  if (j.contains("mice")) {
    const json& m = j["mice"];
    reject_unknown_keys(m, {"n_imputations", "n_iterations", "tau", "k",
                            "init", "fit_budget", "hyper"},
                        "mice");
    cfg.mice.n_imputations = m.value("n_imputations", 5);
    cfg.mice.n_iterations = m.value("n_iterations", 10);
    cfg.mice.convergence_tau = m.value("tau", 1e-3);
    cfg.k_clusters = m.value("k", 3);
    if (m.value("init", "gaussian") == "median")
      cfg.mice.init = ChainInit::Median;
    cfg.mice.fit_budget = m.value("fit_budget", cfg.mice.fit_budget);
    if (m.contains("hyper")) {
      const json& h = m["hyper"];
      reject_unknown_keys(h, {"ridge_lambda", "tree_max_depth", "tree_min_leaf",
                              "forest_n_trees", "gb_n_stages",
                              "gb_learning_rate", "gb_max_depth", "mlp_epochs",
                              "mlp_batch", "mlp_learning_rate"},
                          "mice.hyper");
      HyperParams& hp = cfg.mice.hyper;
      hp.ridge_lambda = h.value("ridge_lambda", hp.ridge_lambda);
      hp.tree_max_depth = h.value("tree_max_depth", hp.tree_max_depth);
      hp.tree_min_leaf = h.value("tree_min_leaf", hp.tree_min_leaf);
      hp.forest_n_trees = h.value("forest_n_trees", hp.forest_n_trees);
      hp.gb_n_stages = h.value("gb_n_stages", hp.gb_n_stages);
      hp.gb_learning_rate = h.value("gb_learning_rate", hp.gb_learning_rate);
      hp.gb_max_depth = h.value("gb_max_depth", hp.gb_max_depth);
      hp.mlp_epochs = h.value("mlp_epochs", hp.mlp_epochs);
      hp.mlp_batch = h.value("mlp_batch", hp.mlp_batch);
      hp.mlp_learning_rate = h.value("mlp_learning_rate", hp.mlp_learning_rate);
    }
  }
  cfg.mice.k_clusters = cfg.k_clusters;

  if (j.contains("baseline")) {
    const json& b = j["baseline"];
    reject_unknown_keys(b, {"k_neighbors", "svd_rank", "svd_max_iter",
                            "svd_tol", "mf_rank", "mf_l2", "mf_max_iter",
                            "mf_tol"},
                        "baseline");
    cfg.baseline.k_neighbors = b.value("k_neighbors", 5);
    cfg.baseline.svd_rank = b.value("svd_rank", 10);
    cfg.baseline.svd_max_iter = b.value("svd_max_iter", 100);
    cfg.baseline.svd_tol = b.value("svd_tol", 1e-4);
    cfg.baseline.mf_rank = b.value("mf_rank", 8);
    cfg.baseline.mf_l2 = b.value("mf_l2", 0.1);
    cfg.baseline.mf_max_iter = b.value("mf_max_iter", 200);
    cfg.baseline.mf_tol = b.value("mf_tol", 1e-4);
  }
  cfg.mice.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// table io

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

void write_sweep_table(const SweepTable& table, const std::string& csv_path,
                       const std::string& json_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw DataError("cannot write " + csv_path);
  // no timing column: table bytes must be reproducible across reruns and jobs
  csv << "dataset,missing_type,rate_percent,model,train_rmse,train_nrmse,"
         "test_rmse,test_nrmse,n_cells,cv_mean_accuracy,cv_std_accuracy\n";
  json arr = json::array();
  for (const auto& [key, cell] : table) {
    csv << key.dataset << ',' << key.missing_type << ',' << key.rate_percent
        << ',' << key.model << ',' << fmt(cell.train_score.rmse) << ','
        << fmt(cell.train_score.nrmse) << ',' << fmt(cell.test_score.rmse)
        << ',' << fmt(cell.test_score.nrmse) << ',' << cell.test_score.n_cells
        << ',';
    if (cell.has_cv)
      csv << fmt(cell.cv.mean_accuracy) << ',' << fmt(cell.cv.std_accuracy);
    else
      csv << ',';
    csv << '\n';

    json row = {{"dataset", key.dataset},
                {"missing_type", key.missing_type},
                {"rate_percent", key.rate_percent},
                {"model", key.model},
                {"train_rmse", cell.train_score.rmse},
                {"train_nrmse", cell.train_score.nrmse},
                {"test_rmse", cell.test_score.rmse},
                {"test_nrmse", cell.test_score.nrmse},
                {"n_cells", cell.test_score.n_cells}};
    if (cell.has_cv) {
      row["cv_mean_accuracy"] = cell.cv.mean_accuracy;
      row["cv_std_accuracy"] = cell.cv.std_accuracy;
    }
    arr.push_back(std::move(row));
  }
  std::ofstream js(json_path);
  js << arr.dump(2);
}

SweepTable read_sweep_table(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw DataError("cannot read " + csv_path);
  std::string line;
  std::getline(in, line);  // header
  SweepTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    f.resize(11);
    SweepKey key{f[0], f[1], std::stoi(f[2]), f[3]};
    SweepCell cell;
    cell.train_score.rmse = std::stod(f[4]);
    cell.train_score.nrmse = std::stod(f[5]);
    cell.test_score.rmse = std::stod(f[6]);
    cell.test_score.nrmse = std::stod(f[7]);
    cell.test_score.n_cells = static_cast<std::size_t>(std::stoull(f[8]));
    cell.train_score.n_cells = cell.test_score.n_cells;
    if (!f[9].empty()) {
      cell.has_cv = true;
      cell.cv.mean_accuracy = std::stod(f[9]);
      cell.cv.std_accuracy = std::stod(f[10]);
    }
    table[key] = cell;
  }
  return table;
}

// ---------------------------------------------------------------------------
// sweep

namespace {

struct CellJob {
  MissingKind type;
  int rate;
  const ModelSpec* model;
};

SweepCell run_cell(const ExperimentConfig& cfg, const Dataset& dataset,
                   const DataMatrix& train, const DataMatrix& test,
                   const std::vector<double>& train_target,
                   const std::vector<double>& test_target, const CellJob& job) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string grid_tag = dataset.name + "/" + to_string(job.type) + "/" +
                               std::to_string(job.rate);
  const std::uint64_t cell_seed =
      derive_seed(cfg.seed, "cell/" + grid_tag + "/" + job.model->display_name);

  // amputation seeded per (type, rate) only, so every model sees the same
  // mask and comparisons across models are paired
  MissingnessSpec mspec;
  mspec.kind = job.type;
  mspec.rate = job.rate / 100.0;
  mspec.seed = derive_seed(cfg.seed, "amputate_train/" + grid_tag);
  const DataMatrix train_amp = amputate(train, mspec);
  mspec.seed = derive_seed(cfg.seed, "amputate_test/" + grid_tag);
  const DataMatrix test_amp = amputate(test, mspec);

  DataMatrix train_imputed, test_imputed;
  if (job.model->is_mice) {
    MiceConfig mice = cfg.mice;
    mice.regressor = job.model->regressor;
    mice.infusion = job.model->infusion;
    mice.k_clusters = cfg.k_clusters;
    mice.seed = cell_seed;
    FitResult fit = fit_transform(train_amp, mice);
    train_imputed = std::move(fit.imputed);
    test_imputed = transform(fit.model, test_amp);
  } else {
    BaselineParams params = cfg.baseline;
    params.kind = job.model->baseline;
    const int cap = static_cast<int>(train.cols()) - 1;
    params.svd_rank = std::min(params.svd_rank, std::max(1, cap));
    params.mf_rank = std::min(params.mf_rank, std::max(1, cap));
    train_imputed =
        impute_baseline(train_amp, params, derive_seed(cell_seed, "bl_train"))
            .imputed;
    test_imputed =
        impute_baseline(test_amp, params, derive_seed(cell_seed, "bl_test"))
            .imputed;
  }

  SweepCell cell;
  cell.train_score = score_imputation(train, train_imputed, train_amp.mask);
  cell.test_score = score_imputation(test, test_imputed, test_amp.mask);

  if (cfg.evaluate_classification && !train_target.empty()) {
    Matrix X(train.rows() + test.rows(), train.cols());
    X.topRows(train_imputed.rows()) = train_imputed.values;
    X.bottomRows(test_imputed.rows()) = test_imputed.values;
    std::vector<double> y(train_target);
    y.insert(y.end(), test_target.begin(), test_target.end());
    cell.has_cv = true;
    cell.cv = nested_cv_classify(X, y, ClassifierGrid{},
                                 derive_seed(cell_seed, "cv"));
  }
  cell.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return cell;
}

json resolved_config_json(const ExperimentConfig& cfg) {
  json models = json::array();
  for (const auto& m : cfg.models) models.push_back(m.display_name);
  json types = json::array();
  for (auto t : cfg.types) types.push_back(to_string(t));
  return {{"dataset", cfg.dataset},
          {"target", cfg.target_column},
          {"types", types},
          {"rates", cfg.rates_percent},
          {"models", models},
          {"train_fraction", cfg.split.train_fraction},
          {"seed", cfg.seed},
          {"classification", cfg.evaluate_classification},
          {"mice",
           {{"n_imputations", cfg.mice.n_imputations},
            {"n_iterations", cfg.mice.n_iterations},
            {"tau", cfg.mice.convergence_tau},
            {"k", cfg.k_clusters},
            {"hyper",
             {{"ridge_lambda", cfg.mice.hyper.ridge_lambda},
              {"tree_max_depth", cfg.mice.hyper.tree_max_depth},
              {"tree_min_leaf", cfg.mice.hyper.tree_min_leaf},
              {"forest_n_trees", cfg.mice.hyper.forest_n_trees},
              {"gb_n_stages", cfg.mice.hyper.gb_n_stages},
              {"gb_learning_rate", cfg.mice.hyper.gb_learning_rate},
              {"gb_max_depth", cfg.mice.hyper.gb_max_depth},
              {"mlp_epochs", cfg.mice.hyper.mlp_epochs},
              {"mlp_batch", cfg.mice.hyper.mlp_batch},
              {"mlp_learning_rate", cfg.mice.hyper.mlp_learning_rate}}}}},
          {"baseline",
           {{"k_neighbors", cfg.baseline.k_neighbors},
            {"svd_rank", cfg.baseline.svd_rank},
            {"svd_max_iter", cfg.baseline.svd_max_iter},
            {"svd_tol", cfg.baseline.svd_tol},
            {"mf_rank", cfg.baseline.mf_rank},
            {"mf_l2", cfg.baseline.mf_l2},
            {"mf_max_iter", cfg.baseline.mf_max_iter},
            {"mf_tol", cfg.baseline.mf_tol}}}};
}

}  // namespace

SweepOutcome run_sweep(const ExperimentConfig& cfg, const std::string& out_dir,
                       int jobs, bool force) {
  fs::create_directories(out_dir);
  const std::string csv_path = (fs::path(out_dir) / "sweep_table.csv").string();
  const std::string json_path =
      (fs::path(out_dir) / "sweep_table.json").string();
  const std::string manifest_path =
      (fs::path(out_dir) / "manifest.json").string();

  const Dataset dataset =
      load_dataset(cfg.dataset, cfg.target_column, cfg.data_dir);
  if (dataset.features.n_missing() != 0)
    throw DataError("sweep requires a complete dataset (missingness is "
                    "simulated, not pre-existing)");

  // split once; the target travels with the rows as a temporary extra column
  DataMatrix with_target = dataset.features;
  if (!dataset.target.empty()) {
    with_target.values.conservativeResize(Eigen::NoChange,
                                          with_target.cols() + 1);
    with_target.mask.conservativeResize(Eigen::NoChange, with_target.cols());
    with_target.mask.col(with_target.cols() - 1).setOnes();
    for (Eigen::Index i = 0; i < with_target.rows(); ++i)
      with_target.values(i, with_target.cols() - 1) =
          dataset.target[static_cast<std::size_t>(i)];
    with_target.column_names.push_back("__target__");
  }
  auto [train_full, test_full] = split_train_test(with_target, cfg.split);
  auto strip_target = [&](const DataMatrix& m, std::vector<double>& target) {
    if (dataset.target.empty()) return m;
    DataMatrix out = m;
    target.resize(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      target[static_cast<std::size_t>(i)] = m.values(i, m.cols() - 1);
    out.values.conservativeResize(Eigen::NoChange, m.cols() - 1);
    out.mask.conservativeResize(Eigen::NoChange, m.cols() - 1);
    out.column_names.pop_back();
    return out;
  };
  std::vector<double> train_target, test_target;
  const DataMatrix train = strip_target(train_full, train_target);
  const DataMatrix test = strip_target(test_full, test_target);

  // previously completed cells (manifest-driven resumability)
  SweepTable done;
  if (!force && fs::exists(manifest_path) && fs::exists(csv_path)) {
    std::ifstream mf(manifest_path);
    json manifest = json::parse(mf);
    if (manifest.value("format", "") == "mvi-sweep-manifest" &&
        manifest["config"] == resolved_config_json(cfg))
      done = read_sweep_table(csv_path);
  }

  std::vector<CellJob> jobs_list;
  for (auto type : cfg.types)
    for (int rate : cfg.rates_percent)
      for (const auto& model : cfg.models)
        jobs_list.push_back(CellJob{type, rate, &model});

  SweepOutcome outcome;
  std::vector<SweepCell> results(jobs_list.size());
  std::vector<std::uint8_t> computed(jobs_list.size(), 0);
  std::vector<std::string> errors(jobs_list.size());
  std::atomic<std::size_t> next{0};
  std::atomic<int> skipped{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs_list.size()) return;
      const CellJob& job = jobs_list[i];
      const SweepKey key{dataset.name, to_string(job.type), job.rate,
                         job.model->display_name};
      if (const auto it = done.find(key); it != done.end()) {
        results[i] = it->second;
        computed[i] = 1;
        ++skipped;
        continue;
      }
      try {
        results[i] = run_cell(cfg, dataset, train, test, train_target,
                              test_target, job);
        computed[i] = 1;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  const int n_workers = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  outcome.skipped = skipped.load();
  json completed = json::array();
  json failures = json::array();
  for (std::size_t i = 0; i < jobs_list.size(); ++i) {
    const CellJob& job = jobs_list[i];
    const SweepKey key{dataset.name, to_string(job.type), job.rate,
                       job.model->display_name};
    if (computed[i]) {
      outcome.table[key] = results[i];
      completed.push_back({{"type", key.missing_type},
                           {"rate", key.rate_percent},
                           {"model", key.model}});
    } else {
      outcome.partial = true;
      failures.push_back({{"type", key.missing_type},
                          {"rate", key.rate_percent},
                          {"model", key.model},
                          {"error", errors[i]}});
    }
  }

  write_sweep_table(outcome.table, csv_path, json_path);
  json manifest = {{"format", "mvi-sweep-manifest"},
                   {"version", 1},
                   {"tool_version", kToolVersion},
                   {"config", resolved_config_json(cfg)},
                   {"completed", completed},
                   {"failures", failures}};
  std::ofstream mf(manifest_path);
  mf << manifest.dump(2);
  return outcome;
}

// ---------------------------------------------------------------------------
// report

bool emit_report(const std::string& sweep_dir, const std::string& out_dir) {
  const std::string csv_path =
      (fs::path(sweep_dir) / "sweep_table.csv").string();
  const SweepTable table = read_sweep_table(csv_path);
  fs::create_directories(out_dir);

  std::set<std::string> datasets;
  std::set<std::string> types;
  std::set<int> rates;
  std::set<std::string> models;
  for (const auto& [key, cell] : table) {
    datasets.insert(key.dataset);
    types.insert(key.missing_type);
    rates.insert(key.rate_percent);
    models.insert(key.model);
  }

  std::ofstream md((fs::path(out_dir) / "report.md").string());
  std::ofstream series((fs::path(out_dir) / "nrmse_series.csv").string());
  series << "dataset,missing_type,model,rate_percent,test_nrmse\n";

  bool complete = !table.empty();
  md << "# Imputation sweep report\n";
  for (const auto& ds : datasets) {
    for (const auto& type : types) {
      md << "\n## " << ds << " / " << type << " (test NRMSE)\n\n";
      md << "| missing % |";
      for (const auto& m : models) md << ' ' << m << " |";
      md << "\n|---|";
      for (std::size_t i = 0; i < models.size(); ++i) md << "---|";
      md << '\n';
      for (int rate : rates) {
        md << "| " << rate << "% |";
        for (const auto& m : models) {
          const auto it = table.find(SweepKey{ds, type, rate, m});
          if (it == table.end()) {
            md << "  |";
            complete = false;
          } else {
            md << ' ' << fmt(it->second.test_score.nrmse) << " |";
            series << ds << ',' << type << ',' << m << ',' << rate << ','
                   << fmt(it->second.test_score.nrmse) << '\n';
          }
        }
        md << '\n';
      }

      bool any_cv = false;
      for (const auto& [key, cell] : table)
        if (key.dataset == ds && key.missing_type == type && cell.has_cv)
          any_cv = true;
      if (any_cv) {
        md << "\n### classification accuracy (mean ± std over outer folds)\n\n";
        md << "| missing % |";
        for (const auto& m : models) md << ' ' << m << " |";
        md << "\n|---|";
        for (std::size_t i = 0; i < models.size(); ++i) md << "---|";
        md << '\n';
        for (int rate : rates) {
          md << "| " << rate << "% |";
          for (const auto& m : models) {
            const auto it = table.find(SweepKey{ds, type, rate, m});
            if (it != table.end() && it->second.has_cv)
              md << ' ' << fmt(it->second.cv.mean_accuracy) << " ("
                 << fmt(it->second.cv.std_accuracy) << ") |";
            else
              md << "  |";
          }
          md << '\n';
        }
      }

      if (models.size() >= 2) {
        try {
          const std::string best = vote_best_model(table, ds, type);
          double best_sum = sum_nrmse(table, ds, type, best,
                                      {rates.begin(), rates.end()});
          md << "\nBest model by per-rate voting: **" << best
             << "** (NRMSE sum " << fmt(best_sum) << ")\n";
        } catch (const std::exception&) {
          complete = false;  // gaps prevent voting; table above shows blanks
        }
      }
    }
  }
  return complete;
}

}  // namespace mvi
