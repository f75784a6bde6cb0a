#include "mvi/regressors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace mvi {

std::string to_string(RegressorKind k) {
  switch (k) {
    case RegressorKind::Ridge: return "ridge";
    case RegressorKind::DecisionTree: return "tree";
    case RegressorKind::RandomForest: return "forest";
    case RegressorKind::GradientBoosting: return "boosting";
    case RegressorKind::DeepRegressor: return "deep";
  }
  return "?";
}

RegressorKind regressor_kind_from_string(const std::string& s) {
  if (s == "ridge" || s == "linear") return RegressorKind::Ridge;
  if (s == "tree") return RegressorKind::DecisionTree;
  if (s == "forest") return RegressorKind::RandomForest;
  if (s == "boosting" || s == "gb") return RegressorKind::GradientBoosting;
  if (s == "deep" || s == "mlp") return RegressorKind::DeepRegressor;
  throw ConfigError("unknown regressor kind: " + s);
}

void HyperParams::validate() const {
  if (ridge_lambda < 0.0) throw ConfigError("ridge_lambda must be >= 0");
  if (tree_max_depth < 1) throw ConfigError("tree_max_depth must be >= 1");
  if (tree_min_leaf < 1) throw ConfigError("tree_min_leaf must be >= 1");
  if (forest_n_trees < 1) throw ConfigError("forest_n_trees must be >= 1");
  if (gb_n_stages < 1) throw ConfigError("gb_n_stages must be >= 1");
  if (!(gb_learning_rate > 0.0 && gb_learning_rate <= 1.0))
    throw ConfigError("gb_learning_rate must lie in (0,1]");
  if (gb_max_depth < 1) throw ConfigError("gb_max_depth must be >= 1");
  if (mlp_epochs < 1 || mlp_batch < 1 || mlp_learning_rate <= 0.0)
    throw ConfigError("invalid MLP hyperparameters");
}

// ---------------------------------------------------------------------------
// regression trees

double RegressionTree::predict_row(
    const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int node = 0;
  for (;;) {
    const TreeNode& n = nodes[static_cast<std::size_t>(node)];
    if (n.feature < 0) return n.value;
    node = x(n.feature) <= n.threshold ? n.left : n.right;
  }
}

namespace {

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

/// Best variance-reduction split over the given candidate features.
SplitChoice best_split(const Matrix& X, const Vector& y,
                       const std::vector<Eigen::Index>& rows,
                       const std::vector<int>& features, int min_leaf) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  SplitChoice best;
  double total_sum = 0.0, total_sq = 0.0;
  for (auto r : rows) {
    total_sum += y(r);
    total_sq += y(r) * y(r);
  }
  const double parent_sse = total_sq - total_sum * total_sum / static_cast<double>(n);

  std::vector<Eigen::Index> order(rows);
  for (int f : features) {
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return X(a, f) < X(b, f);
    });
    double left_sum = 0.0, left_sq = 0.0;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double v = y(order[static_cast<std::size_t>(i)]);
      left_sum += v;
      left_sq += v * v;
      const double xa = X(order[static_cast<std::size_t>(i)], f);
      const double xb = X(order[static_cast<std::size_t>(i + 1)], f);
      if (xa == xb) continue;  // only boundaries between distinct values
      const Eigen::Index nl = i + 1, nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double right_sum = total_sum - left_sum;
      const double right_sq = total_sq - left_sq;
      const double sse = (left_sq - left_sum * left_sum / static_cast<double>(nl)) +
                         (right_sq - right_sum * right_sum / static_cast<double>(nr));
      const double gain = parent_sse - sse;
      if (gain > best.gain) {
        best.gain = gain;
        best.feature = f;
        best.threshold = 0.5 * (xa + xb);
      }
    }
  }
  return best;
}

struct TreeBuilder {
  const Matrix& X;
  const Vector& y;
  int max_depth;
  int min_leaf;
  int feature_subsample;
  Rng* rng;
  std::vector<TreeNode> nodes;

  std::vector<int> candidate_features() {
    const int p = static_cast<int>(X.cols());
    std::vector<int> feats(static_cast<std::size_t>(p));
    std::iota(feats.begin(), feats.end(), 0);
    if (feature_subsample > 0 && feature_subsample < p && rng) {
      rng->shuffle(feats);
      feats.resize(static_cast<std::size_t>(feature_subsample));
      std::sort(feats.begin(), feats.end());
    }
    return feats;
  }

  int build(std::vector<Eigen::Index>& rows, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    double mean = 0.0;
    for (auto r : rows) mean += y(r);
    mean /= static_cast<double>(rows.size());
    nodes[static_cast<std::size_t>(id)].value = mean;

    if (depth >= max_depth || static_cast<int>(rows.size()) < 2 * min_leaf)
      return id;
    const auto feats = candidate_features();
    const SplitChoice split = best_split(X, y, rows, feats, min_leaf);
    if (split.feature < 0 || !(split.gain > 0.0)) return id;

    std::vector<Eigen::Index> left, right;
    for (auto r : rows)
      (X(r, split.feature) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    TreeNode& nd = nodes[static_cast<std::size_t>(id)];
    nd.feature = split.feature;
    nd.threshold = split.threshold;
    nd.left = l;
    nd.right = r;
    return id;
  }
};

}  // namespace

RegressionTree fit_regression_tree(const Matrix& X, const Vector& y,
                                   int max_depth, int min_leaf,
                                   int feature_subsample, Rng* rng) {
  TreeBuilder builder{X, y, max_depth, min_leaf, feature_subsample, rng, {}};
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  builder.build(rows, 0);
  RegressionTree t;
  t.nodes = std::move(builder.nodes);
  return t;
}

// ---------------------------------------------------------------------------
// model predict paths

void RegressorModel::check_width(const Matrix& X) const {
  if (X.cols() != input_width())
    throw ShapeError("predictor width " + std::to_string(X.cols()) +
                     " does not match training width " +
                     std::to_string(input_width()));
}

Vector RegressorModel::sample_prediction(const Matrix& X, Rng& rng) const {
  Vector out = predict(X);
  if (residual_std > 0.0)
    for (Eigen::Index i = 0; i < out.size(); ++i)
      out(i) += residual_std * rng.next_normal();
  return out;
}

Vector RidgeModel::predict(const Matrix& X) const {
  check_width(X);
  return (X * weights).array() + intercept;
}

Vector TreeModel::predict(const Matrix& X) const {
  check_width(X);
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = tree.predict_row(X.row(i));
  return out;
}

Vector ForestModel::predict(const Matrix& X) const {
  check_width(X);
  Vector out = Vector::Zero(X.rows());
  for (const auto& t : trees)
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) += t.predict_row(X.row(i));
  return out / static_cast<double>(trees.size());
}

Vector BoostedModel::predict(const Matrix& X) const {
  check_width(X);
  Vector out = Vector::Constant(X.rows(), base);
  for (const auto& t : stages)
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      out(i) += learning_rate * t.predict_row(X.row(i));
  return out;
}

// ---------------------------------------------------------------------------
// MLP

std::vector<Eigen::Index> MlpModel::layer_widths(Eigen::Index p) {
  std::vector<Eigen::Index> w;
  Eigen::Index h = std::max<Eigen::Index>(p, 2);
  w.push_back(h);  // first hidden layer matches the input width
  for (int l = 0; l < 2; ++l) {
    h = std::max<Eigen::Index>((h + 1) / 2, 2);
    w.push_back(h);
  }
  w.push_back(1);
  return w;
}

Vector MlpModel::predict(const Matrix& X) const {
  check_width(X);
  Matrix a = X.transpose();  // in x m
  for (std::size_t l = 0; l < weights.size(); ++l) {
    a = (weights[l] * a).colwise() + biases[l];
    if (l + 1 < weights.size()) a = a.cwiseMax(0.0);  // ReLU
  }
  return a.row(0).transpose();
}

Vector MlpModel::get_params() const {
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    total += weights[l].size() + biases[l].size();
  Vector theta(total);
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    theta.segment(at, weights[l].size()) =
        Eigen::Map<const Vector>(weights[l].data(), weights[l].size());
    at += weights[l].size();
    theta.segment(at, biases[l].size()) = biases[l];
    at += biases[l].size();
  }
  return theta;
}

void MlpModel::set_params(const Vector& theta) {
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Eigen::Map<Vector>(weights[l].data(), weights[l].size()) =
        theta.segment(at, weights[l].size());
    at += weights[l].size();
    biases[l] = theta.segment(at, biases[l].size());
    at += biases[l].size();
  }
}

double MlpModel::loss_and_grad(const Matrix& X, const Vector& y,
                               Vector* grad) const {
  const auto m = static_cast<double>(X.rows());
  const std::size_t L = weights.size();
  std::vector<Matrix> activations(L + 1);
  activations[0] = X.transpose();
  for (std::size_t l = 0; l < L; ++l) {
    Matrix z = (weights[l] * activations[l]).colwise() + biases[l];
    activations[l + 1] = (l + 1 < L) ? z.cwiseMax(0.0).eval() : z;
  }
  const Vector pred = activations[L].row(0).transpose();
  const Vector err = pred - y;
  const double loss = 0.5 * err.squaredNorm() / m;
  if (!grad) return loss;

  std::vector<Matrix> dW(L);
  std::vector<Vector> db(L);
  Matrix delta = err.transpose() / m;  // 1 x m
  for (std::size_t l = L; l-- > 0;) {
    dW[l] = delta * activations[l].transpose();
    db[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = weights[l].transpose() * delta;
      // ReLU mask from the post-activation values
      delta = delta.cwiseProduct(
          (activations[l].array() > 0.0).cast<double>().matrix());
    }
  }
  grad->resize(get_params().size());
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < L; ++l) {
    grad->segment(at, dW[l].size()) =
        Eigen::Map<const Vector>(dW[l].data(), dW[l].size());
    at += dW[l].size();
    grad->segment(at, db[l].size()) = db[l];
    at += db[l].size();
  }
  return loss;
}

// ---------------------------------------------------------------------------
// fitting

namespace {

double centered_population_std(const Vector& r) {
  const double mean = r.mean();
  return std::sqrt((r.array() - mean).square().sum() /
                   static_cast<double>(r.size()));
}

std::unique_ptr<RegressorModel> fit_ridge(const HyperParams& h, const Matrix& X,
                                          const Vector& y) {
  const Eigen::Index p = X.cols();
  Matrix design(X.rows(), p + 1);
  design.leftCols(p) = X;
  design.col(p).setOnes();
  Matrix normal = design.transpose() * design;
  for (Eigen::Index j = 0; j < p; ++j) normal(j, j) += h.ridge_lambda;
  // intercept stays unpenalized
  const Vector sol = normal.ldlt().solve(design.transpose() * y);
  auto model = std::make_unique<RidgeModel>();
  model->weights = sol.head(p);
  model->intercept = sol(p);
  return model;
}

std::unique_ptr<RegressorModel> fit_tree_model(const HyperParams& h,
                                               const Matrix& X, const Vector& y) {
  auto model = std::make_unique<TreeModel>();
  model->width = X.cols();
  model->tree = fit_regression_tree(X, y, h.tree_max_depth, h.tree_min_leaf);
  return model;
}

std::unique_ptr<RegressorModel> fit_forest(const HyperParams& h, const Matrix& X,
                                           const Vector& y) {
  auto model = std::make_unique<ForestModel>();
  model->width = X.cols();
  const Eigen::Index n = X.rows();
  const int mtry = std::max(1, static_cast<int>(std::floor(
                                   std::sqrt(static_cast<double>(X.cols())))));
  for (int t = 0; t < h.forest_n_trees; ++t) {
    Rng rng(derive_seed(h.seed, "forest_tree", {static_cast<std::uint64_t>(t)}));
    Matrix bx(n, X.cols());
    Vector by(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(
          rng.next_below(static_cast<std::uint64_t>(n)));
      bx.row(i) = X.row(r);
      by(i) = y(r);
    }
    model->trees.push_back(fit_regression_tree(bx, by, h.tree_max_depth,
                                               h.tree_min_leaf, mtry, &rng));
  }
  return model;
}

std::unique_ptr<RegressorModel> fit_boosted(const HyperParams& h, const Matrix& X,
                                            const Vector& y) {
  auto model = std::make_unique<BoostedModel>();
  model->width = X.cols();
  model->learning_rate = h.gb_learning_rate;
  model->base = y.mean();
  Vector residual = y.array() - model->base;
  for (int s = 0; s < h.gb_n_stages; ++s) {
    RegressionTree tree =
        fit_regression_tree(X, residual, h.gb_max_depth, h.tree_min_leaf);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      residual(i) -= h.gb_learning_rate * tree.predict_row(X.row(i));
    model->stages.push_back(std::move(tree));
    if (residual.cwiseAbs().maxCoeff() < 1e-12) break;  // y already learned
  }
  return model;
}

std::unique_ptr<RegressorModel> fit_mlp(const HyperParams& h, const Matrix& X,
                                        const Vector& y) {
  auto model = std::make_unique<MlpModel>();
  const auto widths = MlpModel::layer_widths(X.cols());
  Rng rng(derive_seed(h.seed, "mlp"));
  Eigen::Index in = X.cols();
  for (auto out : widths) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    Matrix w(out, in);
    for (Eigen::Index j = 0; j < w.size(); ++j)
      w(j) = (2.0 * rng.next_double() - 1.0) * scale;
    model->weights.push_back(std::move(w));
    // small positive biases keep pre-activations off the exact ReLU kink,
    // where the subgradient and a central finite difference disagree
    model->biases.push_back(Vector::Constant(out, 0.01));
    in = out;
  }

  const Eigen::Index n = X.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Vector theta = model->get_params();
  Vector grad;
  for (int epoch = 0; epoch < h.mlp_epochs; ++epoch) {
    rng.shuffle(order);
    for (Eigen::Index begin = 0; begin < n; begin += h.mlp_batch) {
      const Eigen::Index count = std::min<Eigen::Index>(h.mlp_batch, n - begin);
      Matrix bx(count, X.cols());
      Vector by(count);
      for (Eigen::Index i = 0; i < count; ++i) {
        bx.row(i) = X.row(order[static_cast<std::size_t>(begin + i)]);
        by(i) = y(order[static_cast<std::size_t>(begin + i)]);
      }
      model->loss_and_grad(bx, by, &grad);
      theta -= h.mlp_learning_rate * grad;
      model->set_params(theta);
    }
  }
  return model;
}

}  // namespace

std::unique_ptr<RegressorModel> fit_regressor(RegressorKind kind,
                                              const HyperParams& hyper,
                                              const Matrix& X, const Vector& y) {
  hyper.validate();
  if (X.rows() != y.size()) throw ShapeError("X and y row counts differ");
  if (X.rows() < 2) throw DataError("insufficient data: need at least 2 rows");
  if (X.cols() < 1) throw ShapeError("need at least one predictor");
  if (!X.allFinite() || !y.allFinite())
    throw DataError("non-finite values in regression inputs");

  std::unique_ptr<RegressorModel> model;
  switch (kind) {
    case RegressorKind::Ridge: model = fit_ridge(hyper, X, y); break;
    case RegressorKind::DecisionTree: model = fit_tree_model(hyper, X, y); break;
    case RegressorKind::RandomForest: model = fit_forest(hyper, X, y); break;
    case RegressorKind::GradientBoosting: model = fit_boosted(hyper, X, y); break;
    case RegressorKind::DeepRegressor: model = fit_mlp(hyper, X, y); break;
  }
  model->residual_std = centered_population_std(y - model->predict(X));
  return model;
}

// ---------------------------------------------------------------------------
// random forest classifier

namespace {

struct GiniSplit {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

double gini(const std::map<double, Eigen::Index>& counts, Eigen::Index total) {
  double g = 1.0;
  for (const auto& [label, c] : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    g -= p * p;
  }
  return g;
}

struct ClassTreeBuilder {
  const Matrix& X;
  const std::vector<double>& y;
  int max_depth;
  int min_leaf;
  int mtry;
  Rng* rng;
  std::vector<TreeNode> nodes;

  double majority(const std::vector<Eigen::Index>& rows) const {
    std::map<double, Eigen::Index> counts;
    for (auto r : rows) ++counts[y[static_cast<std::size_t>(r)]];
    double best_label = counts.begin()->first;
    Eigen::Index best_count = 0;
    for (const auto& [label, c] : counts)
      if (c > best_count) {
        best_count = c;
        best_label = label;
      }
    return best_label;
  }

  GiniSplit best_split(const std::vector<Eigen::Index>& rows,
                       const std::vector<int>& feats) const {
    const auto n = static_cast<Eigen::Index>(rows.size());
    std::map<double, Eigen::Index> total_counts;
    for (auto r : rows) ++total_counts[y[static_cast<std::size_t>(r)]];
    const double parent = gini(total_counts, n) * static_cast<double>(n);

    GiniSplit best;
    std::vector<Eigen::Index> order(rows);
    for (int f : feats) {
      std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return X(a, f) < X(b, f);
      });
      std::map<double, Eigen::Index> left_counts;
      for (Eigen::Index i = 0; i + 1 < n; ++i) {
        ++left_counts[y[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]];
        const double xa = X(order[static_cast<std::size_t>(i)], f);
        const double xb = X(order[static_cast<std::size_t>(i + 1)], f);
        if (xa == xb) continue;
        const Eigen::Index nl = i + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        std::map<double, Eigen::Index> right_counts = total_counts;
        for (const auto& [label, c] : left_counts) {
          right_counts[label] -= c;
          if (right_counts[label] == 0) right_counts.erase(label);
        }
        const double weighted = gini(left_counts, nl) * static_cast<double>(nl) +
                                gini(right_counts, nr) * static_cast<double>(nr);
        const double gain = parent - weighted;
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = f;
          best.threshold = 0.5 * (xa + xb);
        }
      }
    }
    return best;
  }

  int build(std::vector<Eigen::Index>& rows, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(id)].value = majority(rows);

    if (depth >= max_depth || static_cast<int>(rows.size()) < 2 * min_leaf)
      return id;
    std::vector<int> feats(static_cast<std::size_t>(X.cols()));
    std::iota(feats.begin(), feats.end(), 0);
    if (mtry > 0 && mtry < static_cast<int>(X.cols()) && rng) {
      rng->shuffle(feats);
      feats.resize(static_cast<std::size_t>(mtry));
      std::sort(feats.begin(), feats.end());
    }
    const GiniSplit split = best_split(rows, feats);
    if (split.feature < 0 || !(split.gain > 1e-12)) return id;

    std::vector<Eigen::Index> left, right;
    for (auto r : rows)
      (X(r, split.feature) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    TreeNode& nd = nodes[static_cast<std::size_t>(id)];
    nd.feature = split.feature;
    nd.threshold = split.threshold;
    nd.left = l;
    nd.right = r;
    return id;
  }
};

}  // namespace

ClassifierModel fit_classifier(const Matrix& X, const std::vector<double>& labels,
                               const ClassifierParams& params) {
  if (static_cast<std::size_t>(X.rows()) != labels.size())
    throw ShapeError("label count does not match row count");
  if (!X.allFinite()) throw DataError("classifier input has non-finite cells");

  std::vector<double> label_set(labels);
  std::sort(label_set.begin(), label_set.end());
  label_set.erase(std::unique(label_set.begin(), label_set.end()),
                  label_set.end());
  if (label_set.size() < 2)
    throw DataError("degenerate labels: training set has a single class");

  // canonical row order, so predictions are independent of input row order
  std::vector<Eigen::Index> canon(static_cast<std::size_t>(X.rows()));
  std::iota(canon.begin(), canon.end(), 0);
  std::sort(canon.begin(), canon.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (X(a, j) != X(b, j)) return X(a, j) < X(b, j);
    }
    return labels[static_cast<std::size_t>(a)] < labels[static_cast<std::size_t>(b)];
  });
  Matrix cx(X.rows(), X.cols());
  std::vector<double> cy(labels.size());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    cx.row(i) = X.row(canon[static_cast<std::size_t>(i)]);
    cy[static_cast<std::size_t>(i)] =
        labels[static_cast<std::size_t>(canon[static_cast<std::size_t>(i)])];
  }

  ClassifierModel model;
  model.width = X.cols();
  model.labels = label_set;
  const Eigen::Index n = cx.rows();
  const int mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(
                                   static_cast<double>(cx.cols())))));
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(params.seed, "classifier_tree",
                        {static_cast<std::uint64_t>(t)}));
    Matrix bx(n, cx.cols());
    std::vector<double> by(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(
          rng.next_below(static_cast<std::uint64_t>(n)));
      bx.row(i) = cx.row(r);
      by[static_cast<std::size_t>(i)] = cy[static_cast<std::size_t>(r)];
    }
    ClassTreeBuilder builder{bx, by, params.max_depth, params.min_leaf,
                             mtry, &rng, {}};
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);
    builder.build(rows, 0);
    RegressionTree tree;
    tree.nodes = std::move(builder.nodes);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

std::vector<double> ClassifierModel::classify(const Matrix& X) const {
  if (X.cols() != width) throw ShapeError("classifier width mismatch");
  std::vector<double> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    std::map<double, int> votes;
    for (const auto& t : trees) ++votes[t.predict_row(X.row(i))];
    double best_label = labels.front();
    int best_votes = 0;
    for (const auto& [label, v] : votes)
      if (v > best_votes) {
        best_votes = v;
        best_label = label;
      }
    out[static_cast<std::size_t>(i)] = best_label;
  }
  return out;
}

}  // namespace mvi
