#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mvi/data.hpp"
#include "mvi/rng.hpp"

namespace mvi {

enum class RegressorKind { Ridge, DecisionTree, RandomForest, GradientBoosting, DeepRegressor };

std::string to_string(RegressorKind k);
RegressorKind regressor_kind_from_string(const std::string& s);

struct HyperParams {
  double ridge_lambda = 1.0;  // lambda = 1 / sigma0^2
  int tree_max_depth = 6;
  int tree_min_leaf = 1;
  int forest_n_trees = 50;
  int gb_n_stages = 100;
  double gb_learning_rate = 0.1;
  int gb_max_depth = 3;
  int mlp_epochs = 200;
  int mlp_batch = 32;
  double mlp_learning_rate = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A single regression tree: flat node array, children by index, -1 for leaf.
struct TreeNode {
  int feature = -1;       // split feature, -1 on leaves
  double threshold = 0.0; // go left when x <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;     // leaf prediction (mean of node targets)
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

/// Fits by exhaustive variance-reduction scan over midpoints of sorted unique
/// values; ties broken by lowest feature index, then lowest threshold.
/// `feature_subsample` < p restricts each split's candidate features to a
/// seeded random subset (used by random forests).
RegressionTree fit_regression_tree(const Matrix& X, const Vector& y,
                                   int max_depth, int min_leaf,
                                   int feature_subsample = -1,
                                   Rng* rng = nullptr);

/// A trained per-variable estimator plus a residual-scale estimate used to
/// emulate posterior-predictive draws inside the chained-equation engine.
class RegressorModel {
 public:
  virtual ~RegressorModel() = default;
  virtual RegressorKind kind() const = 0;
  virtual Eigen::Index input_width() const = 0;
  virtual Vector predict(const Matrix& X) const = 0;

  double residual_std = 0.0;

  /// predict(X) + per-cell Gaussian noise of scale residual_std.
  Vector sample_prediction(const Matrix& X, Rng& rng) const;

 protected:
  void check_width(const Matrix& X) const;
};

std::unique_ptr<RegressorModel> fit_regressor(RegressorKind kind,
                                              const HyperParams& hyper,
                                              const Matrix& X, const Vector& y);

// --- concrete models (exposed for serialization and tests) ---

class RidgeModel final : public RegressorModel {
 public:
  Vector weights;     // length p
  double intercept = 0.0;
  RegressorKind kind() const override { return RegressorKind::Ridge; }
  Eigen::Index input_width() const override { return weights.size(); }
  Vector predict(const Matrix& X) const override;
};

class TreeModel final : public RegressorModel {
 public:
  RegressionTree tree;
  Eigen::Index width = 0;
  RegressorKind kind() const override { return RegressorKind::DecisionTree; }
  Eigen::Index input_width() const override { return width; }
  Vector predict(const Matrix& X) const override;
};

class ForestModel final : public RegressorModel {
 public:
  std::vector<RegressionTree> trees;
  Eigen::Index width = 0;
  RegressorKind kind() const override { return RegressorKind::RandomForest; }
  Eigen::Index input_width() const override { return width; }
  Vector predict(const Matrix& X) const override;  // mean over member trees
};

class BoostedModel final : public RegressorModel {
 public:
  double base = 0.0;  // stage-0 constant (training mean of y)
  double learning_rate = 0.1;
  std::vector<RegressionTree> stages;
  Eigen::Index width = 0;
  RegressorKind kind() const override { return RegressorKind::GradientBoosting; }
  Eigen::Index input_width() const override { return width; }
  Vector predict(const Matrix& X) const override;
};

/// Three ReLU hidden layers (widths p, ceil(p/2), ceil(p/4), floored at 2),
/// linear output, squared-error loss, plain mini-batch gradient descent.
class MlpModel final : public RegressorModel {
 public:
  std::vector<Matrix> weights;  // weights[l]: out x in
  std::vector<Vector> biases;
  RegressorKind kind() const override { return RegressorKind::DeepRegressor; }
  Eigen::Index input_width() const override {
    return weights.empty() ? 0 : weights.front().cols();
  }
  Vector predict(const Matrix& X) const override;

  static std::vector<Eigen::Index> layer_widths(Eigen::Index p);

  // flattened parameter access for gradient checking
  Vector get_params() const;
  void set_params(const Vector& theta);
  /// Mean squared-error loss over (X, y) and its gradient w.r.t. all params.
  double loss_and_grad(const Matrix& X, const Vector& y, Vector* grad) const;
};

// --- random forest classifier for downstream evaluation ---

class ClassifierModel {
 public:
  std::vector<RegressionTree> trees;  // per-class-index votes via leaf majority
  std::vector<double> labels;         // training label set, sorted
  Eigen::Index width = 0;

  std::vector<double> classify(const Matrix& X) const;
};

struct ClassifierParams {
  int n_trees = 50;
  int max_depth = 12;
  int min_leaf = 1;
  std::uint64_t seed = 0;
};

ClassifierModel fit_classifier(const Matrix& X, const std::vector<double>& labels,
                               const ClassifierParams& params);

}  // namespace mvi
