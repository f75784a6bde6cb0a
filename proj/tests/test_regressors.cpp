#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mvi/regressors.hpp"
#include "mvi/rng.hpp"

using namespace mvi;

namespace {

Matrix random_matrix(Eigen::Index n, Eigen::Index p, Rng& rng) {
  Matrix X(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = rng.next_normal();
  return X;
}

/// Independent ridge oracle: solve the (p+1)-dim normal equations of the
/// intercept-augmented design with the penalty only on the slopes.
Vector ridge_oracle(const Matrix& X, const Vector& y, double lambda) {
  const Eigen::Index p = X.cols();
  Matrix Z(X.rows(), p + 1);
  Z.leftCols(p) = X;
  Z.col(p).setOnes();
  Matrix A = Z.transpose() * Z;
  for (Eigen::Index j = 0; j < p; ++j) A(j, j) += lambda;
  return A.ldlt().solve(Z.transpose() * y);
}

}  // namespace

TEST_CASE("exact linear data is interpolated at lambda 0") {
  Rng rng(11);
  const Matrix X = random_matrix(30, 4, rng);
  const Vector truth = (Vector(4) << 1.5, -2.0, 0.25, 3.0).finished();
  const Vector y = X * truth + Vector::Constant(30, 0.5);

  HyperParams h;
  h.ridge_lambda = 0.0;
  const auto model = fit_regressor(RegressorKind::Ridge, h, X, y);
  const auto* ridge = dynamic_cast<const RidgeModel*>(model.get());
  REQUIRE(ridge != nullptr);
  for (Eigen::Index j = 0; j < 4; ++j)
    CHECK(ridge->weights(j) == doctest::Approx(truth(j)).epsilon(1e-8));
  CHECK(ridge->intercept == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(ridge->residual_std == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("ridge matches the hand normal-equation solve on x=1,2,3") {
  Matrix X(3, 1);
  X << 1, 2, 3;
  Vector y(3);
  y << 1, 2, 3;
  HyperParams h;
  h.ridge_lambda = 1.0;
  const auto model = fit_regressor(RegressorKind::Ridge, h, X, y);
  const auto* ridge = dynamic_cast<const RidgeModel*>(model.get());
  REQUIRE(ridge != nullptr);
  // [[15,6],[6,3]] [w,b] = [14,6]  ->  w = 2/3, b = 2/3
  CHECK(ridge->weights(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(ridge->intercept == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("ridge solution matches the oracle and zeroes the gradient") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix X = random_matrix(20, 3, rng);
    Vector y(20);
    for (int i = 0; i < 20; ++i) y(i) = rng.next_normal();
    const double lambda = 0.5 + trial * 0.3;

    HyperParams h;
    h.ridge_lambda = lambda;
    const auto model = fit_regressor(RegressorKind::Ridge, h, X, y);
    const auto* ridge = dynamic_cast<const RidgeModel*>(model.get());
    REQUIRE(ridge != nullptr);
    const Vector oracle = ridge_oracle(X, y, lambda);
    for (Eigen::Index j = 0; j < 3; ++j)
      CHECK(ridge->weights(j) == doctest::Approx(oracle(j)).epsilon(1e-8));
    CHECK(ridge->intercept == doctest::Approx(oracle(3)).epsilon(1e-8));

    // gradient of 1/2 ||y - Xw - b||^2 + lambda/2 ||w||^2 at the solution
    const Vector r = X * ridge->weights +
                     Vector::Constant(20, ridge->intercept) - y;
    const Vector gw = X.transpose() * r + lambda * ridge->weights;
    const double gb = r.sum();
    const double scale = std::max(1.0, y.norm());
    CHECK(std::sqrt(gw.squaredNorm() + gb * gb) / scale <= 1e-8);
  }
}

TEST_CASE("larger lambda never grows the slope norm") {
  Rng rng(13);
  const Matrix X = random_matrix(40, 5, rng);
  Vector y(40);
  for (int i = 0; i < 40; ++i) y(i) = rng.next_normal();
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.01, 1.0, 100.0, 1e6}) {
    HyperParams h;
    h.ridge_lambda = lambda;
    const auto model = fit_regressor(RegressorKind::Ridge, h, X, y);
    const double norm =
        dynamic_cast<const RidgeModel*>(model.get())->weights.norm();
    CHECK(norm <= prev + 1e-12);
    prev = norm;
  }
}

TEST_CASE("ridge predict is affine evaluation") {
  RidgeModel model;
  model.weights = (Vector(1) << 2.0).finished();
  model.intercept = 1.0;
  Matrix X(1, 1);
  X << 3;
  CHECK(model.predict(X)(0) == doctest::Approx(7.0));
}

TEST_CASE("regression tree reduces to targets on pure splits") {
  Matrix X(4, 1);
  X << 0, 1, 10, 11;
  Vector y(4);
  y << 1, 1, 5, 5;
  const RegressionTree tree = fit_regression_tree(X, y, 6, 1);
  for (int i = 0; i < 4; ++i)
    CHECK(tree.predict_row(X.row(i)) == doctest::Approx(y(i)));
}

TEST_CASE("forest prediction is exactly the mean of member trees") {
  Rng rng(14);
  const Matrix X = random_matrix(50, 3, rng);
  const Vector y = X.col(0).array().sin().matrix();
  HyperParams h;
  h.forest_n_trees = 7;
  const auto model = fit_regressor(RegressorKind::RandomForest, h, X, y);
  const auto* forest = dynamic_cast<const ForestModel*>(model.get());
  REQUIRE(forest != nullptr);
  REQUIRE(forest->trees.size() == 7);
  const Vector pred = forest->predict(X);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double mean = 0.0;
    for (const auto& tree : forest->trees) mean += tree.predict_row(X.row(i));
    mean /= static_cast<double>(forest->trees.size());
    CHECK(pred(i) == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("boosting on constant targets predicts the constant") {
  Rng rng(15);
  const Matrix X = random_matrix(20, 2, rng);
  const Vector y = Vector::Constant(20, 4.25);
  HyperParams h;
  const auto model = fit_regressor(RegressorKind::GradientBoosting, h, X, y);
  const Matrix probe = random_matrix(5, 2, rng);
  const Vector pred = model->predict(probe);
  for (int i = 0; i < 5; ++i) CHECK(pred(i) == doctest::Approx(4.25));
}

TEST_CASE("boosted prediction equals an independent stage-sum accumulation") {
  Rng rng(16);
  const Matrix X = random_matrix(20, 3, rng);
  const Vector y = (X.col(0).array() * X.col(1).array()).matrix();
  HyperParams h;
  h.gb_n_stages = 25;
  const auto model = fit_regressor(RegressorKind::GradientBoosting, h, X, y);
  const auto* boosted = dynamic_cast<const BoostedModel*>(model.get());
  REQUIRE(boosted != nullptr);
  const Vector pred = boosted->predict(X);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double acc = boosted->base;
    for (const auto& stage : boosted->stages)
      acc += boosted->learning_rate * stage.predict_row(X.row(i));
    CHECK(pred(i) == doctest::Approx(acc).epsilon(1e-10));
  }
}

TEST_CASE("boosting training loss is non-increasing in stage count") {
  Rng rng(17);
  const Matrix X = random_matrix(60, 3, rng);
  Vector y(60);
  for (int i = 0; i < 60; ++i)
    y(i) = std::sin(X(i, 0)) + 0.1 * rng.next_normal();
  double prev = std::numeric_limits<double>::infinity();
  for (int stages : {1, 5, 20, 60}) {
    HyperParams h;
    h.gb_n_stages = stages;
    const auto model = fit_regressor(RegressorKind::GradientBoosting, h, X, y);
    const double loss = (model->predict(X) - y).squaredNorm();
    CHECK(loss <= prev + 1e-9);
    prev = loss;
  }
}

TEST_CASE("deep regressor layer widths halve with a floor of 2") {
  using W = std::vector<Eigen::Index>;
  CHECK(MlpModel::layer_widths(11) == W{11, 6, 3, 1});
  CHECK(MlpModel::layer_widths(4) == W{4, 2, 2, 1});
  CHECK(MlpModel::layer_widths(2) == W{2, 2, 2, 1});
}

TEST_CASE("deep regressor gradients match central finite differences") {
  Rng rng(18);
  const Matrix X = random_matrix(5, 6, rng);
  Vector y(5);
  for (int i = 0; i < 5; ++i) y(i) = rng.next_normal();

  HyperParams h;
  h.mlp_epochs = 3;
  const auto fitted = fit_regressor(RegressorKind::DeepRegressor, h, X, y);
  auto* mlp = dynamic_cast<MlpModel*>(
      const_cast<RegressorModel*>(fitted.get()));
  REQUIRE(mlp != nullptr);

  Vector grad;
  mlp->loss_and_grad(X, y, &grad);
  Vector theta = mlp->get_params();
  REQUIRE(grad.size() == theta.size());

  const double step = 1e-5;
  for (Eigen::Index t = 0; t < theta.size(); t += std::max<Eigen::Index>(1, theta.size() / 60)) {
    Vector bumped = theta;
    bumped(t) = theta(t) + step;
    mlp->set_params(bumped);
    const double up = mlp->loss_and_grad(X, y, nullptr);
    bumped(t) = theta(t) - step;
    mlp->set_params(bumped);
    const double down = mlp->loss_and_grad(X, y, nullptr);
    mlp->set_params(theta);
    const double fd = (up - down) / (2 * step);
    const double denom = std::max({1e-6, std::abs(fd), std::abs(grad(t))});
    CHECK(std::abs(grad(t) - fd) / denom <= 1e-4);
  }
}

TEST_CASE("sample_prediction degenerates to predict at zero residual scale") {
  RidgeModel model;
  model.weights = (Vector(1) << 1.0).finished();
  model.intercept = 0.0;
  model.residual_std = 0.0;
  Matrix X(3, 1);
  X << 1, 2, 3;
  Rng rng(19);
  CHECK(model.sample_prediction(X, rng) == model.predict(X));
}

TEST_CASE("sample_prediction mean converges to predict") {
  RidgeModel model;
  model.weights = (Vector(1) << 2.0).finished();
  model.intercept = -1.0;
  model.residual_std = 1.0;
  Matrix X(1, 1);
  X << 4;
  Rng rng(20);
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) sum += model.sample_prediction(X, rng)(0);
  CHECK(std::abs(sum / n - model.predict(X)(0)) <=
        3.0 * model.residual_std / 100.0);
}

TEST_CASE("sample_prediction is deterministic for a fixed rng state") {
  RidgeModel model;
  model.weights = (Vector(2) << 0.5, -0.25).finished();
  model.residual_std = 2.0;
  Rng a(21), b(21);
  Matrix X(4, 2);
  X << 1, 2, 3, 4, 5, 6, 7, 8;
  CHECK(model.sample_prediction(X, a) == model.sample_prediction(X, b));
}

TEST_CASE("fit_regressor validates its inputs") {
  HyperParams h;
  Matrix X(1, 2);
  X << 1, 2;
  Vector y(1);
  y << 3;
  CHECK_THROWS_AS(fit_regressor(RegressorKind::Ridge, h, X, y), DataError);

  Matrix X2(3, 1);
  X2 << 1, 2, std::nan("");
  Vector y2(3);
  y2 << 1, 2, 3;
  CHECK_THROWS_AS(fit_regressor(RegressorKind::Ridge, h, X2, y2), DataError);

  h.gb_learning_rate = 0.0;
  CHECK_THROWS_AS(h.validate(), ConfigError);
}

TEST_CASE("classifier separates blob data and is row-order invariant") {
  Rng rng(22);
  const int n = 60;
  Matrix X(2 * n, 2);
  std::vector<double> labels(2 * n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = rng.next_normal();
    X(i, 1) = rng.next_normal();
    labels[static_cast<std::size_t>(i)] = 0.0;
    X(n + i, 0) = 8.0 + rng.next_normal();
    X(n + i, 1) = 8.0 + rng.next_normal();
    labels[static_cast<std::size_t>(n + i)] = 1.0;
  }
  ClassifierParams params;
  params.n_trees = 20;
  params.seed = 5;
  const ClassifierModel model = fit_classifier(X, labels, params);
  const auto pred = model.classify(X);
  int hits = 0;
  for (int i = 0; i < 2 * n; ++i)
    if (pred[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(i)])
      ++hits;
  CHECK(static_cast<double>(hits) / (2 * n) >= 0.99);

  // reversing the training rows must not change predictions
  Matrix Xr = X.colwise().reverse();
  std::vector<double> lr(labels.rbegin(), labels.rend());
  const ClassifierModel reversed = fit_classifier(Xr, lr, params);
  Matrix probe(3, 2);
  probe << 0, 0, 8, 8, 4, 4;
  CHECK(model.classify(probe) == reversed.classify(probe));
}

TEST_CASE("single-class training data is rejected") {
  Matrix X(4, 1);
  X << 1, 2, 3, 4;
  std::vector<double> labels{1, 1, 1, 1};
  CHECK_THROWS_AS(fit_classifier(X, labels, ClassifierParams{}), DataError);
}
