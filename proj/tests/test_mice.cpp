#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "mvi/mice.hpp"
#include "mvi/rng.hpp"

using namespace mvi;

namespace {

DataMatrix correlated_pair(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, 0) = rng.next_normal() * 2.0 + 5.0;
    m(i, 1) = 2.0 * m(i, 0);
  }
  return DataMatrix::complete(std::move(m));
}

void mask_tail_rows(DataMatrix& data, Eigen::Index col, double fraction,
                    std::uint64_t seed) {
  Rng rng(seed);
  const auto n_mask = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(data.rows())));
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(data.rows()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    rows[i] = static_cast<Eigen::Index>(i);
  rng.shuffle(rows);
  for (std::size_t t = 0; t < n_mask; ++t) data.mask(rows[t], col) = 0;
}

}  // namespace

TEST_CASE("complete input passes through bit-identically") {
  const DataMatrix data = correlated_pair(40, 1);
  MiceConfig cfg;
  cfg.seed = 2;
  const FitResult fit = fit_transform(data, cfg);
  CHECK(fit.imputed.values == data.values);
  CHECK(fit.imputed.mask == data.mask);
  // the model is still trained: every chain has one model per variable
  REQUIRE(fit.model.chains.size() == 5);
  for (const auto& chain : fit.model.chains) CHECK(chain.size() == 2);
  // and the convergence trace is empty (nothing to update)
  for (const auto& trace : fit.model.convergence_traces) CHECK(trace.empty());
}

TEST_CASE("ridge chain recovers an exact linear relation within noise scale") {
  DataMatrix data = correlated_pair(200, 3);
  mask_tail_rows(data, 1, 0.10, 4);

  MiceConfig cfg;
  cfg.seed = 5;
  const FitResult fit = fit_transform(data, cfg);
  // pooled residual scale of the trained chain models for column 1
  double sigma = 0.0;
  for (const auto& chain : fit.model.chains)
    sigma = std::max(sigma, chain[1]->residual_std);
  const double sigma_original =
      sigma * fit.model.standardization.stds(1) + 1e-6;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    if (!data.observed(i, 1))
      CHECK(std::abs(fit.imputed.values(i, 1) - 2.0 * data.values(i, 0)) <=
            3.5 * sigma_original);
}

TEST_CASE("observed cells are preserved within destandardization tolerance") {
  DataMatrix data = correlated_pair(100, 6);
  mask_tail_rows(data, 0, 0.2, 7);
  mask_tail_rows(data, 1, 0.2, 8);
  MiceConfig cfg;
  cfg.seed = 9;
  const FitResult fit = fit_transform(data, cfg);
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      if (data.observed(i, j))
        CHECK(std::abs(fit.imputed.values(i, j) - data.values(i, j)) <= 1e-9);
}

TEST_CASE("transform passes complete data through and is deterministic") {
  DataMatrix train = correlated_pair(80, 10);
  mask_tail_rows(train, 1, 0.15, 11);
  MiceConfig cfg;
  cfg.seed = 12;
  const FitResult fit = fit_transform(train, cfg);

  const DataMatrix complete_test = correlated_pair(30, 13);
  const DataMatrix out = transform(fit.model, complete_test);
  CHECK(out.values == complete_test.values);

  DataMatrix holey_test = correlated_pair(30, 14);
  mask_tail_rows(holey_test, 1, 0.3, 15);
  const DataMatrix a = transform(fit.model, holey_test);
  const DataMatrix b = transform(fit.model, holey_test);
  CHECK(a.values == b.values);

  // test error within 2x of train error on the shared generating model
  double train_err = 0.0, test_err = 0.0;
  std::size_t train_n = 0, test_n = 0;
  for (Eigen::Index i = 0; i < train.rows(); ++i)
    if (!train.observed(i, 1)) {
      train_err += std::pow(fit.imputed.values(i, 1) - 2 * train.values(i, 0), 2);
      ++train_n;
    }
  for (Eigen::Index i = 0; i < holey_test.rows(); ++i)
    if (!holey_test.observed(i, 1)) {
      test_err += std::pow(a.values(i, 1) - 2 * holey_test.values(i, 0), 2);
      ++test_n;
    }
  const double train_rmse = std::sqrt(train_err / train_n);
  const double test_rmse = std::sqrt(test_err / test_n);
  CHECK(test_rmse <= 2.0 * train_rmse + 0.1);
}

TEST_CASE("transform rejects mismatched shapes") {
  DataMatrix train = correlated_pair(40, 16);
  mask_tail_rows(train, 0, 0.1, 17);
  MiceConfig cfg;
  cfg.seed = 18;
  const FitResult fit = fit_transform(train, cfg);
  DataMatrix wrong;
  wrong.values = Matrix::Zero(5, 3);
  wrong.mask = Mask::Ones(5, 3);
  wrong.column_names = {"a", "b", "c"};
  CHECK_THROWS_AS(transform(fit.model, wrong), ShapeError);
}

TEST_CASE("single-chain aggregation is the chain itself, more chains average") {
  DataMatrix data = correlated_pair(60, 19);
  mask_tail_rows(data, 1, 0.2, 20);
  MiceConfig cfg;
  cfg.seed = 21;
  cfg.n_imputations = 1;
  const FitResult one = fit_transform(data, cfg);
  const FitResult again = fit_transform(data, cfg);
  CHECK(one.imputed.values == again.imputed.values);
}

TEST_CASE("convergence trace shape follows tau") {
  DataMatrix data = correlated_pair(50, 22);
  mask_tail_rows(data, 1, 0.2, 23);

  MiceConfig cfg;
  cfg.seed = 24;
  cfg.convergence_tau = std::numeric_limits<double>::infinity();
  const FitResult fit = fit_transform(data, cfg);
  for (const auto& trace : fit.model.convergence_traces)
    CHECK(trace.size() == 1);  // immediate stop after the first sweep

  cfg.convergence_tau = 0.0;
  const FitResult full = fit_transform(data, cfg);
  for (const auto& trace : full.model.convergence_traces)
    CHECK(trace.size() == 10);
}

TEST_CASE("large ridge penalties pull imputations toward the column mean") {
  DataMatrix data = correlated_pair(120, 25);
  mask_tail_rows(data, 1, 0.25, 26);
  double col_mean = 0.0;
  int n_obs = 0;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    if (data.observed(i, 1)) {
      col_mean += data.values(i, 1);
      ++n_obs;
    }
  col_mean /= n_obs;

  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {1.0, 1e2, 1e6}) {
    MiceConfig cfg;
    cfg.seed = 27;
    cfg.hyper.ridge_lambda = lambda;
    const FitResult fit = fit_transform(data, cfg);
    double dev = 0.0;
    int n = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      if (!data.observed(i, 1)) {
        dev += std::abs(fit.imputed.values(i, 1) - col_mean);
        ++n;
      }
    dev /= n;
    CHECK(dev <= prev + 1e-9);
    prev = dev;
  }
}

TEST_CASE("infusion columns never leak into the output") {
  Rng rng(28);
  Matrix m(90, 3);
  for (Eigen::Index i = 0; i < 90; ++i) {
    const double base = (i % 2 == 0) ? 0.0 : 6.0;
    for (Eigen::Index j = 0; j < 3; ++j) m(i, j) = base + rng.next_normal();
  }
  DataMatrix data = DataMatrix::complete(std::move(m));
  mask_tail_rows(data, 2, 0.2, 29);

  for (auto method : {InfusionMethod::Label, InfusionMethod::BinaryEncoded,
                      InfusionMethod::MCMV}) {
    MiceConfig cfg;
    cfg.seed = 30;
    cfg.infusion = method;
    cfg.k_clusters = 2;
    const FitResult fit = fit_transform(data, cfg);
    CHECK(fit.imputed.cols() == 3);
    CHECK(fit.imputed.column_names == data.column_names);
    CHECK(fit.model.cluster.has_value());

    DataMatrix test = data;
    const DataMatrix out = transform(fit.model, test);
    CHECK(out.cols() == 3);
  }
}

TEST_CASE("budget cap and validation errors") {
  DataMatrix data = correlated_pair(30, 31);
  mask_tail_rows(data, 0, 0.1, 32);
  MiceConfig cfg;
  cfg.fit_budget = 3;  // 5 chains * 10 iterations * 2 columns >> 3
  CHECK_THROWS_AS(fit_transform(data, cfg), BudgetError);

  MiceConfig bad;
  bad.n_imputations = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  DataMatrix empty_col = correlated_pair(10, 33);
  for (Eigen::Index i = 0; i < 10; ++i) empty_col.mask(i, 1) = 0;
  CHECK_THROWS_AS(fit_transform(empty_col, MiceConfig{}),
                  UnimputableColumnError);
}

TEST_CASE("model snapshots round trip through disk") {
  DataMatrix train = correlated_pair(70, 34);
  mask_tail_rows(train, 1, 0.2, 35);
  DataMatrix test = correlated_pair(25, 36);
  mask_tail_rows(test, 1, 0.3, 37);

  for (auto kind : {RegressorKind::Ridge, RegressorKind::DecisionTree,
                    RegressorKind::RandomForest, RegressorKind::GradientBoosting,
                    RegressorKind::DeepRegressor}) {
    MiceConfig cfg;
    cfg.seed = 38;
    cfg.regressor = kind;
    cfg.n_imputations = 2;
    cfg.n_iterations = 2;
    if (kind == RegressorKind::RandomForest) cfg.hyper.forest_n_trees = 5;
    if (kind == RegressorKind::GradientBoosting) cfg.hyper.gb_n_stages = 5;
    if (kind == RegressorKind::DeepRegressor) cfg.hyper.mlp_epochs = 5;
    const FitResult fit = fit_transform(train, cfg);

    const std::string path = "/tmp/mvi_test_model.json";
    save_model(fit.model, path);
    const ImputationModel loaded = load_model(path);
    const DataMatrix direct = transform(fit.model, test);
    const DataMatrix revived = transform(loaded, test);
    CHECK(direct.values == revived.values);
    std::remove(path.c_str());
  }
}

TEST_CASE("model loader rejects foreign or mismatched files") {
  const std::string path = "/tmp/mvi_test_bad_model.json";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("{\"format\":\"other\",\"version\":99}", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_model(path), DataError);
  std::remove(path.c_str());
}
