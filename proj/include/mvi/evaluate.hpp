#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "mvi/data.hpp"
#include "mvi/regressors.hpp"

namespace mvi {

struct ImputationScore {
  double rmse = 0.0;
  double nrmse = 0.0;
  std::size_t n_cells = 0;  // evaluated (ground-truth-known, was-missing) cells
};

/// RMSE over the originally-missing cells of `mask`, normalized by the mean of
/// the actual values over those cells. Original-scale inputs expected.
ImputationScore score_imputation(const DataMatrix& actual,
                                 const DataMatrix& imputed, const Mask& mask);

struct CvResult {
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  int outer_folds = 0;
  std::vector<ClassifierParams> chosen;  // per outer fold
};

struct ClassifierGrid {
  std::vector<int> n_trees = {50, 100};
  std::vector<int> max_depth = {6, 12};
};

/// Stratified 10x2 nested cross-validation with a random-forest classifier:
/// two inner folds pick the grid point, the outer-training refit is scored on
/// the held-out outer fold. Classes smaller than the outer fold count collapse
/// the fold count to the minimum class size.
CvResult nested_cv_classify(const Matrix& X, const std::vector<double>& labels,
                            const ClassifierGrid& grid, std::uint64_t seed,
                            int outer_folds = 10, int inner_folds = 2);

/// Plain stratified k-fold accuracy with fixed classifier parameters.
double cross_val_accuracy(const Matrix& X, const std::vector<double>& labels,
                          const ClassifierParams& params, int folds,
                          std::uint64_t seed);

struct SweepKey {
  std::string dataset;
  std::string missing_type;
  int rate_percent = 0;
  std::string model;

  auto tie() const { return std::tie(dataset, missing_type, rate_percent, model); }
  bool operator<(const SweepKey& o) const { return tie() < o.tie(); }
};

struct SweepCell {
  ImputationScore train_score;
  ImputationScore test_score;
  bool has_cv = false;
  CvResult cv;
  double wall_seconds = 0.0;
};

using SweepTable = std::map<SweepKey, SweepCell>;

/// Per rate the winner has the lowest test NRMSE; overall winner by plurality
/// of per-rate wins, ties broken by the lower NRMSE sum.
std::string vote_best_model(const SweepTable& table, const std::string& dataset,
                            const std::string& missing_type);

double sum_nrmse(const SweepTable& table, const std::string& dataset,
                 const std::string& missing_type, const std::string& model,
                 const std::vector<int>& rate_grid);

}  // namespace mvi
