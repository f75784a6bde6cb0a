#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mvi/cluster.hpp"
#include "mvi/data.hpp"
#include "mvi/regressors.hpp"

namespace mvi {

enum class ChainInit { Gaussian, Median };

struct MiceConfig {
  RegressorKind regressor = RegressorKind::Ridge;
  HyperParams hyper;
  int n_imputations = 5;   // M
  int n_iterations = 10;   // N
  double convergence_tau = 1e-3;  // mean abs change in standardized space
  ChainInit init = ChainInit::Gaussian;
  std::optional<InfusionMethod> infusion;
  int k_clusters = 3;
  std::uint64_t seed = 0;
  /// Caps M * N * (#variables) regressor fits; protects desk-scale runs.
  std::uint64_t fit_budget = 2'000'000;

  void validate() const;
};

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The trained artifact of fit_transform: the frozen per-variable chain models
/// from each chain's final iteration, plus everything needed to impute unseen
/// test data the same way.
struct ImputationModel {
  MiceConfig config;
  std::vector<std::string> column_names;
  StandardizationParams standardization;
  Vector init_fill;     // standardized-space column means of observed cells
  Vector cluster_fill;  // standardized-space column medians (clustering pre-fill)
  std::optional<ClusterModel> cluster;
  // chains[m][j] is the model for variable j in chain m
  std::vector<std::vector<std::unique_ptr<RegressorModel>>> chains;
  std::vector<std::vector<double>> convergence_traces;  // per chain

  Eigen::Index n_variables() const {
    return static_cast<Eigen::Index>(column_names.size());
  }
};

struct FitResult {
  ImputationModel model;
  DataMatrix imputed;
};

/// Algorithm: standardize, run M independent chains of N Gibbs sweeps with the
/// configured regressor (bootstrap refit + residual-noise draws emulate the
/// posterior parameter draw), aggregate chains by cell-wise mean, destandardize.
/// Observed cells pass through bit-identically.
FitResult fit_transform(const DataMatrix& train, const MiceConfig& cfg);

/// Deterministic imputation of unseen data with the frozen chain models:
/// no refitting and no sampling noise at transform time.
DataMatrix transform(const ImputationModel& model, const DataMatrix& test);

/// Versioned JSON snapshot of a trained model.
void save_model(const ImputationModel& model, const std::string& path);
ImputationModel load_model(const std::string& path);

}  // namespace mvi
