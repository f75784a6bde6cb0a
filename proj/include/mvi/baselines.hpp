#pragma once

#include <cstdint>
#include <string>

#include "mvi/data.hpp"

namespace mvi {

enum class BaselineKind { Median, KNN, IterativeSVD, MatrixFactorization };

std::string to_string(BaselineKind k);
BaselineKind baseline_kind_from_string(const std::string& s);

struct BaselineParams {
  BaselineKind kind = BaselineKind::Median;
  int k_neighbors = 5;
  int svd_rank = 10;         // capped at d - 1 by impute_baseline
  int svd_max_iter = 100;
  double svd_tol = 1e-4;
  int mf_rank = 8;           // capped at d - 1
  double mf_l2 = 0.1;
  int mf_max_iter = 200;
  double mf_tol = 1e-4;
};

struct BaselineResult {
  DataMatrix imputed;
  bool converged = true;  // false when an iterative method hit max_iter
};

/// Transductive single-matrix imputation; observed cells always pass through.
BaselineResult impute_baseline(const DataMatrix& data,
                               const BaselineParams& params,
                               std::uint64_t seed);

}  // namespace mvi
