#include "mvi/baselines.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mvi/rng.hpp"

namespace mvi {

std::string to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::Median: return "median";
    case BaselineKind::KNN: return "knn";
    case BaselineKind::IterativeSVD: return "isvd";
    case BaselineKind::MatrixFactorization: return "mf";
  }
  return "?";
}

BaselineKind baseline_kind_from_string(const std::string& s) {
  if (s == "median") return BaselineKind::Median;
  if (s == "knn") return BaselineKind::KNN;
  if (s == "isvd" || s == "iterative_svd") return BaselineKind::IterativeSVD;
  if (s == "mf" || s == "matrix_factorization")
    return BaselineKind::MatrixFactorization;
  throw ConfigError("unknown baseline kind: " + s);
}

namespace {

Vector column_medians(const DataMatrix& data) {
  Vector medians(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    std::vector<double> v;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      if (data.observed(i, j)) v.push_back(data.values(i, j));
    if (v.empty())
      throw UnimputableColumnError(
          "column '" + data.column_names[static_cast<std::size_t>(j)] +
          "' has no observed cells");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    medians(j) = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  }
  return medians;
}

Vector column_means(const DataMatrix& data) {
  Vector means(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      if (data.observed(i, j)) {
        sum += data.values(i, j);
        ++count;
      }
    if (count == 0)
      throw UnimputableColumnError(
          "column '" + data.column_names[static_cast<std::size_t>(j)] +
          "' has no observed cells");
    means(j) = sum / static_cast<double>(count);
  }
  return means;
}

DataMatrix impute_median(const DataMatrix& data) {
  const Vector medians = column_medians(data);
  DataMatrix out = data;
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      if (!data.observed(i, j)) out.values(i, j) = medians(j);
  out.mask.setOnes();
  return out;
}

/// Euclidean over co-observed columns, rescaled by sqrt(d / #co-observed).
double partial_distance(const DataMatrix& data, Eigen::Index a, Eigen::Index b) {
  double ss = 0.0;
  Eigen::Index co = 0;
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    if (!data.observed(a, j) || !data.observed(b, j)) continue;
    const double d = data.values(a, j) - data.values(b, j);
    ss += d * d;
    ++co;
  }
  if (co == 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(ss * static_cast<double>(data.cols()) /
                   static_cast<double>(co));
}

/// Lexicographic rank of rows over (mask, value) pairs; used to break
/// distance ties independently of input row order.
std::vector<Eigen::Index> canonical_rank(const DataMatrix& data) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      const bool oa = data.observed(a, j), ob = data.observed(b, j);
      if (oa != ob) return oa < ob;
      if (oa && data.values(a, j) != data.values(b, j))
        return data.values(a, j) < data.values(b, j);
    }
    return a < b;
  });
  std::vector<Eigen::Index> rank(order.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    rank[static_cast<std::size_t>(order[i])] = static_cast<Eigen::Index>(i);
  return rank;
}

DataMatrix impute_knn(const DataMatrix& data, int k_neighbors) {
  if (k_neighbors < 1) throw ConfigError("k_neighbors must be >= 1");
  const Vector medians = column_medians(data);
  const auto rank = canonical_rank(data);
  DataMatrix out = data;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    bool any_missing = false;
    for (Eigen::Index j = 0; j < data.cols(); ++j)
      if (!data.observed(i, j)) any_missing = true;
    if (!any_missing) continue;

    std::vector<std::pair<double, Eigen::Index>> neighbors;
    for (Eigen::Index b = 0; b < data.rows(); ++b) {
      if (b == i) continue;
      const double dist = partial_distance(data, i, b);
      if (std::isfinite(dist)) neighbors.emplace_back(dist, b);
    }
    std::sort(neighbors.begin(), neighbors.end(),
              [&](const auto& x, const auto& y) {
                if (x.first != y.first) return x.first < y.first;
                return rank[static_cast<std::size_t>(x.second)] <
                       rank[static_cast<std::size_t>(y.second)];
              });

    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      if (data.observed(i, j)) continue;
      double sum = 0.0;
      int used = 0;
      for (const auto& [dist, b] : neighbors) {
        if (!data.observed(b, j)) continue;
        sum += data.values(b, j);
        if (++used == k_neighbors) break;
      }
      out.values(i, j) = used > 0 ? sum / used : medians(j);
    }
  }
  out.mask.setOnes();
  return out;
}

BaselineResult impute_isvd(const DataMatrix& data, int rank, int max_iter,
                           double tol) {
  const Eigen::Index n = data.rows(), d = data.cols();
  if (rank < 1 || rank > std::min(n, d))
    throw ConfigError("iterative SVD rank out of range");
  const Vector means = column_means(data);
  Matrix filled = data.values;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> missing;
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (!data.observed(i, j)) {
        filled(i, j) = means(j);
        missing.emplace_back(i, j);
      }

  BaselineResult result;
  result.converged = missing.empty();
  for (int iter = 0; iter < max_iter && !missing.empty(); ++iter) {
    Eigen::BDCSVD<Matrix> svd(filled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Matrix recon = svd.matrixU().leftCols(rank) *
                         svd.singularValues().head(rank).asDiagonal() *
                         svd.matrixV().leftCols(rank).transpose();
    double change = 0.0;
    for (const auto& [i, j] : missing) {
      change += std::abs(recon(i, j) - filled(i, j));
      filled(i, j) = recon(i, j);
    }
    if (change / static_cast<double>(missing.size()) <= tol) {
      result.converged = true;
      break;
    }
  }
  result.imputed = data;
  result.imputed.values = filled;
  result.imputed.mask.setOnes();
  return result;
}

BaselineResult impute_mf(const DataMatrix& data, int rank, double l2,
                         int max_iter, double tol, std::uint64_t seed) {
  const Eigen::Index n = data.rows(), d = data.cols();
  if (rank < 1 || rank > std::min(n, d))
    throw ConfigError("matrix factorization rank out of range");
  Rng rng(derive_seed(seed, "mf_init"));
  Matrix U(n, rank), V(d, rank);
  for (Eigen::Index i = 0; i < U.size(); ++i) U(i) = 0.1 * rng.next_normal();
  for (Eigen::Index i = 0; i < V.size(); ++i) V(i) = 0.1 * rng.next_normal();

  std::vector<std::pair<Eigen::Index, Eigen::Index>> missing;
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (!data.observed(i, j)) missing.emplace_back(i, j);

  Vector prev = Vector::Zero(static_cast<Eigen::Index>(missing.size()));
  BaselineResult result;
  result.converged = missing.empty();
  const Matrix reg = l2 * Matrix::Identity(rank, rank);
  for (int iter = 0; iter < max_iter; ++iter) {
    // row half-sweep
    for (Eigen::Index i = 0; i < n; ++i) {
      Matrix a = reg;
      Vector b = Vector::Zero(rank);
      for (Eigen::Index j = 0; j < d; ++j) {
        if (!data.observed(i, j)) continue;
        a.noalias() += V.row(j).transpose() * V.row(j);
        b.noalias() += V.row(j).transpose() * data.values(i, j);
      }
      U.row(i) = a.ldlt().solve(b).transpose();
    }
    // column half-sweep
    for (Eigen::Index j = 0; j < d; ++j) {
      Matrix a = reg;
      Vector b = Vector::Zero(rank);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!data.observed(i, j)) continue;
        a.noalias() += U.row(i).transpose() * U.row(i);
        b.noalias() += U.row(i).transpose() * data.values(i, j);
      }
      V.row(j) = a.ldlt().solve(b).transpose();
    }
    if (missing.empty()) break;
    double change = 0.0;
    for (std::size_t c = 0; c < missing.size(); ++c) {
      const double v = U.row(missing[c].first).dot(V.row(missing[c].second));
      change += std::abs(v - prev(static_cast<Eigen::Index>(c)));
      prev(static_cast<Eigen::Index>(c)) = v;
    }
    if (iter > 0 && change / static_cast<double>(missing.size()) <= tol) {
      result.converged = true;
      break;
    }
  }
  result.imputed = data;
  for (const auto& [i, j] : missing)
    result.imputed.values(i, j) = U.row(i).dot(V.row(j));
  result.imputed.mask.setOnes();
  return result;
}

}  // namespace

BaselineResult impute_baseline(const DataMatrix& data,
                               const BaselineParams& params,
                               std::uint64_t seed) {
  switch (params.kind) {
    case BaselineKind::Median: {
      BaselineResult r;
      r.imputed = impute_median(data);
      return r;
    }
    case BaselineKind::KNN: {
      BaselineResult r;
      r.imputed = impute_knn(data, params.k_neighbors);
      return r;
    }
    case BaselineKind::IterativeSVD:
      return impute_isvd(data, params.svd_rank, params.svd_max_iter,
                         params.svd_tol);
    case BaselineKind::MatrixFactorization:
      return impute_mf(data, params.mf_rank, params.mf_l2, params.mf_max_iter,
                       params.mf_tol, seed);
  }
  throw ConfigError("unknown baseline kind");
}

}  // namespace mvi
