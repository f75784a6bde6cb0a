#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvi/data.hpp"

namespace mvi {

struct ClusterModel {
  int k = 0;
  Matrix centroids;                   // k x d
  std::vector<int> assignments;      // length n, labels in [0, k)
  double sse = 0.0;
  std::vector<double> sse_trace;     // per Lloyd iteration, non-increasing

  /// Nearest centroid by squared Euclidean distance; ties -> lowest index.
  int assign_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

enum class InfusionMethod { Label, BinaryEncoded, MCMV };

std::string to_string(InfusionMethod m);
InfusionMethod infusion_from_string(const std::string& s);  // "one-hot" alias

/// Lloyd iterations from k-means++ seeding until assignment fixpoint or 300
/// iterations. Emptied clusters are re-seeded from the farthest point.
ClusterModel kmeans(const Matrix& X, int k, std::uint64_t seed);

/// k maximizing the mean silhouette coefficient; ties (within 1e-12) -> smaller k.
int select_k(const Matrix& X, const std::vector<int>& k_candidates,
             std::uint64_t seed);

double mean_silhouette(const Matrix& X, const std::vector<int>& assignments,
                       int k);

/// Number of appended columns for a method at cluster count k.
Eigen::Index infusion_width(InfusionMethod method, int k);

/// Appends cluster-derived feature columns; the original d columns are
/// bit-identical in the result.
Matrix infuse(const Matrix& X, const ClusterModel& model, InfusionMethod method);

/// Same append, driven by explicit per-row cluster labels (used at transform
/// time when rows are assigned to frozen centroids).
Matrix infuse_labels(const Matrix& X, const std::vector<int>& labels,
                     const ClusterModel& model, InfusionMethod method);

}  // namespace mvi
