#include "mvi/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvi/rng.hpp"

namespace mvi {

std::string to_string(InfusionMethod m) {
  switch (m) {
    case InfusionMethod::Label: return "label";
    case InfusionMethod::BinaryEncoded: return "binary";
    case InfusionMethod::MCMV: return "mcmv";
  }
  return "?";
}

InfusionMethod infusion_from_string(const std::string& s) {
  if (s == "label") return InfusionMethod::Label;
  if (s == "binary" || s == "one-hot" || s == "onehot")
    return InfusionMethod::BinaryEncoded;
  if (s == "mcmv" || s == "MCMV") return InfusionMethod::MCMV;
  throw ConfigError("unknown infusion method: " + s);
}

int ClusterModel::assign_row(
    const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int best = 0;
  double best_d = (x - centroids.row(0)).squaredNorm();
  for (int p = 1; p < k; ++p) {
    const double dist = (x - centroids.row(p)).squaredNorm();
    if (dist < best_d) {
      best_d = dist;
      best = p;
    }
  }
  return best;
}

namespace {

double compute_sse(const Matrix& X, const Matrix& centroids,
                   const std::vector<int>& assignments) {
  double sse = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    sse += (X.row(i) - centroids.row(assignments[static_cast<std::size_t>(i)]))
               .squaredNorm();
  return sse;
}

Matrix kmeanspp_seed(const Matrix& X, int k, Rng& rng) {
  const Eigen::Index n = X.rows();
  Matrix centroids(k, X.cols());
  centroids.row(0) = X.row(static_cast<Eigen::Index>(
      rng.next_below(static_cast<std::uint64_t>(n))));
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i)
    d2(i) = (X.row(i) - centroids.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = rng.next_double() * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= d2(i);
        if (target <= 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(
          rng.next_below(static_cast<std::uint64_t>(n)));
    }
    centroids.row(c) = X.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      d2(i) = std::min(d2(i), (X.row(i) - centroids.row(c)).squaredNorm());
  }
  return centroids;
}

}  // namespace

ClusterModel kmeans(const Matrix& X, int k, std::uint64_t seed) {
  const Eigen::Index n = X.rows();
  if (k < 2) throw ConfigError("k must be >= 2");
  if (static_cast<Eigen::Index>(k) > n)
    throw ConfigError("k exceeds the number of samples");

  Rng rng(derive_seed(seed, "kmeans", {static_cast<std::uint64_t>(k)}));
  ClusterModel model;
  model.k = k;
  model.centroids = kmeanspp_seed(X, k, rng);
  model.assignments.assign(static_cast<std::size_t>(n), 0);

  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = model.assign_row(X.row(i));
      if (a != model.assignments[static_cast<std::size_t>(i)]) {
        model.assignments[static_cast<std::size_t>(i)] = a;
        changed = true;
      }
    }
    // centroid update; emptied clusters re-seed from the farthest point
    Matrix sums = Matrix::Zero(k, X.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(model.assignments[static_cast<std::size_t>(i)]) += X.row(i);
      ++counts[static_cast<std::size_t>(
          model.assignments[static_cast<std::size_t>(i)])];
    }
    for (int p = 0; p < k; ++p) {
      if (counts[static_cast<std::size_t>(p)] > 0) {
        model.centroids.row(p) =
            sums.row(p) / static_cast<double>(counts[static_cast<std::size_t>(p)]);
      } else {
        Eigen::Index far = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double dist =
              (X.row(i) -
               model.centroids.row(model.assignments[static_cast<std::size_t>(i)]))
                  .squaredNorm();
          if (dist > far_d) {
            far_d = dist;
            far = i;
          }
        }
        model.centroids.row(p) = X.row(far);
        changed = true;
      }
    }
    model.sse_trace.push_back(
        compute_sse(X, model.centroids, model.assignments));
    if (!changed && iter > 0) break;
  }
  // final assignment pass so stored labels match the returned centroids
  for (Eigen::Index i = 0; i < n; ++i)
    model.assignments[static_cast<std::size_t>(i)] = model.assign_row(X.row(i));
  model.sse = compute_sse(X, model.centroids, model.assignments);
  return model;
}

double mean_silhouette(const Matrix& X, const std::vector<int>& assignments,
                       int k) {
  const Eigen::Index n = X.rows();
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
  for (auto a : assignments) ++counts[static_cast<std::size_t>(a)];

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int own = assignments[static_cast<std::size_t>(i)];
    std::vector<double> dist_sum(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      dist_sum[static_cast<std::size_t>(assignments[static_cast<std::size_t>(j)])] +=
          (X.row(i) - X.row(j)).norm();
    }
    if (counts[static_cast<std::size_t>(own)] <= 1) continue;  // s(i) = 0
    const double a =
        dist_sum[static_cast<std::size_t>(own)] /
        static_cast<double>(counts[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int p = 0; p < k; ++p) {
      if (p == own || counts[static_cast<std::size_t>(p)] == 0) continue;
      b = std::min(b, dist_sum[static_cast<std::size_t>(p)] /
                          static_cast<double>(counts[static_cast<std::size_t>(p)]));
    }
    if (std::isfinite(b) && std::max(a, b) > 0.0)
      total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

int select_k(const Matrix& X, const std::vector<int>& k_candidates,
             std::uint64_t seed) {
  if (k_candidates.empty()) throw ConfigError("empty k candidate set");
  std::vector<int> sorted(k_candidates);
  std::sort(sorted.begin(), sorted.end());
  int best_k = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k : sorted) {
    if (k < 2 || static_cast<Eigen::Index>(k) > X.rows() - 1)
      throw ConfigError("k candidate " + std::to_string(k) + " out of range");
    const ClusterModel model = kmeans(X, k, seed);
    const double score = mean_silhouette(X, model.assignments, k);
    if (score > best_score + 1e-12) {  // ties go to the smaller k
      best_score = score;
      best_k = k;
    }
  }
  return best_k;
}

Eigen::Index infusion_width(InfusionMethod method, int k) {
  if (k < 2) throw ConfigError("infusion requires k >= 2");
  if (method == InfusionMethod::BinaryEncoded) {
    Eigen::Index bits = 0;
    while ((1 << bits) < k) ++bits;
    return bits;  // ceil(log2 k)
  }
  return 1;
}

Matrix infuse_labels(const Matrix& X, const std::vector<int>& labels,
                     const ClusterModel& model, InfusionMethod method) {
  if (static_cast<std::size_t>(X.rows()) != labels.size())
    throw ShapeError("label count does not match row count");
  const Eigen::Index extra = infusion_width(method, model.k);
  Matrix out(X.rows(), X.cols() + extra);
  out.leftCols(X.cols()) = X;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    switch (method) {
      case InfusionMethod::Label:
        out(i, X.cols()) = static_cast<double>(c);
        break;
      case InfusionMethod::BinaryEncoded:
        for (Eigen::Index b = 0; b < extra; ++b)  // most significant bit first
          out(i, X.cols() + b) =
              static_cast<double>((c >> (extra - 1 - b)) & 1);
        break;
      case InfusionMethod::MCMV:
        out(i, X.cols()) = model.centroids.row(c).squaredNorm();
        break;
    }
  }
  return out;
}

Matrix infuse(const Matrix& X, const ClusterModel& model, InfusionMethod method) {
  if (static_cast<std::size_t>(X.rows()) != model.assignments.size())
    throw ShapeError("cluster assignments do not cover all rows");
  return infuse_labels(X, model.assignments, model, method);
}

}  // namespace mvi
