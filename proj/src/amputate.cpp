#include "mvi/amputate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "mvi/rng.hpp"

namespace mvi {

std::string to_string(MissingKind k) {
  switch (k) {
    case MissingKind::MCAR: return "mcar";
    case MissingKind::MAR: return "mar";
    case MissingKind::MNAR: return "mnar";
  }
  return "?";
}

MissingKind missing_kind_from_string(const std::string& s) {
  if (s == "mcar" || s == "MCAR") return MissingKind::MCAR;
  if (s == "mar" || s == "MAR") return MissingKind::MAR;
  if (s == "mnar" || s == "MNAR") return MissingKind::MNAR;
  throw ConfigError("unknown missingness kind: " + s);
}

double percentile(std::vector<double> v, double pct) {
  if (v.empty()) throw DataError("percentile of empty set");
  std::sort(v.begin(), v.end());
  const double rank = pct / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  if (lo == hi) return v[lo];
  const double frac = rank - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

namespace {

/// Per-column removal budgets: even split, remainder to the first columns.
std::vector<Eigen::Index> column_budgets(Eigen::Index total, Eigen::Index d) {
  std::vector<Eigen::Index> b(static_cast<std::size_t>(d), total / d);
  for (Eigen::Index j = 0; j < total % d; ++j) ++b[static_cast<std::size_t>(j)];
  return b;
}

struct Tails {
  double low;
  double high;
  bool in_tails(double v) const { return v < low || v > high; }
  double distance(double v) const {
    return std::min(std::abs(v - low), std::abs(v - high));
  }
};

Tails column_tails(const Matrix& values, Eigen::Index col, double rate) {
  std::vector<double> v(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    v[static_cast<std::size_t>(i)] = values(i, col);
  const double low_pct = rate / 2.0 * 100.0;
  return Tails{percentile(v, low_pct), percentile(v, 100.0 - low_pct)};
}

/// Picks `budget` rows for one column: uniformly from the eligible set when it
/// is large enough, otherwise all of it plus the nearest-to-tail ineligible
/// rows. `key` maps a row to the value the tail test was applied to.
template <typename Key>
std::vector<Eigen::Index> pick_rows(const std::vector<Eigen::Index>& eligible,
                                    Eigen::Index n, Eigen::Index budget,
                                    const Tails& tails, Key key, Rng& rng) {
  std::vector<Eigen::Index> chosen;
  if (static_cast<Eigen::Index>(eligible.size()) >= budget) {
    std::vector<Eigen::Index> pool = eligible;
    rng.shuffle(pool);
    chosen.assign(pool.begin(), pool.begin() + budget);
  } else {
    chosen = eligible;
    std::vector<std::uint8_t> taken(static_cast<std::size_t>(n), 0);
    for (auto r : chosen) taken[static_cast<std::size_t>(r)] = 1;
    std::vector<std::pair<double, Eigen::Index>> rest;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!taken[static_cast<std::size_t>(i)])
        rest.emplace_back(tails.distance(key(i)), i);
    std::sort(rest.begin(), rest.end());
    for (const auto& [dist, row] : rest) {
      if (static_cast<Eigen::Index>(chosen.size()) == budget) break;
      chosen.push_back(row);
    }
  }
  return chosen;
}

}  // namespace

DataMatrix amputate(const DataMatrix& complete, const MissingnessSpec& spec) {
  if (!(spec.rate > 0.0 && spec.rate <= 0.95))
    throw ConfigError("missing rate must lie in (0, 0.95]");
  if (complete.n_missing() != 0)
    throw DataError("amputate requires a complete matrix");
  const Eigen::Index n = complete.rows();
  const Eigen::Index d = complete.cols();
  if (spec.kind == MissingKind::MAR && d < 2)
    throw ConfigError("MAR needs at least 2 features (no donor exists)");

  const auto total = static_cast<Eigen::Index>(
      std::llround(static_cast<double>(n * d) * spec.rate));
  DataMatrix out = complete;
  if (total == 0) return out;

  auto erase_cell = [&](Eigen::Index i, Eigen::Index j) {
    out.mask(i, j) = 0;
    out.values(i, j) = std::numeric_limits<double>::quiet_NaN();
  };

  if (spec.kind == MissingKind::MCAR) {
    std::vector<Eigen::Index> cells(static_cast<std::size_t>(n * d));
    std::iota(cells.begin(), cells.end(), 0);
    Rng rng(derive_seed(spec.seed, "amputate_mcar"));
    rng.shuffle(cells);
    for (Eigen::Index c = 0; c < total; ++c)
      erase_cell(cells[static_cast<std::size_t>(c)] / d,
                 cells[static_cast<std::size_t>(c)] % d);
    return out;
  }

  const auto budgets = column_budgets(total, d);
  for (Eigen::Index col = 0; col < d; ++col) {
    const Eigen::Index budget =
        std::min<Eigen::Index>(budgets[static_cast<std::size_t>(col)], n);
    if (budget == 0) continue;
    Rng rng(derive_seed(spec.seed, "amputate_col",
                        {static_cast<std::uint64_t>(spec.kind == MissingKind::MAR),
                         static_cast<std::uint64_t>(col)}));

    Eigen::Index test_col = col;
    if (spec.kind == MissingKind::MAR) {
      // one donor per target feature, seeded uniform over the other d-1
      Eigen::Index donor = static_cast<Eigen::Index>(rng.next_below(
          static_cast<std::uint64_t>(d - 1)));
      if (donor >= col) ++donor;
      test_col = donor;
    }
    const Tails tails = column_tails(complete.values, test_col, spec.rate);
    std::vector<Eigen::Index> eligible;
    for (Eigen::Index i = 0; i < n; ++i)
      if (tails.in_tails(complete.values(i, test_col))) eligible.push_back(i);

    const auto rows = pick_rows(
        eligible, n, budget, tails,
        [&](Eigen::Index i) { return complete.values(i, test_col); }, rng);
    for (auto r : rows) erase_cell(r, col);
  }
  return out;
}

std::size_t count_unique_missing_patterns(const Mask& mask) {
  std::set<std::vector<std::uint8_t>> patterns;
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    std::vector<std::uint8_t> row(static_cast<std::size_t>(mask.cols()));
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      row[static_cast<std::size_t>(j)] = mask(i, j);
    patterns.insert(std::move(row));
  }
  return patterns.size();
}

}  // namespace mvi
