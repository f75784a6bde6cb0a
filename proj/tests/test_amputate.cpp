#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "mvi/amputate.hpp"
#include "mvi/rng.hpp"

using namespace mvi;

namespace {

DataMatrix random_complete(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = rng.next_normal();
  return DataMatrix::complete(std::move(m));
}

std::vector<double> column_of(const DataMatrix& data, Eigen::Index j) {
  std::vector<double> v(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    v[static_cast<std::size_t>(i)] = data.values(i, j);
  return v;
}

bool in_tails(double value, const std::vector<double>& column, double rate) {
  const double lo = percentile(column, rate / 2.0 * 100.0);
  const double hi = percentile(column, 100.0 - rate / 2.0 * 100.0);
  return value < lo || value > hi;
}

/// True when some single donor column j != target explains every masked row
/// of the target: donor value in the donor's tails.
bool mar_donor_exists(const DataMatrix& original, const Mask& mask,
                      Eigen::Index target, double rate) {
  std::vector<Eigen::Index> masked_rows;
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    if (mask(i, target) == 0) masked_rows.push_back(i);
  if (masked_rows.empty()) return true;
  for (Eigen::Index j = 0; j < original.cols(); ++j) {
    if (j == target) continue;
    const auto donor = column_of(original, j);
    const bool all = std::all_of(
        masked_rows.begin(), masked_rows.end(), [&](Eigen::Index i) {
          return in_tails(original.values(i, j), donor, rate);
        });
    if (all) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("percentile uses linear interpolation between order statistics") {
  std::vector<double> v{1, 2, 3, 4};
  CHECK(percentile(v, 0) == 1.0);
  CHECK(percentile(v, 100) == 4.0);
  CHECK(percentile(v, 50) == doctest::Approx(2.5));
  CHECK(percentile(v, 25) == doctest::Approx(1.75));
}

TEST_CASE("a rate rounding to zero cells returns the input unchanged") {
  const DataMatrix data = random_complete(3, 3, 1);
  MissingnessSpec spec;
  spec.rate = 0.05;  // round(9 * 0.05) = 0
  const DataMatrix out = amputate(data, spec);
  CHECK(out.values == data.values);
  CHECK(out.n_missing() == 0);
}

TEST_CASE("mcar removes exactly round(n*d*rate) cells") {
  const DataMatrix data = random_complete(10, 5, 2);
  MissingnessSpec spec;
  spec.kind = MissingKind::MCAR;
  spec.rate = 0.2;
  const DataMatrix out = amputate(data, spec);
  CHECK(out.n_missing() == 10);  // 10 * 5 * 0.2
}

TEST_CASE("mnar masks only tail values of each column") {
  Matrix m(100, 1);
  for (int i = 0; i < 100; ++i) m(i, 0) = i + 1;  // 1..100
  MissingnessSpec spec;
  spec.kind = MissingKind::MNAR;
  spec.rate = 0.2;
  spec.seed = 5;
  const DataMatrix out = amputate(DataMatrix::complete(m), spec);
  CHECK(out.n_missing() == 20);
  for (int i = 0; i < 100; ++i)
    if (out.mask(i, 0) == 0) {
      const double v = m(i, 0);
      CHECK((v <= 10.0 || v >= 91.0));
    }
}

TEST_CASE("amputation is deterministic per spec") {
  const DataMatrix data = random_complete(30, 4, 3);
  for (auto kind : {MissingKind::MCAR, MissingKind::MAR, MissingKind::MNAR}) {
    MissingnessSpec spec;
    spec.kind = kind;
    spec.rate = 0.3;
    spec.seed = 17;
    const DataMatrix a = amputate(data, spec);
    const DataMatrix b = amputate(data, spec);
    CHECK(a.mask == b.mask);
  }
}

TEST_CASE("exact count, tail and donor properties across types and rates") {
  const DataMatrix data = random_complete(120, 6, 4);
  for (auto kind : {MissingKind::MCAR, MissingKind::MAR, MissingKind::MNAR}) {
    for (double rate : {0.05, 0.2, 0.5, 0.8}) {
      MissingnessSpec spec;
      spec.kind = kind;
      spec.rate = rate;
      spec.seed = 21;
      const DataMatrix out = amputate(data, spec);
      const auto expected = static_cast<std::size_t>(
          std::llround(120 * 6 * rate));
      CHECK(out.n_missing() == expected);

      if (kind == MissingKind::MNAR) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) {
          const auto col = column_of(data, j);
          for (Eigen::Index i = 0; i < data.rows(); ++i)
            if (out.mask(i, j) == 0)
              CHECK(in_tails(data.values(i, j), col, rate));
        }
      }
      if (kind == MissingKind::MAR) {
        for (Eigen::Index j = 0; j < data.cols(); ++j)
          CHECK(mar_donor_exists(data, out.mask, j, rate));
      }
    }
  }
}

TEST_CASE("invalid specs are rejected") {
  const DataMatrix data = random_complete(10, 3, 6);
  MissingnessSpec spec;
  spec.rate = 0.0;
  CHECK_THROWS_AS(amputate(data, spec), ConfigError);
  spec.rate = 0.96;
  CHECK_THROWS_AS(amputate(data, spec), ConfigError);

  spec.rate = 0.2;
  spec.kind = MissingKind::MAR;
  const DataMatrix single = random_complete(10, 1, 7);
  CHECK_THROWS_AS(amputate(single, spec), ConfigError);

  DataMatrix holey = random_complete(10, 3, 8);
  holey.mask(0, 0) = 0;
  spec.kind = MissingKind::MCAR;
  CHECK_THROWS_AS(amputate(holey, spec), DataError);
}

TEST_CASE("pattern counting") {
  Mask none = Mask::Ones(4, 3);
  CHECK(count_unique_missing_patterns(none) == 1);

  Mask m(3, 3);
  m << 1, 1, 0, 1, 0, 1, 1, 1, 0;  // {110, 101, 110}
  CHECK(count_unique_missing_patterns(m) == 2);
}

TEST_CASE("mnar produces fewer unique patterns than mcar") {
  // correlated columns (shared factor): tail membership co-occurs across
  // columns, so value-driven missingness repeats row patterns
  Rng rng(9);
  Matrix m(400, 10);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double factor = rng.next_normal();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = factor + 0.3 * rng.next_normal();
  }
  const DataMatrix data = DataMatrix::complete(std::move(m));
  for (double rate : {0.2, 0.4, 0.6}) {
    MissingnessSpec spec;
    spec.rate = rate;
    spec.seed = 31;
    spec.kind = MissingKind::MCAR;
    const auto mcar = count_unique_missing_patterns(amputate(data, spec).mask);
    spec.kind = MissingKind::MNAR;
    const auto mnar = count_unique_missing_patterns(amputate(data, spec).mask);
    CHECK(mnar < mcar);
  }
}
