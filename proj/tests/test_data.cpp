#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mvi/data.hpp"

using namespace mvi;

namespace {

DataMatrix iota_matrix(Eigen::Index n, Eigen::Index d) {
  Matrix m(n, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      m(i, j) = static_cast<double>(i * d + j);
  return DataMatrix::complete(std::move(m));
}

}  // namespace

TEST_CASE("split sizes follow floor(n * fraction)") {
  const DataMatrix data = iota_matrix(10, 3);
  SplitSpec spec;
  spec.train_fraction = 0.7;
  spec.seed = 7;
  const auto [train, test] = split_train_test(data, spec);
  CHECK(train.rows() == 7);
  CHECK(test.rows() == 3);
  CHECK(train.cols() == 3);

  const DataMatrix big = iota_matrix(4898, 2);
  const auto [tr, te] = split_train_test(big, spec);
  CHECK(tr.rows() == 3428);  // floor(4898 * 0.7)
  CHECK(te.rows() == 1470);
}

TEST_CASE("split is deterministic and partitions the rows") {
  const DataMatrix data = iota_matrix(23, 2);
  SplitSpec spec;
  spec.seed = 99;
  const auto [a_train, a_test] = split_train_test(data, spec);
  const auto [b_train, b_test] = split_train_test(data, spec);
  CHECK(a_train.values == b_train.values);
  CHECK(a_test.values == b_test.values);

  // every original row appears exactly once across the two halves
  std::vector<double> seen;
  for (Eigen::Index i = 0; i < a_train.rows(); ++i)
    seen.push_back(a_train.values(i, 0));
  for (Eigen::Index i = 0; i < a_test.rows(); ++i)
    seen.push_back(a_test.values(i, 0));
  std::sort(seen.begin(), seen.end());
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    CHECK(seen[static_cast<std::size_t>(i)] == data.values(i, 0));
}

TEST_CASE("split rejects out-of-range fractions") {
  const DataMatrix data = iota_matrix(10, 2);
  SplitSpec spec;
  spec.train_fraction = 1.0;
  CHECK_THROWS_AS(split_train_test(data, spec), ConfigError);
  spec.train_fraction = 0.0;
  CHECK_THROWS_AS(split_train_test(data, spec), ConfigError);
}

TEST_CASE("standardize_fit uses the population convention over observed cells") {
  DataMatrix data;
  data.values.resize(3, 2);
  data.values << 2, 5, 4, 5, 0, 5;
  data.mask.resize(3, 2);
  data.mask << 1, 1, 1, 1, 0, 1;
  data.column_names = {"a", "b"};

  const StandardizationParams p = standardize_fit(data);
  CHECK(p.means(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(p.stds(0) == doctest::Approx(1.0).epsilon(1e-12));  // {2,4}: population
  CHECK(p.means(1) == doctest::Approx(5.0));
  CHECK(p.stds(1) == 1.0);  // constant column falls back to 1
}

TEST_CASE("standardize_fit rejects a fully missing column") {
  DataMatrix data;
  data.values = Matrix::Zero(2, 2);
  data.mask.resize(2, 2);
  data.mask << 1, 0, 1, 0;
  data.column_names = {"ok", "empty"};
  CHECK_THROWS_WITH_AS(standardize_fit(data),
                       doctest::Contains("empty"), UnimputableColumnError);
}

TEST_CASE("standardize_apply examples and mask preservation") {
  StandardizationParams p;
  p.means.resize(1);
  p.stds.resize(1);
  p.means << 3;
  p.stds << 2;

  DataMatrix data;
  data.values.resize(3, 1);
  data.values << 3, 5, 0;
  data.mask.resize(3, 1);
  data.mask << 1, 1, 0;
  data.column_names = {"x"};

  const DataMatrix z = standardize_apply(data, p);
  CHECK(z.values(0, 0) == doctest::Approx(0.0));
  CHECK(z.values(1, 0) == doctest::Approx(1.0));
  CHECK(z.mask(2, 0) == 0);

  const DataMatrix back = destandardize(z, p);
  CHECK(back.values(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(back.values(1, 0) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("destandardize examples") {
  StandardizationParams p;
  p.means.resize(1);
  p.stds.resize(1);
  p.means << 3;
  p.stds << 2;
  DataMatrix z;
  z.values.resize(2, 1);
  z.values << 0, 1;
  z.mask = Mask::Ones(2, 1);
  z.column_names = {"x"};
  const DataMatrix x = destandardize(z, p);
  CHECK(x.values(0, 0) == doctest::Approx(3.0));
  CHECK(x.values(1, 0) == doctest::Approx(5.0));
}

TEST_CASE("standardize round trip is identity within 1e-12 relative") {
  DataMatrix data = iota_matrix(40, 5);
  data.values = data.values.array() * 3.7 - 11.0;
  const StandardizationParams p = standardize_fit(data);
  const DataMatrix round = destandardize(standardize_apply(data, p), p);
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const double denom = std::max(1.0, std::abs(data.values(i, j)));
      CHECK(std::abs(round.values(i, j) - data.values(i, j)) / denom <= 1e-12);
    }
}

TEST_CASE("shape mismatch raises ShapeError") {
  StandardizationParams p;
  p.means = Vector::Zero(3);
  p.stds = Vector::Ones(3);
  const DataMatrix data = iota_matrix(4, 2);
  CHECK_THROWS_AS(standardize_apply(data, p), ShapeError);
  CHECK_THROWS_AS(destandardize(data, p), ShapeError);
}

TEST_CASE("csv round trip keeps values, names and missing cells") {
  DataMatrix data;
  data.values.resize(2, 3);
  data.values << 1.5, 0, -2.25, 3, 0, 1e-7;
  data.mask.resize(2, 3);
  data.mask << 1, 0, 1, 1, 0, 1;
  data.column_names = {"alpha", "beta two", "gamma"};

  const std::string path = "/tmp/mvi_test_roundtrip.csv";
  write_csv(data, path);
  const DataMatrix back = read_csv(path);
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  CHECK(back.column_names == data.column_names);
  CHECK(back.mask == data.mask);
  CHECK(back.values(0, 0) == data.values(0, 0));
  CHECK(back.values(1, 2) == data.values(1, 2));
  std::remove(path.c_str());
}

TEST_CASE("csv parses NA and empty fields as missing, rejects junk") {
  const std::string path = "/tmp/mvi_test_parse.csv";
  {
    std::ofstream f(path);
    f << "a,b\n1,NA\n,2\n";
  }
  const DataMatrix data = read_csv(path);
  CHECK(data.mask(0, 1) == 0);
  CHECK(data.mask(1, 0) == 0);
  CHECK(data.values(0, 0) == 1.0);
  {
    std::ofstream f(path);
    f << "a,b\n1,zebra\n";
  }
  CHECK_THROWS_AS(read_csv(path), DataError);
  std::remove(path.c_str());
}

TEST_CASE("mask csv round trip") {
  DataMatrix data;
  data.values.resize(2, 2);
  data.values << 1, 0, 0, 4;
  data.mask.resize(2, 2);
  data.mask << 1, 0, 0, 1;
  data.column_names = {"a", "b"};
  const std::string path = "/tmp/mvi_test_mask.csv";
  write_mask_csv(data, path);
  CHECK(read_mask_csv(path) == data.mask);
  std::remove(path.c_str());
}

TEST_CASE("validate flags non-finite observed cells") {
  DataMatrix data = iota_matrix(3, 2);
  CHECK_NOTHROW(data.validate());
  data.values(1, 1) = std::nan("");
  CHECK_THROWS_AS(data.validate(), DataError);
}
