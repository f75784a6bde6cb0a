#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mvi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Response indicator R: 1 = observed, 0 = missing.
using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// A column with zero observed cells cannot be standardized or imputed.
struct UnimputableColumnError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// n x d real table paired with its response indicator. Missing cells hold
/// NaN as a debugging aid, but the mask is authoritative: cell values are
/// never interpreted to decide missingness.
struct DataMatrix {
  Matrix values;
  Mask mask;
  std::vector<std::string> column_names;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  bool observed(Eigen::Index i, Eigen::Index j) const { return mask(i, j) != 0; }

  std::size_t n_missing() const {
    std::size_t c = 0;
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      for (Eigen::Index i = 0; i < mask.rows(); ++i)
        if (mask(i, j) == 0) ++c;
    return c;
  }

  /// Fully observed matrix with default column names.
  static DataMatrix complete(Matrix m);

  /// Mask/value consistency and finiteness of observed cells; throws DataError.
  void validate() const;
};

struct StandardizationParams {
  Vector means;
  Vector stds;  // > 0; zero-variance columns are forced to 1
};

struct SplitSpec {
  double train_fraction = 0.70;
  std::uint64_t seed = 0;
};

/// Row-wise random partition with floor(n * train_fraction) training rows.
std::pair<DataMatrix, DataMatrix> split_train_test(const DataMatrix& data,
                                                   const SplitSpec& spec);

/// Per-column mean/std over observed training cells only (population std).
StandardizationParams standardize_fit(const DataMatrix& train);

/// (x - mean) / std on observed cells; missing cells stay missing.
DataMatrix standardize_apply(const DataMatrix& data,
                             const StandardizationParams& p);

/// Exact inverse of standardize_apply.
DataMatrix destandardize(const DataMatrix& data, const StandardizationParams& p);

/// CSV with a header row; empty fields and the literal "NA" parse as missing.
DataMatrix read_csv(const std::string& path);
void write_csv(const DataMatrix& data, const std::string& path);

/// Mask CSV of 0/1 flags with the same header.
void write_mask_csv(const DataMatrix& data, const std::string& path);
Mask read_mask_csv(const std::string& path);

}  // namespace mvi
