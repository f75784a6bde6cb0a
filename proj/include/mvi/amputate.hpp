#pragma once

#include <cstdint>
#include <string>

#include "mvi/data.hpp"

namespace mvi {

enum class MissingKind { MCAR, MAR, MNAR };

std::string to_string(MissingKind k);
MissingKind missing_kind_from_string(const std::string& s);

struct MissingnessSpec {
  MissingKind kind = MissingKind::MCAR;
  double rate = 0.1;  // fraction of all n*d cells to remove, in (0, 0.95]
  std::uint64_t seed = 0;
};

/// Removes exactly round(n*d*rate) cells from a complete matrix.
///  - MCAR: cells uniform over all positions.
///  - MNAR: per-feature, cells whose own value lies in the feature's tails
///    (strictly below the rate/2 percentile or above the 1 - rate/2 one).
///  - MAR: per-feature, cells whose seeded donor feature's value lies in the
///    donor's tails.
/// Per-column budgets for MNAR/MAR split the total evenly, remainder to the
/// first columns; short eligible sets are topped up nearest-to-the-tail first.
DataMatrix amputate(const DataMatrix& complete, const MissingnessSpec& spec);

/// Number of distinct row patterns of the response indicator.
std::size_t count_unique_missing_patterns(const Mask& mask);

/// Percentile in [0,100] with linear interpolation between order statistics.
double percentile(std::vector<double> sorted_or_not, double pct);

}  // namespace mvi
