#include "mvi/data.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "mvi/rng.hpp"

namespace mvi {

namespace {
constexpr double kMissingSentinel = std::numeric_limits<double>::quiet_NaN();
}

DataMatrix DataMatrix::complete(Matrix m) {
  DataMatrix d;
  d.mask = Mask::Ones(m.rows(), m.cols());
  d.values = std::move(m);
  d.column_names.resize(static_cast<std::size_t>(d.values.cols()));
  for (Eigen::Index j = 0; j < d.values.cols(); ++j)
    d.column_names[static_cast<std::size_t>(j)] = "x" + std::to_string(j);
  return d;
}

void DataMatrix::validate() const {
  if (values.rows() != mask.rows() || values.cols() != mask.cols())
    throw DataError("mask shape does not match values");
  if (static_cast<Eigen::Index>(column_names.size()) != values.cols())
    throw DataError("column name count does not match values");
  for (Eigen::Index j = 0; j < values.cols(); ++j)
    for (Eigen::Index i = 0; i < values.rows(); ++i)
      if (mask(i, j) != 0 && !std::isfinite(values(i, j)))
        throw DataError("non-finite observed cell at (" + std::to_string(i) +
                        "," + std::to_string(j) + ")");
}

std::pair<DataMatrix, DataMatrix> split_train_test(const DataMatrix& data,
                                                   const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0,1)");
  if (data.rows() < 2) throw ConfigError("need at least 2 rows to split");

  const Eigen::Index n = data.rows();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(spec.seed, "split"));
  rng.shuffle(idx);

  const auto n_train = static_cast<Eigen::Index>(
      std::floor(static_cast<double>(n) * spec.train_fraction));

  auto take = [&](Eigen::Index begin, Eigen::Index count) {
    DataMatrix out;
    out.values.resize(count, data.cols());
    out.mask.resize(count, data.cols());
    out.column_names = data.column_names;
    for (Eigen::Index r = 0; r < count; ++r) {
      const Eigen::Index src = idx[static_cast<std::size_t>(begin + r)];
      out.values.row(r) = data.values.row(src);
      out.mask.row(r) = data.mask.row(src);
    }
    return out;
  };
  return {take(0, n_train), take(n_train, n - n_train)};
}

StandardizationParams standardize_fit(const DataMatrix& train) {
  const Eigen::Index d = train.cols();
  StandardizationParams p;
  p.means.resize(d);
  p.stds.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
      if (!train.observed(i, j)) continue;
      sum += train.values(i, j);
      ++count;
    }
    if (count == 0)
      throw UnimputableColumnError(
          "column '" + train.column_names[static_cast<std::size_t>(j)] +
          "' has no observed cells");
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
      if (!train.observed(i, j)) continue;
      const double dlt = train.values(i, j) - mean;
      ss += dlt * dlt;
    }
    double sd = std::sqrt(ss / static_cast<double>(count));
    if (!(sd > 0.0)) sd = 1.0;  // zero-variance column: standardize is a shift
    p.means(j) = mean;
    p.stds(j) = sd;
  }
  return p;
}

DataMatrix standardize_apply(const DataMatrix& data,
                             const StandardizationParams& p) {
  if (data.cols() != p.means.size())
    throw ShapeError("standardization params do not match column count");
  DataMatrix out = data;
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      out.values(i, j) = data.observed(i, j)
                             ? (data.values(i, j) - p.means(j)) / p.stds(j)
                             : kMissingSentinel;
  return out;
}

DataMatrix destandardize(const DataMatrix& data, const StandardizationParams& p) {
  if (data.cols() != p.means.size())
    throw ShapeError("standardization params do not match column count");
  DataMatrix out = data;
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      out.values(i, j) = data.observed(i, j)
                             ? data.values(i, j) * p.stds(j) + p.means(j)
                             : kMissingSentinel;
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (quoted) {
      if (c == '"')
        quoted = false;
      else
        field.push_back(c);
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan";
}

}  // namespace

DataMatrix read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV file: " + path);
  DataMatrix out;
  out.column_names = split_csv_line(line);
  const auto d = static_cast<Eigen::Index>(out.column_names.size());

  std::vector<std::vector<double>> rows;
  std::vector<std::vector<std::uint8_t>> masks;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (static_cast<Eigen::Index>(fields.size()) != d)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected " + std::to_string(d) + " fields, got " +
                      std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    std::vector<std::uint8_t> obs(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (is_missing_token(fields[j])) {
        row[j] = kMissingSentinel;
        obs[j] = 0;
      } else {
        std::size_t pos = 0;
        double v;
        try {
          v = std::stod(fields[j], &pos);
        } catch (const std::exception&) {
          throw DataError(path + ":" + std::to_string(lineno) +
                          ": not a number: '" + fields[j] + "'");
        }
        if (pos != fields[j].size())
          throw DataError(path + ":" + std::to_string(lineno) +
                          ": trailing characters in '" + fields[j] + "'");
        row[j] = v;
        obs[j] = 1;
      }
    }
    rows.push_back(std::move(row));
    masks.push_back(std::move(obs));
  }
  if (rows.empty()) throw DataError("CSV has no data rows: " + path);

  out.values.resize(static_cast<Eigen::Index>(rows.size()), d);
  out.mask.resize(static_cast<Eigen::Index>(rows.size()), d);
  for (Eigen::Index i = 0; i < out.values.rows(); ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      out.values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      out.mask(i, j) = masks[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  out.validate();
  return out;
}

namespace {
void write_header(std::ofstream& out, const std::vector<std::string>& names) {
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j) out << ',';
    const bool quote = names[j].find(',') != std::string::npos ||
                       names[j].find('"') != std::string::npos;
    if (quote)
      out << '"' << names[j] << '"';
    else
      out << names[j];
  }
  out << '\n';
}
}  // namespace

void write_csv(const DataMatrix& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write CSV file: " + path);
  write_header(out, data.column_names);
  out.precision(17);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      if (j) out << ',';
      if (data.observed(i, j)) out << data.values(i, j);
      // missing cells are written as empty fields
    }
    out << '\n';
  }
}

void write_mask_csv(const DataMatrix& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write mask CSV file: " + path);
  write_header(out, data.column_names);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      if (j) out << ',';
      out << (data.observed(i, j) ? 1 : 0);
    }
    out << '\n';
  }
}

Mask read_mask_csv(const std::string& path) {
  const DataMatrix parsed = read_csv(path);
  Mask mask(parsed.rows(), parsed.cols());
  for (Eigen::Index j = 0; j < parsed.cols(); ++j)
    for (Eigen::Index i = 0; i < parsed.rows(); ++i) {
      const double v = parsed.values(i, j);
      if (!parsed.observed(i, j) || (v != 0.0 && v != 1.0))
        throw DataError("mask CSV must contain only 0/1 flags: " + path);
      mask(i, j) = static_cast<std::uint8_t>(v);
    }
  return mask;
}

}  // namespace mvi
