#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvi/amputate.hpp"
#include "mvi/baselines.hpp"
#include "mvi/data.hpp"
#include "mvi/evaluate.hpp"
#include "mvi/mice.hpp"

namespace mvi {

/// One imputation model in an experiment grid: either a MICE variant or a
/// non-MICE baseline. `display_name` is derived (e.g. "lr-mice+mcmv", "knn").
struct ModelSpec {
  bool is_mice = true;
  RegressorKind regressor = RegressorKind::Ridge;
  std::optional<InfusionMethod> infusion;
  BaselineKind baseline = BaselineKind::Median;
  std::string display_name;
};

struct DatasetRegistryEntry {
  std::string name;
  std::string default_file;
  Eigen::Index expected_rows = -1;  // -1 = unchecked
  Eigen::Index expected_cols = -1;
  std::string target_column;
  std::uint64_t checksum = 0;  // FNV-1a 64 of file bytes; 0 = unchecked
};

/// Parses a model grid name, e.g. "lr-mice", "gb-mice+mcmv", "knn".
ModelSpec parse_model(const std::string& name);

const std::vector<DatasetRegistryEntry>& dataset_registry();
std::uint64_t fnv1a_file(const std::string& path);

/// Loaded dataset with the classification target split off the feature table.
struct Dataset {
  std::string name;
  DataMatrix features;          // complete, target column removed
  std::vector<double> target;   // empty when no target column configured
};

Dataset load_dataset(const std::string& name_or_path,
                     const std::string& target_column,
                     const std::string& data_dir);

struct ExperimentConfig {
  std::string dataset;        // registry name or CSV path
  std::string target_column;  // resolved from the registry when empty
  std::vector<MissingKind> types;
  std::vector<int> rates_percent;
  std::vector<ModelSpec> models;
  SplitSpec split;
  std::uint64_t seed = 0;
  MiceConfig mice;  // shared MICE settings (regressor/infusion set per model)
  BaselineParams baseline;  // shared baseline settings (kind set per model)
  int k_clusters = 3;
  bool evaluate_classification = false;
  std::string data_dir = "data";

  static ExperimentConfig from_json_file(const std::string& path);
};

struct SweepOutcome {
  SweepTable table;
  int skipped = 0;   // cells restored from an existing manifest
  bool partial = false;
};

/// Runs the (type, rate, model) grid: amputate train and test splits from
/// complete data, fit on train, transform test, score both against ground
/// truth, optionally run downstream classification. Writes sweep_table.csv,
/// sweep_table.json and manifest.json under out_dir. Completed cells recorded
/// in an existing manifest are skipped unless force is set.
SweepOutcome run_sweep(const ExperimentConfig& cfg, const std::string& out_dir,
                       int jobs, bool force);

/// Renders Markdown NRMSE/accuracy tables plus per-model plot series
/// (rate, nrmse) from a sweep output directory. Returns false when the table
/// has gaps (rendered with explicit blanks).
bool emit_report(const std::string& sweep_dir, const std::string& out_dir);

SweepTable read_sweep_table(const std::string& csv_path);
void write_sweep_table(const SweepTable& table, const std::string& csv_path,
                       const std::string& json_path);

}  // namespace mvi
