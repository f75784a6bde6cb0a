// mvi — missing-value imputation toolkit command line.
//
// Exit codes: 0 complete, 2 partial (sweep cells failed / report has gaps),
// 1 error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mvi/amputate.hpp"
#include "mvi/baselines.hpp"
#include "mvi/data.hpp"
#include "mvi/evaluate.hpp"
#include "mvi/mice.hpp"
#include "mvi/rng.hpp"
#include "mvi/sweep.hpp"

namespace fs = std::filesystem;
using namespace mvi;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
  std::string out = "out";
  bool force = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file");
  cmd->add_option("--seed", c.seed, "master random seed")
      ->each([&c](const std::string&) { c.seed_set = true; });
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_flag("--force", c.force, "recompute cells / overwrite outputs");
}

void ensure_out(const Common& c) { fs::create_directories(c.out); }

void check_overwrite(const Common& c, const std::string& path) {
  if (!c.force && fs::exists(path))
    throw ConfigError(path + " exists; pass --force to overwrite");
}

MiceConfig mice_config_for(const ModelSpec& spec, std::uint64_t seed) {
  MiceConfig cfg;
  cfg.regressor = spec.regressor;
  cfg.infusion = spec.infusion;
  cfg.seed = seed;
  return cfg;
}

int cmd_simulate(const Common& c, const std::string& input,
                 const std::string& type, double rate) {
  const DataMatrix data = read_csv(input);
  MissingnessSpec spec;
  spec.kind = missing_kind_from_string(type);
  spec.rate = rate;
  spec.seed = c.seed;
  const DataMatrix out = amputate(data, spec);
  ensure_out(c);
  const std::string values_path = (fs::path(c.out) / "amputated.csv").string();
  const std::string mask_path = (fs::path(c.out) / "mask.csv").string();
  check_overwrite(c, values_path);
  write_csv(out, values_path);
  write_mask_csv(out, mask_path);
  std::cout << "removed " << out.n_missing() << " of "
            << out.rows() * out.cols() << " cells ("
            << count_unique_missing_patterns(out.mask)
            << " distinct row patterns)\n"
            << values_path << '\n'
            << mask_path << '\n';
  return 0;
}

int cmd_impute(const Common& c, const std::string& input,
               const std::string& model_name) {
  const DataMatrix data = read_csv(input);
  const ModelSpec spec = parse_model(model_name);
  ensure_out(c);
  const std::string imputed_path = (fs::path(c.out) / "imputed.csv").string();
  check_overwrite(c, imputed_path);

  if (spec.is_mice) {
    FitResult fit = fit_transform(data, mice_config_for(spec, c.seed));
    write_csv(fit.imputed, imputed_path);
    const std::string model_path = (fs::path(c.out) / "model.json").string();
    save_model(fit.model, model_path);
    std::cout << imputed_path << '\n' << model_path << '\n';
  } else {
    BaselineParams params;
    params.kind = spec.baseline;
    const int cap = std::max(1, static_cast<int>(data.cols()) - 1);
    params.svd_rank = std::min(params.svd_rank, cap);
    params.mf_rank = std::min(params.mf_rank, cap);
    const BaselineResult result = impute_baseline(data, params, c.seed);
    write_csv(result.imputed, imputed_path);
    if (!result.converged)
      std::cerr << "warning: iterative method stopped at max_iter\n";
    std::cout << imputed_path << '\n';
  }
  return 0;
}

int cmd_transform(const Common& c, const std::string& model_path,
                  const std::string& input) {
  const ImputationModel model = load_model(model_path);
  const DataMatrix data = read_csv(input);
  const DataMatrix imputed = transform(model, data);
  ensure_out(c);
  const std::string out_path = (fs::path(c.out) / "imputed.csv").string();
  check_overwrite(c, out_path);
  write_csv(imputed, out_path);
  std::cout << out_path << '\n';
  return 0;
}

int cmd_evaluate(const std::string& actual_path,
                 const std::string& imputed_path,
                 const std::string& mask_path) {
  const DataMatrix actual = read_csv(actual_path);
  const DataMatrix imputed = read_csv(imputed_path);
  const Mask mask = read_mask_csv(mask_path);
  const ImputationScore s = score_imputation(actual, imputed, mask);
  std::cout << "cells " << s.n_cells << "\nrmse " << s.rmse << "\nnrmse "
            << s.nrmse << '\n';
  return 0;
}

int cmd_sweep(const Common& c) {
  if (c.config.empty()) throw ConfigError("sweep requires --config");
  ExperimentConfig cfg = ExperimentConfig::from_json_file(c.config);
  if (c.seed_set) {
    cfg.seed = c.seed;
    cfg.split.seed = c.seed;
  }
  const SweepOutcome outcome = run_sweep(cfg, c.out, c.jobs, c.force);
  if (outcome.skipped > 0)
    std::cout << "skipped " << outcome.skipped << " completed cell"
              << (outcome.skipped == 1 ? "" : "s") << '\n';
  std::cout << outcome.table.size() << " cells in "
            << (fs::path(c.out) / "sweep_table.csv").string() << '\n';
  if (outcome.partial) {
    std::cerr << "warning: some cells failed; see manifest.json\n";
    return 2;
  }
  return 0;
}

int cmd_report(const Common& c, const std::string& sweep_dir) {
  const bool complete = emit_report(sweep_dir, c.out);
  std::cout << (fs::path(c.out) / "report.md").string() << '\n'
            << (fs::path(c.out) / "nrmse_series.csv").string() << '\n';
  return complete ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"missing-value imputation toolkit"};
  app.require_subcommand(1);

  Common c_sim, c_imp, c_tr, c_ev, c_sw, c_rep;
  std::string sim_input, sim_type = "mcar";
  double sim_rate = 0.1;
  std::string imp_input, imp_model = "lr-mice";
  std::string tr_model, tr_input;
  std::string ev_actual, ev_imputed, ev_mask;
  std::string rep_sweep_dir;

  auto* simulate = app.add_subcommand("simulate", "amputate a complete CSV");
  simulate->add_option("input", sim_input, "complete CSV")->required();
  simulate->add_option("--type", sim_type, "mcar|mar|mnar");
  simulate->add_option("--rate", sim_rate, "fraction of cells to remove");
  add_common(simulate, c_sim);

  auto* impute = app.add_subcommand("impute", "fit and impute a CSV");
  impute->add_option("input", imp_input, "CSV with missing cells")->required();
  impute->add_option("--model", imp_model,
                     "lr|dt|rf|gb|dr-mice[+label|one-hot|mcmv], or "
                     "median|knn|isvd|mf");
  add_common(impute, c_imp);

  auto* transform_cmd =
      app.add_subcommand("transform", "impute new data with a saved model");
  transform_cmd->add_option("--model", tr_model, "model.json")->required();
  transform_cmd->add_option("input", tr_input, "CSV with missing cells")
      ->required();
  add_common(transform_cmd, c_tr);

  auto* evaluate =
      app.add_subcommand("evaluate", "score an imputation against truth");
  evaluate->add_option("--actual", ev_actual, "ground-truth CSV")->required();
  evaluate->add_option("--imputed", ev_imputed, "imputed CSV")->required();
  evaluate->add_option("--mask", ev_mask, "0/1 mask CSV")->required();
  add_common(evaluate, c_ev);

  auto* sweep = app.add_subcommand("sweep", "run an experiment grid");
  add_common(sweep, c_sw);

  auto* report = app.add_subcommand("report", "render sweep tables");
  report->add_option("sweep_dir", rep_sweep_dir, "sweep output directory")
      ->required();
  add_common(report, c_rep);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed())
      return cmd_simulate(c_sim, sim_input, sim_type, sim_rate);
    if (impute->parsed()) return cmd_impute(c_imp, imp_input, imp_model);
    if (transform_cmd->parsed()) return cmd_transform(c_tr, tr_model, tr_input);
    if (evaluate->parsed()) return cmd_evaluate(ev_actual, ev_imputed, ev_mask);
    if (sweep->parsed()) return cmd_sweep(c_sw);
    if (report->parsed()) return cmd_report(c_rep, rep_sweep_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
