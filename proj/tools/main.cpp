#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "rps/analysis.hpp"
#include "rps/config.hpp"
#include "rps/io.hpp"
#include "rps/pullback.hpp"

namespace {

using namespace rps;

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

// Model assumptions are probed up front so a bad configuration fails before
// any sampling starts. Grid divisibility is validated by the operations
// themselves (tau/h for period-aligned runs, h/h_ref for convergence).
SdeModel resolve_model(const ExperimentConfig& cfg, bool check_assumptions = true) {
  SdeModel m = model_from_config(cfg);
  validate_model(m);
  if (check_assumptions) {
    AssumptionProbe probe;
    probe.n_points = 512;
    const AssumptionReport rep = validate_assumptions(m, probe);
    if (!rep.pass)
      throw ModelError("model '" + m.name + "' fails the assumption probe (probed c_f " +
                       format_double(rep.probed_c_f) + ", declared " + format_double(m.c_f) +
                       ")");
  }
  return m;
}

int cmd_validate(const ExperimentConfig& cfg) {
  const SdeModel m = model_from_config(cfg);
  const AssumptionReport rep = validate_assumptions(m);
  const std::string json = assumption_json(rep, m);
  write_file(out_path(cfg, "validate.json"), json);
  std::fputs(json.c_str(), stdout);
  return rep.pass ? 0 : 1;
}

int cmd_simulate(const ExperimentConfig& cfg) {
  const SdeModel m = resolve_model(cfg);
  const auto n = int64_t(std::llround((cfg.T - cfg.t0) / cfg.h));
  if (n < 1 || std::abs(double(n) * cfg.h - (cfg.T - cfg.t0)) > 1e-9)
    throw ConfigError("T - t0 must be a positive multiple of h");
  const GridSpec grid = make_grid(cfg.t0, cfg.h, n);
  const WienerPath path = sample_path(grid, m.dimension, cfg.seed, 0);
  const Trajectory traj = integrate(m, grid, path, cfg.xi);
  write_file(out_path(cfg, "trajectory.csv"), trajectory_csv(traj));
  std::printf("trajectory.csv: %lld steps, max residual below tolerance\n",
              static_cast<long long>(n));
  return 0;
}

int cmd_periodicity(const ExperimentConfig& cfg) {
  const SdeModel m = resolve_model(cfg);
  const PeriodicityGap gap =
      periodicity_gap(m, cfg.h, cfg.start_t, cfg.xi, cfg.shift_periods, cfg.window_lo,
                      cfg.window_hi, cfg.seed);
  write_file(out_path(cfg, "periodicity.csv"), periodicity_csv(gap, m.dimension));
  std::printf("sup gap over [%s, %s]: %s\n", format_double(cfg.window_lo).c_str(),
              format_double(cfg.window_hi).c_str(), format_double(gap.gap).c_str());
  return 0;
}

int cmd_pullback(const ExperimentConfig& cfg) {
  const SdeModel m = resolve_model(cfg);
  const PullbackRun run = pullback_values(m, cfg.h, cfg.xi, cfg.anchor_t, cfg.k_list, cfg.seed);
  const CauchyDiagnostic diag = cauchy_diagnostic(run);
  write_file(out_path(cfg, "pullback.csv"), pullback_csv(run, diag));
  if (diag.saturated)
    std::printf("pull-back differences saturated below %s\n",
                format_double(CauchyDiagnostic::saturation_floor).c_str());
  else
    std::printf("pull-back log-slope per period: %s\n", format_double(diag.log_slope).c_str());
  return 0;
}

int cmd_converge(const ExperimentConfig& cfg) {
  const SdeModel m = resolve_model(cfg);
  const ErrorTable table = ms_error_table(m, cfg.t0, cfg.T, cfg.i_list, cfg.i_ref, cfg.n_samples,
                                          cfg.seed, cfg.xi, SolverConfig{}, cfg.workers);
  const RateReport rate = fit_rate(table);
  write_file(out_path(cfg, "converge.csv"), error_table_csv(table));
  write_file(out_path(cfg, "rate.json"), rate_json(rate, table));
  std::printf("kappa_rms = %s (kappa_ms = %s, residual = %s)\n",
              format_double(rate.kappa_rms).c_str(), format_double(rate.kappa_ms).c_str(),
              format_double(rate.residual).c_str());
  return 0;
}

int cmd_moments(const ExperimentConfig& cfg) {
  const SdeModel m = resolve_model(cfg);
  const MomentBoundReport rep = moment_bound_check(m, cfg.p, cfg.h, cfg.T, cfg.n_samples,
                                                   cfg.seed, cfg.xi, SolverConfig{}, cfg.workers);
  const std::string json = moment_json(rep);
  write_file(out_path(cfg, "moments.json"), json);
  std::fputs(json.c_str(), stdout);
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backward Euler simulation of random periodic solutions of semilinear SDEs"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string config_file;

  // the config file provides defaults; flags parsed afterwards override it
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) config_file = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0) config_file = arg.substr(9);
  }
  if (!config_file.empty()) {
    try {
      cfg = load_config(config_file);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
  }

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "key = value configuration file");
    sub->add_option("--model", cfg.model_id, "example1 | example2 | custom");
    sub->add_option("--seed", cfg.seed, "base RNG seed");
    sub->add_option("--samples", cfg.n_samples, "Monte Carlo sample count");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--workers", cfg.workers, "worker threads (0 = hardware)");
    sub->add_option("--xi", cfg.xi, "initial value components");
    sub->add_option("--h", cfg.h, "step size");
    sub->add_option("--t0", cfg.t0, "start time");
    sub->add_option("--T", cfg.T, "end time / horizon");
  };

  CLI::App* validate = app.add_subcommand("validate", "probe the structural assumptions");
  CLI::App* simulate = app.add_subcommand("simulate", "one backward Euler trajectory to CSV");
  CLI::App* periodicity =
      app.add_subcommand("periodicity", "gap between lagged and noise-shifted trajectories");
  CLI::App* pullback = app.add_subcommand("pullback", "pull-back values and Cauchy differences");
  CLI::App* converge = app.add_subcommand("converge", "mean-square error table and rate fit");
  CLI::App* moments = app.add_subcommand("moments", "moment bound check");
  app.set_help_flag("--help", "print help");  // frees -h for the step option
  for (CLI::App* sub : {validate, simulate, periodicity, pullback, converge, moments}) {
    sub->set_help_flag("--help", "print help");
    add_common(sub);
  }

  periodicity->add_option("--start", cfg.start_t, "trajectory start time");
  periodicity->add_option("--shift-periods,-m", cfg.shift_periods, "periods of Wiener shift");
  periodicity->add_option("--window-lo", cfg.window_lo, "window start (lagged clock)");
  periodicity->add_option("--window-hi", cfg.window_hi, "window end (lagged clock)");
  pullback->add_option("--anchor", cfg.anchor_t, "observation time");
  pullback->add_option("--k-list", cfg.k_list, "pull-back depths");
  converge->add_option("--i-list", cfg.i_list, "stepsize exponents, h = (T-t0) 2^-i");
  converge->add_option("--i-ref", cfg.i_ref, "reference exponent");
  moments->add_option("--p", cfg.p, "moment order");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (periodicity->parsed()) return cmd_periodicity(cfg);
    if (pullback->parsed()) return cmd_pullback(cfg);
    if (converge->parsed()) return cmd_converge(cfg);
    if (moments->parsed()) return cmd_moments(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
