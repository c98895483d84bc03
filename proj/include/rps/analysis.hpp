#pragma once

#include <cstdint>
#include <vector>

#include "rps/integrator.hpp"
#include "rps/model.hpp"

namespace rps {

// Mean-square error at the terminal time between the scheme at step h and
// the same scheme at the fine reference step, on coupled paths (one fine
// Brownian path per sample, coarsened to every level). d_sup is the same
// statistic with the squared difference maximised over the coarse grid.
struct ErrorRow {
  double h = 0.0;
  double d_terminal = 0.0;
  double d_sup = 0.0;
  double std_error = 0.0;  // standard error of d_terminal
};

struct ErrorTable {
  double t0 = 0.0;
  double T = 0.0;
  double h_ref = 0.0;
  int n_samples = 0;
  uint64_t seed = 0;
  std::vector<ErrorRow> rows;  // h strictly decreasing
};

// Stepsizes are h_i = (T - t0) 2^-i for i in i_list and the reference level
// uses i_ref > max(i_list). Sample s consumes stream_id s. The reduction is
// a compensated sum in ascending sample order, so results are byte-identical
// for any worker count.
ErrorTable ms_error_table(const SdeModel& m, double t0, double T, const std::vector<int>& i_list,
                          int i_ref, int n_samples, uint64_t seed,
                          const std::vector<double>& xi, const SolverConfig& cfg = {},
                          int workers = 0);

// Ordinary least squares of log D on log h. kappa_ms is the fitted slope for
// the mean-square data; kappa_rms = kappa_ms / 2 is the corresponding
// root-mean-square order, the convention behind the reported rates near one.
struct RateReport {
  double kappa_ms = 0.0;
  double kappa_rms = 0.0;
  double log_c = 0.0;
  double residual = 0.0;  // root-sum-square of log-space fit residuals
};

RateReport fit_rate(const std::vector<std::pair<double, double>>& rows);
RateReport fit_rate(const ErrorTable& table);

// Empirical E[(1 + |X_T|^2)^p] against the closed-form time-uniform bound
//   (1 + |xi|^2)^p + ((2p-1) c_g^2 + 2 lambda_1)^p / ((p+1)(lambda_1-c_f)^p).
struct MomentBoundReport {
  int p = 1;
  double empirical = 0.0;
  double std_error = 0.0;
  double empirical_upper3 = 0.0;  // empirical + 3 standard errors
  double running_max = 0.0;       // max over grid times of the empirical moment
  double theoretical = 0.0;
  bool pass = false;
};

double theoretical_moment_bound(const SdeModel& m, int p, const std::vector<double>& xi);

MomentBoundReport moment_bound_check(const SdeModel& m, int p, double h, double horizon_T,
                                     int n_samples, uint64_t seed, const std::vector<double>& xi,
                                     const SolverConfig& cfg = {}, int workers = 0);

// L2 norms of increments X(t_anchor + delta) - X(t_anchor) for each delta,
// with the fitted log-log exponent. Trajectories are warmed up over
// [t_anchor - warmup, t_anchor] so the state is close to the random periodic
// regime; every delta must be a multiple of h with delta >> h.
struct HolderPoint {
  double delta = 0.0;
  double l2_increment = 0.0;
};

struct HolderReport {
  std::vector<HolderPoint> points;
  double exponent = 0.0;
};

HolderReport holder_check(const SdeModel& m, double t_anchor, const std::vector<double>& deltas,
                          int n_samples, double h, uint64_t seed, double warmup = 5.0,
                          const SolverConfig& cfg = {}, int workers = 0);

}  // namespace rps
