#include "rps/pullback.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rps {

namespace {

int64_t lattice_index(double t, double h, const char* what) {
  const double q = t / h;
  const int64_t r = std::llround(q);
  if (std::abs(q - double(r)) > 1e-6 * std::max(1.0, std::abs(q)))
    throw std::invalid_argument(std::string(what) + " (" + std::to_string(t) +
                                ") does not sit on the step lattice h=" + std::to_string(h));
  return r;
}

}  // namespace

int64_t cells_per_period(double tau, double h) {
  const int64_t per = lattice_index(tau, h, "period tau");
  if (per < 1) throw std::invalid_argument("tau/h must be a positive integer");
  return per;
}

PullbackRun pullback_values(const SdeModel& m, double h, const std::vector<double>& xi,
                            double anchor_t, const std::vector<int>& k_list, uint64_t seed,
                            const SolverConfig& cfg) {
  validate_model(m);
  if (int(xi.size()) != m.dimension) throw std::invalid_argument("xi dimension mismatch");
  if (k_list.empty()) throw std::invalid_argument("k_list must not be empty");
  if (!std::is_sorted(k_list.begin(), k_list.end()) ||
      std::adjacent_find(k_list.begin(), k_list.end()) != k_list.end())
    throw std::invalid_argument("k_list must be strictly increasing");
  if (k_list.front() < 0) throw std::invalid_argument("k must be nonnegative");

  const int64_t per = cells_per_period(m.tau, h);
  const int64_t anchor_steps = lattice_index(anchor_t, h, "anchor time");

  PullbackRun run;
  run.h = h;
  run.anchor_t = anchor_t;
  run.seed = seed;
  run.xi = xi;
  run.k_list = k_list;
  run.values.reserve(k_list.size());

  Trajectory traj;
  WienerPath path;
  for (int k : k_list) {
    const int64_t n = anchor_steps + int64_t(k) * per;
    if (n < 0)
      throw std::invalid_argument("anchor time lies before the pull-back start for k=" +
                                  std::to_string(k));
    if (n == 0) {
      run.values.push_back(xi);
      continue;
    }
    const GridSpec grid = make_grid(-double(k) * m.tau, h, n);
    sample_path_into(path, grid, m.dimension, seed, 0);
    try {
      integrate_into(traj, m, grid, path, xi, cfg);
    } catch (const SolverError& e) {
      SolverError wrapped("pull-back k=" + std::to_string(k) + ": " + e.what(), e.best_iterate,
                          e.residual);
      wrapped.step_index = e.step_index;
      throw wrapped;
    }
    run.values.emplace_back(traj.state(n), traj.state(n) + m.dimension);
  }
  return run;
}

CauchyDiagnostic cauchy_diagnostic(const PullbackRun& run) {
  if (run.k_list.size() < 3)
    throw std::invalid_argument("cauchy diagnostic needs at least 3 pull-back depths");
  CauchyDiagnostic diag;
  for (size_t i = 0; i + 1 < run.k_list.size(); ++i) {
    double s = 0.0;
    for (size_t c = 0; c < run.values[i].size(); ++c) {
      const double d = run.values[i + 1][c] - run.values[i][c];
      s += d * d;
    }
    diag.k.push_back(run.k_list[i]);
    diag.diff_sq.push_back(s);
  }
  diag.saturated = std::all_of(diag.diff_sq.begin(), diag.diff_sq.end(),
                               [](double d) { return d < CauchyDiagnostic::saturation_floor; });
  if (diag.saturated) return diag;

  // least squares of log(diff) on k, over the positive entries
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < diag.diff_sq.size(); ++i) {
    if (!(diag.diff_sq[i] > 0.0)) continue;
    const double x = double(diag.k[i]);
    const double y = std::log(diag.diff_sq[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n >= 2) {
    const double denom = double(n) * sxx - sx * sx;
    diag.log_slope = (double(n) * sxy - sx * sy) / denom;
    diag.log_intercept = (sy - diag.log_slope * sx) / double(n);
  }
  return diag;
}

PeriodicityGap periodicity_gap(const SdeModel& m, double h, double start_t,
                               const std::vector<double>& xi, int shift_periods,
                               double window_lo, double window_hi, uint64_t seed,
                               const SolverConfig& cfg) {
  validate_model(m);
  if (int(xi.size()) != m.dimension) throw std::invalid_argument("xi dimension mismatch");
  if (shift_periods < 0) throw std::invalid_argument("shift_periods must be nonnegative");
  if (!(window_hi >= window_lo)) throw std::invalid_argument("empty window");

  const int64_t per = cells_per_period(m.tau, h);
  const int64_t start_steps = lattice_index(start_t, h, "start time");
  const int64_t i_lo = lattice_index(window_lo, h, "window start") - start_steps;
  const int64_t i_hi = lattice_index(window_hi, h, "window end") - start_steps;
  if (i_lo < 0) throw std::invalid_argument("window starts before the trajectory start");
  if (i_hi < 1) throw std::invalid_argument("window must extend beyond the trajectory start");

  const int64_t m_cells = int64_t(shift_periods) * per;
  const GridSpec grid_lagged = make_grid(start_t, h, i_hi);
  const GridSpec grid_shifted = make_grid(start_t, h, i_hi + m_cells);

  const WienerPath base_long = sample_path(grid_shifted, m.dimension, seed, 0);
  // theta_{-m tau}: increment j of the shifted realisation is increment
  // j - m*per of the base stream
  const WienerPath path_shifted = shift(base_long, -m_cells);
  const WienerPath path_lagged = sample_path(grid_lagged, m.dimension, seed, 0);

  const Trajectory traj_lagged = integrate(m, grid_lagged, path_lagged, xi, cfg);
  const Trajectory traj_shifted = integrate(m, grid_shifted, path_shifted, xi, cfg);

  PeriodicityGap out;
  out.window_lo = window_lo;
  out.window_hi = window_hi;
  out.shift_periods = shift_periods;
  const int d = m.dimension;
  for (int64_t i = i_lo; i <= i_hi; ++i) {
    const double* a = traj_lagged.state(i);
    const double* b = traj_shifted.state(i + m_cells);
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      const double diff = a[c] - b[c];
      s += diff * diff;
    }
    out.times.push_back(grid_lagged.time_at(i));
    out.lagged.insert(out.lagged.end(), a, a + d);
    out.shifted.insert(out.shifted.end(), b, b + d);
    out.pointwise.push_back(std::sqrt(s));
    out.gap = std::max(out.gap, out.pointwise.back());
  }
  return out;
}

}  // namespace rps
