#pragma once

#include <cstdint>
#include <vector>

#include "rps/integrator.hpp"
#include "rps/model.hpp"

namespace rps {

// Pull-back family: for each k, the backward Euler state at anchor_t started
// at -k tau from xi, all runs consuming one noise realisation. The shared
// realisation is obtained by keying increments to global cell indices, so
// extending the grid backwards never changes previously drawn increments.
struct PullbackRun {
  double h = 0.0;
  double anchor_t = 0.0;
  uint64_t seed = 0;
  std::vector<double> xi;
  std::vector<int> k_list;                  // increasing, k >= 0
  std::vector<std::vector<double>> values;  // state at anchor_t per k
};

PullbackRun pullback_values(const SdeModel& m, double h, const std::vector<double>& xi,
                            double anchor_t, const std::vector<int>& k_list, uint64_t seed,
                            const SolverConfig& cfg = {});

// Successive squared differences |value_{k+1} - value_k|^2 and the
// least-squares slope of their logs against k. When every difference sits
// below the solver-noise floor the run is flagged saturated instead.
struct CauchyDiagnostic {
  std::vector<int> k;  // k of the pair (k, next k in the list)
  std::vector<double> diff_sq;
  double log_slope = 0.0;
  double log_intercept = 0.0;
  bool saturated = false;
  static constexpr double saturation_floor = 1e-14;
};

CauchyDiagnostic cauchy_diagnostic(const PullbackRun& run);

// Discrete check of the defining relation Y(t, omega) = Y(t + m tau,
// theta_{-m tau} omega): integrates one trajectory under omega and one under
// the shifted noise from the same start and initial value, then takes the
// sup over grid times u in [window_lo, window_hi] of
// |X(u; omega) - X(u + m tau; theta_{-m tau} omega)|.
struct PeriodicityGap {
  double window_lo = 0.0;
  double window_hi = 0.0;
  int shift_periods = 0;
  double gap = 0.0;
  std::vector<double> times;      // grid times u in the window
  std::vector<double> lagged;     // X(u; omega), flattened dim-major
  std::vector<double> shifted;    // X(u + m tau; shifted omega)
  std::vector<double> pointwise;  // |lagged - shifted| per time
};

PeriodicityGap periodicity_gap(const SdeModel& m, double h, double start_t,
                               const std::vector<double>& xi, int shift_periods,
                               double window_lo, double window_hi, uint64_t seed,
                               const SolverConfig& cfg = {});

// tau/h rounded to the nearest integer, throwing unless the product matches
// tau to grid tolerance. Shared by the period-aligned operations.
int64_t cells_per_period(double tau, double h);

}  // namespace rps
