#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "rps/model.hpp"
#include "rps/noise.hpp"

namespace rps {

struct SolverConfig {
  double residual_tol = 1e-12;   // Euclidean norm of the implicit residual
  int max_newton_iters = 50;
  double backtrack_factor = 0.5;
  int max_backtracks = 30;
  bool allow_fd_jacobian = true;
  double fd_step_scale = 1e-7;  // finite-difference step 1e-7 * (1 + |x_j|)
};

struct StepStats {
  int newton_iters = 0;
  double residual = 0.0;
  bool fallback = false;
};

struct SolverError : std::runtime_error {
  SolverError(const std::string& msg, std::vector<double> best, double res)
      : std::runtime_error(msg), best_iterate(std::move(best)), residual(res) {}
  std::vector<double> best_iterate;
  double residual = 0.0;
  int64_t step_index = -1;  // attached by integrate()
};

// Backward Euler iterates aligned to a grid: states[j*dim + c] is component c
// of the state at t_a + j h, j = 0..n_cells. states[0] is the initial value
// and every accepted step records residual <= residual_tol.
struct Trajectory {
  GridSpec grid;
  int dim = 1;
  std::vector<double> states;
  std::vector<StepStats> stats;

  const double* state(int64_t j) const { return states.data() + size_t(j) * size_t(dim); }
  double scalar(int64_t j) const { return states[size_t(j) * size_t(dim)]; }
};

// df/dx(t, x), row-major. Uses the model's analytic Jacobian when present,
// otherwise central finite differences (if enabled in cfg).
void drift_jacobian(const SdeModel& m, double t, const std::vector<double>& x,
                    std::vector<double>& out, const SolverConfig& cfg = {});

// One drift-implicit step: solves
//   (I + h Lambda) x - h f(t_next, x) = x_prev + noise_term
// for x, evaluating f at the phase t_next mod tau. The map is strongly
// monotone for c_f < lambda_1, so the root is unique. Newton iterations are
// damped by residual backtracking; in d=1 an always-successful bisection
// fallback covers pathological starts, in d>1 damped restarts are tried.
std::vector<double> implicit_step(const SdeModel& m, double t_next,
                                  const std::vector<double>& x_prev,
                                  const std::vector<double>& noise_term, double h,
                                  const SolverConfig& cfg = {}, StepStats* stats = nullptr);

// Backward Euler over the whole grid; the diffusion is evaluated at the left
// endpoint of each cell, the drift at the right:
//   X_j = X_{j-1} - Lambda h X_j + h f(t_j, X_j) + g(t_{j-1}) dW_{j-1}.
Trajectory integrate(const SdeModel& m, const GridSpec& grid, const WienerPath& path,
                     const std::vector<double>& x0, const SolverConfig& cfg = {});

// Buffer-reusing variant for tight Monte Carlo loops.
void integrate_into(Trajectory& out, const SdeModel& m, const GridSpec& grid,
                    const WienerPath& path, const std::vector<double>& x0,
                    const SolverConfig& cfg = {});

}  // namespace rps
