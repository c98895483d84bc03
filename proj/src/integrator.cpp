#include "rps/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rps {

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// In-place LU solve with partial pivoting; a is row-major d x d and is
// destroyed, b becomes the solution.
void solve_dense(std::vector<double>& a, std::vector<double>& b, int d) {
  for (int col = 0; col < d; ++col) {
    int pivot = col;
    double best = std::abs(a[size_t(col) * d + col]);
    for (int r = col + 1; r < d; ++r) {
      const double v = std::abs(a[size_t(r) * d + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best == 0.0) throw SolverError("singular Newton matrix", b, norm2(b));
    if (pivot != col) {
      for (int c = 0; c < d; ++c) std::swap(a[size_t(pivot) * d + c], a[size_t(col) * d + c]);
      std::swap(b[size_t(pivot)], b[size_t(col)]);
    }
    const double inv = 1.0 / a[size_t(col) * d + col];
    for (int r = col + 1; r < d; ++r) {
      const double factor = a[size_t(r) * d + col] * inv;
      if (factor == 0.0) continue;
      for (int c = col + 1; c < d; ++c) a[size_t(r) * d + c] -= factor * a[size_t(col) * d + c];
      b[size_t(r)] -= factor * b[size_t(col)];
    }
  }
  for (int r = d - 1; r >= 0; --r) {
    double s = b[size_t(r)];
    for (int c = r + 1; c < d; ++c) s -= a[size_t(r) * d + c] * b[size_t(c)];
    b[size_t(r)] = s / a[size_t(r) * d + r];
  }
}

class ImplicitSolver {
 public:
  ImplicitSolver(const SdeModel& m, const SolverConfig& cfg)
      : m_(m), cfg_(cfg), d_(m.dimension) {
    f_.resize(d_);
    res_.resize(d_);
    res_try_.resize(d_);
    jac_.resize(size_t(d_) * d_);
    lu_.resize(size_t(d_) * d_);
    delta_.resize(d_);
    x_try_.resize(d_);
    fd_lo_.resize(d_);
    fd_hi_.resize(d_);
    fd_x_.resize(d_);
  }

  // Solves (I + h Lambda) x - h f(phase, x) = rhs; x carries the warm start.
  void solve(double t_next, double h, const std::vector<double>& rhs, std::vector<double>& x,
             StepStats& st) {
    phase_ = wrap_phase(t_next, m_.tau);
    h_ = h;
    rhs_ = &rhs;
    st = StepStats{};

    if (newton(x, st)) return;

    st.fallback = true;
    if (d_ == 1) {
      bisect(x, st);
      return;
    }
    // restart from the linearized estimate rhs / (1 + h lambda)
    for (int i = 0; i < d_; ++i) x[size_t(i)] = rhs[size_t(i)] / (1.0 + h * m_.lambda_eigs[size_t(i)]);
    if (newton(x, st)) return;
    throw SolverError("implicit step did not converge (residual " + std::to_string(st.residual) +
                          " at t=" + std::to_string(t_next) + ")",
                      x, st.residual);
  }

 private:
  const SdeModel& m_;
  SolverConfig cfg_;
  int d_;
  double phase_ = 0.0, h_ = 0.0;
  const std::vector<double>* rhs_ = nullptr;
  std::vector<double> f_, res_, res_try_, jac_, lu_, delta_, x_try_, fd_lo_, fd_hi_, fd_x_;

  double residual(const std::vector<double>& x, std::vector<double>& out) {
    m_.drift(phase_, x, f_);
    double s = 0.0;
    for (int i = 0; i < d_; ++i) {
      if (!std::isfinite(f_[size_t(i)])) {
        std::ostringstream os;
        os << "drift evaluation is not finite at t=" << phase_ << ", x=(";
        for (int c = 0; c < d_; ++c) os << (c ? ", " : "") << x[size_t(c)];
        os << ")";
        throw ModelError(os.str());
      }
      out[size_t(i)] = x[size_t(i)] * (1.0 + h_ * m_.lambda_eigs[size_t(i)]) - h_ * f_[size_t(i)] -
                       (*rhs_)[size_t(i)];
      s += out[size_t(i)] * out[size_t(i)];
    }
    return std::sqrt(s);
  }

  void newton_matrix(const std::vector<double>& x) {
    if (m_.drift_jacobian) {
      m_.drift_jacobian(phase_, x, jac_);
    } else if (cfg_.allow_fd_jacobian) {
      fd_x_ = x;
      for (int j = 0; j < d_; ++j) {
        const double step = cfg_.fd_step_scale * (1.0 + std::abs(x[size_t(j)]));
        const double save = fd_x_[size_t(j)];
        fd_x_[size_t(j)] = save + step;
        m_.drift(phase_, fd_x_, fd_hi_);
        fd_x_[size_t(j)] = save - step;
        m_.drift(phase_, fd_x_, fd_lo_);
        fd_x_[size_t(j)] = save;
        for (int i = 0; i < d_; ++i)
          jac_[size_t(i) * d_ + size_t(j)] = (fd_hi_[size_t(i)] - fd_lo_[size_t(i)]) / (2.0 * step);
      }
    } else {
      throw SolverError("no analytic Jacobian and finite differences are disabled", x, 0.0);
    }
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) {
        double v = -h_ * jac_[size_t(i) * d_ + size_t(j)];
        if (i == j) v += 1.0 + h_ * m_.lambda_eigs[size_t(i)];
        lu_[size_t(i) * d_ + size_t(j)] = v;
      }
  }

  bool newton_step(std::vector<double>& x, double& r) {
    newton_matrix(x);
    delta_ = res_;
    solve_dense(lu_, delta_, d_);
    double alpha = 1.0;
    for (int bt = 0; bt <= cfg_.max_backtracks; ++bt) {
      for (int i = 0; i < d_; ++i) x_try_[size_t(i)] = x[size_t(i)] - alpha * delta_[size_t(i)];
      const double r_try = residual(x_try_, res_try_);
      if (r_try < r) {
        x.swap(x_try_);
        res_.swap(res_try_);
        r = r_try;
        return true;
      }
      alpha *= cfg_.backtrack_factor;
    }
    return false;
  }

  bool newton(std::vector<double>& x, StepStats& st) {
    double r = residual(x, res_);
    int iters = 0;
    while (r > cfg_.residual_tol && iters < cfg_.max_newton_iters) {
      if (!newton_step(x, r)) break;  // stagnated; caller falls back
      ++iters;
    }
    if (r > cfg_.residual_tol) {
      st.newton_iters += iters;
      st.residual = r;
      return false;
    }
    // One full polishing step once converged. It drives the solve to the
    // rounding floor, so the step map stays a smooth function of its inputs.
    if (r > 0.01 * cfg_.residual_tol && iters < cfg_.max_newton_iters) {
      newton_matrix(x);
      delta_ = res_;
      solve_dense(lu_, delta_, d_);
      for (int i = 0; i < d_; ++i) x_try_[size_t(i)] = x[size_t(i)] - delta_[size_t(i)];
      const double r_try = residual(x_try_, res_try_);
      if (r_try <= r) {
        x.swap(x_try_);
        res_.swap(res_try_);
        r = r_try;
      }
      ++iters;
    }
    st.newton_iters += iters;
    st.residual = r;
    return true;
  }

  // d=1 only: the residual is strictly increasing in x with slope at least
  // 1 + h (lambda_1 - c_f) > 1, so a sign-changing bracket always exists.
  void bisect(std::vector<double>& x, StepStats& st) {
    auto eval = [&](double v) {
      x_try_[0] = v;
      return residual(x_try_, res_try_);
    };
    double lo = x[0], hi = x[0];
    double width = std::max(1.0, std::abs(x[0]));
    auto value = [&](double v) {
      eval(v);
      return res_try_[0];
    };
    int guard = 0;
    while (value(lo) > 0.0 && guard++ < 200) lo -= width, width *= 2.0;
    width = std::max(1.0, std::abs(x[0]));
    guard = 0;
    while (value(hi) < 0.0 && guard++ < 200) hi += width, width *= 2.0;
    double best = x[0], best_r = residual(x, res_);
    for (int it = 0; it < 500; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = value(mid);
      const double rm = std::abs(fm);
      if (rm < best_r) {
        best = mid;
        best_r = rm;
      }
      if (rm <= cfg_.residual_tol) break;
      if (fm < 0.0)
        lo = mid;
      else
        hi = mid;
      if (!(hi - lo > 0.0)) break;
    }
    x[0] = best;
    st.residual = best_r;
    if (best_r > cfg_.residual_tol)
      throw SolverError("bisection fallback did not reach tolerance (residual " +
                            std::to_string(best_r) + ")",
                        x, best_r);
  }
};

}  // namespace

void drift_jacobian(const SdeModel& m, double t, const std::vector<double>& x,
                    std::vector<double>& out, const SolverConfig& cfg) {
  const int d = m.dimension;
  out.resize(size_t(d) * d);
  if (m.drift_jacobian) {
    m.drift_jacobian(t, x, out);
    return;
  }
  if (!cfg.allow_fd_jacobian)
    throw SolverError("no analytic Jacobian and finite differences are disabled", x, 0.0);
  std::vector<double> xp = x, hi(d), lo(d);
  for (int j = 0; j < d; ++j) {
    const double step = cfg.fd_step_scale * (1.0 + std::abs(x[size_t(j)]));
    const double save = xp[size_t(j)];
    xp[size_t(j)] = save + step;
    m.drift(t, xp, hi);
    xp[size_t(j)] = save - step;
    m.drift(t, xp, lo);
    xp[size_t(j)] = save;
    for (int i = 0; i < d; ++i)
      out[size_t(i) * d + size_t(j)] = (hi[size_t(i)] - lo[size_t(i)]) / (2.0 * step);
  }
}

std::vector<double> implicit_step(const SdeModel& m, double t_next,
                                  const std::vector<double>& x_prev,
                                  const std::vector<double>& noise_term, double h,
                                  const SolverConfig& cfg, StepStats* stats) {
  validate_model(m);
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("step h must lie in (0,1)");
  if (int(x_prev.size()) != m.dimension || int(noise_term.size()) != m.dimension)
    throw std::invalid_argument("state dimension mismatch");
  std::vector<double> rhs(x_prev.size());
  for (size_t i = 0; i < rhs.size(); ++i) rhs[i] = x_prev[i] + noise_term[i];
  std::vector<double> x = x_prev;
  ImplicitSolver solver(m, cfg);
  StepStats st;
  solver.solve(t_next, h, rhs, x, st);
  if (stats) *stats = st;
  return x;
}

void integrate_into(Trajectory& out, const SdeModel& m, const GridSpec& grid,
                    const WienerPath& path, const std::vector<double>& x0,
                    const SolverConfig& cfg) {
  validate_model(m);
  if (!(grid.h > 0.0 && grid.h < 1.0))
    throw std::invalid_argument("integrator requires h in (0,1)");
  if (!(path.grid == grid)) throw std::invalid_argument("path grid does not match");
  if (path.dim != m.dimension) throw std::invalid_argument("path dimension mismatch");
  if (int(x0.size()) != m.dimension) throw std::invalid_argument("initial value dimension mismatch");
  for (double v : x0)
    if (!std::isfinite(v)) throw std::invalid_argument("initial value must be finite");

  const int d = m.dimension;
  const int64_t n = grid.n_cells;
  out.grid = grid;
  out.dim = d;
  out.states.resize(size_t(n + 1) * size_t(d));
  out.stats.resize(size_t(n));
  std::copy(x0.begin(), x0.end(), out.states.begin());

  ImplicitSolver solver(m, cfg);
  std::vector<double> g(d), rhs(d), x = x0;
  for (int64_t j = 1; j <= n; ++j) {
    const double t_prev = grid.time_at(j - 1);
    m.diffusion(wrap_phase(t_prev, m.tau), g);
    for (int c = 0; c < d; ++c) rhs[size_t(c)] = x[size_t(c)] + g[size_t(c)] * path.inc(j - 1, c);
    try {
      solver.solve(grid.time_at(j), grid.h, rhs, x, out.stats[size_t(j - 1)]);
    } catch (const SolverError& e) {
      SolverError wrapped("step " + std::to_string(j) + ": " + e.what(), e.best_iterate,
                          e.residual);
      wrapped.step_index = j;
      throw wrapped;
    }
    std::copy(x.begin(), x.end(), out.states.begin() + size_t(j) * size_t(d));
  }
}

Trajectory integrate(const SdeModel& m, const GridSpec& grid, const WienerPath& path,
                     const std::vector<double>& x0, const SolverConfig& cfg) {
  Trajectory t;
  integrate_into(t, m, grid, path, x0, cfg);
  return t;
}

}  // namespace rps
