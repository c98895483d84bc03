#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "rps/integrator.hpp"

using namespace rps;
using std::numbers::pi;

namespace {

SdeModel decay_model(double lambda, double declared_c_f = -1.0) {
  SdeModel m;
  m.name = "decay";
  m.dimension = 1;
  m.lambda_eigs = {lambda};
  m.tau = 1.0;
  m.c_f = declared_c_f > 0 ? declared_c_f : 0.5 * lambda;
  m.c_g = 1.0;
  m.drift = [](double, const std::vector<double>&, std::vector<double>& out) { out[0] = 0.0; };
  m.drift_jacobian = [](double, const std::vector<double>&, std::vector<double>& out) {
    out[0] = 0.0;
  };
  m.diffusion = [](double, std::vector<double>& out) { out[0] = 1.0; };
  return m;
}

WienerPath zero_path(const GridSpec& g, int dim) {
  WienerPath p;
  p.grid = g;
  p.dim = dim;
  p.keyed = false;
  p.increments.assign(size_t(g.n_cells) * size_t(dim), 0.0);
  return p;
}

// independent 1-d root finder for (1 + h L) x - h f(t,x) = rhs on [-10, 10]
double bisect_oracle(const SdeModel& m, double t_next, double rhs, double h) {
  std::vector<double> f(1);
  auto F = [&](double x) {
    m.drift(wrap_phase(t_next, m.tau), {x}, f);
    return (1.0 + h * m.lambda_eigs[0]) * x - h * f[0] - rhs;
  };
  double lo = -10.0, hi = 10.0;
  REQUIRE(F(lo) < 0.0);
  REQUIRE(F(hi) > 0.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("implicit step closed forms") {
  // f == 0: x = x_prev / (1 + lambda h)
  const SdeModel decay = decay_model(2.0);
  StepStats st;
  const auto x = implicit_step(decay, 0.1, {3.0}, {0.0}, 0.1, {}, &st);
  CHECK(x[0] == doctest::Approx(3.0 / 1.2).epsilon(1e-14));
  CHECK(st.residual <= 1e-12);

  // example 1 is x-independent: x = (x_prev + h sin(2 pi t) + noise)/(1 + pi h)
  const SdeModel ex1 = builtin_example("example1");
  const double h = 0.05, t_next = 0.3, x_prev = 0.4, noise = -0.02;
  const auto y = implicit_step(ex1, t_next, {x_prev}, {noise}, h, {}, &st);
  const double expect = (x_prev + h * std::sin(2.0 * pi * t_next) + noise) / (1.0 + pi * h);
  CHECK(y[0] == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("implicit step agrees with the bisection oracle on the cubic drift") {
  const SdeModel ex2 = builtin_example("example2");
  StepStats st;
  // the worked case: (1 + 0.2 pi) x - 0.1 (x - x^3 + cos(0.3 pi)) = 1.05
  const auto x = implicit_step(ex2, 0.3, {1.0}, {0.05}, 0.1, {}, &st);
  CHECK(st.residual <= 1e-12);
  const double oracle = bisect_oracle(ex2, 0.3, 1.05, 0.1);
  CHECK(std::abs(x[0] - oracle) <= 1e-10);

  // randomized steps, fixed generator
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> ux(-3.0, 3.0), un(-0.6, 0.6), uh(0.01, 0.5),
      ut(0.0, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double xp = ux(rng), nz = un(rng), hh = uh(rng), tt = ut(rng);
    const auto root = implicit_step(ex2, tt, {xp}, {nz}, hh, {}, &st);
    CHECK(st.residual <= 1e-12);
    CHECK(std::abs(root[0] - bisect_oracle(ex2, tt, xp + nz, hh)) <= 1e-10);
  }
}

TEST_CASE("drift jacobians, analytic and finite differences") {
  const SdeModel ex1 = builtin_example("example1");
  std::vector<double> jac;
  drift_jacobian(ex1, 0.2, {1.7}, jac);
  CHECK(jac[0] == 0.0);

  const SdeModel ex2 = builtin_example("example2");
  drift_jacobian(ex2, 0.0, {2.0}, jac);
  CHECK(jac[0] == doctest::Approx(-11.0).epsilon(1e-15));  // 1 - 3*4

  SdeModel fd = ex2;
  fd.drift_jacobian = nullptr;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  std::vector<double> jac_fd;
  for (int i = 0; i < 100; ++i) {
    const double t = u(rng), x = u(rng);
    drift_jacobian(ex2, t, {x}, jac);
    drift_jacobian(fd, t, {x}, jac_fd);
    CHECK(std::abs(jac_fd[0] - jac[0]) <= 1e-6 * (1.0 + std::abs(jac[0])));
  }

  SdeModel no_fd = fd;
  SolverConfig cfg;
  cfg.allow_fd_jacobian = false;
  CHECK_THROWS_AS(drift_jacobian(no_fd, 0.0, {1.0}, jac, cfg), SolverError);
}

TEST_CASE("geometric decay without forcing or noise") {
  const SdeModel decay = decay_model(1.5);
  const GridSpec g = make_grid(0.0, 0.1, 50);
  const Trajectory traj = integrate(decay, g, zero_path(g, 1), {1.0});
  CHECK(traj.scalar(0) == 1.0);
  for (int64_t j = 1; j <= 50; ++j) {
    CHECK(traj.scalar(j) ==
          doctest::Approx(std::pow(1.15, -double(j))).epsilon(1e-12));
    CHECK(traj.stats[size_t(j - 1)].residual <= 1e-12);
  }
}

TEST_CASE("deterministic discrete convolution over one period of example 1") {
  // x0 = 0, g == 0: terminal = sum_j (1 + pi h)^{-(n-j+1)} h sin(2 pi j h),
  // evaluated independently in extended precision.
  const SdeModel ex1 = builtin_example("example1");
  const int n = 64;
  const double h = 1.0 / n;
  const GridSpec g = make_grid(0.0, h, n);
  const Trajectory traj = integrate(ex1, g, zero_path(g, 1), {0.0});

  long double acc = 0.0L;
  const long double q = 1.0L + (long double)(pi)*h;
  for (int j = 1; j <= n; ++j)
    acc += powl(q, -(long double)(n - j + 1)) * (long double)h *
           sinl(2.0L * 3.14159265358979323846264338327950288L * j * h);
  CHECK(traj.scalar(n) == doctest::Approx(double(acc)).epsilon(1e-13));
}

TEST_CASE("linear exactness against the closed-form recursion") {
  const SdeModel ex1 = builtin_example("example1");
  const double h = 1e-3;
  const int64_t n = 10000;
  const GridSpec g = make_grid(0.0, h, n);
  const WienerPath path = sample_path(g, 1, 31337, 0);
  const Trajectory traj = integrate(ex1, g, path, {0.25});

  double x = 0.25, worst = 0.0;
  for (int64_t j = 1; j <= n; ++j) {
    x = (x + h * std::sin(2.0 * pi * g.time_at(j)) + path.inc(j - 1)) / (1.0 + pi * h);
    worst = std::max(worst, std::abs(traj.scalar(j) - x) / (1.0 + std::abs(x)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("periodic coefficients make re-anchored trajectories bit-identical") {
  const SdeModel ex1 = builtin_example("example1");
  const double h = 1.0 / 32.0;
  const GridSpec g_neg = make_grid(-5.0, h, 32);
  const GridSpec g_pos = make_grid(0.0, h, 32);
  const WienerPath p_neg = sample_path(g_neg, 1, 5150, 0);
  WienerPath p_pos = p_neg;  // same increments, re-anchored grid
  p_pos.grid = g_pos;
  p_pos.keyed = false;

  const Trajectory a = integrate(ex1, g_neg, p_neg, {0.3});
  const Trajectory b = integrate(ex1, g_pos, p_pos, {0.3});
  for (int64_t j = 0; j <= 32; ++j) CHECK(a.scalar(j) == b.scalar(j));
}

TEST_CASE("pathwise contraction of two initial values on a shared path") {
  const SdeModel ex2 = builtin_example("example2");
  const double h = 0.05;
  const int64_t n = 100;
  const GridSpec g = make_grid(0.0, h, n);
  const WienerPath path = sample_path(g, 1, 777, 0);
  const Trajectory a = integrate(ex2, g, path, {0.5});
  const Trajectory b = integrate(ex2, g, path, {-0.3});
  const double v = 2.0 * pi - 1.0;
  const double d0 = 0.8 * 0.8;
  for (int64_t j = 1; j <= n; ++j) {
    const double dj = (a.scalar(j) - b.scalar(j)) * (a.scalar(j) - b.scalar(j));
    CHECK(dj <= std::pow(1.0 + 2.0 * v * h, -double(j)) * d0 * (1.0 + 1e-6) + 20.0 * 1e-12);
  }
}

TEST_CASE("integrate rejects bad inputs and attaches step indices to failures") {
  const SdeModel ex1 = builtin_example("example1");
  const GridSpec g = make_grid(0.0, 0.1, 10);
  const WienerPath path = sample_path(g, 1, 1, 0);
  CHECK_THROWS_AS(integrate(ex1, g, path, {std::nan("")}), std::invalid_argument);
  const GridSpec other = make_grid(0.0, 0.1, 11);
  CHECK_THROWS_AS(integrate(ex1, other, path, {0.0}), std::invalid_argument);
  const GridSpec wide = make_grid(0.0, 1.5, 4);
  CHECK_THROWS_AS(integrate(ex1, wide, sample_path(wide, 1, 1, 0), {0.0}),
                  std::invalid_argument);

  // a drift that blows up mid-trajectory surfaces as a model failure
  SdeModel explode = builtin_example("example2");
  explode.drift = [](double t, const std::vector<double>& x, std::vector<double>& out) {
    out[0] = t > 0.45 ? std::numeric_limits<double>::infinity() : x[0];
  };
  explode.drift_jacobian = nullptr;
  CHECK_THROWS_AS(integrate(explode, g, path, {0.1}), ModelError);
}

TEST_CASE("second moment of the cubic example stays bounded over a long horizon") {
  const SdeModel ex2 = builtin_example("example2");
  const double h = 0.05;
  const int64_t n = 400;  // horizon 20
  const GridSpec g = make_grid(0.0, h, n);
  const int samples = 1500;
  std::vector<double> sum_sq(size_t(n) + 1, 0.0);
  for (int s = 0; s < samples; ++s) {
    const WienerPath path = sample_path(g, 1, 2025, uint64_t(s));
    const Trajectory traj = integrate(ex2, g, path, {0.0});
    for (int64_t j = 0; j <= n; ++j) sum_sq[size_t(j)] += traj.scalar(j) * traj.scalar(j);
  }
  std::vector<double> estimate(sum_sq);
  for (double& v : estimate) v /= samples;
  std::vector<double> sorted(estimate);
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double peak = *std::max_element(estimate.begin(), estimate.end());
  CHECK(peak <= 2.0 * median);
}
