#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rps/pullback.hpp"

using namespace rps;
using std::numbers::pi;

namespace {

SdeModel silent_linear(double lambda) {
  SdeModel m;
  m.name = "silent-linear";
  m.dimension = 1;
  m.lambda_eigs = {lambda};
  m.tau = 1.0;
  m.c_f = 0.5 * lambda;
  m.c_g = 0.0;
  m.drift = [](double, const std::vector<double>&, std::vector<double>& out) { out[0] = 0.0; };
  m.drift_jacobian = [](double, const std::vector<double>&, std::vector<double>& out) {
    out[0] = 0.0;
  };
  m.diffusion = [](double, std::vector<double>& out) { out[0] = 0.0; };
  return m;
}

}  // namespace

TEST_CASE("pull-back of the silent linear model matches the geometric closed form") {
  const double lambda = 1.0, h = 0.1;
  const SdeModel m = silent_linear(lambda);
  const std::vector<int> ks = {0, 1, 2, 3, 4, 5};
  const PullbackRun run = pullback_values(m, h, {1.0}, 0.0, ks, 99);
  for (size_t i = 0; i < ks.size(); ++i) {
    const double steps = double(ks[i]) * (m.tau / h);
    CHECK(run.values[i][0] ==
          doctest::Approx(std::pow(1.0 + lambda * h, -steps)).epsilon(1e-12));
  }
  // exact geometric decay rate of the squared differences
  const CauchyDiagnostic diag = cauchy_diagnostic(run);
  CHECK_FALSE(diag.saturated);
  const double expected_slope = -2.0 * (m.tau / h) * std::log(1.0 + lambda * h);
  CHECK(diag.log_slope == doctest::Approx(expected_slope).epsilon(1e-10));
}

TEST_CASE("pull-back differences saturate at the tolerance floor for deep k") {
  const SdeModel m = silent_linear(1.0);
  const PullbackRun run = pullback_values(m, 0.1, {1.0}, 0.0, {40, 41, 42, 43}, 99);
  const CauchyDiagnostic diag = cauchy_diagnostic(run);
  CHECK(diag.saturated);
}

TEST_CASE("cubic example pull-back differences decrease strictly in k") {
  const SdeModel ex2 = builtin_example("example2");
  std::vector<int> ks;
  for (int k = 0; k <= 6; ++k) ks.push_back(k);
  const PullbackRun run = pullback_values(ex2, 0.01, {0.5}, 0.0, ks, 4242);
  const CauchyDiagnostic diag = cauchy_diagnostic(run);
  REQUIRE(diag.diff_sq.size() == 6);
  for (size_t i = 0; i + 1 < diag.diff_sq.size(); ++i) {
    // strict decay until the differences sink below the solver-noise floor,
    // where consecutive iterates can collapse to identical doubles
    if (diag.diff_sq[i] >= CauchyDiagnostic::saturation_floor)
      CHECK(diag.diff_sq[i + 1] < diag.diff_sq[i]);
    else
      CHECK(diag.diff_sq[i + 1] <= diag.diff_sq[i]);
  }
}

TEST_CASE("pull-back runs share one noise realisation across depths") {
  const SdeModel ex1 = builtin_example("example1");
  // the k and k+1 trajectories agree on increments over the shared window, so
  // the difference contracts; with different realisations it would not
  const PullbackRun run = pullback_values(ex1, 0.01, {0.3}, 0.0, {1, 2, 3, 4, 5}, 31);
  const CauchyDiagnostic diag = cauchy_diagnostic(run);
  const double per_period = std::pow(1.0 + pi * 0.01, -2.0 * 100.0);  // squared contraction
  for (size_t i = 0; i + 1 < diag.diff_sq.size(); ++i) {
    if (diag.diff_sq[i] < 1e-25) continue;
    // the 100x headroom absorbs fluctuations of the random prefactors;
    // independent realisations would show no decay at all
    CHECK(diag.diff_sq[i + 1] <= diag.diff_sq[i] * per_period * 100.0);
  }
}

TEST_CASE("cauchy log-slope beats half the theoretical contraction rate") {
  // the contraction modulus 1 + 2 v h bounds the per-step decay, so the
  // fitted slope must sit below -2 (tau/h) log(1 + 2 v h) with 50% slack.
  // Depths are chosen so the differences stay above the rounding floor, and
  // the slope is the median over seeds to tame the random O(1) prefactors.
  struct Case {
    const char* id;
    double xi;
    double h;
    std::vector<int> ks;
  };
  for (const Case& c :
       {Case{"example1", 0.3, 0.01, {1, 2, 3, 4, 5}}, Case{"example2", 0.5, 0.1, {1, 2, 3, 4, 5}}}) {
    const SdeModel m = builtin_example(c.id);
    const double v = m.lambda_min() - m.c_f;
    std::vector<double> slopes;
    for (uint64_t seed : {1717u, 2718u, 3141u}) {
      const PullbackRun run = pullback_values(m, c.h, {c.xi}, 0.0, c.ks, seed);
      const CauchyDiagnostic diag = cauchy_diagnostic(run);
      REQUIRE_FALSE(diag.saturated);
      slopes.push_back(diag.log_slope);
    }
    std::sort(slopes.begin(), slopes.end());
    const double required = -2.0 * (m.tau / c.h) * std::log(1.0 + 2.0 * v * c.h) * 0.5;
    CHECK(slopes[1] <= required);
  }
}

TEST_CASE("two initial values under one realisation contract at the pull-back depth") {
  const SdeModel ex2 = builtin_example("example2");
  const double h = 0.05;
  const double v = ex2.lambda_min() - ex2.c_f;
  const PullbackRun a = pullback_values(ex2, h, {0.9}, 0.0, {1, 2, 3}, 61);
  const PullbackRun b = pullback_values(ex2, h, {-0.4}, 0.0, {1, 2, 3}, 61);
  for (size_t i = 0; i < a.k_list.size(); ++i) {
    const double steps = double(a.k_list[i]) * (ex2.tau / h);
    const double bound = std::pow(1.0 + 2.0 * v * h, -steps / 2.0) * 1.3 + 1e-10;
    CHECK(std::abs(a.values[i][0] - b.values[i][0]) <= bound);
  }
}

TEST_CASE("pull-back and periodicity runs are bitwise reproducible") {
  const SdeModel ex1 = builtin_example("example1");
  const PullbackRun r1 = pullback_values(ex1, 0.01, {0.3}, 0.0, {1, 2, 3}, 555);
  const PullbackRun r2 = pullback_values(ex1, 0.01, {0.3}, 0.0, {1, 2, 3}, 555);
  for (size_t i = 0; i < r1.values.size(); ++i) CHECK(r1.values[i] == r2.values[i]);

  const PeriodicityGap g1 = periodicity_gap(ex1, 1.0 / 32.0, -5.0, {0.3}, 1, 0.0, 2.0, 556);
  const PeriodicityGap g2 = periodicity_gap(ex1, 1.0 / 32.0, -5.0, {0.3}, 1, 0.0, 2.0, 556);
  CHECK(g1.gap == g2.gap);
  CHECK(g1.lagged == g2.lagged);
  CHECK(g1.shifted == g2.shifted);
}

TEST_CASE("pull-back input validation") {
  const SdeModel ex1 = builtin_example("example1");
  CHECK_THROWS_AS(pullback_values(ex1, 0.03, {0.0}, 0.0, {0, 1, 2}, 1),
                  std::invalid_argument);  // tau/h not integral
  CHECK_THROWS_AS(pullback_values(ex1, 0.01, {0.0}, 0.105, {0, 1, 2}, 1),
                  std::invalid_argument);  // anchor off the lattice
  CHECK_THROWS_AS(pullback_values(ex1, 0.01, {0.0}, 0.0, {2, 1, 3}, 1), std::invalid_argument);
  CHECK_THROWS_AS(pullback_values(ex1, 0.01, {0.0}, -1.0, {0, 1, 2}, 1),
                  std::invalid_argument);  // anchor before -k tau for k=0
}

TEST_CASE("periodicity gap vanishes bit-exactly for a zero shift") {
  const SdeModel ex1 = builtin_example("example1");
  const PeriodicityGap gap = periodicity_gap(ex1, 1.0 / 32.0, -5.0, {0.3}, 0, -2.0, 3.0, 8);
  CHECK(gap.gap == 0.0);
  for (double v : gap.pointwise) CHECK(v == 0.0);
}

TEST_CASE("lagged trajectory approaches the noise-shifted one far from the start") {
  const SdeModel ex1 = builtin_example("example1");
  const double h = 1.0 / 32.0;
  const PeriodicityGap early = periodicity_gap(ex1, h, -5.0, {0.3}, 1, -5.0, -2.0, 8);
  const PeriodicityGap late = periodicity_gap(ex1, h, -5.0, {0.3}, 1, 10.0, 13.0, 8);
  CHECK(late.gap < early.gap);
  CHECK(late.gap <= std::max(1e-2, early.gap / 100.0));
  CHECK(early.times.front() == -5.0);
  CHECK(early.times.back() == -2.0);
}

TEST_CASE("periodicity gap validates grid alignment") {
  const SdeModel ex2 = builtin_example("example2");
  CHECK_THROWS_AS(periodicity_gap(ex2, 0.03, -6.0, {0.5}, 1, 0.0, 2.0, 8),
                  std::invalid_argument);  // tau/h not integral
  CHECK_THROWS_AS(periodicity_gap(ex2, 1.0 / 32.0, -6.0, {0.5}, 1, -7.0, 2.0, 8),
                  std::invalid_argument);  // window precedes the start
}
