#include "rps/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rps/rng.hpp"

namespace rps {

namespace {

std::string point_to_string(double t, const std::vector<double>& x) {
  std::ostringstream os;
  os << "t=" << t << ", x=(";
  for (size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace

double wrap_phase(double t, double tau) {
  double p = t - tau * std::floor(t / tau);
  if (p >= tau) p = 0.0;  // guard the rounding case t/tau just below an integer
  return p;
}

void validate_model(const SdeModel& m) {
  if (m.dimension < 1) throw ModelError("model dimension must be positive");
  if (int(m.lambda_eigs.size()) != m.dimension)
    throw ModelError("lambda_eigs size does not match dimension");
  if (!std::is_sorted(m.lambda_eigs.begin(), m.lambda_eigs.end()))
    throw ModelError("lambda_eigs must be sorted ascending");
  if (!(m.lambda_eigs.front() > 0.0)) throw ModelError("all eigenvalues must be positive");
  if (!(m.c_f > 0.0 && m.c_f < m.lambda_min()))
    throw ModelError("model requires 0 < c_f < lambda_1");
  if (!(m.tau > 0.0)) throw ModelError("period tau must be positive");
  if (!(m.c_g >= 0.0)) throw ModelError("c_g must be nonnegative");
  if (!(m.gamma >= 1.0)) throw ModelError("gamma must be >= 1");
  if (!m.drift || !m.diffusion) throw ModelError("drift and diffusion callbacks are required");
}

SdeModel builtin_example(const std::string& id) {
  using std::numbers::pi;
  SdeModel m;
  if (id == "example1") {
    m.name = "example1";
    m.dimension = 1;
    m.lambda_eigs = {pi};
    m.tau = 1.0;
    m.c_f = 1.0;
    m.c_g = 1.0;
    m.gamma = 1.0;
    m.drift = [](double t, const std::vector<double>&, std::vector<double>& out) {
      out[0] = std::sin(2.0 * pi * t);
    };
    m.drift_jacobian = [](double, const std::vector<double>&, std::vector<double>& out) {
      out[0] = 0.0;
    };
    m.diffusion = [](double, std::vector<double>& out) { out[0] = 1.0; };
  } else if (id == "example2") {
    m.name = "example2";
    m.dimension = 1;
    m.lambda_eigs = {2.0 * pi};
    m.tau = 2.0;
    m.c_f = 1.0;
    m.c_g = 1.0;
    m.gamma = 3.0;
    m.drift = [](double t, const std::vector<double>& x, std::vector<double>& out) {
      out[0] = x[0] - x[0] * x[0] * x[0] + std::cos(pi * t);
    };
    m.drift_jacobian = [](double, const std::vector<double>& x, std::vector<double>& out) {
      out[0] = 1.0 - 3.0 * x[0] * x[0];
    };
    m.diffusion = [](double, std::vector<double>& out) { out[0] = 1.0; };
  } else {
    throw ModelError("unknown builtin model '" + id + "' (expected example1 or example2)");
  }
  return m;
}

void eval_drift(const SdeModel& m, double t, const std::vector<double>& x,
                std::vector<double>& out) {
  if (int(x.size()) != m.dimension) throw ModelError("state dimension mismatch");
  out.resize(x.size());
  m.drift(t, x, out);
  for (int i = 0; i < m.dimension; ++i) {
    out[i] -= m.lambda_eigs[i] * x[i];
    if (!std::isfinite(out[i]))
      throw ModelError("drift evaluation is not finite at " + point_to_string(t, x));
  }
}

std::vector<double> eval_drift(const SdeModel& m, double t, const std::vector<double>& x) {
  std::vector<double> out;
  eval_drift(m, t, x, out);
  return out;
}

AssumptionReport validate_assumptions(const SdeModel& m, const AssumptionProbe& probe) {
  AssumptionReport rep;
  if (probe.n_points < 1 || probe.t_samples < 1)
    throw std::invalid_argument("probe counts must be >= 1");
  const int d = m.dimension;
  const uint64_t probe_seed = 0x9b0de5a1u;

  std::vector<double> x(d), y(d), fx(d), fy(d), g1(d), g2(d);
  auto uniform_in_box = [&](int64_t cell, uint32_t comp_base, std::vector<double>& v,
                            double radius) {
    for (int c = 0; c < d; ++c)
      v[c] = radius * (2.0 * keyed_uniform(probe_seed, 0, cell, comp_base + uint32_t(c)) - 1.0);
  };

  double max_ratio = 0.0;     // over pairs; 0 matches the x-independent case exactly
  bool any_pair = false;
  double g_bound = 0.0, g_lip = 0.0, defect = 0.0;

  for (int ti = 0; ti < probe.t_samples; ++ti) {
    const double t = m.tau * double(ti) / double(probe.t_samples);
    for (int k = 0; k < probe.n_points; ++k) {
      const int64_t cell = int64_t(ti) * probe.n_points + k;
      uniform_in_box(cell, 0, x, probe.box_radius);
      uniform_in_box(cell, uint32_t(d), y, probe.box_radius);
      m.drift(t, x, fx);
      m.drift(t, y, fy);
      double num = 0.0, den = 0.0;
      for (int c = 0; c < d; ++c) {
        num += (x[c] - y[c]) * (fx[c] - fy[c]);
        den += (x[c] - y[c]) * (x[c] - y[c]);
      }
      if (den > 0.0) {
        const double ratio = num / den;
        max_ratio = any_pair ? std::max(max_ratio, ratio) : ratio;
        any_pair = true;
      }
      // periodicity defect of f at (t, x)
      m.drift(t + m.tau, x, fy);
      double df = 0.0;
      for (int c = 0; c < d; ++c) df = std::max(df, std::abs(fy[c] - fx[c]));
      defect = std::max(defect, df);
    }
    // dyadic refinement towards the origin along probe directions
    for (int k = 0; k < 24; ++k) {
      const double scale = probe.box_radius * std::ldexp(1.0, -k);
      uniform_in_box(int64_t(probe.t_samples) * probe.n_points + k, 0, x, 1.0);
      double nx = 0.0;
      for (int c = 0; c < d; ++c) nx += x[c] * x[c];
      if (nx == 0.0) continue;
      for (int c = 0; c < d; ++c) {
        y[c] = 0.5 * scale * x[c] / std::sqrt(nx);
        x[c] = scale * x[c] / std::sqrt(nx);
      }
      m.drift(t, x, fx);
      m.drift(t, y, fy);
      double num = 0.0, den = 0.0;
      for (int c = 0; c < d; ++c) {
        num += (x[c] - y[c]) * (fx[c] - fy[c]);
        den += (x[c] - y[c]) * (x[c] - y[c]);
      }
      if (den > 0.0) {
        const double ratio = num / den;
        max_ratio = any_pair ? std::max(max_ratio, ratio) : ratio;
        any_pair = true;
      }
    }

    m.diffusion(t, g1);
    double ng = 0.0;
    for (int c = 0; c < d; ++c) ng += g1[c] * g1[c];
    g_bound = std::max(g_bound, std::sqrt(ng));
    m.diffusion(t + m.tau, g2);
    for (int c = 0; c < d; ++c) defect = std::max(defect, std::abs(g2[c] - g1[c]));
    if (ti > 0) {
      const double t_prev = m.tau * double(ti - 1) / double(probe.t_samples);
      m.diffusion(t_prev, g2);
      double dg = 0.0;
      for (int c = 0; c < d; ++c) dg += (g1[c] - g2[c]) * (g1[c] - g2[c]);
      g_lip = std::max(g_lip, std::sqrt(dg) / (t - t_prev));
    }
  }

  rep.probed_c_f = any_pair ? max_ratio : 0.0;
  rep.probed_g_bound = g_bound;
  rep.probed_g_lipschitz = g_lip;
  rep.periodicity_defect = defect;

  const double lambda1 = m.lambda_eigs.empty() ? 0.0 : m.lambda_min();
  rep.pass = lambda1 > 0.0 && m.c_f > 0.0 && m.c_f < lambda1 && rep.probed_c_f < lambda1 &&
             rep.probed_c_f <= m.c_f + probe.tol && rep.probed_g_bound <= m.c_g + probe.tol &&
             rep.probed_g_lipschitz <= m.c_g + probe.tol && rep.periodicity_defect <= probe.tol;
  return rep;
}

}  // namespace rps
