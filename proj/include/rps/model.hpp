#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rps {

using DriftFn =
    std::function<void(double t, const std::vector<double>& x, std::vector<double>& out)>;
using DriftJacobianFn =
    std::function<void(double t, const std::vector<double>& x, std::vector<double>& out_rowmajor)>;
using DiffusionFn = std::function<void(double t, std::vector<double>& out)>;

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Semilinear problem dX = (-Lambda X + f(t,X)) dt + g(t) dW. Lambda is
// diagonal in the working basis and represented by its eigenvalues; f and g
// are tau-periodic in t. Instances are immutable after construction and all
// evaluation callbacks must be pure, so a model can be shared across workers.
struct SdeModel {
  std::string name = "custom";
  int dimension = 1;
  std::vector<double> lambda_eigs;  // ascending, all positive
  double tau = 1.0;                 // period of f and g
  double c_f = 0.0;                 // one-sided Lipschitz constant of f, < lambda_eigs[0]
  double c_g = 0.0;                 // bound and Lipschitz constant of g
  double gamma = 1.0;               // polynomial growth exponent of f (metadata only)
  DriftFn drift;
  DiffusionFn diffusion;
  DriftJacobianFn drift_jacobian;  // empty -> finite differences in the solver

  double lambda_min() const { return lambda_eigs.front(); }
};

// t reduced to the fundamental period [0, tau). Exact for anchors and steps
// that are dyadic rationals, which keeps periodic re-anchoring bit-stable.
double wrap_phase(double t, double tau);

// Structural invariants: sorted positive eigenvalues, 0 < c_f < lambda_1,
// tau > 0, callbacks present. Throws ModelError.
void validate_model(const SdeModel& m);

// The two models used in the experiments:
//   example1: d=1, Lambda=pi,  f(t,x)=sin(2 pi t),          g=1, tau=1
//   example2: d=1, Lambda=2pi, f(t,x)=x - x^3 + cos(pi t),  g=1, tau=2
SdeModel builtin_example(const std::string& id);

// -Lambda x + f(t,x). Signals a model-evaluation failure with the offending
// (t, x) if the result is not finite.
void eval_drift(const SdeModel& m, double t, const std::vector<double>& x,
                std::vector<double>& out);
std::vector<double> eval_drift(const SdeModel& m, double t, const std::vector<double>& x);

struct AssumptionProbe {
  int n_points = 4096;      // random (x, y) pairs per time sample
  double box_radius = 5.0;  // pairs drawn uniformly in [-r, r]^d
  int t_samples = 64;
  double tol = 1e-6;
};

struct AssumptionReport {
  double probed_c_f = 0.0;        // max <x-y, f(t,x)-f(t,y)> / |x-y|^2 observed
  double probed_g_bound = 0.0;    // max |g(t)| observed
  double probed_g_lipschitz = 0.0;
  double periodicity_defect = 0.0;
  bool pass = false;
};

// Monte Carlo probe of the structural assumptions, with a deterministic
// dyadic refinement towards the origin where one-sided ratios tend to peak.
// A probe is a sound falsifier, not a prover: pass=true means no violation
// was observed at the sampled points.
AssumptionReport validate_assumptions(const SdeModel& m, const AssumptionProbe& probe = {});

}  // namespace rps
