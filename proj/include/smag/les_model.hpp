// Closure model pairs (f, g): a slope limiter f applied to vorticity inside
// the transport noise, and the companion g with g' = (f')^2 / 4 that yields
// the deterministic eddy-viscosity limit div(g'(omega) grad omega).
// Supported families: Smagorinsky f(r) = (4/3) c |r|^{1/2} r, general
// power laws f(r) = c |r|^alpha r, and linear f(r) = c r (c = 0 switches the
// model off entirely). An optional regularization replaces |r| by
// sqrt(r^2 + eps^2) in f; g then follows by quadrature of (f')^2 / 4.
#pragma once

#include <functional>
#include <string>
#include <vector>

namespace smag {

struct LESModel {
  enum class Kind { smagorinsky, power_law, linear };

  Kind kind = Kind::smagorinsky;
  double alpha = 0.5;        // exponent in f(r) = coefficient * |r|^alpha * r
  double coefficient = 0.0;  // c above; smagorinsky stores (4/3) * cs_delta
  double epsilon_reg = 0.0;  // |r| -> sqrt(r^2 + eps^2) inside f when > 0
  // Growth constants with |f'(r)| <= growth_a + growth_b |r|^alpha.
  double growth_a = 0.0;
  double growth_b = 0.0;

  // cs_delta = c_s * Delta, the Smagorinsky constant times the filter width.
  static LESModel smagorinsky(double cs_delta, double epsilon_reg = 0.0);
  static LESModel power_law(double c, double alpha, double epsilon_reg = 0.0);
  static LESModel linear(double c);

  std::string describe() const;
};

double f_eval(const LESModel& m, double r);
double f_prime(const LESModel& m, double r);
double g_eval(const LESModel& m, double r);
double g_prime(const LESModel& m, double r);

// Function-table form used by the structural audit, so that hand-built
// (including deliberately inconsistent) pairs can be checked too.
struct ModelFunctions {
  std::function<double(double)> f;
  std::function<double(double)> f_prime;
  std::function<double(double)> g;
  std::function<double(double)> g_prime;
  double alpha = 0.5;
  double growth_a = 0.0;
  double growth_b = 0.0;
};

ModelFunctions to_functions(const LESModel& m);

struct ModelCheckFailure {
  std::string check;
  double witness = 0.0;  // sample point where the bound failed
  std::string detail;
};

struct ModelValidation {
  bool ok = true;
  std::vector<ModelCheckFailure> failures;
  double fitted_lipschitz = 0.0;  // C in |g(y)-g(x)| <= C (1+|x|^{2a}+|y|^{2a}) |y-x|
};

// Audits the structural assumptions on (f, g) over [lo, hi] with n samples:
// g(0) = 0, g nondecreasing, g' = (f')^2 / 4, the growth bounds on f and f',
// and finiteness of the weighted Lipschitz constant of g.
ModelValidation validate_model(const ModelFunctions& m, double lo, double hi, int n);
ModelValidation validate_model(const LESModel& m, double lo = -8.0, double hi = 8.0, int n = 2001);

}  // namespace smag
