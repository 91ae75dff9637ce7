// Model pair evaluation and structural audit. Every family is handled in the
// unified form f(r) = C rho^alpha r with rho = sqrt(r^2 + eps^2), for which
//   f'(r)  = C (rho^alpha + alpha r^2 rho^{alpha-2}),
//   g'(r)  = f'(r)^2 / 4,
//   g(r)   = C^2 (1+alpha)^2 / (4 (2 alpha + 1)) |r|^{2 alpha} r   (eps = 0),
// and g by adaptive Simpson quadrature of g' when eps > 0.
#include "smag/les_model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace smag {

namespace {

double regularized_mag(const LESModel& m, double r) {
  return std::sqrt(r * r + m.epsilon_reg * m.epsilon_reg);
}

void set_growth(LESModel& m) {
  const double slope = m.coefficient * (1.0 + m.alpha);
  m.growth_b = slope;
  m.growth_a = m.epsilon_reg > 0.0 ? slope * std::pow(m.epsilon_reg, m.alpha) : 0.0;
}

// Adaptive Simpson for the regularized g; g' is smooth once eps > 0.
double simpson(const LESModel& m, double a, double b, double fa, double fm, double fb, double whole,
               double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double lm = 0.5 * (a + mid), rm = 0.5 * (mid + b);
  const double flm = g_prime(m, lm), frm = g_prime(m, rm);
  const double left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson(m, a, mid, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(m, mid, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

LESModel LESModel::smagorinsky(double cs_delta, double epsilon_reg) {
  if (cs_delta < 0.0) throw std::invalid_argument("smagorinsky: cs_delta must be nonnegative");
  LESModel m;
  m.kind = Kind::smagorinsky;
  m.alpha = 0.5;
  m.coefficient = (4.0 / 3.0) * cs_delta;
  m.epsilon_reg = epsilon_reg;
  set_growth(m);
  return m;
}

LESModel LESModel::power_law(double c, double alpha, double epsilon_reg) {
  if (c < 0.0) throw std::invalid_argument("power_law: coefficient must be nonnegative");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("power_law: alpha must lie in [0, 1]");
  LESModel m;
  m.kind = Kind::power_law;
  m.alpha = alpha;
  m.coefficient = c;
  m.epsilon_reg = epsilon_reg;
  set_growth(m);
  return m;
}

LESModel LESModel::linear(double c) {
  if (c < 0.0) throw std::invalid_argument("linear: coefficient must be nonnegative");
  LESModel m;
  m.kind = Kind::linear;
  m.alpha = 0.0;
  m.coefficient = c;
  m.epsilon_reg = 0.0;
  set_growth(m);
  return m;
}

std::string LESModel::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::smagorinsky:
      os << "smagorinsky(cs_delta=" << coefficient * 3.0 / 4.0 << ")";
      break;
    case Kind::power_law:
      os << "power_law(c=" << coefficient << ", alpha=" << alpha << ")";
      break;
    case Kind::linear:
      os << "linear(c=" << coefficient << ")";
      break;
  }
  if (epsilon_reg > 0.0) os << " eps=" << epsilon_reg;
  return os.str();
}

double f_eval(const LESModel& m, double r) {
  return m.coefficient * std::pow(regularized_mag(m, r), m.alpha) * r;
}

double f_prime(const LESModel& m, double r) {
  if (m.alpha == 0.0) return m.coefficient;
  const double rho2 = r * r + m.epsilon_reg * m.epsilon_reg;
  if (rho2 == 0.0) return 0.0;
  const double rho = std::sqrt(rho2);
  return m.coefficient * (std::pow(rho, m.alpha) + m.alpha * r * r * std::pow(rho, m.alpha - 2.0));
}

double g_prime(const LESModel& m, double r) {
  const double fp = f_prime(m, r);
  return 0.25 * fp * fp;
}

double g_eval(const LESModel& m, double r) {
  if (m.epsilon_reg == 0.0) {
    const double c1 = m.coefficient * (1.0 + m.alpha);
    const double scale = c1 * c1 / (4.0 * (2.0 * m.alpha + 1.0));
    return scale * std::pow(std::abs(r), 2.0 * m.alpha) * r;
  }
  if (r == 0.0) return 0.0;
  const double a = 0.0, b = std::abs(r);
  const double fa = g_prime(m, a), fb = g_prime(m, b), fm = g_prime(m, 0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double val = simpson(m, a, b, fa, fm, fb, whole, 1e-14 * (1.0 + std::abs(whole)), 40);
  return r > 0.0 ? val : -val;
}

ModelFunctions to_functions(const LESModel& m) {
  ModelFunctions fn;
  fn.f = [m](double r) { return f_eval(m, r); };
  fn.f_prime = [m](double r) { return f_prime(m, r); };
  fn.g = [m](double r) { return g_eval(m, r); };
  fn.g_prime = [m](double r) { return g_prime(m, r); };
  fn.alpha = m.alpha;
  fn.growth_a = m.growth_a;
  fn.growth_b = m.growth_b;
  return fn;
}

ModelValidation validate_model(const ModelFunctions& m, double lo, double hi, int n) {
  if (!(hi > lo) || n < 3) throw std::invalid_argument("validate_model: need hi > lo and n >= 3");
  ModelValidation out;
  auto fail = [&](const std::string& check, double witness, const std::string& detail) {
    out.ok = false;
    out.failures.push_back({check, witness, detail});
  };

  if (std::abs(m.g(0.0)) > 1e-12) fail("g(0) = 0", 0.0, "g(0) nonzero");
  if (std::abs(m.f(0.0)) > 1e-12) fail("f(0) = 0", 0.0, "f(0) nonzero");

  const double h = (hi - lo) / (n - 1);
  double prev_g = 0.0;
  bool monotone_reported = false, relation_reported = false;
  bool fgrowth_reported = false, fpgrowth_reported = false;
  for (int i = 0; i < n; ++i) {
    const double r = lo + i * h;
    const double gv = m.g(r), gp = m.g_prime(r), fp = m.f_prime(r), fv = m.f(r);
    if (!std::isfinite(gv) || !std::isfinite(gp) || !std::isfinite(fp) || !std::isfinite(fv)) {
      fail("finite values", r, "non-finite model evaluation");
      break;
    }
    if (i > 0 && gv < prev_g - 1e-12 * (1.0 + std::abs(gv)) && !monotone_reported) {
      fail("g nondecreasing", r, "g decreased between adjacent samples");
      monotone_reported = true;
    }
    prev_g = gv;
    if (std::abs(gp - 0.25 * fp * fp) > 1e-10 * (1.0 + fp * fp) && !relation_reported) {
      fail("g' = (f')^2 / 4", r, "companion relation violated");
      relation_reported = true;
    }
    const double ra = std::pow(std::abs(r), m.alpha);
    if (std::abs(fp) > m.growth_a + m.growth_b * ra + 1e-9 * (1.0 + ra) && !fpgrowth_reported) {
      fail("|f'| <= A + B |r|^alpha", r, "derivative growth bound violated");
      fpgrowth_reported = true;
    }
    const double fbound = m.growth_a * std::abs(r) + m.growth_b / (1.0 + m.alpha) * ra * std::abs(r);
    if (std::abs(fv) > fbound + 1e-9 * (1.0 + fbound) && !fgrowth_reported) {
      fail("|f| <= A |r| + B |r|^{1+alpha} / (1+alpha)", r, "growth bound violated");
      fgrowth_reported = true;
    }
  }

  // Weighted Lipschitz constant of g over adjacent and strided sample pairs.
  double cfit = 0.0;
  const int stride = std::max(1, n / 37);
  for (int i = 0; i + 1 < n; ++i) {
    for (int j : {i + 1, std::min(n - 1, i + stride)}) {
      const double x = lo + i * h, y = lo + j * h;
      if (y <= x) continue;
      const double w = (1.0 + std::pow(std::abs(x), 2.0 * m.alpha) + std::pow(std::abs(y), 2.0 * m.alpha)) * (y - x);
      cfit = std::max(cfit, std::abs(m.g(y) - m.g(x)) / w);
    }
  }
  out.fitted_lipschitz = cfit;
  if (!std::isfinite(cfit)) fail("weighted Lipschitz bound on g", lo, "fitted constant not finite");
  return out;
}

ModelValidation validate_model(const LESModel& m, double lo, double hi, int n) {
  return validate_model(to_functions(m), lo, hi, n);
}

}  // namespace smag
