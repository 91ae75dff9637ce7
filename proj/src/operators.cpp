// Operator kernels. All nonlinear products are formed on a padded physical
// grid and projected back onto the retained modes, so each operator is the
// exact Galerkin truncation of its continuum counterpart.
#include "smag/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace smag {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
constexpr double kFourPiSq = kTwoPi * kTwoPi;
}  // namespace

VelocityField biot_savart(const SpectralField& omega) {
  const GridSpec& g = omega.grid();
  VelocityField u{SpectralField(g), SpectralField(g)};
  omega.for_each([&](int l1, int l2, double c) {
    if (c == 0.0) return;
    const double inv = 1.0 / (kTwoPi * static_cast<double>(l1 * l1 + l2 * l2));
    // u = (d2 psi, -d1 psi) with psi_l = c_l / (4 pi^2 |l|^2); the mirror
    // pairing comes from d_j e_l = -2 pi l_j e_{-l}.
    u.u1.add_coeff(-l1, -l2, -l2 * inv * c);
    u.u2.add_coeff(-l1, -l2, l1 * inv * c);
  });
  return u;
}

SpectralField spectral_derivative(const SpectralField& f, int axis) {
  if (axis != 0 && axis != 1) throw std::invalid_argument("spectral_derivative: axis must be 0 or 1");
  SpectralField d(f.grid());
  f.for_each([&](int l1, int l2, double c) {
    if (c == 0.0) return;
    const double lj = static_cast<double>(axis == 0 ? l1 : l2);
    d.add_coeff(-l1, -l2, -kTwoPi * lj * c);
  });
  return d;
}

std::pair<PhysicalField, PhysicalField> gradient(Workspace& ws, const SpectralField& omega) {
  return {ws.to_physical(spectral_derivative(omega, 0)), ws.to_physical(spectral_derivative(omega, 1))};
}

SpectralField advection_term(Workspace& ws, const SpectralField& omega) {
  const VelocityField u = biot_savart(omega);
  const PhysicalField u1 = ws.to_physical(u.u1);
  const PhysicalField u2 = ws.to_physical(u.u2);
  const PhysicalField g1 = ws.to_physical(spectral_derivative(omega, 0));
  const PhysicalField g2 = ws.to_physical(spectral_derivative(omega, 1));
  PhysicalField prod(u1.np);
  for (std::size_t i = 0; i < prod.v.size(); ++i) prod.v[i] = -(u1.v[i] * g1.v[i] + u2.v[i] * g2.v[i]);
  return ws.to_spectral(prod, omega.grid());
}

SpectralField flux_divergence(Workspace& ws, const PhysicalField& a, const SpectralField& omega,
                              bool require_nonnegative) {
  const GridSpec& g = omega.grid();
  if (a.np < g.padded()) throw std::invalid_argument("flux_divergence: diffusivity grid coarser than padded grid");
  const PhysicalField g1 = ws.to_physical(spectral_derivative(omega, 0), a.np);
  const PhysicalField g2 = ws.to_physical(spectral_derivative(omega, 1), a.np);
  return flux_divergence(ws, a, g1, g2, g, require_nonnegative);
}

SpectralField flux_divergence(Workspace& ws, const PhysicalField& a, const PhysicalField& grad1,
                              const PhysicalField& grad2, const GridSpec& grid, bool require_nonnegative) {
  if (a.np < grid.padded()) throw std::invalid_argument("flux_divergence: diffusivity grid coarser than padded grid");
  if (a.np != grad1.np || a.np != grad2.np) {
    throw std::invalid_argument("flux_divergence: sample grids disagree");
  }
  if (require_nonnegative) {
    for (double v : a.v) {
      if (!(v >= 0.0)) throw std::invalid_argument("flux_divergence: diffusivity samples must be nonnegative");
    }
  }
  PhysicalField v1(a.np), v2(a.np);
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    v1.v[i] = a.v[i] * grad1.v[i];
    v2.v[i] = a.v[i] * grad2.v[i];
  }
  SpectralField div = spectral_derivative(ws.to_spectral(v1, grid), 0);
  div.axpy(1.0, spectral_derivative(ws.to_spectral(v2, grid), 1));
  return div;
}

SpectralField inverse_laplacian(const SpectralField& w) {
  SpectralField out = w;
  out.transform_each([](int l1, int l2, double c) { return -c / (kFourPiSq * (l1 * l1 + l2 * l2)); });
  return out;
}

SpectralField laplacian(const SpectralField& w) {
  SpectralField out = w;
  out.transform_each([](int l1, int l2, double c) { return -kFourPiSq * (l1 * l1 + l2 * l2) * c; });
  return out;
}

double sobolev_norm(const SpectralField& omega, double s) {
  double acc = 0.0;
  omega.for_each([&](int l1, int l2, double c) {
    acc += std::pow(static_cast<double>(l1 * l1 + l2 * l2), s) * c * c;
  });
  return std::sqrt(acc);
}

double gradient_energy(const SpectralField& omega) {
  double acc = 0.0;
  omega.for_each([&](int l1, int l2, double c) { acc += (l1 * l1 + l2 * l2) * c * c; });
  return kFourPiSq * acc;
}

double inner_product(const SpectralField& a, const SpectralField& b) {
  a.require_same_grid(b);
  double acc = 0.0;
  const std::vector<double>& av = a.raw();
  const std::vector<double>& bv = b.raw();
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  return acc;
}

}  // namespace smag
