// Noise family construction, Brownian increments, and the stochastic terms.
#include "smag/noise.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "smag/operators.hpp"
#include "smag/rng.hpp"

namespace smag {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
constexpr double kSqrt2 = 1.41421356237309504880;

bool canonical_mode(int k1, int k2) { return k1 > 0 || (k1 == 0 && k2 > 0); }

void sort_entries(std::vector<ThetaEntry>& e) {
  std::sort(e.begin(), e.end(), [](const ThetaEntry& a, const ThetaEntry& b) {
    return a.k1 != b.k1 ? a.k1 < b.k1 : a.k2 < b.k2;
  });
}

// Euclidean bandwidth of the retained mode set.
int euclid_bandwidth(const GridSpec& g) {
  if (g.mask == MaskKind::square) return static_cast<int>(std::ceil(g.max_mode * kSqrt2));
  return g.max_mode;
}
}  // namespace

NoiseCoefficients NoiseCoefficients::shell(int n, const GridSpec& grid) {
  if (n < 1) throw std::invalid_argument("shell: N must be >= 1");
  if (2 * n > grid.max_mode) {
    throw std::invalid_argument("shell: 2N exceeds max_mode, annulus not resolvable on the grid");
  }
  std::vector<ThetaEntry> entries;
  for (int k1 = -2 * n; k1 <= 2 * n; ++k1) {
    for (int k2 = -2 * n; k2 <= 2 * n; ++k2) {
      const int r2 = k1 * k1 + k2 * k2;
      if (r2 >= n * n && r2 <= 4 * n * n) entries.push_back({k1, k2, 0.0});
    }
  }
  const double value = 1.0 / std::sqrt(static_cast<double>(entries.size()));
  for (ThetaEntry& e : entries) e.value = value;
  sort_entries(entries);
  NoiseCoefficients out;
  out.entries_ = std::move(entries);
  out.descriptor_ = "annulus N=" + std::to_string(n);
  return out;
}

NoiseCoefficients NoiseCoefficients::from_entries(std::vector<ThetaEntry> entries) {
  if (entries.empty()) throw std::invalid_argument("from_entries: empty support");
  sort_entries(entries);
  std::set<std::pair<int, int>> support;
  std::map<int, double> per_radius;
  double sum_sq = 0.0;
  for (const ThetaEntry& e : entries) {
    if (e.k1 == 0 && e.k2 == 0) throw std::invalid_argument("from_entries: k = 0 is not allowed");
    if (!(e.value >= 0.0)) throw std::invalid_argument("from_entries: theta values must be nonnegative");
    if (!support.insert({e.k1, e.k2}).second) throw std::invalid_argument("from_entries: duplicate wavenumber");
    const int r2 = e.k1 * e.k1 + e.k2 * e.k2;
    auto [it, fresh] = per_radius.emplace(r2, e.value);
    if (!fresh && std::abs(it->second - e.value) > 1e-12) {
      throw std::invalid_argument("from_entries: values on equal |k| differ, family not radially symmetric");
    }
    sum_sq += e.value * e.value;
  }
  // Quarter-turn closure makes sum theta^2 sigma tensor sigma proportional
  // to the identity pointwise.
  for (const ThetaEntry& e : entries) {
    if (!support.count({-e.k2, e.k1})) {
      throw std::invalid_argument("from_entries: support not closed under quarter-turn rotation");
    }
  }
  if (std::abs(sum_sq - 1.0) > 1e-12) throw std::invalid_argument("from_entries: sum of squares must equal 1");
  NoiseCoefficients out;
  out.entries_ = std::move(entries);
  out.descriptor_ = "custom";
  return out;
}

NoiseCoefficients NoiseCoefficients::unchecked(std::vector<ThetaEntry> entries, std::string descriptor) {
  NoiseCoefficients out;
  sort_entries(entries);
  out.entries_ = std::move(entries);
  out.descriptor_ = std::move(descriptor);
  return out;
}

double NoiseCoefficients::linf() const {
  double m = 0.0;
  for (const ThetaEntry& e : entries_) m = std::max(m, std::abs(e.value));
  return m;
}

double NoiseCoefficients::sum_sq() const {
  double s = 0.0;
  for (const ThetaEntry& e : entries_) s += e.value * e.value;
  return s;
}

int NoiseCoefficients::max_abs_wavenumber() const {
  double m = 0.0;
  for (const ThetaEntry& e : entries_) {
    m = std::max(m, std::sqrt(static_cast<double>(e.k1 * e.k1 + e.k2 * e.k2)));
  }
  return static_cast<int>(std::ceil(m));
}

VelocityField sigma_coefficients(int k1, int k2, const GridSpec& grid) {
  if (k1 == 0 && k2 == 0) throw std::invalid_argument("sigma_coefficients: k = 0 has no direction");
  VelocityField v{SpectralField(grid), SpectralField(grid)};
  const double nrm = std::sqrt(static_cast<double>(k1 * k1 + k2 * k2));
  v.u1.set_coeff(k1, k2, k2 / nrm);
  v.u2.set_coeff(k1, k2, -k1 / nrm);
  return v;
}

std::array<double, 2> sigma_at(int k1, int k2, const std::array<double, 2>& x) {
  const double arg = kTwoPi * (k1 * x[0] + k2 * x[1]);
  const double basis = canonical_mode(k1, k2) ? kSqrt2 * std::cos(arg) : -kSqrt2 * std::sin(arg);
  const double nrm = std::sqrt(static_cast<double>(k1 * k1 + k2 * k2));
  return {k2 / nrm * basis, -k1 / nrm * basis};
}

double covariance_residual(const NoiseCoefficients& theta, const std::vector<std::array<double, 2>>& points) {
  double worst = 0.0;
  for (const std::array<double, 2>& x : points) {
    double m00 = 0.0, m01 = 0.0, m11 = 0.0;
    for (const ThetaEntry& e : theta.entries()) {
      const std::array<double, 2> s = sigma_at(e.k1, e.k2, x);
      const double w = e.value * e.value;
      m00 += w * s[0] * s[0];
      m01 += w * s[0] * s[1];
      m11 += w * s[1] * s[1];
    }
    worst = std::max({worst, std::abs(m00 - 0.5), std::abs(m11 - 0.5), std::abs(m01)});
  }
  return worst;
}

BrownianDriver::BrownianDriver(std::uint64_t master_seed, std::uint32_t path_index,
                               std::vector<std::pair<int, int>> support, int refinement)
    : master_seed_(master_seed), path_index_(path_index), support_(std::move(support)), refinement_(refinement) {
  if (support_.empty()) throw std::invalid_argument("BrownianDriver: empty support");
  if (refinement_ < 1) throw std::invalid_argument("BrownianDriver: refinement must be >= 1");
}

std::vector<double> BrownianDriver::sample_increments(double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("BrownianDriver: dt must be nonnegative");
  const double scale = std::sqrt(dt / refinement_);
  std::vector<double> out(support_.size());
  for (std::size_t i = 0; i < support_.size(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < refinement_; ++j) {
      acc += normal_draw(master_seed_, path_index_, RngDomain::brownian, static_cast<std::uint32_t>(i),
                         fine_step_ + static_cast<std::uint32_t>(j));
    }
    out[i] = scale * acc;
  }
  fine_step_ += static_cast<std::uint32_t>(refinement_);
  return out;
}

SpectralField transport_increment(Workspace& ws, const SpectralField& omega, const LESModel& model,
                                  const NoiseCoefficients& theta, const std::vector<double>& dw) {
  return transport_increment(ws, ws.to_physical(omega), omega.grid(), model, theta, dw);
}

SpectralField transport_increment(Workspace& ws, const PhysicalField& omega_samples, const GridSpec& grid,
                                  const LESModel& model, const NoiseCoefficients& theta,
                                  const std::vector<double>& dw) {
  const std::vector<ThetaEntry>& entries = theta.entries();
  if (dw.size() != entries.size()) {
    throw std::invalid_argument("transport_increment: increment count does not match support size");
  }
  SpectralField v1c(grid), v2c(grid);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const ThetaEntry& e = entries[i];
    const double w = e.value * dw[i];
    if (w == 0.0) continue;
    const double nrm = std::sqrt(static_cast<double>(e.k1 * e.k1 + e.k2 * e.k2));
    v1c.add_coeff(e.k1, e.k2, w * e.k2 / nrm);
    v2c.add_coeff(e.k1, e.k2, -w * e.k1 / nrm);
  }
  const PhysicalField v1 = ws.to_physical(v1c, omega_samples.np);
  const PhysicalField v2 = ws.to_physical(v2c, omega_samples.np);
  PhysicalField fs(omega_samples.np);
  for (std::size_t i = 0; i < fs.v.size(); ++i) fs.v[i] = f_eval(model, omega_samples.v[i]);
  const auto [fx, fy] = ws.derivative_samples(fs);
  PhysicalField integrand(omega_samples.np);
  for (std::size_t i = 0; i < integrand.v.size(); ++i) {
    integrand.v[i] = -(v1.v[i] * fx.v[i] + v2.v[i] * fy.v[i]);
  }
  return ws.to_spectral(integrand, grid);
}

SpectralField ito_corrector(Workspace& ws, const SpectralField& omega, const LESModel& model) {
  const PhysicalField wsamp = ws.to_physical(omega);
  PhysicalField a(wsamp.np);
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    const double fp = f_prime(model, wsamp.v[i]);
    a.v[i] = 0.25 * fp * fp;
  }
  return flux_divergence(ws, a, omega, /*require_nonnegative=*/true);
}

std::vector<double> enstrophy_channel_pairings(Workspace& ws, const SpectralField& omega,
                                               const LESModel& model, const NoiseCoefficients& theta,
                                               int quad_np) {
  const GridSpec& g = omega.grid();
  const int big_mm = euclid_bandwidth(g) + theta.max_abs_wavenumber();
  if (quad_np < 2 * big_mm + 2) {
    throw std::invalid_argument("enstrophy_channel_pairings: quadrature grid under twice the product bandwidth");
  }
  GridSpec big;
  big.n = 2 * big_mm + 2;
  big.max_mode = big_mm;
  big.pad = 1.0;
  big.mask = MaskKind::radial;

  // Quadrature-grid Fourier window of f(omega), |m| <= big_mm.
  const PhysicalField wq = ws.to_physical(omega, quad_np);
  PhysicalField fq(quad_np);
  for (std::size_t i = 0; i < fq.v.size(); ++i) fq.v[i] = f_eval(model, wq.v[i]);
  const SpectralField fhat = ws.to_spectral(fq, big);

  // sigma_k . grad omega has bandwidth big_mm, so the pairing collapses to a
  // small-grid quadrature against the window of f(omega).
  int ns = std::max(g.padded(), 2 * big_mm + 2);
  if (ns % 2 != 0) ++ns;
  const PhysicalField win = ws.to_physical(fhat, ns);
  const PhysicalField g1 = ws.to_physical(spectral_derivative(omega, 0), ns);
  const PhysicalField g2 = ws.to_physical(spectral_derivative(omega, 1), ns);

  std::vector<double> out;
  out.reserve(theta.entries().size());
  for (const ThetaEntry& e : theta.entries()) {
    const double nrm = std::sqrt(static_cast<double>(e.k1 * e.k1 + e.k2 * e.k2));
    const bool canon = canonical_mode(e.k1, e.k2);
    double acc = 0.0;
    for (int i = 0; i < ns; ++i) {
      for (int j = 0; j < ns; ++j) {
        const double arg = kTwoPi * (e.k1 * static_cast<double>(i) + e.k2 * static_cast<double>(j)) / ns;
        const double basis = canon ? kSqrt2 * std::cos(arg) : -kSqrt2 * std::sin(arg);
        const std::size_t idx = static_cast<std::size_t>(i) * ns + j;
        acc += basis * (e.k2 * g1.v[idx] - e.k1 * g2.v[idx]) / nrm * win.v[idx];
      }
    }
    out.push_back(acc / (static_cast<double>(ns) * ns));
  }
  return out;
}

}  // namespace smag
