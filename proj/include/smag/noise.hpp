// Modulated transport noise: divergence-free basis fields
// sigma_k = (k_perp / |k|) e_k with k_perp = (k2, -k1), modulation weights
// theta with sum theta_k^2 = 1 (so that sum theta_k^2 sigma_k tensor sigma_k
// = I/2 pointwise for radially symmetric theta), counter-based Brownian
// increments, and the two stochastic forcing terms of the model: the
// projected transport increment -Pi(V . grad f(omega)) and the Ito
// corrector div((f'(omega))^2 / 4 grad omega).
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "smag/field.hpp"
#include "smag/les_model.hpp"
#include "smag/transform.hpp"

namespace smag {

struct ThetaEntry {
  int k1 = 0;
  int k2 = 0;
  double value = 0.0;
};

// Validated modulation family. Entries are kept sorted lexicographically in
// (k1, k2); the entry order defines the Brownian substream assignment.
class NoiseCoefficients {
 public:
  // Uniform weights on the annulus N <= |k| <= 2N. Requires 2N <= max_mode
  // so every sigma_k is resolvable on the grid.
  static NoiseCoefficients shell(int n, const GridSpec& grid);
  // Validates: k != 0, theta >= 0, radial symmetry (equal values on equal
  // |k|^2), and sum theta_k^2 = 1 within 1e-12.
  static NoiseCoefficients from_entries(std::vector<ThetaEntry> entries);
  // No validation; for deliberately broken fixtures in tests.
  static NoiseCoefficients unchecked(std::vector<ThetaEntry> entries, std::string descriptor = "unchecked");

  const std::vector<ThetaEntry>& entries() const { return entries_; }
  double linf() const;
  double sum_sq() const;
  const std::string& descriptor() const { return descriptor_; }
  // Largest Euclidean |k| over the support, rounded up.
  int max_abs_wavenumber() const;

 private:
  NoiseCoefficients() = default;
  std::vector<ThetaEntry> entries_;
  std::string descriptor_;
};

// Coefficients of sigma_k: u1 carries k2/|k| on mode k, u2 carries -k1/|k|.
VelocityField sigma_coefficients(int k1, int k2, const GridSpec& grid);

// Point evaluation of sigma_k (no grid involved).
std::array<double, 2> sigma_at(int k1, int k2, const std::array<double, 2>& x);

// max over points of the max-entry deviation of sum theta_k^2 sigma_k
// tensor sigma_k from I/2.
double covariance_residual(const NoiseCoefficients& theta, const std::vector<std::array<double, 2>>& points);

// Deterministic counter-based Brownian increments: one substream per support
// entry. A coarse driver with refinement m produces increments that are the
// exact sums of the m corresponding fine-step increments, so runs at dt and
// dt/m can share a single Brownian path.
class BrownianDriver {
 public:
  BrownianDriver(std::uint64_t master_seed, std::uint32_t path_index,
                 std::vector<std::pair<int, int>> support, int refinement = 1);

  // Increments of theta-independent standard Brownian motions over a step of
  // length dt, one per support entry; advances the internal step counter.
  std::vector<double> sample_increments(double dt);
  void reset() { fine_step_ = 0; }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint32_t path_index() const { return path_index_; }
  int refinement() const { return refinement_; }
  const std::vector<std::pair<int, int>>& support() const { return support_; }

 private:
  std::uint64_t master_seed_;
  std::uint32_t path_index_;
  std::vector<std::pair<int, int>> support_;
  int refinement_;
  std::uint32_t fine_step_ = 0;
};

// -Pi(V . grad f(omega)) with V = sum_k theta_k dW_k sigma_k. The gradient
// acts on the sampled composition through the full discrete spectrum, which
// makes the increment exactly mean-free and exactly enstrophy-neutral in the
// unprojected pairing.
SpectralField transport_increment(Workspace& ws, const SpectralField& omega, const LESModel& model,
                                  const NoiseCoefficients& theta, const std::vector<double>& dw);

// Sample-reusing form for fused steppers: omega_samples are the padded-grid
// samples of a field on `grid`.
SpectralField transport_increment(Workspace& ws, const PhysicalField& omega_samples, const GridSpec& grid,
                                  const LESModel& model, const NoiseCoefficients& theta,
                                  const std::vector<double>& dw);

// Pi div(a grad omega) with a(x) = (f'(omega(x)))^2 / 4, the Ito-Stratonovich
// conversion term of the transport noise under the half-identity covariance.
SpectralField ito_corrector(Workspace& ws, const SpectralField& omega, const LESModel& model);

// <sigma_k . grad omega, f(omega)> for every support entry, evaluated as the
// exact quadrature pairing on a quad_np x quad_np grid (spectral pairing
// below the product bandwidth, so cost is one pair of large transforms in
// total rather than per k).
std::vector<double> enstrophy_channel_pairings(Workspace& ws, const SpectralField& omega,
                                               const LESModel& model, const NoiseCoefficients& theta,
                                               int quad_np);

}  // namespace smag
