// Spectral operators for the vorticity equation: Biot-Savart inversion,
// derivatives, the dealiased advection term, divergence-form diffusion, and
// Sobolev norms. Conventions: curl u = d1 u2 - d2 u1, grad_perp = (-d2, d1),
// u = -grad_perp (-Lap)^{-1} omega, so curl(u) recovers omega exactly.
#pragma once

#include <utility>

#include "smag/field.hpp"
#include "smag/transform.hpp"

namespace smag {

// u = -grad_perp((-Lap)^{-1} omega), returned as coefficients.
VelocityField biot_savart(const SpectralField& omega);

// Band-limited derivative along axis (0 -> x1, 1 -> x2), as coefficients.
SpectralField spectral_derivative(const SpectralField& f, int axis);

// (d1 omega, d2 omega) sampled on the padded grid.
std::pair<PhysicalField, PhysicalField> gradient(Workspace& ws, const SpectralField& omega);

// Pi(-u . grad omega) with u = biot_savart(omega), dealiased by padding.
SpectralField advection_term(Workspace& ws, const SpectralField& omega);

// Pi(div(a grad omega)) for sample-space diffusivity a on a quadrature grid
// at least as fine as the field's padded grid. Rejects negative a when
// diffusion semantics are requested.
SpectralField flux_divergence(Workspace& ws, const PhysicalField& a, const SpectralField& omega,
                              bool require_nonnegative = true);

// Same with the gradient samples of omega already at hand (all three sample
// fields on the same grid, at least as fine as the padded grid of `grid`).
SpectralField flux_divergence(Workspace& ws, const PhysicalField& a, const PhysicalField& grad1,
                              const PhysicalField& grad2, const GridSpec& grid,
                              bool require_nonnegative = true);

// Mode-wise division by -4 pi^2 |l|^2, the inverse of `laplacian`.
SpectralField inverse_laplacian(const SpectralField& w);

// Mode-wise multiplication by -4 pi^2 |l|^2.
SpectralField laplacian(const SpectralField& w);

// ||omega||_{H^s} = sqrt(sum |l|^{2s} c_l^2), lattice-index weights.
double sobolev_norm(const SpectralField& omega, double s);

// Physical gradient energy int |grad omega|^2 = 4 pi^2 sum |l|^2 c_l^2.
double gradient_energy(const SpectralField& omega);

// L2 pairing <a, b> = sum_l a_l b_l (orthonormal basis).
double inner_product(const SpectralField& a, const SpectralField& b);

}  // namespace smag
