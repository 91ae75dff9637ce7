// Time integration of the spectral vorticity dynamics
//   d omega = [-u . grad omega + div(g'(omega) grad omega)] dt   (deterministic)
//   d omega = [-u . grad omega + div((f'(omega))^2/4 grad omega)] dt
//             - sum_k theta_k sigma_k . grad f(omega) dW_k        (Ito)
// and the Stratonovich form without the corrector, via Lie splitting: an
// explicit Euler (or Heun-in-the-noise) jump step followed by the exact
// integrating factor exp(-4 pi^2 nu |l|^2 dt) for the viscous part.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "smag/field.hpp"
#include "smag/les_model.hpp"
#include "smag/noise.hpp"
#include "smag/transform.hpp"

namespace smag {

enum class Scheme { ito_em, stratonovich_heun, deterministic };

struct SolverConfig {
  GridSpec grid;
  double nu = 0.0;
  double dt = 1e-3;
  double horizon = 1.0;
  Scheme scheme = Scheme::deterministic;
  LESModel model = LESModel::linear(0.0);
  std::optional<NoiseCoefficients> theta;
  int record_stride = 10;
  double enstrophy_guard = 2.0;

  // Structural validation: positive step and horizon with horizon an integer
  // multiple of dt, noise present exactly for the stochastic schemes, and a
  // noise support resolvable on the grid.
  void validate() const;
  int steps() const;
};

// Thrown when a run leaves its stable regime: enstrophy guard violation,
// non-finite coefficients, or a crossed stability limit.
class NumericAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Largest stable time steps estimated from the current state: explicit
// diffusion requires dt <= 1.5 / (4 pi^2 B^2 max g') and transport requires
// dt <= 0.5 / (2 pi B max |u|), with B the Euclidean mode bandwidth.
struct StabilityReport {
  double flux_dt_max = 0.0;
  double cfl_dt_max = 0.0;
};

StabilityReport stability_limits(Workspace& ws, const SpectralField& omega, const SolverConfig& cfg);

// Coefficient modes tracked in every run record: the first two shells.
inline constexpr std::array<std::array<int, 2>, 8> kTrackedModes = {
    {{0, 1}, {1, 0}, {1, 1}, {1, -1}, {0, -1}, {-1, 0}, {-1, -1}, {-1, 1}}};

struct RunRecord {
  std::vector<double> times;
  std::vector<double> l2_norms;
  std::vector<double> h1_seminorms;      // ||grad omega||_{L2}
  std::vector<double> dissipation_acc;   // running sum of per-step viscous drops of ||omega||^2
  std::vector<double> grad_sq_integral;  // trapezoid-in-time of ||grad omega||^2 over [0, t]
  std::vector<std::array<double, 8>> mode_track;
  std::vector<SpectralField> snapshots;  // filled only when requested
  std::uint64_t master_seed = 0;
  std::uint32_t path_index = 0;
  int steps = 0;
};

// One step of each scheme (jump part plus viscous factor). dw holds one
// Brownian increment per noise support entry.
SpectralField step_ito(Workspace& ws, const SpectralField& omega, const SolverConfig& cfg,
                       const std::vector<double>& dw);
SpectralField step_stratonovich(Workspace& ws, const SpectralField& omega, const SolverConfig& cfg,
                                const std::vector<double>& dw);
SpectralField step_deterministic(Workspace& ws, const SpectralField& omega, const SolverConfig& cfg);

// Integrates from omega0 over the full horizon. The driver supplies Brownian
// increments for stochastic schemes (must be null for deterministic runs) and
// its support must match the noise support entry for entry. Records norms,
// tracked modes, and the viscous dissipation telescope every record_stride
// steps (plus t = 0 and the final time), optionally with state snapshots.
// Throws NumericAbort when the enstrophy guard, a stability limit, or
// finiteness is violated mid-run.
RunRecord run_trajectory(Workspace& ws, const SolverConfig& cfg, const SpectralField& omega0,
                         BrownianDriver* driver, bool keep_snapshots = false);

}  // namespace smag
