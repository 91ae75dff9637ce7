// Experiment harness over the stochastic LES dynamics: the ensemble study of
// convergence to the deterministic Smagorinsky limit as the noise spreads
// over larger shells, the Ito/Stratonovich agreement study under shared
// Brownian paths, a deterministic resolution-refinement (uniqueness) probe,
// the increment-moment statistic, and a machine-readable invariant suite
// covering every identity the model is supposed to satisfy. Studies fan out
// over a worker pool; aggregation is slot-indexed, so results are identical
// for any worker count.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smag/dynamics.hpp"

namespace smag {

// Path-index stride between ensemble rows: row r, path p draws its Brownian
// increments from path index r * kPathBlock + p, so doubling the path count
// extends an ensemble without perturbing the existing paths.
inline constexpr std::uint32_t kPathBlock = 1u << 20;

// Zero-mean field with one independent standard-normal coefficient per mode
// 0 < |l| <= band, rescaled so the L2 norm is exactly l2_norm. Coefficients
// are drawn from per-mode substreams, so every grid that resolves the band
// produces the same field (used to share initial data across resolutions).
SpectralField random_band_field(const GridSpec& grid, int band, double l2_norm,
                                std::uint64_t master_seed);

// --- scaling-limit study ---------------------------------------------------

struct ScalingStudySpec {
  SolverConfig base;        // stochastic template; theta is replaced per shell
  SolverConfig reference;   // deterministic limit run (same grid, dt, model)
  std::vector<int> shells;  // strictly increasing shell parameters N
  int paths_per_shell = 16;
  double delta = 1.0;       // distances in H^{-delta} and L^2(0,T;H^{1-delta})

  // shells strictly increasing, delta in (0, 2], base stochastic, reference
  // deterministic, and the shared fields (grid, nu, dt, horizon, model,
  // record_stride) equal between base and reference.
  void validate() const;
};

struct ConvergenceRow {
  int shell_n = 0;
  double theta_linf = 0.0;
  double mean_sup_hm = 0.0;  // mean over paths of sup_t ||w^N_t - wbar_t||_{H^{-delta}}
  double std_sup_hm = 0.0;   // ensemble standard deviation of the sup distances
  double mean_l2h = 0.0;     // mean of (int_0^T ||w^N - wbar||^2_{H^{1-delta}} dt)^{1/2}
  int paths = 0;             // completed paths
  double seconds = 0.0;      // summed wall time of this row's paths
  std::string note;          // non-empty iff the row aborted (guard violation)
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;  // ordered by shell N
  double delta = 1.0;
  int record_stride = 1;
  double reference_selfcheck = 0.0;  // sup_t H^{-delta} gap between the reference and its dt-halved rerun
  std::uint64_t master_seed = 0;
};

// One deterministic reference trajectory, then an ensemble of independent
// stochastic paths per shell; distances are to the fixed reference at the
// recorded times. Throws std::invalid_argument when the reference fails its
// dt-halving self-check; a guard violation inside a path aborts that row
// (diagnostics in the row note) without touching the others.
ConvergenceTable scaling_study(const ScalingStudySpec& spec, const SpectralField& omega0,
                               std::uint64_t master_seed);

// --- Ito/Stratonovich consistency -------------------------------------------

struct ConsistencyRow {
  double dt = 0.0;
  double mean_sup_l2 = 0.0;  // mean over paths of sup_t ||w_ito - w_strat||_{L2}
  double std_sup_l2 = 0.0;
  int paths = 0;
};

struct ConsistencyTable {
  std::vector<ConsistencyRow> rows;  // ordered as given (decreasing dt)
  double order_estimate = 0.0;       // least-squares slope of log mean vs log dt
  bool monotone = false;             // means strictly decrease with dt
  std::uint64_t master_seed = 0;
};

// For each dt, both schemes run from omega0 with the same Brownian path per
// path index; coarser steps aggregate the finest increments, so every row
// sees the same noise. dt_list must be strictly decreasing, every element an
// integer multiple of the last one and of the horizon. The scheme, dt, and
// record_stride of cfg are ignored; every step is recorded so each row
// reports the exact sup of its discrete gap process (a shared stride would
// sample the rows on different time grids and bias the cross-dt comparison).
ConsistencyTable scheme_consistency_study(const SolverConfig& cfg, const std::vector<double>& dt_list,
                                          int paths, const SpectralField& omega0,
                                          std::uint64_t master_seed);

// --- deterministic uniqueness probe -----------------------------------------

struct UniquenessPair {
  int res_a = 0;
  int res_b = 0;
  double sup_hm1 = 0.0;  // sup_t H^{-1} distance on the common modes
};

struct UniquenessReport {
  std::vector<UniquenessPair> pairs;  // all index pairs of the input list, in order
  std::vector<int> resolutions;
  bool cauchy = false;          // distances to the finest resolution strictly decrease
  ModelValidation model_audit;  // includes the monotonicity-of-g check
};

// Deterministic runs of the same config at each resolution n (max_mode
// n/2 - 1, shared dt and horizon), started from the restriction of omega0.
// Reports pairwise sup-in-time H^{-1} distances over the common modes.
UniquenessReport uniqueness_probe(const SolverConfig& cfg, const SpectralField& omega0,
                                  const std::vector<int>& resolutions);

// --- increment-moment statistic ----------------------------------------------

struct IncrementMomentResult {
  // max over tracked modes l and recorded pairs s < t of
  //   mean_paths <w_t - w_s, e_l>^2 / (|l|^4 |t - s|).
  double statistic = 0.0;
  int paths = 0;
};

IncrementMomentResult increment_moment_statistic(const SolverConfig& cfg, const SpectralField& omega0,
                                                 std::uint64_t master_seed, int paths);

// --- invariant suite ----------------------------------------------------------

// Deliberate defect hooks so tests can prove the suite detects violations.
enum class FaultInjection { none, flip_corrector_sign };

struct InvariantCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct InvariantReport {
  std::vector<InvariantCheck> checks;
  bool all_pass = false;
};

// Evaluates every checkable identity at the state omega0: model audit,
// advection enstrophy neutrality, flux dissipativity and self-adjointness,
// and (when cfg carries noise) the covariance identity, the two-route
// corrector agreement, the Ito drift balance behind the a-priori bound, the
// enstrophy channel pairings, transport linearity, and a short-ensemble
// increment-moment sanity bound. Failures are data, not errors.
InvariantReport invariant_suite(const SolverConfig& cfg, const SpectralField& omega0,
                                std::uint64_t master_seed,
                                FaultInjection fault = FaultInjection::none);

}  // namespace smag
