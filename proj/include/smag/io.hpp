// Configuration, persistence, and reporting: strict JSON run specs with a
// canonical round-trippable rendering, the W2DS binary snapshot format for
// spectral fields, CSV and plot-ready table emission at full double
// precision, and SHA-256 digested run manifests.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "smag/dynamics.hpp"
#include "smag/experiments.hpp"

namespace smag {

inline constexpr const char* kCodeVersion = "smag-2d 1.0.0";

// File-surface failures: unreadable/unwritable paths, bad magic or version,
// truncation, malformed records. Distinct from std::invalid_argument so the
// command line can map them to its I/O exit code.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// --- initial conditions -------------------------------------------------------

struct IcSpec {
  enum class Kind { random_band, single_mode, snapshot };
  Kind kind = Kind::random_band;
  int band = 4;            // random_band
  double amplitude = 1.0;  // random_band (exact L2 norm) and single_mode
  int l1 = 1, l2 = 1;      // single_mode
  std::string path;        // snapshot
};

// Realizes the configured initial state on the grid. random_band draws from
// the master seed's initial-state stream; snapshot loads a W2DS file and
// requires its grid to match.
SpectralField build_initial_condition(const IcSpec& ic, const GridSpec& grid,
                                      std::uint64_t master_seed);

// --- run specs ----------------------------------------------------------------

struct NoiseSpec {
  enum class Kind { none, shell, entries };
  Kind kind = Kind::none;
  int shell_n = 2;
  std::vector<ThetaEntry> entries;
};

// Model parameters exactly as configured. The solver's LESModel stores the
// derived coefficient (4/3) cs_delta; keeping the raw value here makes the
// canonical rendering an exact fixed point of parse followed by render.
struct ModelSpec {
  enum class Kind { smagorinsky, linear };
  Kind kind = Kind::smagorinsky;
  double cs_delta = 0.05;  // smagorinsky
  double c = 0.0;          // linear
};

// A parsed configuration document: either a single-run solver spec or a
// scaling-study spec (dispatched on the "shells" key), plus the initial
// condition, the master seed, and the consistency-study knobs.
struct ParsedConfig {
  enum class Kind { solver, scaling };
  Kind kind = Kind::solver;
  SolverConfig solver;       // valid for kind == solver
  ScalingStudySpec scaling;  // valid for kind == scaling
  NoiseSpec noise;           // provenance of solver.theta / scaling.base.theta
  ModelSpec model;           // provenance of the LESModel in solver / scaling.base
  IcSpec ic;
  std::uint64_t master_seed = 0;
  std::vector<double> dt_list = {2e-3, 1e-3, 5e-4};  // consistency subcommand
  int paths = 8;                                     // consistency subcommand
};

// Strict parse: unknown keys are rejected with their full key path, values
// are type- and constraint-checked, and every structural invariant (grid
// bounds, scheme/noise pairing, theta normalization, shell monotonicity) is
// enforced before returning. Throws std::invalid_argument with the offending
// key named.
ParsedConfig parse_config(const std::string& text);

// Canonical JSON rendering with every field explicit; parse_config is its
// exact inverse (render(parse(render(c))) == render(c)).
std::string render_config(const ParsedConfig& config);

// --- spectral snapshots ---------------------------------------------------------

// Binary format: magic "W2DS", u32 version, u32 n, u32 max_mode, u64 count,
// then count (i32 l1, i32 l2, f64 c) records for the nonzero coefficients,
// all little-endian. read_snapshot(write_snapshot(w)) is bit-exact.
void write_snapshot(const SpectralField& field, const std::string& path);
SpectralField read_snapshot(const std::string& path);

// --- reports -------------------------------------------------------------------

// CSV files carry a documented header row; numbers use 17 significant
// digits. Plotdata emits one two-column (time, value) file per series and
// returns the written paths.
void write_run_record_csv(const RunRecord& rec, const std::string& path);
void write_convergence_csv(const ConvergenceTable& table, const std::string& path);
void write_consistency_csv(const ConsistencyTable& table, const std::string& path);
std::vector<std::string> write_run_record_plotdata(const RunRecord& rec, const std::string& dir,
                                                   const std::string& stem);

// --- manifests -------------------------------------------------------------------

struct ManifestFile {
  std::string name;  // path relative to the manifest's directory
  std::uint64_t bytes = 0;
  std::string sha256;
};

// Everything needed to reproduce a run bit-exactly: the canonical config
// echo, the seed and per-path indices, the code version, and a digested
// inventory of every produced file. Written last, after all digests.
struct RunManifest {
  std::string command;
  std::string config_echo;  // canonical JSON from render_config
  std::uint64_t master_seed = 0;
  std::string code_version = kCodeVersion;
  std::vector<std::uint32_t> path_indices;
  std::vector<ManifestFile> files;
};

std::string sha256_file(const std::string& path);
void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace smag
