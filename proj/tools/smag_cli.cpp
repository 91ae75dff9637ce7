// Command-line front end: single-path and deterministic runs, scaling and
// scheme-consistency studies, the invariant verification suite, and snapshot
// inspection. Every run directory receives CSV/plotdata reports plus a
// SHA-256 digested manifest (written last) from which the run can be
// reproduced bit-exactly. Exit codes: 0 success, 1 validation or a failed
// verification, 2 numeric abort, 3 I/O failure.
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smag/dynamics.hpp"
#include "smag/experiments.hpp"
#include "smag/io.hpp"
#include "smag/operators.hpp"

namespace fs = std::filesystem;
using namespace smag;

namespace {

std::string slurp_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("config: read failure on '" + path + "'");
  return ss.str();
}

ParsedConfig load_config(const std::string& path) { return parse_config(slurp_config(path)); }

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

// Digest a freshly written file and append it to the manifest inventory.
void track_file(RunManifest& manifest, const fs::path& dir, const std::string& name) {
  const fs::path full = dir / name;
  ManifestFile entry;
  entry.name = name;
  entry.bytes = static_cast<std::uint64_t>(fs::file_size(full));
  entry.sha256 = sha256_file(full.string());
  manifest.files.push_back(std::move(entry));
}

void track_files(RunManifest& manifest, const fs::path& dir,
                 const std::vector<std::string>& paths) {
  for (const std::string& p : paths) track_file(manifest, dir, fs::path(p).filename().string());
}

// Trajectory outputs shared by simulate and deterministic: the record CSV,
// per-series plotdata, and the final state snapshot.
void emit_trajectory(const RunRecord& rec, const SpectralField& final_state, const fs::path& dir,
                     RunManifest& manifest) {
  write_run_record_csv(rec, (dir / "run.csv").string());
  track_file(manifest, dir, "run.csv");
  track_files(manifest, dir, write_run_record_plotdata(rec, dir.string(), "run"));
  write_snapshot(final_state, (dir / "final.w2ds").string());
  track_file(manifest, dir, "final.w2ds");
}

void finish_manifest(RunManifest& manifest, const fs::path& dir) {
  write_manifest(manifest, (dir / "manifest.json").string());
  std::cout << "manifest: " << (dir / "manifest.json").string() << " (" << manifest.files.size()
            << " files)\n";
}

void print_record_summary(const RunRecord& rec) {
  std::printf("steps %d, records %zu, final t %.6g, |w|_L2 %.6g -> %.6g\n", rec.steps,
              rec.times.size(), rec.times.back(), rec.l2_norms.front(), rec.l2_norms.back());
}

int cmd_simulate(const std::string& config_path, const std::string& out,
                 const std::optional<std::uint64_t>& seed) {
  ParsedConfig pc = load_config(config_path);
  if (pc.kind == ParsedConfig::Kind::scaling) {
    throw std::invalid_argument("simulate: config defines 'shells'; use the scaling subcommand");
  }
  if (pc.solver.scheme == Scheme::deterministic) {
    throw std::invalid_argument(
        "simulate: config scheme is \"deterministic\"; use the deterministic subcommand");
  }
  if (seed) pc.master_seed = *seed;

  const fs::path dir = prepare_out_dir(out);
  const SpectralField w0 = build_initial_condition(pc.ic, pc.solver.grid, pc.master_seed);
  std::vector<std::pair<int, int>> support;
  for (const ThetaEntry& e : pc.solver.theta->entries()) support.emplace_back(e.k1, e.k2);
  BrownianDriver driver(pc.master_seed, 0, std::move(support));
  Workspace ws;
  const RunRecord rec = run_trajectory(ws, pc.solver, w0, &driver, /*keep_snapshots=*/true);

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.config_echo = render_config(pc);
  manifest.master_seed = pc.master_seed;
  manifest.path_indices = {0};
  emit_trajectory(rec, rec.snapshots.back(), dir, manifest);
  finish_manifest(manifest, dir);
  print_record_summary(rec);
  return 0;
}

int cmd_deterministic(const std::string& config_path, const std::string& out) {
  ParsedConfig pc = load_config(config_path);
  if (pc.kind == ParsedConfig::Kind::scaling) {
    throw std::invalid_argument(
        "deterministic: config defines 'shells'; use the scaling subcommand");
  }
  // Force the deterministic limit regardless of the configured scheme so the
  // same run spec can serve both subcommands; the echo reflects the override.
  pc.solver.scheme = Scheme::deterministic;
  pc.solver.theta.reset();
  pc.noise.kind = NoiseSpec::Kind::none;

  const fs::path dir = prepare_out_dir(out);
  const SpectralField w0 = build_initial_condition(pc.ic, pc.solver.grid, pc.master_seed);
  Workspace ws;
  const RunRecord rec = run_trajectory(ws, pc.solver, w0, nullptr, /*keep_snapshots=*/true);

  RunManifest manifest;
  manifest.command = "deterministic";
  manifest.config_echo = render_config(pc);
  manifest.master_seed = pc.master_seed;
  emit_trajectory(rec, rec.snapshots.back(), dir, manifest);
  finish_manifest(manifest, dir);
  print_record_summary(rec);
  return 0;
}

int cmd_scaling(const std::string& config_path, const std::string& out,
                const std::optional<int>& paths_override) {
  ParsedConfig pc = load_config(config_path);
  if (pc.kind != ParsedConfig::Kind::scaling) {
    throw std::invalid_argument("scaling: config does not define 'shells'");
  }
  if (paths_override) pc.scaling.paths_per_shell = *paths_override;

  const fs::path dir = prepare_out_dir(out);
  const SpectralField w0 = build_initial_condition(pc.ic, pc.scaling.base.grid, pc.master_seed);
  const ConvergenceTable table = scaling_study(pc.scaling, w0, pc.master_seed);

  write_convergence_csv(table, (dir / "scaling.csv").string());
  RunManifest manifest;
  manifest.command = "scaling";
  manifest.config_echo = render_config(pc);
  manifest.master_seed = pc.master_seed;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (int p = 0; p < table.rows[r].paths; ++p) {
      manifest.path_indices.push_back(static_cast<std::uint32_t>(r) * kPathBlock +
                                      static_cast<std::uint32_t>(p));
    }
  }
  track_file(manifest, dir, "scaling.csv");
  finish_manifest(manifest, dir);

  std::printf("reference self-check: sup H^-delta gap %.3g under dt halving\n",
              table.reference_selfcheck);
  for (const ConvergenceRow& row : table.rows) {
    std::printf("N %d: mean sup H^-%.3g distance %.6g (std %.3g, L2H^%.3g %.6g, %d paths, %.1f s)\n",
                row.shell_n, table.delta, row.mean_sup_hm, row.std_sup_hm, 1.0 - table.delta,
                row.mean_l2h, row.paths, row.seconds);
    if (!row.note.empty()) {
      std::cerr << "note: shell " << row.shell_n << ": " << row.note << '\n';
    }
  }
  return 0;
}

int cmd_consistency(const std::string& config_path, const std::string& out) {
  ParsedConfig pc = load_config(config_path);
  if (pc.kind == ParsedConfig::Kind::scaling) {
    throw std::invalid_argument("consistency: config defines 'shells'; provide a run spec");
  }
  if (!pc.solver.theta) {
    throw std::invalid_argument(
        "consistency: config must use a stochastic scheme with a noise family");
  }

  const fs::path dir = prepare_out_dir(out);
  const SpectralField w0 = build_initial_condition(pc.ic, pc.solver.grid, pc.master_seed);
  const ConsistencyTable table =
      scheme_consistency_study(pc.solver, pc.dt_list, pc.paths, w0, pc.master_seed);

  write_consistency_csv(table, (dir / "consistency.csv").string());
  RunManifest manifest;
  manifest.command = "consistency";
  manifest.config_echo = render_config(pc);
  manifest.master_seed = pc.master_seed;
  for (int p = 0; p < pc.paths; ++p) {
    manifest.path_indices.push_back(static_cast<std::uint32_t>(p));
  }
  track_file(manifest, dir, "consistency.csv");
  finish_manifest(manifest, dir);

  for (const ConsistencyRow& row : table.rows) {
    std::printf("dt %.6g: mean sup |w_ito - w_strat|_L2 %.6g (std %.3g, %d paths)\n", row.dt,
                row.mean_sup_l2, row.std_sup_l2, row.paths);
  }
  std::printf("strong order estimate %.3g, monotone %s\n", table.order_estimate,
              table.monotone ? "yes" : "no");
  return 0;
}

int cmd_verify(const std::string& config_path) {
  const ParsedConfig pc = load_config(config_path);
  const SolverConfig& cfg =
      pc.kind == ParsedConfig::Kind::scaling ? pc.scaling.base : pc.solver;
  const SpectralField w0 = build_initial_condition(pc.ic, cfg.grid, pc.master_seed);
  const InvariantReport report = invariant_suite(cfg, w0, pc.master_seed);
  for (const InvariantCheck& check : report.checks) {
    std::printf("[%s] %-38s measured %.3e  tolerance %.3e\n", check.pass ? "PASS" : "FAIL",
                check.name.c_str(), check.measured, check.tolerance);
    if (!check.pass) std::printf("       %s\n", check.detail.c_str());
  }
  std::printf("verify: %zu checks, %s\n", report.checks.size(),
              report.all_pass ? "all passed" : "FAILURES above");
  return report.all_pass ? 0 : 1;
}

int cmd_show(const std::string& snapshot_path) {
  const SpectralField w = read_snapshot(snapshot_path);
  std::printf("grid %d, max mode %d\n", w.grid().n, w.grid().max_mode);
  std::printf("|w|_L2 %.17g\n", w.l2_norm());
  std::printf("|w|_H1 seminorm %.17g\n", sobolev_norm(w, 1.0));
  struct Mode {
    int l1, l2;
    double c;
  };
  std::vector<Mode> modes;
  w.for_each([&](int l1, int l2, double c) {
    if (c != 0.0) modes.push_back({l1, l2, c});
  });
  std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    if (std::abs(a.c) != std::abs(b.c)) return std::abs(a.c) > std::abs(b.c);
    return std::pair(a.l1, a.l2) < std::pair(b.l1, b.l2);
  });
  const std::size_t shown = std::min<std::size_t>(modes.size(), 8);
  std::printf("%zu nonzero coefficients, leading %zu:\n", modes.size(), shown);
  for (std::size_t i = 0; i < shown; ++i) {
    std::printf("  (%3d, %3d)  % .17g\n", modes[i].l1, modes[i].l2, modes[i].c);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Pseudo-spectral 2D vorticity solver with modulated transport noise.\n"
      "SMAG_THREADS caps the worker count for ensemble subcommands."};
  app.require_subcommand(1);

  std::string config_path, out_dir, snapshot_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> paths_override;

  CLI::App* simulate = app.add_subcommand("simulate", "Integrate one stochastic path");
  simulate->add_option("--config", config_path, "JSON run spec")->required();
  simulate->add_option("--seed", seed, "Master seed (overrides the config)");
  simulate->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* deterministic =
      app.add_subcommand("deterministic", "Integrate the deterministic limit");
  deterministic->add_option("--config", config_path, "JSON run spec")->required();
  deterministic->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* scaling = app.add_subcommand("scaling", "Shell-size scaling study");
  scaling->add_option("--config", config_path, "JSON scaling spec")->required();
  scaling->add_option("--paths", paths_override, "Paths per shell (overrides the config)")
      ->check(CLI::PositiveNumber);
  scaling->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* consistency =
      app.add_subcommand("consistency", "Ito vs Stratonovich agreement as dt -> 0");
  consistency->add_option("--config", config_path, "JSON run spec with dt_list/paths")->required();
  consistency->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* verify = app.add_subcommand("verify", "Run the invariant suite on a config");
  verify->add_option("--config", config_path, "JSON run spec")->required();

  CLI::App* show = app.add_subcommand("show", "Print norms and leading modes of a snapshot");
  show->add_option("--snapshot", snapshot_path, "W2DS snapshot file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, out_dir, seed);
    if (deterministic->parsed()) return cmd_deterministic(config_path, out_dir);
    if (scaling->parsed()) return cmd_scaling(config_path, out_dir, paths_override);
    if (consistency->parsed()) return cmd_consistency(config_path, out_dir);
    if (verify->parsed()) return cmd_verify(config_path);
    if (show->parsed()) return cmd_show(snapshot_path);
  } catch (const NumericAbort& e) {
    std::cerr << "numeric abort: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
