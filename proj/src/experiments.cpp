// Ensemble experiment harness. Distances between runs are evaluated at the
// recorded times only; lattice Sobolev weights |l|^{2s} are used throughout,
// matching sobolev_norm. Path-level work is dispatched through run_jobs with
// slot-indexed result buffers, so output is independent of the worker count.
#include "smag/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "smag/operators.hpp"
#include "smag/parallel.hpp"
#include "smag/rng.hpp"

namespace smag {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Workspace& worker_workspace() {
  thread_local Workspace ws;
  return ws;
}

std::uint32_t mode_substream(int l1, int l2) {
  return (static_cast<std::uint32_t>(l1 + 32768) << 16) | static_cast<std::uint32_t>(l2 + 32768);
}

std::vector<std::pair<int, int>> support_of(const NoiseCoefficients& theta) {
  std::vector<std::pair<int, int>> sup;
  sup.reserve(theta.entries().size());
  for (const ThetaEntry& e : theta.entries()) sup.emplace_back(e.k1, e.k2);
  return sup;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

bool same_model(const LESModel& a, const LESModel& b) {
  return a.kind == b.kind && a.alpha == b.alpha && a.coefficient == b.coefficient &&
         a.epsilon_reg == b.epsilon_reg && a.growth_a == b.growth_a && a.growth_b == b.growth_b;
}

void require_matching_times(const RunRecord& a, const RunRecord& b, const char* what) {
  if (a.times.size() != b.times.size()) {
    throw std::logic_error(std::string(what) + ": record lengths differ");
  }
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    if (std::abs(a.times[i] - b.times[i]) > 1e-12) {
      throw std::logic_error(std::string(what) + ": recorded times differ");
    }
  }
}

struct PathDistances {
  double sup_hm = 0.0;  // sup_t H^{-delta}
  double l2h = 0.0;     // L^2(0,T; H^{1-delta})
};

PathDistances distances_between(const RunRecord& run, const RunRecord& ref, double delta) {
  require_matching_times(run, ref, "distance");
  const std::size_t n = run.times.size();
  PathDistances out;
  std::vector<double> h(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    SpectralField diff = run.snapshots[i];
    diff.axpy(-1.0, ref.snapshots[i]);
    out.sup_hm = std::max(out.sup_hm, sobolev_norm(diff, -delta));
    h[i] = sobolev_norm(diff, 1.0 - delta);
  }
  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    acc += (run.times[i] - run.times[i - 1]) * 0.5 * (h[i - 1] * h[i - 1] + h[i] * h[i]);
  }
  out.l2h = std::sqrt(acc);
  return out;
}

// sup_t L2 gap between two snapshot sequences on the same grid.
double sup_l2_gap(const RunRecord& a, const RunRecord& b) {
  require_matching_times(a, b, "scheme gap");
  double sup = 0.0;
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    SpectralField diff = a.snapshots[i];
    diff.axpy(-1.0, b.snapshots[i]);
    sup = std::max(sup, diff.l2_norm());
  }
  return sup;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

SpectralField random_band_field(const GridSpec& grid, int band, double l2_norm,
                                std::uint64_t master_seed) {
  if (band < 1) throw std::invalid_argument("random_band_field: band must be >= 1");
  if (band > grid.max_mode) {
    throw std::invalid_argument("random_band_field: band exceeds the grid's retained modes");
  }
  if (!(l2_norm > 0.0)) throw std::invalid_argument("random_band_field: l2_norm must be positive");
  SpectralField w(grid);
  for (int l1 = -band; l1 <= band; ++l1) {
    for (int l2 = -band; l2 <= band; ++l2) {
      const int q = l1 * l1 + l2 * l2;
      if (q == 0 || q > band * band) continue;
      w.set_coeff(l1, l2,
                  normal_draw(master_seed, 0, RngDomain::initial_state, mode_substream(l1, l2), 0));
    }
  }
  const double nrm = w.l2_norm();
  w.scale(l2_norm / nrm);
  return w;
}

// --- scaling-limit study ---------------------------------------------------

void ScalingStudySpec::validate() const {
  if (shells.empty()) throw std::invalid_argument("scaling: shell list is empty");
  for (std::size_t i = 0; i < shells.size(); ++i) {
    if (shells[i] < 1) throw std::invalid_argument("scaling: shell parameters must be >= 1");
    if (i > 0 && shells[i] <= shells[i - 1]) {
      throw std::invalid_argument("scaling: shells must be strictly increasing");
    }
  }
  if (paths_per_shell < 1) throw std::invalid_argument("scaling: paths_per_shell must be >= 1");
  if (!(delta > 0.0 && delta <= 2.0)) throw std::invalid_argument("scaling: delta must lie in (0, 2]");
  reference.validate();
  if (reference.scheme != Scheme::deterministic) {
    throw std::invalid_argument("scaling: reference config must be deterministic");
  }
  if (base.scheme == Scheme::deterministic) {
    throw std::invalid_argument("scaling: base config must use a stochastic scheme");
  }
  if (!(base.grid == reference.grid) || base.nu != reference.nu || base.dt != reference.dt ||
      base.horizon != reference.horizon || base.record_stride != reference.record_stride ||
      !same_model(base.model, reference.model)) {
    throw std::invalid_argument(
        "scaling: base and reference must share grid, nu, dt, horizon, model, and record_stride");
  }
}

ConvergenceTable scaling_study(const ScalingStudySpec& spec, const SpectralField& omega0,
                               std::uint64_t master_seed) {
  spec.validate();
  if (!(omega0.grid() == spec.base.grid)) {
    throw std::invalid_argument("scaling: initial state grid differs from the study grid");
  }

  std::vector<SolverConfig> row_cfgs;
  row_cfgs.reserve(spec.shells.size());
  for (int n : spec.shells) {
    SolverConfig cfg = spec.base;
    cfg.theta = NoiseCoefficients::shell(n, cfg.grid);
    cfg.validate();
    row_cfgs.push_back(std::move(cfg));
  }

  // Deterministic reference plus its dt-halving self-check. The gross
  // threshold (5% of the reference's own H^{-delta} scale) only rejects a
  // plainly unconverged reference; the measured gap is reported in the table
  // so it can be compared against the ensemble distances it floors.
  Workspace& ws = worker_workspace();
  const RunRecord ref = run_trajectory(ws, spec.reference, omega0, nullptr, true);
  double selfcheck = 0.0;
  {
    SolverConfig half = spec.reference;
    half.dt *= 0.5;
    half.record_stride *= 2;
    const RunRecord ref_half = run_trajectory(ws, half, omega0, nullptr, true);
    selfcheck = distances_between(ref_half, ref, spec.delta).sup_hm;
    double ref_scale = 0.0;
    for (const SpectralField& s : ref.snapshots) {
      ref_scale = std::max(ref_scale, sobolev_norm(s, -spec.delta));
    }
    if (selfcheck > 0.05 * ref_scale) {
      throw std::invalid_argument("scaling: reference failed the dt-halving self-check (gap " +
                                  format_double(selfcheck) + " vs scale " + format_double(ref_scale) +
                                  ")");
    }
  }

  const int rows = static_cast<int>(spec.shells.size());
  const int paths = spec.paths_per_shell;
  const int jobs = rows * paths;
  std::vector<double> sup(jobs, kNaN), l2h(jobs, kNaN), secs(jobs, 0.0);
  std::vector<std::string> aborted(jobs);

  run_jobs(jobs, [&](int j) {
    const int r = j / paths;
    const int p = j % paths;
    const auto t0 = std::chrono::steady_clock::now();
    Workspace& wws = worker_workspace();
    BrownianDriver driver(master_seed, static_cast<std::uint32_t>(r) * kPathBlock + p,
                          support_of(*row_cfgs[r].theta), 1);
    try {
      const RunRecord run = run_trajectory(wws, row_cfgs[r], omega0, &driver, true);
      const PathDistances d = distances_between(run, ref, spec.delta);
      sup[j] = d.sup_hm;
      l2h[j] = d.l2h;
    } catch (const NumericAbort& e) {
      aborted[j] = e.what();
    }
    secs[j] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });

  ConvergenceTable table;
  table.delta = spec.delta;
  table.record_stride = spec.base.record_stride;
  table.reference_selfcheck = selfcheck;
  table.master_seed = master_seed;
  for (int r = 0; r < rows; ++r) {
    ConvergenceRow row;
    row.shell_n = spec.shells[r];
    row.theta_linf = row_cfgs[r].theta->linf();
    std::vector<double> sups, l2hs;
    int failed = 0;
    std::string first_msg;
    for (int p = 0; p < paths; ++p) {
      const int j = r * paths + p;
      row.seconds += secs[j];
      if (!aborted[j].empty()) {
        if (failed++ == 0) first_msg = aborted[j];
        continue;
      }
      sups.push_back(sup[j]);
      l2hs.push_back(l2h[j]);
    }
    row.paths = static_cast<int>(sups.size());
    if (failed > 0) {
      row.mean_sup_hm = kNaN;
      row.std_sup_hm = kNaN;
      row.mean_l2h = kNaN;
      row.note = std::to_string(failed) + " of " + std::to_string(paths) +
                 " paths aborted: " + first_msg;
    } else {
      row.mean_sup_hm = mean_of(sups);
      row.std_sup_hm = sample_std(sups, row.mean_sup_hm);
      row.mean_l2h = mean_of(l2hs);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

// --- Ito/Stratonovich consistency -------------------------------------------

ConsistencyTable scheme_consistency_study(const SolverConfig& cfg, const std::vector<double>& dt_list,
                                          int paths, const SpectralField& omega0,
                                          std::uint64_t master_seed) {
  if (dt_list.empty()) throw std::invalid_argument("consistency: dt list is empty");
  if (paths < 1) throw std::invalid_argument("consistency: paths must be >= 1");
  for (std::size_t i = 0; i < dt_list.size(); ++i) {
    if (!(dt_list[i] > 0.0)) throw std::invalid_argument("consistency: dt values must be positive");
    if (i > 0 && dt_list[i] >= dt_list[i - 1]) {
      throw std::invalid_argument("consistency: dt list must be strictly decreasing");
    }
  }
  const double dt_min = dt_list.back();
  std::vector<int> refinement(dt_list.size(), 1);
  for (std::size_t i = 0; i < dt_list.size(); ++i) {
    const double ratio = dt_list[i] / dt_min;
    const int m = static_cast<int>(std::llround(ratio));
    if (m < 1 || std::abs(ratio - m) > 1e-9) {
      throw std::invalid_argument(
          "consistency: every dt must be an integer multiple of the smallest one");
    }
    refinement[i] = m;
  }

  const int d = static_cast<int>(dt_list.size());
  std::vector<SolverConfig> ito_cfgs, strat_cfgs;
  for (int i = 0; i < d; ++i) {
    SolverConfig c = cfg;
    c.dt = dt_list[i];
    // every step is recorded so each row reports the exact sup of its
    // discrete gap process; a shared coarser stride would sample the rows
    // on different time grids and bias the comparison across dt
    c.record_stride = 1;
    c.scheme = Scheme::ito_em;
    c.validate();
    ito_cfgs.push_back(c);
    c.scheme = Scheme::stratonovich_heun;
    strat_cfgs.push_back(c);
  }
  if (!(omega0.grid() == cfg.grid)) {
    throw std::invalid_argument("consistency: initial state grid differs from the config grid");
  }
  const std::vector<std::pair<int, int>> sup = support_of(*cfg.theta);

  std::vector<double> gaps(static_cast<std::size_t>(paths) * d, kNaN);
  run_jobs(paths * d, [&](int j) {
    const int p = j / d;
    const int i = j % d;
    Workspace& wws = worker_workspace();
    BrownianDriver driver(master_seed, static_cast<std::uint32_t>(p), sup, refinement[i]);
    const RunRecord ito = run_trajectory(wws, ito_cfgs[i], omega0, &driver, true);
    driver.reset();
    const RunRecord strat = run_trajectory(wws, strat_cfgs[i], omega0, &driver, true);
    gaps[j] = sup_l2_gap(ito, strat);
  });

  ConsistencyTable table;
  table.master_seed = master_seed;
  for (int i = 0; i < d; ++i) {
    ConsistencyRow row;
    row.dt = dt_list[i];
    std::vector<double> vals;
    for (int p = 0; p < paths; ++p) vals.push_back(gaps[static_cast<std::size_t>(p) * d + i]);
    row.mean_sup_l2 = mean_of(vals);
    row.std_sup_l2 = sample_std(vals, row.mean_sup_l2);
    row.paths = paths;
    table.rows.push_back(row);
  }
  table.monotone = true;
  for (int i = 0; i + 1 < d; ++i) {
    if (!(table.rows[i].mean_sup_l2 > table.rows[i + 1].mean_sup_l2)) table.monotone = false;
  }
  if (d < 2) table.monotone = false;
  bool all_positive = true;
  for (const ConsistencyRow& r : table.rows) all_positive = all_positive && r.mean_sup_l2 > 0.0;
  if (d >= 2 && all_positive) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const ConsistencyRow& r : table.rows) {
      const double x = std::log(r.dt), y = std::log(r.mean_sup_l2);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    table.order_estimate = (d * sxy - sx * sy) / (d * sxx - sx * sx);
  } else {
    table.order_estimate = kNaN;
  }
  return table;
}

// --- deterministic uniqueness probe -----------------------------------------

namespace {

double pairwise_sup_hm1(const RunRecord& a, const RunRecord& b) {
  require_matching_times(a, b, "uniqueness distance");
  const SpectralField& probe_a = a.snapshots.front();
  const SpectralField& probe_b = b.snapshots.front();
  const bool a_coarse = probe_a.grid().max_mode <= probe_b.grid().max_mode;
  const RunRecord& coarse = a_coarse ? a : b;
  const RunRecord& fine = a_coarse ? b : a;
  const GridSpec& fine_grid = (a_coarse ? probe_b : probe_a).grid();
  double sup = 0.0;
  for (std::size_t i = 0; i < coarse.times.size(); ++i) {
    const SpectralField& wc = coarse.snapshots[i];
    const SpectralField& wf = fine.snapshots[i];
    double s = 0.0;
    wc.for_each([&](int l1, int l2, double cc) {
      if (!fine_grid.contains(l1, l2)) return;  // only modes resolved by both
      const double diff = cc - wf.coeff(l1, l2);
      s += diff * diff / static_cast<double>(l1 * l1 + l2 * l2);
    });
    sup = std::max(sup, std::sqrt(s));
  }
  return sup;
}

}  // namespace

UniquenessReport uniqueness_probe(const SolverConfig& cfg, const SpectralField& omega0,
                                  const std::vector<int>& resolutions) {
  cfg.validate();
  if (cfg.scheme != Scheme::deterministic) {
    throw std::invalid_argument("uniqueness: config must be deterministic");
  }
  if (resolutions.empty()) throw std::invalid_argument("uniqueness: resolution list is empty");
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    if (resolutions[i] < 8 || resolutions[i] % 2 != 0) {
      throw std::invalid_argument("uniqueness: resolutions must be even and >= 8");
    }
    if (i > 0 && resolutions[i] < resolutions[i - 1]) {
      throw std::invalid_argument("uniqueness: resolutions must be nondecreasing");
    }
  }

  std::vector<int> distinct = resolutions;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<RunRecord> runs(distinct.size());
  run_jobs(static_cast<int>(distinct.size()), [&](int i) {
    const int n = distinct[i];
    GridSpec grid;
    grid.n = n;
    grid.max_mode = n / 2 - 1;
    grid.pad = cfg.grid.pad;
    grid.mask = cfg.grid.mask;
    grid.validate();
    SolverConfig run_cfg = cfg;
    run_cfg.grid = grid;
    SpectralField w0(grid);
    omega0.for_each([&](int l1, int l2, double c) {
      if (grid.contains(l1, l2)) w0.set_coeff(l1, l2, c);
    });
    runs[i] = run_trajectory(worker_workspace(), run_cfg, w0, nullptr, true);
  });

  auto record_for = [&](int n) -> const RunRecord& {
    const auto it = std::lower_bound(distinct.begin(), distinct.end(), n);
    return runs[static_cast<std::size_t>(it - distinct.begin())];
  };

  UniquenessReport report;
  report.resolutions = resolutions;
  std::map<std::pair<int, int>, double> cache;
  auto distance = [&](int na, int nb) {
    const auto key = std::minmax(na, nb);
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double d = na == nb ? 0.0 : pairwise_sup_hm1(record_for(na), record_for(nb));
    cache.emplace(key, d);
    return d;
  };
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    for (std::size_t j = i + 1; j < resolutions.size(); ++j) {
      report.pairs.push_back({resolutions[i], resolutions[j], distance(resolutions[i], resolutions[j])});
    }
  }

  report.cauchy = true;
  const int finest = distinct.back();
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    const double d = distance(distinct[i], finest);
    if (!(d < prev)) report.cauchy = false;
    prev = d;
  }

  report.model_audit = validate_model(cfg.model);
  return report;
}

// --- increment-moment statistic ----------------------------------------------

IncrementMomentResult increment_moment_statistic(const SolverConfig& cfg, const SpectralField& omega0,
                                                 std::uint64_t master_seed, int paths) {
  cfg.validate();
  if (cfg.scheme == Scheme::deterministic) {
    throw std::invalid_argument("increment statistic: config must be stochastic");
  }
  if (paths < 1) throw std::invalid_argument("increment statistic: paths must be >= 1");
  if (!(omega0.grid() == cfg.grid)) {
    throw std::invalid_argument("increment statistic: initial state grid differs from the config grid");
  }
  const std::vector<std::pair<int, int>> sup = support_of(*cfg.theta);

  std::vector<std::vector<std::array<double, 8>>> tracks(paths);
  std::vector<std::vector<double>> times(paths);
  run_jobs(paths, [&](int p) {
    BrownianDriver driver(master_seed, static_cast<std::uint32_t>(p), sup, 1);
    const RunRecord run = run_trajectory(worker_workspace(), cfg, omega0, &driver, false);
    tracks[p] = run.mode_track;
    times[p] = run.times;
  });

  const std::vector<double>& t = times.front();
  const std::size_t n = t.size();
  IncrementMomentResult out;
  out.paths = paths;
  for (std::size_t m = 0; m < kTrackedModes.size(); ++m) {
    const auto [l1, l2] = kTrackedModes[m];
    const double q = static_cast<double>(l1 * l1 + l2 * l2);
    const double weight = q * q;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double acc = 0.0;
        for (int p = 0; p < paths; ++p) {
          const double inc = tracks[p][j][m] - tracks[p][i][m];
          acc += inc * inc;
        }
        const double stat = acc / paths / (weight * (t[j] - t[i]));
        out.statistic = std::max(out.statistic, stat);
      }
    }
  }
  return out;
}

// --- invariant suite ----------------------------------------------------------

InvariantReport invariant_suite(const SolverConfig& cfg, const SpectralField& omega0,
                                std::uint64_t master_seed, FaultInjection fault) {
  cfg.validate();
  if (!(omega0.grid() == cfg.grid)) {
    throw std::invalid_argument("invariants: initial state grid differs from the config grid");
  }
  Workspace& ws = worker_workspace();
  const LESModel& model = cfg.model;
  InvariantReport report;

  auto run_check = [&](const std::string& name, auto&& body) {
    InvariantCheck c;
    c.name = name;
    try {
      body(c);
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail = std::string("check raised: ") + e.what();
    }
    report.checks.push_back(std::move(c));
  };

  const double l2 = omega0.l2_norm();
  const double e0 = l2 * l2;
  const double h1 = std::sqrt(e0 + sobolev_norm(omega0, 1.0) * sobolev_norm(omega0, 1.0));
  const int quad_np = 32 * cfg.grid.n;

  run_check("model audit", [&](InvariantCheck& c) {
    const ModelValidation v = validate_model(model);
    c.measured = static_cast<double>(v.failures.size());
    c.tolerance = 0.0;
    c.pass = v.ok;
    if (v.ok) {
      c.detail = "weighted Lipschitz constant " + format_double(v.fitted_lipschitz);
    } else {
      std::ostringstream oss;
      for (std::size_t i = 0; i < v.failures.size(); ++i) {
        if (i) oss << "; ";
        oss << v.failures[i].check;
      }
      c.detail = oss.str();
    }
  });

  run_check("advection enstrophy neutrality", [&](InvariantCheck& c) {
    const SpectralField adv = advection_term(ws, omega0);
    c.measured = std::abs(inner_product(adv, omega0));
    c.tolerance = 1e-10 * adv.l2_norm() * l2 + 1e-18;
    c.pass = c.measured <= c.tolerance;
  });

  // Diffusivity g'(omega) on the padded grid, shared by the flux checks.
  const PhysicalField wsamp = ws.to_physical(omega0);
  PhysicalField gdiff(wsamp.np);
  for (std::size_t i = 0; i < gdiff.v.size(); ++i) gdiff.v[i] = g_prime(model, wsamp.v[i]);

  run_check("flux dissipativity", [&](InvariantCheck& c) {
    const auto [g1, g2] = gradient(ws, omega0);
    const SpectralField fl = flux_divergence(ws, gdiff, g1, g2, cfg.grid);
    const double lhs = inner_product(fl, omega0);
    double rhs = 0.0;
    for (std::size_t i = 0; i < gdiff.v.size(); ++i) {
      rhs += gdiff.v[i] * (g1.v[i] * g1.v[i] + g2.v[i] * g2.v[i]);
    }
    rhs = -rhs / static_cast<double>(gdiff.v.size());
    c.measured = std::abs(lhs - rhs);
    c.tolerance = 1e-10 * std::abs(rhs) + 1e-18;
    c.pass = c.measured <= c.tolerance && lhs <= c.tolerance;
    c.detail = "<flux w, w> = " + format_double(lhs);
  });

  run_check("flux self-adjointness", [&](InvariantCheck& c) {
    const SpectralField v = spectral_derivative(omega0, 1);
    const SpectralField fw = flux_divergence(ws, gdiff, omega0);
    const SpectralField fv = flux_divergence(ws, gdiff, v);
    const double x = inner_product(fw, v);
    const double y = inner_product(omega0, fv);
    c.measured = std::abs(x - y);
    c.tolerance = 1e-10 * (fw.l2_norm() * v.l2_norm() + fv.l2_norm() * l2) + 1e-18;
    c.pass = c.measured <= c.tolerance;
  });

  if (cfg.theta) {
    const NoiseCoefficients& theta = *cfg.theta;

    run_check("covariance identity", [&](InvariantCheck& c) {
      std::vector<std::array<double, 2>> pts(256);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        pts[i] = {uniform_draw(master_seed, 0, RngDomain::scatter, 0, static_cast<std::uint32_t>(i)),
                  uniform_draw(master_seed, 0, RngDomain::scatter, 1, static_cast<std::uint32_t>(i))};
      }
      c.measured = covariance_residual(theta, pts);
      c.tolerance = 1e-10;
      c.pass = c.measured <= c.tolerance;
      c.detail = theta.descriptor();
    });

    // The production corrector (optionally faulted) against an independent
    // refined-quadrature evaluation; the gap is the kink-aliasing floor.
    SpectralField corrector = ito_corrector(ws, omega0, model);
    if (fault == FaultInjection::flip_corrector_sign) corrector.scale(-1.0);

    run_check("corrector quadrature agreement", [&](InvariantCheck& c) {
      const PhysicalField big = ws.to_physical(omega0, quad_np);
      PhysicalField a_big(big.np);
      for (std::size_t i = 0; i < a_big.v.size(); ++i) {
        const double fp = f_prime(model, big.v[i]);
        a_big.v[i] = 0.25 * fp * fp;
      }
      const auto [g1, g2] = ws.derivative_samples(big);
      const SpectralField refined = flux_divergence(ws, a_big, g1, g2, cfg.grid);
      SpectralField diff = corrector;
      diff.axpy(-1.0, refined);
      const double scale = std::max(refined.l2_norm(), 1e-300);
      c.measured = diff.l2_norm() / scale;
      c.tolerance = 5e-2;
      c.pass = c.measured <= c.tolerance;
      c.detail = "relative to refined quadrature at np=" + std::to_string(quad_np);
    });

    // 2<corrector, w> + sum_k ||Pi(theta_k sigma_k . grad f(w))||^2 <= 0: the
    // projection only removes modes, so the Ito drift of ||w||^2 from the
    // noise side is nonpositive (the mechanism behind the a-priori bound).
    run_check("ito drift balance (a-priori bound)", [&](InvariantCheck& c) {
      const double paired = 2.0 * inner_product(corrector, omega0);
      double qv = 0.0;
      std::vector<double> dw(theta.entries().size(), 0.0);
      for (std::size_t k = 0; k < dw.size(); ++k) {
        dw[k] = 1.0;
        const SpectralField tk = transport_increment(ws, omega0, model, theta, dw);
        qv += tk.l2_norm_sq();
        dw[k] = 0.0;
      }
      const double scale = std::abs(paired) + qv;
      c.measured = paired + qv;
      c.tolerance = 0.02 * scale + 1e-18;
      c.pass = c.measured <= c.tolerance;
      c.detail = "2<corrector,w> = " + format_double(paired) + ", quadratic variation = " +
                 format_double(qv);
    });

    run_check("enstrophy channel neutrality", [&](InvariantCheck& c) {
      const std::vector<double> pairings = enstrophy_channel_pairings(ws, omega0, model, theta, quad_np);
      double worst = 0.0;
      for (double p : pairings) worst = std::max(worst, std::abs(p));
      c.measured = worst;
      c.tolerance = 1e-8 * l2 * h1;
      c.pass = c.measured <= c.tolerance;
      c.detail = std::to_string(pairings.size()) + " channels at quadrature np=" +
                 std::to_string(quad_np);
    });

    run_check("transport linearity", [&](InvariantCheck& c) {
      const std::size_t nk = theta.entries().size();
      std::vector<double> dw1(nk), dw2(nk), dw12(nk);
      for (std::size_t k = 0; k < nk; ++k) {
        dw1[k] = normal_draw(master_seed, 0, RngDomain::scatter, static_cast<std::uint32_t>(k), 1001);
        dw2[k] = normal_draw(master_seed, 0, RngDomain::scatter, static_cast<std::uint32_t>(k), 1002);
        dw12[k] = dw1[k] + dw2[k];
      }
      const SpectralField t1 = transport_increment(ws, omega0, model, theta, dw1);
      const SpectralField t2 = transport_increment(ws, omega0, model, theta, dw2);
      SpectralField t12 = transport_increment(ws, omega0, model, theta, dw12);
      t12.axpy(-1.0, t1);
      t12.axpy(-1.0, t2);
      c.measured = t12.l2_norm();
      c.tolerance = 1e-11 * (t1.l2_norm() + t2.l2_norm()) + 1e-18;
      c.pass = c.measured <= c.tolerance;
    });

    // Short-ensemble sanity bound on the increment-moment statistic; the
    // doubling-stability version runs in the ensemble studies. The cap is
    // deliberately generous: it exists to catch blowup, not to estimate C.
    run_check("increment moment bound", [&](InvariantCheck& c) {
      SolverConfig short_cfg = cfg;
      const int nshort = std::min(cfg.steps(), 40);
      short_cfg.horizon = nshort * cfg.dt;
      short_cfg.record_stride = std::max(1, nshort / 5);
      const IncrementMomentResult r = increment_moment_statistic(short_cfg, omega0, master_seed, 4);
      c.measured = r.statistic;
      c.tolerance = 10.0 * e0;
      c.pass = std::isfinite(r.statistic) && r.statistic <= c.tolerance;
      c.detail = std::to_string(r.paths) + " paths over " + std::to_string(nshort) + " steps";
    });
  }

  report.all_pass = true;
  for (const InvariantCheck& c : report.checks) report.all_pass = report.all_pass && c.pass;
  return report;
}

}  // namespace smag
