// Experiment harness tests at desk scale: exact pathwise coupling when f is
// constant, bit-reproducibility across worker counts, Monte-Carlo
// consistency under path doubling, guard-abort diagnostics, heat-decay and
// refinement behaviour of the uniqueness probe, and the invariant suite on
// healthy and deliberately broken configurations.
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "smag/experiments.hpp"
#include "smag/operators.hpp"
#include "smag/rng.hpp"

using namespace smag;

namespace {

GridSpec grid_of(int n) {
  GridSpec g;
  g.n = n;
  g.max_mode = n / 2 - 1;
  return g;
}

SolverConfig stochastic_config(const GridSpec& g, const LESModel& model, int shell_n, double dt,
                               double horizon, int stride) {
  SolverConfig cfg;
  cfg.grid = g;
  cfg.nu = 0.01;
  cfg.dt = dt;
  cfg.horizon = horizon;
  cfg.scheme = Scheme::ito_em;
  cfg.model = model;
  cfg.theta = NoiseCoefficients::shell(shell_n, g);
  cfg.record_stride = stride;
  return cfg;
}

ScalingStudySpec small_scaling_spec(const GridSpec& g, const LESModel& model) {
  ScalingStudySpec spec;
  spec.base = stochastic_config(g, model, 1, 1e-3, 0.03, 10);
  spec.reference = spec.base;
  spec.reference.scheme = Scheme::deterministic;
  spec.reference.theta.reset();
  spec.shells = {1, 2};
  spec.paths_per_shell = 4;
  spec.delta = 1.0;
  return spec;
}

const InvariantCheck& find_check(const InvariantReport& rep, const std::string& name) {
  for (const InvariantCheck& c : rep.checks) {
    if (c.name == name) return c;
  }
  REQUIRE_MESSAGE(false, "missing check: " << name);
  static InvariantCheck dummy;
  return dummy;
}

}  // namespace

TEST_CASE("random band field: normalized, band-limited, reproducible across grids") {
  const GridSpec g = grid_of(64);
  const SpectralField w = random_band_field(g, 4, 1.5, 7);
  CHECK(w.l2_norm() == doctest::Approx(1.5).epsilon(1e-13));

  const SpectralField w_again = random_band_field(g, 4, 1.5, 7);
  double worst = 0.0;
  w.for_each([&](int l1, int l2, double c) {
    worst = std::max(worst, std::abs(c - w_again.coeff(l1, l2)));
    if (l1 * l1 + l2 * l2 > 16) CHECK(c == 0.0);
  });
  CHECK(worst == 0.0);

  // the same modes drawn on a finer grid give the identical field
  const SpectralField fine = random_band_field(grid_of(128), 4, 1.5, 7);
  w.for_each([&](int l1, int l2, double c) { CHECK(fine.coeff(l1, l2) == c); });

  // a different seed moves the field
  const SpectralField other = random_band_field(g, 4, 1.5, 8);
  double gap = 0.0;
  w.for_each([&](int l1, int l2, double c) { gap = std::max(gap, std::abs(c - other.coeff(l1, l2))); });
  CHECK(gap > 1e-3);

  CHECK_THROWS_AS(random_band_field(g, 0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(random_band_field(g, 64, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(random_band_field(g, 4, 0.0, 1), std::invalid_argument);
}

TEST_CASE("scaling study with constant f: stochastic paths coincide with the reference") {
  const GridSpec g = grid_of(24);
  ScalingStudySpec spec = small_scaling_spec(g, LESModel::linear(0.0));
  spec.base.dt = 2e-3;
  spec.base.horizon = 0.04;
  spec.base.record_stride = 5;
  spec.reference.dt = 2e-3;
  spec.reference.horizon = 0.04;
  spec.reference.record_stride = 5;
  spec.paths_per_shell = 3;
  const SpectralField w0 = random_band_field(g, 3, 1.0, 11);

  const ConvergenceTable table = scaling_study(spec, w0, 99);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.delta == 1.0);
  CHECK(table.record_stride == 5);
  CHECK(table.master_seed == 99);
  CHECK(table.reference_selfcheck >= 0.0);
  CHECK(table.rows[0].theta_linf == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-15));
  CHECK(table.rows[1].theta_linf == doctest::Approx(1.0 / std::sqrt(40.0)).epsilon(1e-15));
  for (const ConvergenceRow& row : table.rows) {
    CHECK(row.mean_sup_hm == 0.0);
    CHECK(row.std_sup_hm == 0.0);
    CHECK(row.mean_l2h == 0.0);
    CHECK(row.paths == 3);
    CHECK(row.note.empty());
    CHECK(row.seconds > 0.0);
  }
}

TEST_CASE("scaling study output is identical for any worker count") {
  const GridSpec g = grid_of(24);
  const ScalingStudySpec spec = small_scaling_spec(g, LESModel::smagorinsky(0.05));
  const SpectralField w0 = random_band_field(g, 3, 1.0, 21);

  setenv("SMAG_THREADS", "1", 1);
  const ConvergenceTable serial = scaling_study(spec, w0, 5);
  setenv("SMAG_THREADS", "3", 1);
  const ConvergenceTable threaded = scaling_study(spec, w0, 5);
  unsetenv("SMAG_THREADS");

  REQUIRE(serial.rows.size() == threaded.rows.size());
  CHECK(serial.reference_selfcheck == threaded.reference_selfcheck);
  for (std::size_t r = 0; r < serial.rows.size(); ++r) {
    CHECK(serial.rows[r].mean_sup_hm == threaded.rows[r].mean_sup_hm);
    CHECK(serial.rows[r].std_sup_hm == threaded.rows[r].std_sup_hm);
    CHECK(serial.rows[r].mean_l2h == threaded.rows[r].mean_l2h);
    CHECK(serial.rows[r].mean_sup_hm > 0.0);  // genuine noise-driven distance
  }
}

TEST_CASE("scaling study means are Monte-Carlo consistent under path doubling") {
  const GridSpec g = grid_of(24);
  ScalingStudySpec spec = small_scaling_spec(g, LESModel::smagorinsky(0.05));
  spec.shells = {2};
  spec.paths_per_shell = 6;
  const SpectralField w0 = random_band_field(g, 3, 1.0, 21);
  const ConvergenceTable few = scaling_study(spec, w0, 5);
  spec.paths_per_shell = 12;
  const ConvergenceTable many = scaling_study(spec, w0, 5);

  const double se_few = few.rows[0].std_sup_hm / std::sqrt(6.0);
  const double se_many = many.rows[0].std_sup_hm / std::sqrt(12.0);
  const double gap = std::abs(few.rows[0].mean_sup_hm - many.rows[0].mean_sup_hm);
  INFO("gap " << gap << " vs SEs " << se_few << " / " << se_many);
  CHECK(gap < 2.0 * (se_few + se_many));
}

TEST_CASE("scaling study reports guard aborts per row instead of failing the table") {
  const GridSpec g = grid_of(24);
  ScalingStudySpec spec = small_scaling_spec(g, LESModel::linear(0.0));
  // inviscid explicit steps grow enstrophy by O(dt^2) per step, so a guard
  // this tight trips immediately while the looser reference run stays alive
  spec.base.nu = 0.0;
  spec.reference.nu = 0.0;
  spec.base.enstrophy_guard = 1.0 + 1e-9;
  spec.shells = {1};
  spec.paths_per_shell = 3;
  const SpectralField w0 = random_band_field(g, 3, 1.0, 21);

  const ConvergenceTable table = scaling_study(spec, w0, 5);
  REQUIRE(table.rows.size() == 1);
  const ConvergenceRow& row = table.rows[0];
  CHECK_FALSE(row.note.empty());
  CHECK(row.paths < 3);
  CHECK(std::isnan(row.mean_sup_hm));
  CHECK(std::isnan(row.mean_l2h));
}

TEST_CASE("scaling study validation rejects malformed specs") {
  const GridSpec g = grid_of(24);
  const SpectralField w0 = random_band_field(g, 3, 1.0, 11);
  ScalingStudySpec spec = small_scaling_spec(g, LESModel::linear(0.0));

  ScalingStudySpec bad = spec;
  bad.shells = {2, 2};
  CHECK_THROWS_AS(scaling_study(bad, w0, 1), std::invalid_argument);
  bad = spec;
  bad.delta = 2.5;
  CHECK_THROWS_AS(scaling_study(bad, w0, 1), std::invalid_argument);
  bad = spec;
  bad.reference.scheme = Scheme::ito_em;
  bad.reference.theta = NoiseCoefficients::shell(1, g);
  CHECK_THROWS_AS(scaling_study(bad, w0, 1), std::invalid_argument);
  bad = spec;
  bad.reference.dt = spec.reference.dt * 0.5;
  CHECK_THROWS_AS(scaling_study(bad, w0, 1), std::invalid_argument);
  bad = spec;
  bad.base.scheme = Scheme::deterministic;
  bad.base.theta.reset();
  CHECK_THROWS_AS(scaling_study(bad, w0, 1), std::invalid_argument);
  // initial state on the wrong grid
  const SpectralField w_fine = random_band_field(grid_of(32), 3, 1.0, 11);
  CHECK_THROWS_AS(scaling_study(spec, w_fine, 1), std::invalid_argument);
}

TEST_CASE("scheme consistency with constant f: discrepancies are exactly zero") {
  const GridSpec g = grid_of(24);
  SolverConfig cfg = stochastic_config(g, LESModel::linear(0.0), 1, 1e-3, 0.02, 5);
  const SpectralField w0 = random_band_field(g, 3, 1.0, 31);

  const ConsistencyTable table =
      scheme_consistency_study(cfg, {4e-3, 2e-3, 1e-3}, 2, w0, 77);
  REQUIRE(table.rows.size() == 3);
  for (const ConsistencyRow& row : table.rows) {
    CHECK(row.mean_sup_l2 == 0.0);
    CHECK(row.std_sup_l2 == 0.0);
    CHECK(row.paths == 2);
  }
  CHECK_FALSE(table.monotone);
  CHECK(std::isnan(table.order_estimate));
}

TEST_CASE("scheme consistency: shared-noise discrepancy shrinks with dt") {
  const GridSpec g = grid_of(24);
  SolverConfig cfg = stochastic_config(g, LESModel::linear(0.2), 1, 1e-3, 0.04, 5);
  const SpectralField w0 = random_band_field(g, 3, 1.0, 31);

  const ConsistencyTable table =
      scheme_consistency_study(cfg, {4e-3, 2e-3, 1e-3}, 4, w0, 42);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].dt == 4e-3);
  for (const ConsistencyRow& row : table.rows) CHECK(row.mean_sup_l2 > 0.0);
  INFO("means " << table.rows[0].mean_sup_l2 << " " << table.rows[1].mean_sup_l2 << " "
                << table.rows[2].mean_sup_l2 << ", order " << table.order_estimate);
  CHECK(table.rows[2].mean_sup_l2 < table.rows[0].mean_sup_l2);
  CHECK(table.monotone);
  CHECK(table.order_estimate > 0.2);
}

TEST_CASE("scheme consistency validation") {
  const GridSpec g = grid_of(24);
  SolverConfig cfg = stochastic_config(g, LESModel::linear(0.2), 1, 1e-3, 0.04, 5);
  const SpectralField w0 = random_band_field(g, 3, 1.0, 31);

  CHECK_THROWS_AS(scheme_consistency_study(cfg, {}, 2, w0, 1), std::invalid_argument);
  CHECK_THROWS_AS(scheme_consistency_study(cfg, {1e-3, 2e-3}, 2, w0, 1), std::invalid_argument);
  // 2.5e-3 is not an integer multiple of 1e-3
  CHECK_THROWS_AS(scheme_consistency_study(cfg, {4e-3, 2.5e-3, 1e-3}, 2, w0, 1),
                  std::invalid_argument);
  // 3e-3 does not divide the horizon 0.04
  CHECK_THROWS_AS(scheme_consistency_study(cfg, {3e-3, 1e-3}, 2, w0, 1), std::invalid_argument);
  SolverConfig no_noise = cfg;
  no_noise.theta.reset();
  CHECK_THROWS_AS(scheme_consistency_study(no_noise, {2e-3, 1e-3}, 2, w0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(scheme_consistency_study(cfg, {2e-3, 1e-3}, 0, w0, 1), std::invalid_argument);
}

TEST_CASE("uniqueness probe: duplicates agree exactly and heat decay is grid-free") {
  SolverConfig cfg;
  cfg.grid = grid_of(16);
  cfg.nu = 0.05;
  cfg.dt = 1e-3;
  cfg.horizon = 0.02;
  cfg.scheme = Scheme::deterministic;
  cfg.model = LESModel::linear(0.0);
  cfg.record_stride = 5;
  SpectralField w0(cfg.grid);
  w0.set_coeff(1, 1, 1.0);

  const UniquenessReport rep = uniqueness_probe(cfg, w0, {16, 16, 32});
  REQUIRE(rep.pairs.size() == 3);
  CHECK(rep.pairs[0].res_a == 16);
  CHECK(rep.pairs[0].res_b == 16);
  CHECK(rep.pairs[0].sup_hm1 == 0.0);
  // single-mode heat decay is resolution independent
  CHECK(rep.pairs[1].sup_hm1 <= 1e-14);
  CHECK(rep.pairs[2].sup_hm1 <= 1e-14);
  CHECK(rep.cauchy);
  CHECK(rep.model_audit.ok);
}

TEST_CASE("uniqueness probe: Smagorinsky refinement is Cauchy at desk scale") {
  SolverConfig cfg;
  cfg.grid = grid_of(16);
  cfg.nu = 0.01;
  cfg.dt = 1e-3;
  cfg.horizon = 0.05;
  cfg.scheme = Scheme::deterministic;
  cfg.model = LESModel::smagorinsky(0.05);
  cfg.record_stride = 10;
  const SpectralField w0 = random_band_field(cfg.grid, 3, 1.0, 21);

  const UniquenessReport rep = uniqueness_probe(cfg, w0, {16, 24, 32});
  REQUIRE(rep.pairs.size() == 3);
  double d_16_32 = 0.0, d_24_32 = 0.0;
  for (const UniquenessPair& p : rep.pairs) {
    CHECK(p.sup_hm1 > 0.0);
    if (p.res_a == 16 && p.res_b == 32) d_16_32 = p.sup_hm1;
    if (p.res_a == 24 && p.res_b == 32) d_24_32 = p.sup_hm1;
  }
  INFO("d(16,32) " << d_16_32 << " d(24,32) " << d_24_32);
  CHECK(d_24_32 < d_16_32);
  CHECK(rep.cauchy);

  SolverConfig stochastic = cfg;
  stochastic.scheme = Scheme::ito_em;
  stochastic.theta = NoiseCoefficients::shell(1, cfg.grid);
  CHECK_THROWS_AS(uniqueness_probe(stochastic, w0, {16, 32}), std::invalid_argument);
  CHECK_THROWS_AS(uniqueness_probe(cfg, w0, {32, 16}), std::invalid_argument);
  CHECK_THROWS_AS(uniqueness_probe(cfg, w0, {15, 32}), std::invalid_argument);
  CHECK_THROWS_AS(uniqueness_probe(cfg, w0, {}), std::invalid_argument);
}

TEST_CASE("increment moment statistic: finite, reproducible, needs noise") {
  const GridSpec g = grid_of(24);
  SolverConfig cfg = stochastic_config(g, LESModel::smagorinsky(0.05), 1, 1e-3, 0.02, 5);
  const SpectralField w0 = random_band_field(g, 3, 1.0, 21);

  const IncrementMomentResult a = increment_moment_statistic(cfg, w0, 13, 3);
  const IncrementMomentResult b = increment_moment_statistic(cfg, w0, 13, 3);
  CHECK(a.paths == 3);
  CHECK(std::isfinite(a.statistic));
  CHECK(a.statistic > 0.0);
  CHECK(a.statistic == b.statistic);

  SolverConfig det = cfg;
  det.scheme = Scheme::deterministic;
  det.theta.reset();
  CHECK_THROWS_AS(increment_moment_statistic(det, w0, 13, 3), std::invalid_argument);
  CHECK_THROWS_AS(increment_moment_statistic(cfg, w0, 13, 0), std::invalid_argument);
}

TEST_CASE("invariant suite: healthy stochastic configuration passes every check") {
  const GridSpec g = grid_of(32);
  SolverConfig cfg = stochastic_config(g, LESModel::smagorinsky(0.05), 2, 1e-3, 0.05, 5);
  const SpectralField w0 = random_band_field(g, 4, 1.0, 3);

  const InvariantReport rep = invariant_suite(cfg, w0, 17);
  REQUIRE(rep.checks.size() == 10);
  for (const InvariantCheck& c : rep.checks) {
    INFO(c.name << ": measured " << c.measured << " tolerance " << c.tolerance << " " << c.detail);
    CHECK(c.pass);
  }
  CHECK(rep.all_pass);
}

TEST_CASE("invariant suite: deterministic configs run the model and operator checks") {
  const GridSpec g = grid_of(32);
  SolverConfig cfg;
  cfg.grid = g;
  cfg.nu = 0.01;
  cfg.dt = 1e-3;
  cfg.horizon = 0.05;
  cfg.scheme = Scheme::deterministic;
  cfg.model = LESModel::smagorinsky(0.05);
  cfg.record_stride = 5;
  const SpectralField w0 = random_band_field(g, 4, 1.0, 3);

  const InvariantReport rep = invariant_suite(cfg, w0, 17);
  CHECK(rep.checks.size() == 4);
  CHECK(rep.all_pass);
}

TEST_CASE("invariant suite: a flipped corrector sign breaks the a-priori checks") {
  const GridSpec g = grid_of(32);
  SolverConfig cfg = stochastic_config(g, LESModel::smagorinsky(0.05), 2, 1e-3, 0.05, 5);
  const SpectralField w0 = random_band_field(g, 4, 1.0, 3);

  const InvariantReport rep = invariant_suite(cfg, w0, 17, FaultInjection::flip_corrector_sign);
  CHECK_FALSE(rep.all_pass);
  CHECK_FALSE(find_check(rep, "ito drift balance (a-priori bound)").pass);
  CHECK_FALSE(find_check(rep, "corrector quadrature agreement").pass);
  // unrelated identities stay green
  CHECK(find_check(rep, "covariance identity").pass);
  CHECK(find_check(rep, "enstrophy channel neutrality").pass);
  CHECK(find_check(rep, "advection enstrophy neutrality").pass);
}

TEST_CASE("invariant suite: a non-symmetric modulation family fails the covariance identity") {
  const GridSpec g = grid_of(32);
  SolverConfig cfg = stochastic_config(g, LESModel::smagorinsky(0.05), 2, 1e-3, 0.05, 5);
  const double a = 1.0 / std::sqrt(2.0);
  cfg.theta = NoiseCoefficients::unchecked({{-1, 0, a}, {1, 0, a}}, "broken fixture");
  const SpectralField w0 = random_band_field(g, 4, 1.0, 3);

  const InvariantReport rep = invariant_suite(cfg, w0, 17);
  const InvariantCheck& cov = find_check(rep, "covariance identity");
  CHECK_FALSE(cov.pass);
  CHECK(cov.measured > 0.1);
  CHECK_FALSE(rep.all_pass);
}
