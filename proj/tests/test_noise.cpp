// Noise family tests: shell enumeration against hand counts, the pointwise
// covariance identity, Brownian increment coupling across refinements, and
// direct-summation oracles for the transport increment and channel pairings.
#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "smag/noise.hpp"
#include "smag/operators.hpp"
#include "smag/rng.hpp"

using namespace smag;

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

SpectralField random_field(const GridSpec& g, uint64_t seed, double amp = 1.0) {
  SpectralField f(g);
  uint32_t sub = 0;
  f.transform_each([&](int, int, double) {
    return amp * normal_draw(seed, 0, RngDomain::initial_state, sub++, 0);
  });
  return f;
}

double basis_at(int l1, int l2, double x1, double x2) {
  const bool canonical = l1 > 0 || (l1 == 0 && l2 > 0);
  if (canonical) return std::sqrt(2.0) * std::cos(kTwoPi * (l1 * x1 + l2 * x2));
  return std::sqrt(2.0) * std::sin(kTwoPi * (-l1 * x1 - l2 * x2));
}

}  // namespace

TEST_CASE("shell families have the hand-counted support sizes") {
  GridSpec g;  // max_mode 31 accommodates all four shells
  // Lattice counts of N <= |k| <= 2N.
  CHECK(NoiseCoefficients::shell(1, g).entries().size() == 12);
  CHECK(NoiseCoefficients::shell(2, g).entries().size() == 40);
  CHECK(NoiseCoefficients::shell(4, g).entries().size() == 152);
  CHECK(NoiseCoefficients::shell(8, g).entries().size() == 604);

  const NoiseCoefficients t = NoiseCoefficients::shell(2, g);
  CHECK(t.sum_sq() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t.linf() == doctest::Approx(1.0 / std::sqrt(40.0)).epsilon(1e-14));
  CHECK(t.descriptor() == "annulus N=2");
  CHECK(t.max_abs_wavenumber() == 4);
  // Sorted lexicographically, all inside the annulus.
  const auto& e = t.entries();
  for (size_t i = 0; i + 1 < e.size(); ++i) {
    CHECK((e[i].k1 < e[i + 1].k1 || (e[i].k1 == e[i + 1].k1 && e[i].k2 < e[i + 1].k2)));
  }
  for (const ThetaEntry& k : e) {
    const int r2 = k.k1 * k.k1 + k.k2 * k.k2;
    CHECK(r2 >= 4);
    CHECK(r2 <= 16);
  }
}

TEST_CASE("shell construction requires a resolvable annulus") {
  GridSpec g;
  g.n = 32;
  g.max_mode = 15;
  CHECK_NOTHROW(NoiseCoefficients::shell(7, g));
  CHECK_THROWS_AS(NoiseCoefficients::shell(8, g), std::invalid_argument);
}

TEST_CASE("from_entries validation") {
  auto quad = [](double v) {
    return std::vector<ThetaEntry>{{1, 0, v}, {0, 1, v}, {-1, 0, v}, {0, -1, v}};
  };
  CHECK_NOTHROW(NoiseCoefficients::from_entries(quad(0.5)));

  CHECK_THROWS_AS(NoiseCoefficients::from_entries({{0, 0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(NoiseCoefficients::from_entries(quad(-0.5)), std::invalid_argument);
  CHECK_THROWS_AS(NoiseCoefficients::from_entries(quad(0.4)), std::invalid_argument);  // sum != 1
  // Unequal values on the same radius.
  CHECK_THROWS_AS(NoiseCoefficients::from_entries(
                      {{1, 0, 0.6}, {0, 1, 0.4}, {-1, 0, 0.6}, {0, -1, 0.4}}),
                  std::invalid_argument);
  // Missing quarter-turn partner.
  CHECK_THROWS_AS(NoiseCoefficients::from_entries({{1, 0, std::sqrt(0.5)}, {-1, 0, std::sqrt(0.5)}}),
                  std::invalid_argument);
  // Duplicate entry.
  CHECK_THROWS_AS(NoiseCoefficients::from_entries(
                      {{1, 0, 0.5}, {1, 0, 0.5}, {-1, 0, 0.5}, {0, 1, 0.5}, {0, -1, 0.5}}),
                  std::invalid_argument);
}

TEST_CASE("sigma fields: spectral placement matches the analytic formula") {
  GridSpec g;
  g.n = 16;
  g.max_mode = 7;
  Workspace ws;
  for (const auto& k : std::vector<std::array<int, 2>>{{1, 0}, {0, 2}, {-1, 3}, {2, -2}, {-3, -1}}) {
    const VelocityField v = sigma_coefficients(k[0], k[1], g);
    const PhysicalField s1 = ws.to_physical(v.u1);
    const PhysicalField s2 = ws.to_physical(v.u2);
    double worst = 0.0;
    for (int i = 0; i < s1.np; i += 3) {
      for (int j = 0; j < s1.np; j += 3) {
        const std::array<double, 2> x = {static_cast<double>(i) / s1.np, static_cast<double>(j) / s1.np};
        const std::array<double, 2> want = sigma_at(k[0], k[1], x);
        worst = std::max({worst, std::abs(s1.at(i, j) - want[0]), std::abs(s2.at(i, j) - want[1])});
      }
    }
    CHECK(worst < 1e-13);

    // Divergence-free by construction.
    SpectralField div = spectral_derivative(v.u1, 0);
    div.axpy(1.0, spectral_derivative(v.u2, 1));
    CHECK(div.l2_norm() < 1e-14);
  }
}

TEST_CASE("shell covariance is I/2 pointwise to near round-off") {
  GridSpec g;
  std::vector<std::array<double, 2>> points;
  for (int i = 0; i < 64; ++i) {
    points.push_back({uniform_draw(99, 0, RngDomain::scatter, 0, static_cast<uint32_t>(i)),
                      uniform_draw(99, 0, RngDomain::scatter, 1, static_cast<uint32_t>(i))});
  }
  for (int n : {1, 2, 4}) {
    CHECK(covariance_residual(NoiseCoefficients::shell(n, g), points) < 1e-12);
  }
  // A broken family (one mode dropped, not renormalized) is far from I/2.
  std::vector<ThetaEntry> broken = NoiseCoefficients::shell(1, g).entries();
  broken.pop_back();
  CHECK(covariance_residual(NoiseCoefficients::unchecked(broken), points) > 1e-2);
}

TEST_CASE("Brownian driver: determinism, refinement coupling, zero dt") {
  const std::vector<std::pair<int, int>> support = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const double dt = 2e-3;

  BrownianDriver a(77, 3, support, 1);
  BrownianDriver b(77, 3, support, 1);
  const auto ia = a.sample_increments(dt);
  CHECK(ia == b.sample_increments(dt));
  CHECK(ia.size() == support.size());

  // Coarse driver at refinement 2 telescopes two fine steps exactly.
  BrownianDriver coarse(77, 3, support, 2);
  BrownianDriver fine(77, 3, support, 1);
  const auto c0 = coarse.sample_increments(dt);
  const auto f0 = fine.sample_increments(dt / 2);
  const auto f1 = fine.sample_increments(dt / 2);
  for (size_t i = 0; i < support.size(); ++i) {
    CHECK(c0[i] == doctest::Approx(f0[i] + f1[i]).epsilon(1e-15));
  }

  // Distinct paths decouple; same path after reset replays.
  BrownianDriver other(77, 4, support, 1);
  CHECK(other.sample_increments(dt) != ia);
  a.reset();
  CHECK(a.sample_increments(dt) == ia);

  // dt = 0 produces exact zeros.
  BrownianDriver z(77, 3, support, 1);
  for (double v : z.sample_increments(0.0)) CHECK(v == 0.0);

  CHECK_THROWS_AS(BrownianDriver(1, 0, {}, 1), std::invalid_argument);
  CHECK_THROWS_AS(BrownianDriver(1, 0, support, 0), std::invalid_argument);
}

TEST_CASE("Brownian increments have variance dt") {
  const std::vector<std::pair<int, int>> support = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const double dt = 1e-2;
  double sum = 0.0, sum_sq = 0.0;
  const int n = 20000;
  BrownianDriver d(5, 0, support, 1);
  for (int i = 0; i < n / 4; ++i) {
    for (double v : d.sample_increments(dt)) {
      sum += v;
      sum_sq += v * v;
    }
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 5.0 * std::sqrt(dt / n));
  CHECK(std::abs(var - dt) < 5.0 * dt * std::sqrt(2.0 / n));
}

TEST_CASE("transport increment matches direct summation for a linear slope") {
  GridSpec g;
  g.n = 8;
  g.max_mode = 3;
  Workspace ws;
  const SpectralField w = random_field(g, 12, 0.7);
  const LESModel lin = LESModel::linear(2.0);
  const NoiseCoefficients theta =
      NoiseCoefficients::from_entries({{1, 0, 0.5}, {0, 1, 0.5}, {-1, 0, 0.5}, {0, -1, 0.5}});
  const std::vector<double> dw = {0.3, -0.1, 0.7, 0.2};

  const SpectralField got = transport_increment(ws, w, lin, theta, dw);

  // Oracle: V and grad f(omega) = 2 grad omega by direct basis sums, plain
  // quadrature projection.
  const int np = 32;
  SpectralField want(g);
  want.transform_each([&](int l1, int l2, double) {
    double acc = 0.0;
    for (int i = 0; i < np; ++i) {
      for (int j = 0; j < np; ++j) {
        const double x1 = static_cast<double>(i) / np, x2 = static_cast<double>(j) / np;
        double v1 = 0.0, v2 = 0.0;
        for (size_t m = 0; m < theta.entries().size(); ++m) {
          const ThetaEntry& e = theta.entries()[m];
          const std::array<double, 2> s = sigma_at(e.k1, e.k2, {x1, x2});
          v1 += e.value * dw[m] * s[0];
          v2 += e.value * dw[m] * s[1];
        }
        double g1 = 0.0, g2 = 0.0;
        w.for_each([&](int m1, int m2, double c) {
          const double mirror = basis_at(-m1, -m2, x1, x2);
          g1 += -kTwoPi * m1 * c * mirror;
          g2 += -kTwoPi * m2 * c * mirror;
        });
        acc += -(v1 * 2.0 * g1 + v2 * 2.0 * g2) * basis_at(l1, l2, x1, x2);
      }
    }
    return acc / (static_cast<double>(np) * np);
  });

  double worst = 0.0;
  want.for_each([&](int l1, int l2, double c) { worst = std::max(worst, std::abs(c - got.coeff(l1, l2))); });
  CHECK(worst < 1e-12);
}

TEST_CASE("transport increment is linear in the Brownian increment") {
  GridSpec g;
  g.n = 16;
  g.max_mode = 7;
  Workspace ws;
  const SpectralField w = random_field(g, 3);
  const LESModel smag = LESModel::smagorinsky(0.17);
  const NoiseCoefficients theta = NoiseCoefficients::shell(1, g);
  std::vector<double> a(theta.entries().size()), b(theta.entries().size()), ab(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    a[i] = normal_draw(1, 0, RngDomain::scatter, static_cast<uint32_t>(i), 0);
    b[i] = normal_draw(2, 0, RngDomain::scatter, static_cast<uint32_t>(i), 0);
    ab[i] = a[i] + b[i];
  }
  SpectralField sum = transport_increment(ws, w, smag, theta, a);
  sum.axpy(1.0, transport_increment(ws, w, smag, theta, b));
  const SpectralField joint = transport_increment(ws, w, smag, theta, ab);
  double worst = 0.0;
  joint.for_each([&](int l1, int l2, double c) { worst = std::max(worst, std::abs(c - sum.coeff(l1, l2))); });
  CHECK(worst < 1e-13 * std::max(1.0, joint.l2_norm()));

  // Sign antisymmetry.
  std::vector<double> neg(a.size());
  for (size_t i = 0; i < a.size(); ++i) neg[i] = -a[i];
  SpectralField flip = transport_increment(ws, w, smag, theta, neg);
  flip.axpy(1.0, transport_increment(ws, w, smag, theta, a));
  CHECK(flip.l2_norm() < 1e-13);

  // Support size mismatch is rejected.
  CHECK_THROWS_AS(transport_increment(ws, w, smag, theta, {1.0}), std::invalid_argument);

  // A constant slope limiter kills the transport exactly.
  const SpectralField off = transport_increment(ws, w, LESModel::linear(0.0), theta, a);
  CHECK(off.l2_norm() == 0.0);
}

TEST_CASE("Ito corrector: linear slope gives an exact Laplacian, quadrature exactness for alpha = 1") {
  GridSpec g;
  Workspace ws;
  const SpectralField w = random_field(g, 4, 0.5);

  const double c = 0.8;
  const SpectralField corr = ito_corrector(ws, w, LESModel::linear(c));
  SpectralField want = laplacian(w);
  want.scale(c * c / 4.0);
  double worst = 0.0;
  want.for_each([&](int l1, int l2, double v) { worst = std::max(worst, std::abs(v - corr.coeff(l1, l2))); });
  CHECK(worst < 1e-12 * std::max(1.0, w.l2_norm()));

  // alpha = 1: a = (f')^2/4 = c^2 omega^2 is band-limited, so the padded-grid
  // corrector equals the refined-quadrature route exactly.
  const LESModel quad_model = LESModel::power_law(0.6, 1.0);
  const SpectralField c1 = ito_corrector(ws, w, quad_model);
  const PhysicalField s = ws.to_physical(w, 512);
  PhysicalField a(512);
  for (size_t i = 0; i < a.v.size(); ++i) {
    const double fp = f_prime(quad_model, s.v[i]);
    a.v[i] = 0.25 * fp * fp;
  }
  const SpectralField c2 = flux_divergence(ws, a, w);
  worst = 0.0;
  c1.for_each([&](int l1, int l2, double v) { worst = std::max(worst, std::abs(v - c2.coeff(l1, l2))); });
  CHECK(worst < 1e-10 * std::max(1.0, c1.l2_norm()));
}

TEST_CASE("channel pairings equal brute-force quadrature") {
  GridSpec g;
  g.n = 16;
  g.max_mode = 7;
  Workspace ws;
  const SpectralField w = random_field(g, 6, 0.8);
  const LESModel smag = LESModel::smagorinsky(0.2);
  const NoiseCoefficients theta = NoiseCoefficients::shell(2, g);
  const int quad_np = 256;

  const std::vector<double> got = enstrophy_channel_pairings(ws, w, smag, theta, quad_np);
  REQUIRE(got.size() == theta.entries().size());

  // Brute force: sample everything on the quadrature grid and average.
  const PhysicalField s = ws.to_physical(w, quad_np);
  const auto [g1, g2] = ws.derivative_samples(s);
  for (size_t m = 0; m < theta.entries().size(); m += 7) {
    const ThetaEntry& e = theta.entries()[m];
    double acc = 0.0;
    for (int i = 0; i < quad_np; ++i) {
      for (int j = 0; j < quad_np; ++j) {
        const std::array<double, 2> x = {static_cast<double>(i) / quad_np, static_cast<double>(j) / quad_np};
        const std::array<double, 2> sig = sigma_at(e.k1, e.k2, x);
        const size_t idx = static_cast<size_t>(i) * quad_np + j;
        acc += (sig[0] * g1.v[idx] + sig[1] * g2.v[idx]) * f_eval(smag, s.v[idx]);
      }
    }
    acc /= static_cast<double>(quad_np) * quad_np;
    CHECK(got[m] == doctest::Approx(acc).epsilon(1e-10));
  }

  CHECK_THROWS_AS(enstrophy_channel_pairings(ws, w, smag, theta, 16), std::invalid_argument);
}
