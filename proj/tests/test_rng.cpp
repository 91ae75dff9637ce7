// Counter-based generator: known-answer vectors, stream separation, and
// distribution sanity for the normal draws.
#include <array>
#include <cmath>
#include <cstdint>
#include <set>

#include "doctest.h"
#include "smag/rng.hpp"

using namespace smag;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Zero counter and key.
  auto r = philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
  CHECK(r[0] == 0x6627e8d5u);
  CHECK(r[1] == 0xe169c58du);
  CHECK(r[2] == 0xbc57ac4cu);
  CHECK(r[3] == 0x9b00dbd8u);

  // All-ones counter and key.
  auto s = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(s[0] == 0x408f276du);
  CHECK(s[1] == 0x41c83b0eu);
  CHECK(s[2] == 0xa20bc7c6u);
  CHECK(s[3] == 0x6d5451fdu);

  // Digits-of-pi counter and key.
  auto t = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  CHECK(t[0] == 0xd16cfe09u);
  CHECK(t[1] == 0x94fdccebu);
  CHECK(t[2] == 0x5001e420u);
  CHECK(t[3] == 0x24126ea1u);
}

TEST_CASE("normal_draw is a pure function of its indices") {
  const double a = normal_draw(42, 3, RngDomain::brownian, 7, 11);
  const double b = normal_draw(42, 3, RngDomain::brownian, 7, 11);
  CHECK(a == b);

  // Any single index change moves the draw.
  CHECK(normal_draw(43, 3, RngDomain::brownian, 7, 11) != a);
  CHECK(normal_draw(42, 4, RngDomain::brownian, 7, 11) != a);
  CHECK(normal_draw(42, 3, RngDomain::initial_state, 7, 11) != a);
  CHECK(normal_draw(42, 3, RngDomain::brownian, 8, 11) != a);
  CHECK(normal_draw(42, 3, RngDomain::brownian, 7, 12) != a);
}

TEST_CASE("normal_draw streams do not collide across a probe set") {
  std::set<double> seen;
  for (uint32_t path = 0; path < 8; ++path) {
    for (uint32_t sub = 0; sub < 8; ++sub) {
      for (uint32_t step = 0; step < 8; ++step) {
        seen.insert(normal_draw(123456789ull, path, RngDomain::brownian, sub, step));
      }
    }
  }
  CHECK(seen.size() == 8 * 8 * 8);
}

TEST_CASE("normal_draw moments and tails") {
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  int tail = 0;
  for (int i = 0; i < n; ++i) {
    const double x = normal_draw(2024, 0, RngDomain::scatter, 1, static_cast<uint32_t>(i));
    sum += x;
    sum_sq += x * x;
    if (std::abs(x) > 1.96) ++tail;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  // 5-sigma windows for the sample mean, variance, and tail fraction.
  CHECK(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
  const double p = static_cast<double>(tail) / n;
  CHECK(std::abs(p - 0.05) < 5.0 * std::sqrt(0.05 * 0.95 / n));
}

TEST_CASE("uniform_draw lands in [0,1) with the right mean") {
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = uniform_draw(7, 0, RngDomain::scatter, 0, static_cast<uint32_t>(i));
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
}
