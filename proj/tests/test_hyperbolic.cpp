#include <doctest.h>

#include <cmath>

#include "parex/hyperbolic.hpp"

using namespace parex;

namespace {
const MarkedFamily kQuad = MarkedFamily::quadratic({-1.0, 0}, 2.0);
}

TEST_CASE("classify superattracting parameters") {
  SUBCASE("a = 0: fixed critical point") {
    const auto v = classify_parameter(kQuad, {0, 0}, 500);
    CHECK(v.status == HypStatus::Hyperbolic);
    bool found = false;
    for (const auto& c : v.cycles)
      if (c.period == 1 && !c.representative.is_infinity()) {
        found = true;
        CHECK(std::abs(c.multiplier) < 1e-9);
        CHECK(std::abs(c.representative.to_cplx()) < 1e-9);
      }
    CHECK(found);
  }
  SUBCASE("a = -1: superattracting 2-cycle") {
    const auto v = classify_parameter(kQuad, {-1, 0}, 500);
    CHECK(v.status == HypStatus::Hyperbolic);
    bool found = false;
    for (const auto& c : v.cycles)
      if (c.period == 2) {
        found = true;
        CHECK(std::abs(c.multiplier) < 1e-9);
      }
    CHECK(found);
  }
}

TEST_CASE("classify the attracting fixed point at a = -0.1") {
  const auto v = classify_parameter(kQuad, {-0.1, 0}, 2000);
  REQUIRE(v.status == HypStatus::Hyperbolic);
  const double expected = 1.0 - std::sqrt(1.4);  // 2 z* by the quadratic formula
  bool found = false;
  for (const auto& c : v.cycles)
    if (c.period == 1 && !c.representative.is_infinity()) {
      found = true;
      CHECK(std::abs(c.multiplier - cplx(expected, 0)) < 1e-9);
    }
  REQUIRE(found);
}

TEST_CASE("the Chebyshev parameter stays undetermined") {
  const auto v = classify_parameter(kQuad, {-2, 0}, 2000);
  CHECK(v.status == HypStatus::Undetermined);
}

TEST_CASE("escaping parameters are hyperbolic through infinity") {
  const auto v = classify_parameter(kQuad, {0.3, 0}, 2000);
  REQUIRE(v.status == HypStatus::Hyperbolic);
  bool inf_cycle = false;
  for (const auto& c : v.cycles) inf_cycle = inf_cycle || c.representative.is_infinity();
  CHECK(inf_cycle);
}

TEST_CASE("find_attracting_cycles") {
  SUBCASE("z^2 has the two superattracting fixed points") {
    const RationalMap sq({{0, 0}, {0, 0}, {1, 0}}, {{1, 0}});
    const auto cycles = find_attracting_cycles(
        sq, 4, {SpherePoint::finite({0.2, 0.1}), SpherePoint{{0.1, 0}, Chart::Reciprocal}});
    REQUIRE(cycles.size() == 2);
    for (const auto& c : cycles) {
      CHECK(c.period == 1);
      CHECK(std::abs(c.multiplier) < 1e-9);
    }
  }
  SUBCASE("basilica 2-cycle") {
    const RationalMap f({{-1, 0}, {0, 0}, {1, 0}}, {{1, 0}});
    const auto cycles =
        find_attracting_cycles(f, 4, {SpherePoint::finite({0.05, 0.02})}, 2000);
    REQUIRE(cycles.size() == 1);
    CHECK(cycles[0].period == 2);
  }
  SUBCASE("attracting fixed point of z^2 - 0.1") {
    const RationalMap f({{-0.1, 0}, {0, 0}, {1, 0}}, {{1, 0}});
    const auto cycles = find_attracting_cycles(f, 4, {SpherePoint::finite({0, 0})}, 2000);
    REQUIRE(cycles.size() == 1);
    const double z_star = (1.0 - std::sqrt(1.4)) / 2.0;
    CHECK(std::abs(cycles[0].representative.to_cplx() - cplx(z_star, 0)) < 1e-9);
  }
}

TEST_CASE("multiplier recomputation matches") {
  for (double a : {0.0, -1.0, -0.1, -0.5, 0.2}) {
    const auto v = classify_parameter(kQuad, {a, 0}, 2000);
    if (v.status != HypStatus::Hyperbolic) continue;
    const RationalMap f = kQuad.map_at({a, 0});
    for (const auto& c : v.cycles) {
      const cplx again = cycle_multiplier(f, c.representative, c.period);
      CHECK(std::abs(again - c.multiplier) <= 1e-9 * (1.0 + std::abs(c.multiplier)));
    }
  }
}

TEST_CASE("verdict stability under tiny perturbations") {
  Rng rng(0x5ab1eULL);
  const std::vector<cplx> centers = {{0, 0}, {-1, 0}, {-0.1, 0}, {-0.5, 0.0}, {0.3, 0.2}};
  int hyperbolic_pairs = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const cplx a = centers[trial % centers.size()];
    const auto v1 = classify_parameter(kQuad, a, 2000);
    if (v1.status != HypStatus::Hyperbolic) continue;
    const cplx b = a + cplx(rng.uniform(-1e-12, 1e-12), rng.uniform(-1e-12, 1e-12));
    const auto v2 = classify_parameter(kQuad, b, 2000);
    CHECK(v2.status == HypStatus::Hyperbolic);
    ++hyperbolic_pairs;
  }
  CHECK(hyperbolic_pairs >= 50);
}

TEST_CASE("density scan basics") {
  SUBCASE("interior of the main hyperbolic component") {
    const auto rows = density_scan(kQuad, {0, 0}, {0.05}, 100, 500, 42);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].n_hyperbolic == rows[0].n_samples);
    CHECK(rows[0].wilson_lo > 0.9);
  }
  SUBCASE("seeded reproducibility") {
    const auto r1 = density_scan(kQuad, {-2, 0}, {0.05, 0.01}, 100, 300, 7, 1);
    const auto r2 = density_scan(kQuad, {-2, 0}, {0.05, 0.01}, 100, 300, 7, 4);
    REQUIRE(r1.size() == r2.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
      CHECK(r1[i].n_hyperbolic == r2[i].n_hyperbolic);
      CHECK(r1[i].n_undetermined == r2[i].n_undetermined);
    }
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(density_scan(kQuad, {0, 0}, {0.1}, 0, 100, 1), Error);
    CHECK_THROWS_AS(density_scan(kQuad, {0, 0}, {0.1, 0.2}, 100, 100, 1), Error);
  }
}

TEST_CASE("julia flags from the bounded cycle search") {
  MarkedFamily cheb = MarkedFamily::quadratic({-2, 0}, 1e-3);
  apply_julia_flags(cheb, 400);
  CHECK(cheb.tracks()[0].in_julia);

  MarkedFamily center = MarkedFamily::quadratic({0, 0}, 1e-3);
  apply_julia_flags(center, 400);
  CHECK_FALSE(center.tracks()[0].in_julia);

  // near-parabolic: no attracting cycle is visible at a short flag horizon
  MarkedFamily parab = MarkedFamily::quadratic({0.2501, 0}, 1e-6);
  apply_julia_flags(parab, 200);
  CHECK(parab.tracks()[0].in_julia);
}
