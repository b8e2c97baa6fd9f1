#include <doctest.h>

#include <cmath>

#include "parex/probes.hpp"

using namespace parex;

namespace {
const MarkedFamily kCheb = MarkedFamily::quadratic({-2, 0}, 1e-3);
const NeighborhoodConfig kNbh = NeighborhoodConfig::build(6.0, 4.0, 0.5);
const ExponentLadder kLadder = ExponentLadder::build(1.3, 0.45, 0.5, 1e-6, 2);
}  // namespace

TEST_CASE("pointwise distortion") {
  SUBCASE("identical points have zero distortion") {
    const auto pair = pointwise_distortion_probe(kCheb, {-2, 0}, {1.0, 0}, {1.0, 0}, 10, 0.05);
    CHECK(pair.lhs == 0.0);
  }
  SUBCASE("nearby points obey the bound with C = 10") {
    const auto pair =
        pointwise_distortion_probe(kCheb, {-2, 0}, {1.0, 0}, {1.0 + 1e-9, 0}, 10, 0.05);
    CHECK(pair.lhs <= std::expm1(10.0 * pair.sum));
    CHECK(pair.lhs > 0.0);
  }
  SUBCASE("separating orbits are inapplicable, not failing") {
    CHECK_THROWS_AS(pointwise_distortion_probe(kCheb, {-2, 0}, {0.1, 0}, {1.5, 0}, 10, 0.05),
                    Error);
  }
}

TEST_CASE("distortion batch fits and validates") {
  const ProbeResult res = distortion_probe_batch(kCheb, {-2, 0}, 20, 400, 0xdeadULL);
  CHECK(res.samples >= 100);
  CHECK(res.pass_fraction == 1.0);
  CHECK(res.details.at("fitted_C") > 0.0);
}

TEST_CASE("distortion replay is bit-identical") {
  const std::uint64_t master = 0xfeedULL;
  const ProbeResult res = distortion_probe_batch(kCheb, {-2, 0}, 20, 100, master);
  // replay a couple of arbitrary case seeds drawn the same way the batch does
  Rng rng(master);
  for (int i = 0; i < 5; ++i) {
    const std::uint64_t cs = rng.fork();
    try {
      const auto a = distortion_replay(kCheb, {-2, 0}, 20, master, cs);
      const auto b = distortion_replay(kCheb, {-2, 0}, 20, master, cs);
      CHECK(a.lhs == b.lhs);
      CHECK(a.sum == b.sum);
    } catch (const Error&) {
      // inapplicable draws replay to the same rejection
    }
  }
  (void)res;
}

TEST_CASE("mane probe on the unit circle") {
  // z^2 with the critical track flagged out of the Julia set: U is empty and
  // the expansion base on |z| = 1 is exactly 2
  MarkedFamily fam = MarkedFamily::quadratic({0, 0}, 1e-6);
  fam.tracks()[0].in_julia = false;
  const ManeEstimate est = mane_probe(fam, {0, 0}, kNbh, 30, 128, 99, 0.3);
  CHECK(est.lambda_M == doctest::Approx(2.0).epsilon(0.08));
  CHECK(est.points_mane >= 10);
}

TEST_CASE("mane probe needs data") {
  MarkedFamily fam = MarkedFamily::quadratic({0, 0}, 1e-6);
  fam.tracks()[0].in_julia = false;
  CHECK_THROWS_AS(mane_probe(fam, {0, 0}, kNbh, 1, 16, 99), Error);
}

TEST_CASE("mane exponent monotone under shrinking delta") {
  MarkedFamily fam = MarkedFamily::quadratic({-2, 0}, 1e-6);
  const ManeEstimate wide = mane_probe(fam, {-2, 0}, NeighborhoodConfig::build(5.0, 4.0, 0.5),
                                       30, 128, 1234);
  const ManeEstimate narrow = mane_probe(fam, {-2, 0}, NeighborhoodConfig::build(8.0, 6.0, 0.5),
                                         30, 128, 1234);
  CHECK(narrow.lambda_M >= wide.lambda_M - 0.05);
  CHECK(wide.lambda_M > 1.0);
}

TEST_CASE("weak parameter dependence at the Chebyshev parameter") {
  SUBCASE("identical parameters pass trivially") {
    WeakParamOptions opt;
    const auto res = weak_param_probe(kCheb, {-2, 0}, {-2, 0}, 0, 10, 40, kNbh, kLadder, opt);
    CHECK(res.pass_fraction == 1.0);
  }
  SUBCASE("close parameters certify a small Q") {
    // separation grows at rate ~4 per step, so the offset bounds the window
    // over which hypothesis ii) can hold: 1e-12 keeps it below S up to n ~ 15
    WeakParamOptions opt;
    opt.Q = 1.05;
    const auto res =
        weak_param_probe(kCheb, {-2, 0}, {-2 + 1e-12, 0}, 0, 10, 15, kNbh, kLadder, opt);
    CHECK(res.pass_fraction == 1.0);
    CHECK(res.details.at("q_certificate") <= 1.05);
    // the certificate tightens on a later window
    const auto late =
        weak_param_probe(kCheb, {-2, 0}, {-2 + 1e-14, 0}, 0, 14, 18, kNbh, kLadder, opt);
    CHECK(late.details.at("q_certificate") <= res.details.at("q_certificate") + 1e-9);
  }
  SUBCASE("separation beyond S inside the window fails the hypotheses") {
    WeakParamOptions opt;
    CHECK_THROWS_AS(weak_param_probe(kCheb, {-2, 0}, {-2 + 1e-8, 0}, 0, 10, 60, kNbh, kLadder,
                                     opt),
                    Error);
    CHECK_THROWS_AS(weak_param_probe(kCheb, {-2, 0}, {-1.5, 0}, 0, 10, 60, kNbh, kLadder, opt),
                    Error);
  }
}

TEST_CASE("mdl probe") {
  SUBCASE("tiny square has tiny distortion") {
    const ParameterSquare A{{-2, 0}, 1e-9};
    const auto res = mdl_probe(kCheb, A, 0, 2, 6, kNbh, kLadder, {1e-6, 1e-6}, 0.5, 0.1);
    CHECK(res.pass_fraction == 1.0);
    CHECK(res.worst_ratio < 1e-4);
  }
  SUBCASE("startup window of the 1e-6 square") {
    const ParameterSquare A{{-2, 0}, 1e-6};
    const auto res = mdl_probe(kCheb, A, 0, 2, 5, kNbh, kLadder, {1e-6, 1e-6}, 0.5, 0.1);
    CHECK(res.pass_fraction == 1.0);
    CHECK(res.worst_ratio <= 0.1);
  }
  SUBCASE("halving the side never inflates the distortion much") {
    const auto big = mdl_probe(kCheb, {{-2, 0}, 1e-6}, 0, 2, 5, kNbh, kLadder, {1e-6, 1e-6},
                               0.5, 0.1);
    const auto half = mdl_probe(kCheb, {{-2, 0}, 5e-7}, 0, 2, 5, kNbh, kLadder, {1e-6, 1e-6},
                                0.5, 0.1);
    CHECK(half.worst_ratio <= big.worst_ratio * 1.1 + 1e-15);
  }
  SUBCASE("inflated square is rejected or fails") {
    try {
      const auto res = mdl_probe(kCheb, {{-2, 0}, 0.1}, 0, 2, 8, kNbh, kLadder, {1e-6, 1e-6},
                                 0.5, 0.1);
      CHECK(res.pass_fraction < 1.0);  // a recorded failure is acceptable
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::PreconditionFailed);  // and so is a precondition rejection
    }
  }
}

TEST_CASE("repulsion probe on a degenerate pair") {
  // zero-side square: all samples coincide, 0 >= 2*0 holds vacuously
  const auto res = repulsion_probe(kCheb, {{-2, 0}, 1e-300}, 0, 3, 6, kLadder, {1e-6, 1e-6}, 0.5);
  CHECK(res.pass_fraction == 1.0);
}

TEST_CASE("growth after return at the Chebyshev parameter") {
  const auto res =
      growth_after_return_probe(kCheb, {-2, 0}, 0, 5, 12, kLadder, {1e-6, 1e-6}, 0.5, kLadder.gammaI);
  CHECK(res.pass_fraction == 1.0);
  // the frozen orbit realizes log 4 per step, far above the floor
  CHECK(res.worst_ratio >= 0.9 * std::min(kLadder.gammaI, kLadder.gammaH));
}

TEST_CASE("bound distortion requires membership") {
  // near-superstable parameters lose derivative growth and leave E(gammaI)
  double a = -1.75;
  for (int i = 0; i < 60; ++i) {
    const double v = a * a * a + 2 * a * a + a + 1;
    const double dv = 3 * a * a + 4 * a + 1;
    a -= v / dv;
  }
  const MarkedFamily fam = MarkedFamily::quadratic({a, 0}, 1e-6);
  CHECK_THROWS_AS(bound_distortion_probe(fam, {a, 0}, 0, 3, 0, kNbh, kLadder, {0.05, 0.1}, 0.5,
                                         0.1),
                  Error);
}

TEST_CASE("second Collet-Eckmann probe") {
  const RationalMap cheb({{-2, 0}, {0, 0}, {1, 0}}, {{1, 0}});
  SUBCASE("depth 10 keeps a positive exponent") {
    const auto res = second_ce_probe(cheb, SpherePoint::finite({0, 0}), 10, 64, 0xce2ULL);
    CHECK(res.samples >= 32);
    CHECK(res.worst_ratio > 0.5);
  }
  SUBCASE("depth 1 preimages expand") {
    const auto res = second_ce_probe(cheb, SpherePoint::finite({0, 0}), 1, 8, 0xce2ULL);
    CHECK(res.worst_ratio > 0.0);
  }
  SUBCASE("zero branches is insufficient") {
    CHECK_THROWS_AS(second_ce_probe(cheb, SpherePoint::finite({0, 0}), 5, 0, 1), Error);
  }
}
