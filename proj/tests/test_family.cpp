#include <doctest.h>

#include <cmath>

#include "parex/family.hpp"

using namespace parex;

namespace {

Rng rng(0xfa1ULL);

// closed-form oracle for the quadratic family: xi'_{n+1} = 2 xi_n xi'_n + 1
cplx sensitivity_oracle(cplx a, long n) {
  cplx z = 0.0, dz = 0.0;
  for (long k = 0; k < n; ++k) {
    dz = 2.0 * z * dz + 1.0;
    z = z * z + a;
  }
  return dz;
}

}  // namespace

TEST_CASE("xi examples") {
  const MarkedFamily fam = MarkedFamily::quadratic({-2, 0}, 1e-3);
  CHECK(xi(fam, {-2, 0}, 0, 3).to_cplx() == cplx(2, 0));
  CHECK(xi(fam, {0, 0}, 0, 7).to_cplx() == cplx(0, 0));
  CHECK(xi(fam, {0, 1}, 0, 2).to_cplx() == cplx(-1, 1));
  CHECK_THROWS_AS(xi(fam, {0, 0}, 3, 1), Error);
}

TEST_CASE("xi determinism") {
  const MarkedFamily fam = MarkedFamily::quadratic({-1.76, 0}, 1e-4);
  const SpherePoint a = xi(fam, {-1.76000001, 2e-9}, 0, 37);
  const SpherePoint b = xi(fam, {-1.76000001, 2e-9}, 0, 37);
  CHECK(a.value.real() == b.value.real());
  CHECK(a.value.imag() == b.value.imag());
  CHECK(a.chart == b.chart);
}

TEST_CASE("sensitivity recursion values") {
  const MarkedFamily fam = MarkedFamily::quadratic({-2, 0}, 1e-3);
  const auto states = xi_with_sensitivity(fam, {-2, 0}, 0, 4);
  CHECK(states[1].dxi_da == cplx(1, 0));
  CHECK(states[2].dxi_da == cplx(-3, 0));
  CHECK(states[3].dxi_da == cplx(-11, 0));
  CHECK(states[4].dxi_da == cplx(-43, 0));

  const auto zero = xi_with_sensitivity(fam, {0, 0}, 0, 10);
  for (std::size_t n = 1; n < zero.size(); ++n) CHECK(zero[n].dxi_da == cplx(1, 0));
}

TEST_CASE("sensitivity matches finite differences") {
  for (const auto& fam : {MarkedFamily::quadratic({-1.8, 0.05}, 1e-2),
                          MarkedFamily::unicritical(3, {-0.3, 0.4}, 1e-2)}) {
    int checked = 0;
    // draws whose orbit leaves the finite chart (the euclidean derivative is
    // chart-bound) or whose sensitivity is below the floor are inapplicable
    for (int attempt = 0; attempt < 3000 && checked < 100; ++attempt) {
      const cplx a = rng.uniform_complex(fam.domain().center, fam.domain().side / 2);
      const long n = 1 + static_cast<long>(rng.next_u64() % 30);
      const auto states = xi_with_sensitivity(fam, a, 0, n);
      const cplx dz = states.back().dxi_da;
      if (!std::isfinite(std::abs(dz)) || std::abs(dz) < 1e-6 || std::abs(dz) > 1e11) continue;
      const double h = 1e-6 * fam.domain().side;
      const cplx fd_re =
          (xi(fam, a + cplx(h, 0), 0, n).to_cplx() - xi(fam, a - cplx(h, 0), 0, n).to_cplx()) /
          (2 * h);
      if (!std::isfinite(std::abs(fd_re)) || std::abs(fd_re) > 1e12) continue;
      CHECK(std::abs(fd_re - dz) <= 1e-4 * std::abs(dz) + 1e-12);
      ++checked;
    }
    CHECK(checked >= 100);
  }
}

TEST_CASE("transversality ratio at the Chebyshev parameter") {
  const MarkedFamily fam = MarkedFamily::quadratic({-2, 0}, 1e-3);
  const auto ratios = transversality_ratio(fam, {-2, 0}, 0, 20);
  REQUIRE(ratios.size() == 20);
  CHECK(std::abs(ratios[1]) == doctest::Approx(3.0 / 4.0).epsilon(1e-12));
  CHECK(std::abs(ratios[2]) == doctest::Approx(11.0 / 16.0).epsilon(1e-12));
  CHECK(std::abs(ratios[3]) == doctest::Approx(43.0 / 64.0).epsilon(1e-12));
  CHECK(std::abs(ratios[4]) == doctest::Approx(171.0 / 256.0).epsilon(1e-12));
  CHECK(std::abs(ratios[19] - cplx(2.0 / 3.0, 0)) < 1e-10);

  // closed form xi'_n = -(2 4^{n-1} + 1)/3 against the recursion oracle
  for (long n = 2; n <= 12; ++n) {
    const cplx oracle = sensitivity_oracle({-2, 0}, n);
    CHECK(std::abs(oracle - cplx(-(2.0 * std::pow(4.0, n - 1) + 1.0) / 3.0, 0)) < 1e-6);
  }
}

TEST_CASE("transversality ratio error paths") {
  const MarkedFamily fam = MarkedFamily::quadratic({0, 0}, 1e-3);
  CHECK_THROWS_AS(transversality_ratio(fam, {0, 0}, 0, 5), Error);
}

TEST_CASE("spherical denominator variant stays bounded") {
  const MarkedFamily fam = MarkedFamily::quadratic({-2, 0}, 1e-3);
  TransversalityOptions opt;
  opt.spherical_denominator = true;
  const auto ratios = transversality_ratio(fam, {-2, 0}, 0, 15, opt);
  // spherical and euclidean products differ by the telescoped chordal factor
  // (1+|xi_n|^2)/(1+|xi_1|^2) = 1 on the frozen orbit
  CHECK(std::abs(ratios.back()) == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("ratio Cauchy property") {
  const MarkedFamily fam = MarkedFamily::quadratic({-2, 0}, 1e-3);
  const auto ratios = transversality_ratio(fam, {-2, 0}, 0, 30);
  // geometric decay of increments at rate >= 0.9 * gamma for gamma = 1.0
  std::vector<double> xs, ys;
  for (std::size_t n = 10; n + 1 < ratios.size(); ++n) {
    const double inc = std::abs(ratios[n + 1] - ratios[n]);
    if (inc == 0.0) break;
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::log(inc));
  }
  REQUIRE(xs.size() >= 5);
  const LinearFit fit = fit_line(xs, ys);
  CHECK(fit.slope <= -0.9);
}

TEST_CASE("transversality limit estimate") {
  const MarkedFamily fam = MarkedFamily::quadratic({-2, 0}, 1e-3);
  const TransversalityLimit lim = estimate_transversality_limit(fam, {-2, 0}, 0, 4000);
  CHECK(std::abs(lim.value - cplx(2.0 / 3.0, 0)) < 1e-12);
  // the log-space guard must stop before |Df^{n-1}| overflows 1e300
  CHECK(lim.n_used < 600);
  CHECK(lim.n_used > 100);
}

TEST_CASE("family validation accepts presets") {
  MarkedFamily::quadratic({-2, 0}, 1e-3).validate();
  MarkedFamily::unicritical(4, {0.1, 0.1}, 1e-3).validate();
}
