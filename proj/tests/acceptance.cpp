// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "parex/config.hpp"
#include "parex/probes.hpp"
#include "parex/runner.hpp"

using namespace parex;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("CRITERION %2d [%s] %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const RationalMap f({{-2, 0}, {0, 0}, {1, 0}}, {{1, 0}});
  CriticalPoint c;
  c.point = SpherePoint::finite({0, 0});
  c.local_degree = 2;
  c.in_julia = true;
  const HorizonReport rep = ce_margin(f, c, 1000, {0.5, 1.3});
  const double err = std::abs(rep.exponent_estimate - std::log(4.0));
  const double dt = seconds_since(t0);
  report(1, err <= 0.01 && dt < 1.0,
         "Chebyshev CE exponent: estimate " + fmt(rep.exponent_estimate) + ", |err| " +
             fmt(err) + " <= 0.01, runtime " + fmt(dt) + "s < 1s");
}

// ---------------------------------------------------------------- criterion 2
void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const MarkedFamily fam = MarkedFamily::quadratic({-2, 0}, 1e-3);
  const auto ratios = transversality_ratio(fam, {-2, 0}, 0, 20);
  const double err = std::abs(ratios.back() - cplx(2.0 / 3.0, 0));
  const double dt = seconds_since(t0);
  report(2, err < 1e-10 && dt < 1.0,
         "transversality ratio: |ratio(20) - 2/3| = " + fmt(err) + " < 1e-10, runtime " +
             fmt(dt) + "s < 1s");
}

// ------------------------------------------------------- criteria 3, 4 and 10
void criteria_3_4_10() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = RunConfig::preset("smoke");
  const std::string base =
      (std::filesystem::temp_directory_path() / "parex_acceptance").string();
  std::filesystem::remove_all(base);

  cfg.workers = 1;
  const int rc1 = run::exclusion_run(cfg, base + "/w1");
  cfg.workers = 8;
  const int rc8 = run::exclusion_run(cfg, base + "/w8");
  const double dt = seconds_since(t0);

  // criterion 3: exact conservation at every step, zero tolerance
  bool conserved = rc1 == 0;
  {
    PartitionEngine eng(cfg.build_family(), [&] {
      auto e = cfg.make_engine_config();
      e.workers = 1;
      return e;
    }());
    for (long s = 0; s < cfg.engine_horizon && !eng.active_elements().empty(); ++s) {
      eng.step();
      conserved = conserved && eng.ledger().conserved() && eng.verify_conservation();
    }
    report(3, conserved && dt < 300.0,
           "exact measure conservation on the eps=1e-3 run (" +
               std::to_string(eng.ledger_rows().size()) + " ledger rows, re-summed), runtime " +
               fmt(dt) + "s < 300s");

    // criterion 4: deletion fractions against e^{-alpha nu} for nu >= 50
    long violations = 0, entries = 0;
    for (const auto& d : deletion_fraction_check(eng.ledger(), cfg.alpha)) {
      if (d.nu < 50) continue;
      ++entries;
      if (d.violation) ++violations;
    }
    report(4, violations == 0,
           "deletion-fraction bound: " + std::to_string(entries) + " events at nu >= 50, " +
               std::to_string(violations) + " violations");
  }

  // criterion 10: byte identity across worker counts (the fingerprint
  // excludes the worker count, so entire files must match)
  const bool ledger_same = slurp(base + "/w1/ledger.csv") == slurp(base + "/w8/ledger.csv");
  const bool events_same = slurp(base + "/w1/events.csv") == slurp(base + "/w8/events.csv");
  report(10, ledger_same && events_same && rc8 == 0,
         std::string("worker determinism: ledger.csv ") + (ledger_same ? "identical" : "differs") +
             ", events.csv " + (events_same ? "identical" : "differs"));
}

// ------------------------------------------------------------ criteria 5 and 6
void criteria_5_6() {
  RunConfig cfg = RunConfig::preset("recurrent");
  PartitionEngine eng(cfg.build_family(), cfg.make_engine_config());
  eng.run();

  long escape_events = 0;
  for (const auto& r : eng.escape_records())
    if (r.E >= 0) ++escape_events;

  bool pass5 = false;
  std::string detail5;
  try {
    const EscapeTail tail = escape_tail(eng.escape_records(), eng.family().max_local_degree(),
                                        cfg.make_ladder().gammaI, 100);
    pass5 = tail.fit_ok && tail.fitted_rate >= 0.5 * tail.predicted_rate_r0;
    detail5 = "escape tail: " + std::to_string(escape_events) + " events, fitted rate " +
              fmt(tail.fitted_rate) + " vs floor " + fmt(0.5 * tail.predicted_rate_r0) +
              " (threshold t > " + fmt(tail.threshold_t) + ")";
    if (!tail.fit_ok) detail5 += " [" + tail.note + "]";
  } catch (const Error& e) {
    detail5 = std::string("escape tail: ") + e.what();
  }
  report(5, pass5, detail5);

  const BracketStats br = bracket_statistics(eng.events(), eng.events_aux(),
                                             cfg.make_ladder().gammaI, eng.gamma_sup().Gamma);
  const bool pass6 = br.n_qualifying >= 20 && br.fraction >= 0.95;
  report(6, pass6,
         "bound-period bracket: " + std::to_string(br.n_in_bracket) + "/" +
             std::to_string(br.n_qualifying) + " qualifying returns inside (fraction " +
             fmt(br.fraction) + " >= 0.95, " + std::to_string(br.n_returns) + " total)");
}

// ---------------------------------------------------------------- criterion 7
void criterion_7() {
  RunConfig cfg = RunConfig::preset("startup-mdl");
  const MarkedFamily fam = cfg.build_family();
  const auto setup = startup_scan(fam, cfg.make_engine_config(), 1);
  bool pass = false;
  std::string detail = "mdl on the startup window: ";
  try {
    const long n_end = setup.empty() ? 5 : std::max<long>(3, setup.front().N_l);
    const ProbeResult res =
        mdl_probe(fam, fam.domain(), 0, 2, n_end, cfg.make_neighborhood(), cfg.make_ladder(),
                  cfg.make_recurrence(), cfg.C0, 0.1);
    pass = res.worst_ratio <= 0.1;
    detail += "worst two-parameter ratio deviation " + fmt(res.worst_ratio) +
              " <= 0.1 over window [2," + std::to_string(n_end) + "]";
  } catch (const Error& e) {
    detail += e.what();
  }
  report(7, pass, detail);
}

// ---------------------------------------------------------------- criterion 8
void criterion_8() {
  const MarkedFamily fam = MarkedFamily::quadratic({-1, 0}, 2.0);
  bool pass = true;
  std::string detail = "classifier:";

  const auto v0 = classify_parameter(fam, {0, 0}, 2000);
  bool ok = v0.status == HypStatus::Hyperbolic;
  for (const auto& c : v0.cycles) ok = ok && std::abs(c.multiplier) < 1e-9;
  pass = pass && ok;
  detail += std::string(" a=0 ") + (ok ? "hyperbolic/mult 0" : "WRONG");

  const auto v1 = classify_parameter(fam, {-1, 0}, 2000);
  ok = v1.status == HypStatus::Hyperbolic;
  bool two_cycle = false;
  for (const auto& c : v1.cycles) {
    ok = ok && std::abs(c.multiplier) < 1e-9;
    two_cycle = two_cycle || c.period == 2;
  }
  pass = pass && ok && two_cycle;
  detail += std::string(", a=-1 ") + (ok && two_cycle ? "2-cycle/mult 0" : "WRONG");

  const auto vf = classify_parameter(fam, {-0.1, 0}, 2000);
  ok = vf.status == HypStatus::Hyperbolic;
  const double expected = 1.0 - std::sqrt(1.4);
  bool mult_ok = false;
  for (const auto& c : vf.cycles)
    if (c.period == 1 && !c.representative.is_infinity())
      mult_ok = std::abs(c.multiplier - cplx(expected, 0)) < 1e-6;
  pass = pass && ok && mult_ok;
  detail += std::string(", a=-0.1 mult ") + (mult_ok ? fmt(expected) : "WRONG");

  const auto vu = classify_parameter(fam, {-2, 0}, 2000);
  ok = vu.status == HypStatus::Undetermined;
  pass = pass && ok;
  detail += std::string(", a=-2 ") + (ok ? "undetermined" : "WRONG");

  report(8, pass, detail);
}

// ---------------------------------------------------------------- criterion 9
void criterion_9() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = RunConfig::preset("misiurewicz-tip");
  cfg.workers = 8;
  const MarkedFamily fam = cfg.build_family(false);
  const auto rows = density_scan(fam, cfg.center, {0.1, 0.01, 0.001}, 1000, 2000, cfg.seed,
                                 cfg.workers, cfg.make_classify_options());
  const double dt = seconds_since(t0);
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    monotone = monotone && rows[i].n_hyperbolic >= rows[i - 1].n_hyperbolic;
  const double final_frac =
      static_cast<double>(rows.back().n_hyperbolic) / static_cast<double>(rows.back().n_samples);
  std::string fractions;
  for (const auto& r : rows)
    fractions += fmt(static_cast<double>(r.n_hyperbolic) / static_cast<double>(r.n_samples)) + " ";
  report(9, monotone && final_frac >= 0.9 && dt < 600.0,
         "density trend at -2: fractions " + fractions + "(non-decreasing: " +
             (monotone ? "yes" : "no") + ", final >= 0.9), runtime " + fmt(dt) + "s < 600s");
}

// --------------------------------------------------------------- criterion 11
void criterion_11() {
  Rng rng(0xacceULL);
  bool pass = true;
  std::string detail = "property suites:";

  // chain rule, >= 100 random cases
  {
    bool ok = true;
    int cases = 0;
    while (cases < 100) {
      const RationalMap f({{rng.uniform(-2, 0.5), rng.uniform(-0.3, 0.3)}, {0, 0}, {1, 0}},
                          {{1, 0}});
      const SpherePoint z{{rng.uniform(-1.4, 1.4), rng.uniform(-1.4, 1.4)},
                          rng.next_u64() % 2 ? Chart::Finite : Chart::Reciprocal};
      const int n = 1 + static_cast<int>(rng.next_u64() % 30);
      const OrbitRecord rec = orbit_with_derivative(f, z, n);
      double prod = 1.0;
      for (int j = 0; j < n; ++j)
        prod *= f.spherical_derivative(rec.points[static_cast<std::size_t>(j)]);
      const double got = rec.deriv_products[static_cast<std::size_t>(n)];
      ok = ok && (prod == 0.0 ? got == 0.0 : std::abs(got / prod - 1.0) <= 1e-9);
      ++cases;
    }
    pass = pass && ok;
    detail += std::string(" chain-rule ") + (ok ? "ok" : "FAIL");
  }

  // chart independence on the overlap annulus
  {
    bool ok = true;
    const RationalMap f({{-1.76, 0}, {0, 0}, {1, 0}}, {{1, 0}});
    for (int i = 0; i < 100; ++i) {
      const cplx z = std::polar(rng.uniform(0.51, 1.99), rng.uniform(0.0, 2 * M_PI));
      const double s1 = f.spherical_derivative({z, Chart::Finite});
      const double s2 = f.spherical_derivative({1.0 / z, Chart::Reciprocal});
      ok = ok && std::abs(s1 / s2 - 1.0) <= 1e-9;
    }
    pass = pass && ok;
    detail += std::string(", chart-independence ") + (ok ? "ok" : "FAIL");
  }

  // Riemann-Hurwitz on random maps
  {
    bool ok = true;
    for (int i = 0; i < 100; ++i) {
      std::vector<cplx> p(4), q(2);
      for (auto& c : p) c = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      q[0] = {rng.uniform(0.5, 1.5), 0};
      q[1] = {1, 0};
      try {
        const RationalMap f(p, q);
        ok = ok && critical_points(f).riemann_hurwitz_sum() == 2 * f.degree() - 2;
      } catch (const Error&) {
        // rejected draws (common roots, low degree) do not count
        --i;
      }
    }
    pass = pass && ok;
    detail += std::string(", riemann-hurwitz ") + (ok ? "ok" : "FAIL");
  }

  // sensitivity against central finite differences
  {
    const MarkedFamily fam = MarkedFamily::quadratic({-1.8, 0.02}, 1e-2);
    bool ok = true;
    int cases = 0;
    while (cases < 100) {
      const cplx a = rng.uniform_complex(fam.domain().center, fam.domain().side / 2);
      const long n = 1 + static_cast<long>(rng.next_u64() % 30);
      const auto st = xi_with_sensitivity(fam, a, 0, n);
      const cplx dz = st.back().dxi_da;
      if (!std::isfinite(std::abs(dz)) || std::abs(dz) < 1e-6 || std::abs(dz) > 1e10) continue;
      const double h = 1e-6 * fam.domain().side;
      const cplx fd =
          (xi(fam, a + cplx(h, 0), 0, n).to_cplx() - xi(fam, a - cplx(h, 0), 0, n).to_cplx()) /
          (2 * h);
      ok = ok && std::abs(fd - dz) <= 1e-4 * std::abs(dz) + 1e-12;
      ++cases;
    }
    pass = pass && ok;
    detail += std::string(", sensitivity-fd ") + (ok ? "ok" : "FAIL");
  }

  // bound-period nesting on the airplane-adjacent returns
  {
    double a_star = -1.75;
    for (int i = 0; i < 60; ++i) {
      const double v = a_star * a_star * a_star + 2 * a_star * a_star + a_star + 1;
      a_star -= v / (3 * a_star * a_star + 4 * a_star + 1);
    }
    bool ok = true;
    for (double side : {1e-8, 1e-7}) {
      const MarkedFamily fam = MarkedFamily::quadratic({a_star + 1e-5, 0}, side);
      const auto samples = fam.domain().samples();
      const BoundScan el = bound_period_element_scan(fam, samples, 0, 3, 0, {0.05, 0.1}, 3000);
      if (el.saturated) continue;
      long min_p = 1L << 40;
      for (const auto& a : samples)
        min_p = std::min(min_p, bound_period_point_scan(fam, a, 0, 3, 0, {0.05, 0.1}, 3000).p);
      ok = ok && el.p <= min_p;
    }
    pass = pass && ok;
    detail += std::string(", bound-nesting ") + (ok ? "ok" : "FAIL");
  }

  // status monotonicity over an engine run
  {
    RunConfig cfg = RunConfig::preset("recurrent");
    cfg.engine_horizon = 150;
    PartitionEngine eng(cfg.build_family(), cfg.make_engine_config());
    eng.run();
    bool ok = eng.verify_conservation();
    const auto& rows = eng.ledger_rows();
    for (std::size_t i = 1; i < rows.size(); ++i) {
      ok = ok && !(rows[i].escaped - rows[i - 1].escaped).is_negative();
      ok = ok && !(rows[i].excluded - rows[i - 1].excluded).is_negative();
      ok = ok && !(rows[i - 1].active - rows[i].active).is_negative();
    }
    pass = pass && ok;
    detail += std::string(", status-monotone ") + (ok ? "ok" : "FAIL");
  }

  // probe replayability
  {
    const MarkedFamily fam = MarkedFamily::quadratic({-2, 0}, 1e-3);
    bool ok = true;
    Rng seeds(0x9999ULL);
    for (int i = 0; i < 5; ++i) {
      const std::uint64_t cs = seeds.fork();
      try {
        const auto a = distortion_replay(fam, {-2, 0}, 20, 0x1234ULL, cs);
        const auto b = distortion_replay(fam, {-2, 0}, 20, 0x1234ULL, cs);
        ok = ok && a.lhs == b.lhs && a.sum == b.sum;
      } catch (const Error&) {
      }
    }
    pass = pass && ok;
    detail += std::string(", probe-replay ") + (ok ? "ok" : "FAIL");
  }

  report(11, pass, detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criteria_3_4_10();
  criteria_5_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_11();
  if (g_failures == 0) {
    std::printf("ACCEPTANCE: all criteria passed\n");
    return 0;
  }
  std::printf("ACCEPTANCE: %d criterion(s) failed\n", g_failures);
  return 1;
}
