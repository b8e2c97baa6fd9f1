#include <doctest.h>

#include <cmath>

#include "parex/config.hpp"

using namespace parex;

TEST_CASE("dyadic arithmetic is exact") {
  const Dyadic one = Dyadic::one();
  Dyadic quarter_sum = Dyadic::zero();
  for (int i = 0; i < 4; ++i) quarter_sum += Dyadic::pow2(-2);
  CHECK(quarter_sum == one);

  // random refinement bookkeeping: split fractions, move them between
  // buckets, the grand total never drifts
  Rng rng(0xd1adULL);
  std::vector<int> depths = {0};
  Dyadic moved = Dyadic::zero();
  for (int step = 0; step < 4000; ++step) {
    const std::size_t i = static_cast<std::size_t>(rng.next_u64() % depths.size());
    if (rng.next_double() < 0.5 && depths[i] < 40) {
      const int d = depths[i];
      depths[i] = d + 1;
      for (int c = 0; c < 3; ++c) depths.push_back(d + 1);
    } else {
      moved += Dyadic::pow2(-2 * depths[i]);
      depths[i] = depths.back();
      depths.pop_back();
      if (depths.empty()) break;
    }
  }
  Dyadic rest = Dyadic::zero();
  for (int d : depths) rest += Dyadic::pow2(-2 * d);
  CHECK(rest + moved == one);
  CHECK((rest + moved).to_double() == 1.0);
}

TEST_CASE("dyadic serialization") {
  Dyadic d = Dyadic::pow2(-4) + Dyadic::pow2(-4) + Dyadic::pow2(-6);
  CHECK(d.mantissa_str() == "9");
  CHECK(d.exponent() == -6);
  CHECK(d.to_double() == doctest::Approx(9.0 / 64.0));
  CHECK(Dyadic::zero().mantissa_str() == "0");
}

namespace {

PartitionEngine smoke_engine(long horizon, int workers = 1) {
  RunConfig cfg = RunConfig::preset("smoke");
  cfg.engine_horizon = horizon;
  cfg.workers = workers;
  return PartitionEngine(cfg.build_family(), cfg.make_engine_config());
}

}  // namespace

TEST_CASE("partition element rule over the sample hull") {
  const NeighborhoodConfig cfg = NeighborhoodConfig::build(6.0, 4.0, 0.5);
  const MarkedFamily fam = MarkedFamily::quadratic({-2, 0}, 1e-3);
  // a degenerate square has diameter 0 at every time
  CHECK(is_partition_element(fam, {{-2, 0}, 1e-300}, 50, 0, cfg));
  // a tiny square stays below the large scale for a while
  CHECK(is_partition_element(fam, {{-2, 0}, 1e-9}, 8, 0, cfg));
  // a wide square in the chaotic band decorrelates and blows past S
  const MarkedFamily mid = MarkedFamily::quadratic({-1.8, 0}, 1e-2);
  CHECK_FALSE(is_partition_element(mid, {{-1.8, 0}, 1e-2}, 25, 0, cfg));
}

TEST_CASE("refine quadrisects exactly and respects the depth limit") {
  PartitionEngine eng = smoke_engine(5);
  const Element& root = eng.active_elements().front();
  const auto children = eng.refine(root);
  REQUIRE(children.size() == 4);
  Dyadic sum = Dyadic::zero();
  for (const auto& c : children) {
    CHECK(c.depth == root.depth + 1);
    sum += c.fraction();
  }
  CHECK(sum == root.fraction());
  // grandchildren of one child still sum to the child's measure
  const auto grand = eng.refine(children[0]);
  Dyadic gsum = Dyadic::zero();
  for (const auto& g : grand) gsum += g.fraction();
  CHECK(gsum == children[0].fraction());

  Element deep = root;
  deep.depth = eng.config().max_depth;
  CHECK_THROWS_AS(eng.refine(deep), Error);
}

TEST_CASE("smoke run conserves mass exactly at every step") {
  PartitionEngine eng = smoke_engine(40);
  CHECK(eng.verify_conservation());
  for (int s = 0; s < 40 && !eng.active_elements().empty(); ++s) {
    eng.step();
    CHECK(eng.ledger().conserved());
    CHECK(eng.verify_conservation());
  }
  // the square around the Chebyshev parameter escapes almost immediately
  CHECK(eng.ledger().escaped == Dyadic::one());
}

TEST_CASE("ledger rows are monotone") {
  PartitionEngine eng = smoke_engine(60);
  eng.run();
  const auto& rows = eng.ledger_rows();
  REQUIRE(rows.size() >= 2);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    // escaped and excluded masses never shrink, active never grows
    CHECK_FALSE((rows[i].escaped - rows[i - 1].escaped).is_negative());
    CHECK_FALSE((rows[i].excluded - rows[i - 1].excluded).is_negative());
    CHECK_FALSE((rows[i].resolution_excluded - rows[i - 1].resolution_excluded).is_negative());
    CHECK_FALSE((rows[i - 1].active - rows[i].active).is_negative());
  }
}

TEST_CASE("zero-horizon run keeps the full mass active") {
  PartitionEngine eng = smoke_engine(0);
  eng.run();
  CHECK(eng.ledger().active == Dyadic::one());
  CHECK(eng.events().empty());
  CHECK(eng.ledger_rows().size() == 1);
}

TEST_CASE("worker count does not change the run") {
  RunConfig base = RunConfig::preset("recurrent");
  base.engine_horizon = 120;
  PartitionEngine a(base.build_family(), [&] {
    auto e = base.make_engine_config();
    e.workers = 1;
    return e;
  }());
  PartitionEngine b(base.build_family(), [&] {
    auto e = base.make_engine_config();
    e.workers = 8;
    return e;
  }());
  a.run();
  b.run();
  REQUIRE(a.ledger_rows().size() == b.ledger_rows().size());
  for (std::size_t i = 0; i < a.ledger_rows().size(); ++i) {
    CHECK(a.ledger_rows()[i].active == b.ledger_rows()[i].active);
    CHECK(a.ledger_rows()[i].escaped == b.ledger_rows()[i].escaped);
    CHECK(a.ledger_rows()[i].excluded == b.ledger_rows()[i].excluded);
  }
  REQUIRE(a.events().size() == b.events().size());
  for (std::size_t i = 0; i < a.events().size(); ++i) {
    CHECK(a.events()[i].element_id == b.events()[i].element_id);
    CHECK(a.events()[i].nu == b.events()[i].nu);
    CHECK(a.events()[i].r == b.events()[i].r);
    CHECK(a.events()[i].p == b.events()[i].p);
  }
}

TEST_CASE("status transitions are final") {
  RunConfig cfg = RunConfig::preset("recurrent");
  cfg.engine_horizon = 150;
  PartitionEngine eng(cfg.build_family(), cfg.make_engine_config());
  eng.run();
  // every retired element froze at its retirement time with a real status
  for (const auto& r : eng.retired_elements()) {
    CHECK(r.status != ElementStatus::Active);
    CHECK(r.status_time <= eng.time());
  }
  CHECK(eng.verify_conservation());
}

TEST_CASE("exclusion witnesses replay") {
  RunConfig cfg = RunConfig::preset("recurrent");
  cfg.engine_horizon = 200;
  const MarkedFamily fam = cfg.build_family();
  PartitionEngine eng(cfg.build_family(), cfg.make_engine_config());
  eng.run();
  long checked = 0;
  for (const auto& r : eng.retired_elements()) {
    if (r.status != ElementStatus::Excluded) continue;
    REQUIRE(r.witness.has_value());
    const auto rep =
        basic_assumption_check(fam, r.witness->a, r.witness->l, r.status_time,
                               cfg.make_recurrence());
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.witness.has_value());
    CHECK(*rep.witness == r.witness->k);
    ++checked;
  }
  INFO("excluded elements checked: " << checked);
}

TEST_CASE("deletion fraction check shapes") {
  Ledger empty;
  CHECK(deletion_fraction_check(empty, 0.01).empty());

  Ledger synth;
  DeletionEvent ev;
  ev.nu = 100;
  ev.mass_before = Dyadic::one();
  ev.mass_deleted = Dyadic::pow2(-8);  // 1/256 ~ well below e^{-2 alpha nu}
  synth.deletions.push_back(ev);
  const auto entries = deletion_fraction_check(synth, 0.01);
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].observed == doctest::Approx(1.0 / 256.0));
  CHECK(entries[0].bound == doctest::Approx(std::exp(-1.0)));
  CHECK_FALSE(entries[0].violation);
}

TEST_CASE("escape tail fit") {
  SUBCASE("synthetic exponential sample") {
    Rng rng(0x7a11ULL);
    std::vector<EscapeRecord> recs;
    for (int i = 0; i < 1000; ++i) {
      EscapeRecord r;
      r.l = 0;
      r.first_essential_nu = 1;
      r.r0 = 6.0;
      r.E = 1 + static_cast<long>(-std::log(1.0 - rng.next_double()) / 0.1);
      r.escape_time = r.first_essential_nu + r.E;
      recs.push_back(r);
    }
    const EscapeTail t = escape_tail(recs, 2, 0.05, 10, 1.0);
    REQUIRE(t.fit_ok);
    CHECK(t.fitted_rate > 0.08);
    CHECK(t.fitted_rate < 0.12);
  }
  SUBCASE("degenerate histogram is reported, not fitted") {
    std::vector<EscapeRecord> recs(50);
    for (auto& r : recs) {
      r.first_essential_nu = 1;
      r.E = 1;
      r.r0 = 5.0;
    }
    const EscapeTail t = escape_tail(recs, 2, 0.05, 10, 1.0);
    CHECK_FALSE(t.fit_ok);
    CHECK(t.note == "degenerate tail, fit skipped");
  }
  SUBCASE("insufficient data throws") {
    std::vector<EscapeRecord> recs(3);
    for (auto& r : recs) {
      r.first_essential_nu = 1;
      r.E = 4;
    }
    CHECK_THROWS_AS(escape_tail(recs, 2, 0.05, 10), Error);
  }
}

TEST_CASE("startup scan") {
  SUBCASE("Chebyshev square escapes at the predicted time") {
    RunConfig cfg = RunConfig::preset("chebyshev");
    cfg.epsilon = 1e-4;
    cfg.engine_horizon = 60;
    const auto res = startup_scan(cfg.build_family(), cfg.make_engine_config(), 1);
    REQUIRE(res.size() == 1);
    CHECK(res[0].outcome == StartupOutcome::Escaped);
    // image grows at rate ~ 4 per step: N_l ~ log(S/eps)/log 4
    const double S = cfg.make_neighborhood().S;
    const double predicted = std::log(S / cfg.epsilon) / std::log(4.0);
    CHECK(std::abs(static_cast<double>(res[0].N_l) - predicted) <= 2.5);
  }
  SUBCASE("tiny square saturates the horizon") {
    RunConfig cfg = RunConfig::preset("chebyshev");
    cfg.epsilon = 1e-12;
    cfg.engine_horizon = 8;
    const auto res = startup_scan(cfg.build_family(), cfg.make_engine_config(), 1);
    REQUIRE(res.size() == 1);
    CHECK(res[0].outcome == StartupOutcome::HorizonSaturated);
  }
  SUBCASE("halving epsilon never shortens the startup") {
    RunConfig cfg = RunConfig::preset("chebyshev");
    cfg.engine_horizon = 80;
    cfg.epsilon = 1e-4;
    const auto r1 = startup_scan(cfg.build_family(), cfg.make_engine_config(), 1);
    cfg.epsilon = 5e-5;
    const auto r2 = startup_scan(cfg.build_family(), cfg.make_engine_config(), 1);
    CHECK(r2[0].N_l >= r1[0].N_l);
  }
}
