#include "parex/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "parex/probes.hpp"

namespace parex::run {

using nlohmann::json;

namespace {

void write_text(const std::string& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/" + name, std::ios::binary);
  require(out.good(), ErrorCode::ConfigError, "cannot write " + dir + "/" + name);
  out << content;
}

void write_json(const std::string& dir, const std::string& name, const json& j) {
  write_text(dir, name, j.dump(2) + "\n");
}

json report_json(const HorizonReport& rep, bool with_estimate) {
  json j;
  j["horizon"] = rep.horizon;
  j["pass"] = rep.pass;
  if (rep.witness) j["witness"] = *rep.witness;
  if (with_estimate) j["exponent_estimate"] = rep.exponent_estimate;
  return j;
}

json probe_json(const ProbeResult& p) {
  json j;
  j["lemma_id"] = p.lemma_id;
  j["samples"] = p.samples;
  j["worst_ratio"] = p.worst_ratio;
  j["bound"] = p.bound;
  j["pass_fraction"] = p.pass_fraction;
  j["counterexamples"] = p.counterexamples;
  for (const auto& [k, v] : p.details) j["details"][k] = v;
  return j;
}

std::string schema_md() {
  return R"(# Output schema

All files embed the config fingerprint; a run is reproducible from its config
file and seed alone.

## ledger.csv
Per-step measure ledger. Masses are exact dyadic fractions of the parameter
square (multiply by epsilon^2 for absolute measure): `mant * 2^exp`.

| column | meaning |
|---|---|
| step | engine time n |
| active_mant, active_exp | active mass fraction |
| escaped_mant, escaped_exp | escaped mass fraction |
| excluded_mant, excluded_exp | excluded mass fraction |
| resolution_mant, resolution_exp | mass force-excluded at the depth limit |

Invariant: active + escaped + excluded + resolution = 1 exactly, every row.

## events.csv
One row per recorded return event.

| column | meaning |
|---|---|
| element_id | dyadic square id `depth:ix:iy` |
| l | critical index whose orbit returned |
| nu | return time |
| k | index of the critical neighborhood hit |
| r | return depth, dist ~ e^-r |
| kind | essential, inessential, pseudo or bound |
| p | bound period length (scan horizon if saturated) |
| L | preceding free period length |

## elements.json
Final element tree: every square ever retired plus the survivors, with status
(`active`, `escaped`, `excluded`, `resolution-excluded`), status time,
per-index escape times and the exclusion witness when present.

## report.json
Run summary: gamma sup assertion, deletion-fraction checks, bound-period
bracket statistics, escape-tail fit, partition-rule counters, per-index
escaped mass.

## density.csv

| column | meaning |
|---|---|
| radius | side of the sampling square |
| n_samples | classified parameters |
| n_hyperbolic | attracted to attracting cycles only |
| n_undetermined | everything else at this horizon |
| wilson_lo, wilson_hi | 95% Wilson interval of the hyperbolic fraction |

## probes.json
Array of probe results: lemma id, sample count, worst measured ratio, the
bound it was compared against, pass fraction, replay seeds of counterexamples.

## ce_report.json / recurrence_report.json / startup.json
Per-critical-index verdicts of the horizon checks named by the file.
)";
}

json dyadic_json(const Dyadic& d) {
  json j;
  j["mant"] = d.mantissa_str();
  j["exp"] = d.exponent();
  j["value"] = d.to_double();
  return j;
}

}  // namespace

const std::vector<std::string>& lemma_ids() {
  static const std::vector<std::string> ids = {"distortion",   "mane",   "weak-param",
                                               "mdl",          "repulsion", "growth",
                                               "bound-distortion", "second-ce"};
  return ids;
}

int ce_check(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const MarkedFamily fam = cfg.build_family();
  const RationalMap f = fam.map_at(cfg.center);

  std::vector<int> julia_tracks;
  for (int l = 0; l < static_cast<int>(fam.tracks().size()); ++l)
    if (fam.tracks()[static_cast<std::size_t>(l)].in_julia) julia_tracks.push_back(l);
  require(!julia_tracks.empty(), ErrorCode::ConfigError,
          "no critical track is flagged in the Julia set at this parameter");

  std::vector<SpherePoint> jrit;
  for (int l : julia_tracks)
    jrit.push_back(SpherePoint::finite(fam.tracks()[static_cast<std::size_t>(l)].at(cfg.center)));

  json out;
  out["fingerprint"] = cfg.fingerprint();
  out["seed"] = cfg.seed;
  bool all_pass = true;
  for (int l : julia_tracks) {
    CriticalPoint cp;
    cp.point = SpherePoint::finite(fam.tracks()[static_cast<std::size_t>(l)].at(cfg.center));
    cp.local_degree = fam.tracks()[static_cast<std::size_t>(l)].local_degree;
    cp.in_julia = true;
    const HorizonReport ce = ce_margin(f, cp, cfg.orbit_horizon, cfg.make_ce_params());
    const HorizonReport sr =
        slow_recurrence_check(f, cp.point, cfg.orbit_horizon, cfg.alpha, jrit, cfg.K);
    json track;
    track["l"] = l;
    track["ce"] = report_json(ce, true);
    track["slow_recurrence"] = report_json(sr, false);
    track["slow_recurrence"]["K_min"] = sr.k_min;
    out["tracks"].push_back(track);
    all_pass = all_pass && ce.pass && sr.pass;
  }
  out["pass"] = all_pass;
  write_json(out_dir, "ce_report.json", out);
  return all_pass ? 0 : 2;
}

int recurrence(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const MarkedFamily fam = cfg.build_family();
  json out;
  out["fingerprint"] = cfg.fingerprint();
  bool all_pass = true;
  for (int l = 0; l < static_cast<int>(fam.tracks().size()); ++l) {
    if (!fam.tracks()[static_cast<std::size_t>(l)].in_julia) continue;
    const HorizonReport ba =
        basic_assumption_check(fam, cfg.center, l, cfg.orbit_horizon, cfg.make_recurrence());
    json track;
    track["l"] = l;
    track["basic_assumption"] = report_json(ba, false);
    out["tracks"].push_back(track);
    all_pass = all_pass && ba.pass;
  }
  require(out.contains("tracks"), ErrorCode::ConfigError,
          "no critical track is flagged in the Julia set at this parameter");
  out["pass"] = all_pass;
  write_json(out_dir, "recurrence_report.json", out);
  return all_pass ? 0 : 2;
}

namespace {

std::string ledger_csv(const PartitionEngine& eng, const RunConfig& cfg) {
  std::ostringstream o;
  o << "# fingerprint=" << cfg.fingerprint() << " seed=" << cfg.seed << "\n";
  o << "step,active_mant,active_exp,escaped_mant,escaped_exp,excluded_mant,excluded_exp,"
       "resolution_mant,resolution_exp\n";
  for (const auto& r : eng.ledger_rows()) {
    o << r.step << ',' << r.active.mantissa_str() << ',' << r.active.exponent() << ','
      << r.escaped.mantissa_str() << ',' << r.escaped.exponent() << ','
      << r.excluded.mantissa_str() << ',' << r.excluded.exponent() << ','
      << r.resolution_excluded.mantissa_str() << ',' << r.resolution_excluded.exponent() << "\n";
  }
  return o.str();
}

std::string events_csv(const PartitionEngine& eng, const RunConfig& cfg) {
  std::vector<std::size_t> order(eng.events().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = eng.events()[a];
    const auto& eb = eng.events()[b];
    if (ea.nu != eb.nu) return ea.nu < eb.nu;
    if (ea.element_id != eb.element_id) return ea.element_id < eb.element_id;
    return ea.l < eb.l;
  });
  std::ostringstream o;
  o << "# fingerprint=" << cfg.fingerprint() << " seed=" << cfg.seed << "\n";
  o << "element_id,l,nu,k,r,kind,p,L\n";
  for (std::size_t i : order) {
    const auto& e = eng.events()[i];
    o << e.element_id << ',' << e.l << ',' << e.nu << ',' << e.hit_index << ','
      << fmt_double(e.r) << ',' << to_string(e.kind) << ',' << e.p << ',' << e.L << "\n";
  }
  return o.str();
}

json elements_json(const PartitionEngine& eng, const RunConfig& cfg) {
  json out;
  out["fingerprint"] = cfg.fingerprint();
  json arr = json::array();
  auto element_entry = [](const Element& e, ElementStatus st, long t,
                          const std::optional<ExclusionWitness>& w) {
    json j;
    j["id"] = e.id();
    j["depth"] = e.depth;
    j["ix"] = e.ix;
    j["iy"] = e.iy;
    j["status"] = to_string(st);
    j["status_time"] = t;
    j["parked"] = e.parked;
    json esc = json::array();
    for (const auto& c : e.crit) esc.push_back(c.escaped ? c.escaped_at : -1);
    j["escaped_at"] = esc;
    if (w) {
      j["witness"]["l"] = w->l;
      j["witness"]["k"] = w->k;
      j["witness"]["sample"] = w->sample;
      j["witness"]["a_re"] = w->a.real();
      j["witness"]["a_im"] = w->a.imag();
      j["witness"]["distance"] = w->distance;
      j["witness"]["bound"] = w->bound;
    }
    return j;
  };
  for (const auto& r : eng.retired_elements())
    arr.push_back(element_entry(r.element, r.status, r.status_time, r.witness));
  for (const auto& e : eng.active_elements())
    arr.push_back(element_entry(e, ElementStatus::Active, eng.time(), std::nullopt));
  out["elements"] = arr;
  return out;
}

json engine_report(const PartitionEngine& eng, const RunConfig& cfg) {
  json out;
  out["fingerprint"] = cfg.fingerprint();
  out["seed"] = cfg.seed;
  out["steps"] = eng.time();
  out["conserved"] = eng.verify_conservation();

  out["gamma"]["Gamma"] = eng.gamma_sup().Gamma;
  out["gamma"]["max_seen"] = eng.gamma_sup().max_seen;
  out["gamma"]["violations"] = eng.gamma_sup().violations;

  json dels = json::array();
  long violations = 0;
  const auto checks = deletion_fraction_check(eng.ledger(), eng.config().recurrence.alpha);
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto& d = checks[i];
    json j;
    j["nu"] = d.nu;
    j["observed"] = d.observed;
    j["bound"] = d.bound;
    j["violation"] = d.violation;
    j["mass_deleted"] = dyadic_json(eng.ledger().deletions[i].mass_deleted);
    j["mass_before"] = dyadic_json(eng.ledger().deletions[i].mass_before);
    if (d.violation) ++violations;
    dels.push_back(j);
  }
  out["deletion_check"]["entries"] = dels;
  out["deletion_check"]["violations"] = violations;

  const BracketStats br = bracket_statistics(eng.events(), eng.events_aux(),
                                             eng.config().ladder.gammaI, eng.gamma_sup().Gamma);
  out["bracket"]["n_returns"] = br.n_returns;
  out["bracket"]["n_qualifying"] = br.n_qualifying;
  out["bracket"]["n_in_bracket"] = br.n_in_bracket;
  out["bracket"]["fraction"] = br.fraction;

  try {
    const EscapeTail t = escape_tail(eng.escape_records(), eng.family().max_local_degree(),
                                     eng.config().ladder.gammaI);
    out["escape_tail"]["n_events"] = t.n_events;
    out["escape_tail"]["n_tail"] = t.n_tail;
    out["escape_tail"]["r0_ref"] = t.r0_ref;
    out["escape_tail"]["h_r0"] = t.h_r0;
    out["escape_tail"]["h_gamma"] = t.h_gamma;
    out["escape_tail"]["threshold_t"] = t.threshold_t;
    out["escape_tail"]["fitted_rate"] = t.fitted_rate;
    out["escape_tail"]["predicted_rate_r0"] = t.predicted_rate_r0;
    out["escape_tail"]["predicted_rate_gamma"] = t.predicted_rate_gamma;
    out["escape_tail"]["fit_ok"] = t.fit_ok;
    if (!t.note.empty()) out["escape_tail"]["note"] = t.note;
  } catch (const Error& e) {
    out["escape_tail"]["note"] = e.what();
  }

  out["partition_rule_violations"] = eng.partition_rule_violations();
  out["band_violations"] = eng.band_violations();
  out["bound_oversize"] = eng.bound_oversize_count();
  out["parked_fraction"] = eng.parked_fraction();

  json omega = json::array();
  for (std::size_t l = 0; l < eng.ledger().omega_l.size(); ++l) {
    json j = dyadic_json(eng.ledger().omega_l[l]);
    j["l"] = l;
    omega.push_back(j);
  }
  out["omega_l"] = omega;
  out["ledger"]["active"] = dyadic_json(eng.ledger().active);
  out["ledger"]["escaped"] = dyadic_json(eng.ledger().escaped);
  out["ledger"]["excluded"] = dyadic_json(eng.ledger().excluded);
  out["ledger"]["resolution_excluded"] = dyadic_json(eng.ledger().resolution_excluded);
  return out;
}

}  // namespace

int exclusion_run(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  MarkedFamily fam = cfg.build_family();
  PartitionEngine eng(std::move(fam), cfg.make_engine_config());
  eng.run();
  require(eng.verify_conservation(), ErrorCode::NumericFailure,
          "measure ledger lost conservation");

  write_text(out_dir, "ledger.csv", ledger_csv(eng, cfg));
  write_text(out_dir, "events.csv", events_csv(eng, cfg));
  write_json(out_dir, "elements.json", elements_json(eng, cfg));
  write_json(out_dir, "report.json", engine_report(eng, cfg));
  write_text(out_dir, "SCHEMA.md", schema_md());

  if (cfg.probes_enabled) {
    json arr = json::array();
    const MarkedFamily f2 = cfg.build_family();
    // probe the first qualifying harvested return per lemma where one applies
    for (std::size_t i = 0; i < eng.events().size(); ++i) {
      const auto& ev = eng.events()[i];
      if (ev.kind == ReturnKind::BoundReturn || ev.saturated || !eng.events_aux()[i].qualifies)
        continue;
      try {
        arr.push_back(probe_json(growth_after_return_probe(
            f2, cfg.center, ev.l, ev.nu, ev.nu + std::max<long>(ev.p, 1) + 1, cfg.make_ladder(),
            cfg.make_recurrence(), cfg.C0, cfg.make_ladder().gammaI)));
      } catch (const Error&) {
      }
      break;
    }
    write_json(out_dir, "probes.json", arr);
  }

  if (eng.parked_fraction() > cfg.park_fraction_max) return 3;
  return 0;
}

int density_scan(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const MarkedFamily fam = cfg.build_family(false);
  const auto rows = parex::density_scan(fam, cfg.center, cfg.radii, cfg.samples_per_square,
                                        cfg.classify_horizon, cfg.seed, cfg.workers,
                                        cfg.make_classify_options());
  std::ostringstream o;
  o << "# fingerprint=" << cfg.fingerprint() << " seed=" << cfg.seed << "\n";
  o << "radius,n_samples,n_hyperbolic,n_undetermined,wilson_lo,wilson_hi\n";
  for (const auto& r : rows) {
    o << fmt_double(r.radius) << ',' << r.n_samples << ',' << r.n_hyperbolic << ','
      << r.n_undetermined << ',' << fmt_double(r.wilson_lo) << ',' << fmt_double(r.wilson_hi)
      << "\n";
  }
  write_text(out_dir, "density.csv", o.str());
  write_text(out_dir, "SCHEMA.md", schema_md());
  return 0;
}

int lemma_probe(const RunConfig& cfg, const std::string& lemma_id, const std::string& out_dir) {
  cfg.validate();
  bool known = false;
  for (const auto& id : lemma_ids()) known = known || id == lemma_id;
  if (!known) {
    std::string msg = "unknown lemma id '" + lemma_id + "'; valid ids:";
    for (const auto& id : lemma_ids()) msg += " " + id;
    fail(ErrorCode::ConfigError, msg);
  }

  const MarkedFamily fam = cfg.build_family();
  const NeighborhoodConfig nbh = cfg.make_neighborhood();
  const ExponentLadder lad = cfg.make_ladder();
  const RecurrenceParams rec = cfg.make_recurrence();

  json arr = json::array();
  if (lemma_id == "distortion") {
    arr.push_back(probe_json(
        distortion_probe_batch(fam, cfg.center, 20, cfg.probe_samples, cfg.seed)));
  } else if (lemma_id == "mane") {
    const ManeEstimate est = mane_probe(fam, cfg.center, nbh, 40, 256, cfg.seed);
    json j;
    j["lemma_id"] = "mane";
    j["C_M"] = est.C_M;
    j["lambda_M"] = est.lambda_M;
    j["C_delta"] = est.C_delta;
    j["gamma_outside"] = est.gamma_outside;
    j["C_hit"] = est.C_hit;
    j["gamma_H"] = est.gamma_H;
    j["seeds"] = est.seeds_used;
    arr.push_back(j);
  } else if (lemma_id == "weak-param") {
    WeakParamOptions opt;
    arr.push_back(probe_json(weak_param_probe(fam, cfg.center,
                                              cfg.center + cplx(cfg.probe_pair_offset, 0.0), 0,
                                              cfg.probe_n0, cfg.probe_n1, nbh, lad, opt)));
  } else if (lemma_id == "mdl" || lemma_id == "repulsion") {
    const auto setup = startup_scan(fam, cfg.make_engine_config(), cfg.startup_min);
    require(!setup.empty(), ErrorCode::InsufficientData, "startup scan produced no outcome");
    const long n_end = setup.front().N_l;
    if (lemma_id == "mdl") {
      arr.push_back(probe_json(mdl_probe(fam, fam.domain(), setup.front().l, 2,
                                         std::max<long>(2, n_end), nbh, lad, rec, cfg.C0,
                                         cfg.eps_prime)));
    } else {
      arr.push_back(probe_json(repulsion_probe(fam, fam.domain(), setup.front().l, 2,
                                               std::max<long>(3, n_end), lad, rec, cfg.C0)));
    }
  } else if (lemma_id == "growth" || lemma_id == "bound-distortion") {
    PartitionEngine eng(cfg.build_family(), cfg.make_engine_config());
    eng.run();
    bool found = false;
    for (std::size_t i = 0; i < eng.events().size() && !found; ++i) {
      const auto& ev = eng.events()[i];
      if (ev.kind == ReturnKind::BoundReturn || ev.saturated || !eng.events_aux()[i].qualifies)
        continue;
      found = true;
      if (lemma_id == "growth") {
        arr.push_back(probe_json(growth_after_return_probe(fam, cfg.center, ev.l, ev.nu,
                                                           ev.nu + std::max<long>(ev.p, 1) + 1,
                                                           lad, rec, cfg.C0, lad.gammaI)));
      } else {
        arr.push_back(probe_json(bound_distortion_probe(fam, cfg.center, ev.l, ev.nu,
                                                        ev.hit_index, nbh, lad, rec, cfg.C0,
                                                        cfg.eps_prime)));
      }
    }
    require(found, ErrorCode::InsufficientData, "engine run harvested no qualifying return");
  } else if (lemma_id == "second-ce") {
    int l = 0;
    for (int i = 0; i < static_cast<int>(fam.tracks().size()); ++i)
      if (fam.tracks()[static_cast<std::size_t>(i)].in_julia) l = i;
    arr.push_back(probe_json(second_ce_probe(
        fam.map_at(cfg.center), SpherePoint::finite(fam.track(l).at(cfg.center)), 10, 64,
        cfg.seed)));
  }

  json out;
  out["fingerprint"] = cfg.fingerprint();
  out["seed"] = cfg.seed;
  out["probes"] = arr;
  write_json(out_dir, "probes.json", out);
  return 0;
}

int startup_scan_cmd(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const MarkedFamily fam = cfg.build_family();
  const auto results = startup_scan(fam, cfg.make_engine_config(), cfg.startup_min);
  json out;
  out["fingerprint"] = cfg.fingerprint();
  json arr = json::array();
  for (const auto& r : results) {
    json j;
    j["l"] = r.l;
    j["N_l"] = r.N_l;
    j["outcome"] = to_string(r.outcome);
    j["r"] = r.r;
    j["diam"] = r.diam;
    arr.push_back(j);
  }
  out["results"] = arr;
  write_json(out_dir, "startup.json", out);
  return 0;
}

}  // namespace parex::run
