#include "parex/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace parex {

namespace {

int bit_length(unsigned __int128 v) {
  int n = 0;
  while (v) {
    v >>= 1;
    ++n;
  }
  return n;
}

std::string u128_to_string(unsigned __int128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

}  // namespace

Dyadic::Dyadic(long long mant, int exp) : mant_(mant), exp_(exp) { normalize(); }

void Dyadic::normalize() {
  if (mant_ == 0) {
    exp_ = 0;
    return;
  }
  while ((mant_ & 1) == 0) {
    mant_ >>= 1;
    ++exp_;
  }
}

__int128 Dyadic::shifted(__int128 m, int by) {
  if (by == 0 || m == 0) return m;
  const unsigned __int128 mag = m < 0 ? static_cast<unsigned __int128>(-m)
                                      : static_cast<unsigned __int128>(m);
  require(bit_length(mag) + by <= 126, ErrorCode::NumericFailure, "dyadic mantissa overflow");
  return m << by;
}

Dyadic Dyadic::operator+(const Dyadic& o) const {
  if (mant_ == 0) return o;
  if (o.mant_ == 0) return *this;
  Dyadic r;
  if (exp_ <= o.exp_) {
    r.exp_ = exp_;
    r.mant_ = mant_ + shifted(o.mant_, o.exp_ - exp_);
  } else {
    r.exp_ = o.exp_;
    r.mant_ = shifted(mant_, exp_ - o.exp_) + o.mant_;
  }
  r.normalize();
  return r;
}

Dyadic Dyadic::operator-(const Dyadic& o) const {
  Dyadic neg = o;
  neg.mant_ = -neg.mant_;
  return *this + neg;
}

double Dyadic::to_double() const {
  const bool neg = mant_ < 0;
  unsigned __int128 mag = neg ? static_cast<unsigned __int128>(-mant_)
                              : static_cast<unsigned __int128>(mant_);
  const double hi = static_cast<double>(static_cast<std::uint64_t>(mag >> 64));
  const double lo = static_cast<double>(static_cast<std::uint64_t>(mag));
  double v = std::ldexp(hi, 64) + lo;
  v = std::ldexp(v, exp_);
  return neg ? -v : v;
}

std::string Dyadic::mantissa_str() const {
  if (mant_ < 0) return "-" + u128_to_string(static_cast<unsigned __int128>(-mant_));
  return u128_to_string(static_cast<unsigned __int128>(mant_));
}

const char* to_string(ElementStatus s) {
  switch (s) {
    case ElementStatus::Active: return "active";
    case ElementStatus::Escaped: return "escaped";
    case ElementStatus::Excluded: return "excluded";
    case ElementStatus::ResolutionExcluded: return "resolution-excluded";
  }
  return "?";
}

std::string Element::id() const {
  return std::to_string(depth) + ":" + std::to_string(ix) + ":" + std::to_string(iy);
}

ParameterSquare Element::square(const ParameterSquare& root) const {
  const double side = root.side * std::ldexp(1.0, -depth);
  const cplx corner = root.center - cplx(root.side / 2.0, root.side / 2.0);
  return {corner + cplx((ix + 0.5) * side, (iy + 0.5) * side), side};
}

PartitionEngine::PartitionEngine(MarkedFamily fam, EngineConfig cfg)
    : fam_(std::move(fam)), cfg_(cfg) {
  require(fam_.domain().side > 0.0, ErrorCode::ConfigError, "empty parameter square");
  cfg_.neighborhood.validate_against(fam_);
  gamma_ = estimate_gamma_sup(fam_, cfg_.gamma_grid, cfg_.gamma_margin);
  ledger_.omega_l.assign(fam_.tracks().size(), Dyadic::zero());
  active_.push_back(make_root());
  record_row();
}

Element PartitionEngine::make_root() const {
  Element e;
  e.depth = 0;
  e.ix = e.iy = 0;
  e.n = 0;
  e.crit.assign(fam_.tracks().size(), CritTimeline{});
  rebuild_samples(e);
  return e;
}

std::vector<Element> PartitionEngine::refine(const Element& e) const {
  require(e.depth < cfg_.max_depth, ErrorCode::DepthLimit,
          "element already at the maximum refinement depth");
  std::vector<Element> children;
  children.reserve(4);
  for (int cy = 0; cy < 2; ++cy) {
    for (int cx = 0; cx < 2; ++cx) {
      Element child;
      child.depth = e.depth + 1;
      child.ix = 2 * e.ix + static_cast<std::uint64_t>(cx);
      child.iy = 2 * e.iy + static_cast<std::uint64_t>(cy);
      child.n = e.n;
      child.parked = e.parked;
      child.crit = e.crit;
      rebuild_samples(child);
      children.push_back(std::move(child));
    }
  }
  return children;
}

bool is_partition_element(const MarkedFamily& fam, const ParameterSquare& A, long n, int l,
                          const NeighborhoodConfig& cfg, double hull_inflation) {
  const auto params = A.samples();
  std::vector<RationalMap> maps;
  std::vector<SpherePoint> pts;
  maps.reserve(params.size());
  pts.reserve(params.size());
  for (const auto& a : params) {
    maps.push_back(fam.map_at(a));
    pts.push_back(SpherePoint::finite(fam.track(l).at(a)));
  }
  for (long k = 1; k <= n; ++k) {
    double dist = std::numeric_limits<double>::infinity();
    double diam = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      pts[i] = maps[i].evaluate(pts[i]);
      dist = std::min(dist, dist_to_jrit(fam, params[i], pts[i]));
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j)
        diam = std::max(diam, chordal_distance(pts[i], pts[j]));
    if (diam * hull_inflation > partition_bound(dist, cfg)) return false;
  }
  return true;
}

namespace {

// one time step of one sample track; shared by the live advance and the
// rebuild replay so both produce identical doubles
double advance_track_state(const RationalMap& f, const MarkedFamily& fam, cplx a,
                           SampleTrackState& st, long new_n, double gammaI, double alpha) {
  double logd = -std::numeric_limits<double>::infinity();
  if (new_n >= 2) {
    // factor for D_{new_n-1} = |Df^{new_n-1}(v)|
    logd = std::log(f.spherical_derivative(st.xi));
    st.log_D += logd;
    st.min_E_margin =
        std::min(st.min_E_margin, st.log_D - gammaI * static_cast<double>(new_n - 1));
  }
  st.xi = f.evaluate(st.xi);
  st.dist = dist_to_jrit(fam, a, st.xi);
  st.min_B_prev = st.min_B_margin;
  st.min_B_margin =
      std::min(st.min_B_margin,
               std::log(std::max(st.dist, 1e-300)) + 2.0 * alpha * static_cast<double>(new_n));
  return logd;
}

}  // namespace

void PartitionEngine::rebuild_samples(Element& e) const {
  const ParameterSquare sq = e.square(fam_.domain());
  const auto params = sq.samples();
  e.samples.clear();
  e.samples.reserve(params.size());
  for (const auto& a : params) {
    ElementSample s{a, fam_.map_at(a), {}};
    s.tracks.assign(fam_.tracks().size(), SampleTrackState{});
    for (std::size_t l = 0; l < fam_.tracks().size(); ++l) {
      s.tracks[l].xi = SpherePoint::finite(fam_.tracks()[l].at(a));
      s.tracks[l].dist = 0.0;
    }
    for (long k = 1; k <= e.n; ++k)
      for (std::size_t l = 0; l < fam_.tracks().size(); ++l)
        advance_track_state(s.map, fam_, a, s.tracks[l], k, cfg_.ladder.gammaI,
                            cfg_.recurrence.alpha);
    e.samples.push_back(std::move(s));
  }
}

void PartitionEngine::measure(const Element& e, int l, double& dist, double& diam) const {
  dist = std::numeric_limits<double>::infinity();
  diam = 0.0;
  const std::size_t m = e.samples.size();
  for (std::size_t i = 0; i < m; ++i) {
    dist = std::min(dist, e.samples[i].tracks[static_cast<std::size_t>(l)].dist);
    for (std::size_t j = i + 1; j < m; ++j)
      diam = std::max(diam,
                      chordal_distance(e.samples[i].tracks[static_cast<std::size_t>(l)].xi,
                                       e.samples[j].tracks[static_cast<std::size_t>(l)].xi));
  }
  diam *= cfg_.hull_inflation;
}

double PartitionEngine::advance_element(Element& e) {
  const long new_n = e.n + 1;
  double max_logd = -std::numeric_limits<double>::infinity();
  for (auto& s : e.samples) {
    for (std::size_t l = 0; l < fam_.tracks().size(); ++l) {
      if (e.crit[l].escaped) continue;
      const double logd = advance_track_state(s.map, fam_, s.a, s.tracks[l], new_n,
                                              cfg_.ladder.gammaI, cfg_.recurrence.alpha);
      max_logd = std::max(max_logd, logd);
    }
  }
  e.n = new_n;
  return max_logd;
}

void PartitionEngine::retire(Element e, ElementStatus st, long t,
                             std::optional<ExclusionWitness> w) {
  const Dyadic frac = e.fraction();
  ledger_.active -= frac;
  switch (st) {
    case ElementStatus::Escaped: ledger_.escaped += frac; break;
    case ElementStatus::Excluded: ledger_.excluded += frac; break;
    case ElementStatus::ResolutionExcluded: ledger_.resolution_excluded += frac; break;
    case ElementStatus::Active: fail(ErrorCode::NumericFailure, "cannot retire to active");
  }
  if (st != ElementStatus::Escaped) {
    // escaped-per-index mass no longer counts once the element is excluded
    for (std::size_t l = 0; l < e.crit.size(); ++l)
      if (e.crit[l].escaped) ledger_.omega_l[l] -= frac;
  }
  retired_.push_back({std::move(e), st, t, std::move(w)});
}

void PartitionEngine::note_escape(Element& e, int l) {
  auto& c = e.crit[static_cast<std::size_t>(l)];
  c.escaped = true;
  c.escaped_at = clock_;
  ledger_.omega_l[static_cast<std::size_t>(l)] += e.fraction();
  EscapeRecord rec;
  rec.element_id = e.id();
  rec.l = l;
  rec.depth = e.depth;
  rec.escape_time = clock_;
  rec.first_essential_nu = c.first_essential_nu;
  rec.r0 = c.first_essential_r;
  if (c.first_essential_nu >= 0) rec.E = clock_ - c.first_essential_nu;
  escapes_.push_back(std::move(rec));
}

bool PartitionEngine::exclude_if_ba_violated(Element& e, long nu) {
  const double logK = std::log(cfg_.recurrence.K);
  int bad_sample = -1, bad_l = -1;
  int violating_samples = 0;
  const int n_samples = static_cast<int>(e.samples.size());
  for (int si = 0; si < n_samples; ++si) {
    bool sample_bad = false;
    for (std::size_t l = 0; l < fam_.tracks().size(); ++l) {
      if (e.samples[static_cast<std::size_t>(si)].tracks[l].min_B_margin < logK) {
        sample_bad = true;
        if (bad_sample < 0) {
          bad_sample = si;
          bad_l = static_cast<int>(l);
        }
      }
    }
    if (sample_bad) ++violating_samples;
  }
  const bool exclude =
      cfg_.exclude_any_sample ? violating_samples > 0 : violating_samples == n_samples;
  if (!exclude) return false;

  // reproducible witness: re-scan the definition for the flagged sample
  ExclusionWitness w;
  w.l = bad_l;
  w.sample = bad_sample;
  w.a = e.samples[static_cast<std::size_t>(bad_sample)].a;
  const HorizonReport rep = basic_assumption_check(fam_, w.a, bad_l, nu, cfg_.recurrence);
  if (rep.witness) {
    w.k = *rep.witness;
    const SpherePoint z = xi(fam_, w.a, bad_l, w.k);
    w.distance = dist_to_jrit(fam_, w.a, z);
    w.bound = cfg_.recurrence.K * std::exp(-2.0 * cfg_.recurrence.alpha * static_cast<double>(w.k));
  }
  retire(std::move(e), ElementStatus::Excluded, nu, w);
  return true;
}

void PartitionEngine::bind_element(Element& e, int l, long nu, int k_hit, double r,
                                   ReturnKind kind, long L) {
  // same scan as bound_period_element_scan, but seeded from the cached
  // xi_{nu,l} states so the cost is O(p), not O(nu + p)
  const std::size_t m = e.samples.size();
  std::vector<SpherePoint> zl(m), zk(m);
  for (std::size_t i = 0; i < m; ++i) {
    zl[i] = e.samples[i].tracks[static_cast<std::size_t>(l)].xi;
    zk[i] = SpherePoint::finite(fam_.tracks()[static_cast<std::size_t>(k_hit)].at(e.samples[i].a));
  }
  BoundScan scan;
  for (long j = 1; j <= cfg_.bound_horizon && !scan.saturated; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      zl[i] = e.samples[i].map.evaluate(zl[i]);
      zk[i] = e.samples[i].map.evaluate(zk[i]);
    }
    bool holds = true;
    for (std::size_t ia = 0; ia < m && holds; ++ia) {
      for (std::size_t ib = 0; ib < m && holds; ++ib) {
        const double rhs = std::exp(-cfg_.recurrence.alpha * static_cast<double>(j)) *
                           dist_to_jrit(fam_, e.samples[ib].a, zk[ib]);
        holds = chordal_distance(zl[ia], zk[ib]) <= rhs;
      }
    }
    if (!holds) break;
    scan.p = j;
    if (j == cfg_.bound_horizon) scan.saturated = true;
  }

  ReturnEvent ev;
  ev.element_id = e.id();
  ev.l = l;
  ev.nu = nu;
  ev.hit_index = k_hit;
  ev.r = r;
  ev.kind = kind;
  ev.p = scan.p;
  ev.L = L;
  ev.saturated = scan.saturated;

  EventAux aux;
  aux.d_i = fam_.tracks()[static_cast<std::size_t>(k_hit)].local_degree;
  const auto& center = e.samples.back().tracks[static_cast<std::size_t>(l)];
  aux.qualifies = center.min_E_margin >= std::log(cfg_.C0) &&
                  center.min_B_prev >= std::log(cfg_.recurrence.K);
  for (std::size_t j = 0; j < fam_.tracks().size() && aux.qualifies; ++j) {
    if (static_cast<int>(j) == l) continue;
    // conservative: full-horizon margins instead of the short auxiliary one
    const auto& tj = e.samples.back().tracks[j];
    if (tj.min_E_margin < std::log(cfg_.C0) || tj.min_B_prev < std::log(cfg_.recurrence.K))
      aux.qualifies = false;
  }
  events_.push_back(std::move(ev));
  events_aux_.push_back(aux);

  if (scan.saturated) {
    e.parked = true;
  } else {
    e.crit[static_cast<std::size_t>(l)].in_bound_until = nu + scan.p;
    e.crit[static_cast<std::size_t>(l)].last_bound_end = nu + scan.p;
  }
}

void PartitionEngine::handle_free_return(Element e, int l, double dist, double diam,
                                         std::vector<Element>& next) {
  const long nu = clock_;
  const long L = nu - e.crit[static_cast<std::size_t>(l)].last_bound_end;
  const bool in_u = dist < cfg_.neighborhood.delta;
  const bool essential = in_u && essential_test(diam, dist);

  if (!essential) {
    const ReturnKind kind = in_u ? ReturnKind::Inessential : ReturnKind::Pseudo;
    // nearest flagged track of the deepest sample names the component hit
    int si = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(e.samples.size()); ++i) {
      const double d = e.samples[static_cast<std::size_t>(i)].tracks[static_cast<std::size_t>(l)].dist;
      if (d < best) {
        best = d;
        si = i;
      }
    }
    const int k_hit = nearest_jrit_index(
        fam_, e.samples[static_cast<std::size_t>(si)].a,
        e.samples[static_cast<std::size_t>(si)].tracks[static_cast<std::size_t>(l)].xi);
    bind_element(e, l, nu, k_hit, -std::log(std::max(dist, 1e-300)), kind, L);
    next.push_back(std::move(e));
    return;
  }

  // essential return: dyadic refinement until every piece obeys the rule.
  // Basic-assumption deletion runs inside the cascade: pieces violating the
  // approach rate are removed instead of split, which is what keeps the
  // subdivision depth bounded near the critical-hit locus.
  const Dyadic parent_frac = e.fraction();
  const int depth0 = e.depth;
  Dyadic deleted = Dyadic::zero();
  std::deque<Element> work;
  work.push_back(std::move(e));
  std::vector<Element> finals;
  while (!work.empty()) {
    Element x = std::move(work.front());
    work.pop_front();
    const Dyadic x_frac = x.fraction();
    if (exclude_if_ba_violated(x, nu)) {
      deleted += x_frac;
      continue;
    }
    double dx = 0, dmx = 0;
    measure(x, l, dx, dmx);
    if (dmx <= partition_bound(dx, cfg_.neighborhood)) {
      finals.push_back(std::move(x));
      continue;
    }
    if (x.depth >= cfg_.max_depth) {
      retire(std::move(x), ElementStatus::ResolutionExcluded, nu, std::nullopt);
      continue;
    }
    for (auto& child : refine(x)) work.push_back(std::move(child));
  }

  for (auto& child : finals) {
    double dc = 0, dmc = 0;
    measure(child, l, dc, dmc);
    // the dyadic cascade should land pieces in the [1/3, 1] band of the rule
    if (dc < cfg_.neighborhood.delta && child.depth > depth0 &&
        dmc * 3.0 < partition_bound(dc, cfg_.neighborhood) && dmc > 0.0)
      ++band_violations_;
    const double rc = -std::log(std::max(dc, 1e-300));
    auto& ct = child.crit[static_cast<std::size_t>(l)];
    if (ct.first_essential_nu < 0) {
      ct.first_essential_nu = nu;
      ct.first_essential_r = rc;
    }
    if (dc < cfg_.neighborhood.delta_prime) {
      int si = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < static_cast<int>(child.samples.size()); ++i) {
        const double d =
            child.samples[static_cast<std::size_t>(i)].tracks[static_cast<std::size_t>(l)].dist;
        if (d < best) {
          best = d;
          si = i;
        }
      }
      const int k_hit = nearest_jrit_index(
          fam_, child.samples[static_cast<std::size_t>(si)].a,
          child.samples[static_cast<std::size_t>(si)].tracks[static_cast<std::size_t>(l)].xi);
      bind_element(child, l, nu, k_hit, rc, ReturnKind::Essential, L);
    }
    next.push_back(std::move(child));
  }
  if (!deleted.is_zero()) ledger_.deletions.push_back({nu, deleted, parent_frac});
}

void PartitionEngine::step() {
  ++clock_;
  const long n_active = static_cast<long>(active_.size());

  // phase A: pure per-element advance, order-independent
  std::vector<double> max_logd(static_cast<std::size_t>(n_active),
                               -std::numeric_limits<double>::infinity());
  parallel_for(n_active, cfg_.workers, [&](long i) {
    Element& e = active_[static_cast<std::size_t>(i)];
    if (e.parked) return;
    max_logd[static_cast<std::size_t>(i)] = advance_element(e);
  });
  for (double m : max_logd)
    if (std::isfinite(m)) gamma_.observe(m);

  // phase B: returns, refinement, exclusion, escapes, ledger (serial, in order)
  std::vector<Element> next;
  next.reserve(active_.size());
  for (auto& e : active_) {
    if (e.parked) {
      next.push_back(std::move(e));
      continue;
    }
    bool consumed = false;
    for (std::size_t l = 0; l < fam_.tracks().size() && !consumed; ++l) {
      if (e.crit[l].escaped) continue;
      double dist = 0, diam = 0;
      measure(e, static_cast<int>(l), dist, diam);
      const bool in_bound = clock_ <= e.crit[l].in_bound_until;
      const bool entering = !e.crit[l].was_in_uprime;
      e.crit[l].was_in_uprime = dist < cfg_.neighborhood.delta_prime;
      if (dist < cfg_.neighborhood.delta_prime) {
        if (in_bound) {
          if (entering) {
            ReturnEvent ev;
            ev.element_id = e.id();
            ev.l = static_cast<int>(l);
            ev.nu = clock_;
            ev.hit_index = nearest_jrit_index(fam_, e.samples.back().a,
                                              e.samples.back().tracks[l].xi);
            ev.r = -std::log(std::max(dist, 1e-300));
            ev.kind = ReturnKind::BoundReturn;
            events_.push_back(std::move(ev));
            events_aux_.push_back(EventAux{fam_.tracks()[l].local_degree, false});
          }
          if (dist < cfg_.neighborhood.delta &&
              diam > partition_bound(dist, cfg_.neighborhood))
            ++rule_violations_;
        } else {
          handle_free_return(std::move(e), static_cast<int>(l), dist, diam, next);
          consumed = true;
        }
      } else {
        if (!in_bound && diam >= cfg_.neighborhood.S) {
          note_escape(e, static_cast<int>(l));
          bool all = true;
          for (const auto& c : e.crit) all = all && c.escaped;
          if (all) {
            retire(std::move(e), ElementStatus::Escaped, clock_, std::nullopt);
            consumed = true;
          }
        } else if (in_bound && diam >= cfg_.neighborhood.S) {
          ++bound_oversize_;
        }
      }
    }
    if (!consumed) next.push_back(std::move(e));
  }
  active_ = std::move(next);
  record_row();
}

void PartitionEngine::run() {
  for (long s = 0; s < cfg_.horizon; ++s) {
    if (active_.empty()) break;
    step();
  }
}

double PartitionEngine::parked_fraction() const {
  Dyadic parked = Dyadic::zero();
  for (const auto& e : active_)
    if (e.parked) parked += e.fraction();
  return parked.to_double();
}

bool PartitionEngine::verify_conservation() const {
  Dyadic act = Dyadic::zero(), esc = Dyadic::zero(), exc = Dyadic::zero(), res = Dyadic::zero();
  for (const auto& e : active_) act += e.fraction();
  for (const auto& r : retired_) {
    switch (r.status) {
      case ElementStatus::Escaped: esc += r.element.fraction(); break;
      case ElementStatus::Excluded: exc += r.element.fraction(); break;
      case ElementStatus::ResolutionExcluded: res += r.element.fraction(); break;
      case ElementStatus::Active: return false;
    }
  }
  return act == ledger_.active && esc == ledger_.escaped && exc == ledger_.excluded &&
         res == ledger_.resolution_excluded && ledger_.conserved();
}

void PartitionEngine::record_row() {
  rows_.push_back({clock_, ledger_.active, ledger_.escaped, ledger_.excluded,
                   ledger_.resolution_excluded});
}

std::vector<DeletionCheckEntry> deletion_fraction_check(const Ledger& ledger, double alpha) {
  std::vector<DeletionCheckEntry> out;
  out.reserve(ledger.deletions.size());
  for (const auto& d : ledger.deletions) {
    DeletionCheckEntry e;
    e.nu = d.nu;
    e.observed = d.mass_deleted.to_double() / d.mass_before.to_double();
    e.bound = std::exp(-alpha * static_cast<double>(d.nu));
    e.violation = e.observed > e.bound;
    out.push_back(e);
  }
  return out;
}

EscapeTail escape_tail(const std::vector<EscapeRecord>& records, int d_hat, double gammaI,
                       long min_events, double threshold_override) {
  // the tail statement is about parameter MEASURE: weight each escape by its
  // element's fraction 4^-depth, not by event count
  std::vector<std::pair<long, double>> ew;  // (E, mass weight)
  std::vector<double> r0s;
  for (const auto& r : records) {
    if (r.E < 0) continue;
    ew.emplace_back(r.E, std::ldexp(1.0, -2 * r.depth));
    r0s.push_back(r.r0);
  }
  EscapeTail t;
  t.n_events = static_cast<long>(ew.size());
  if (t.n_events < min_events)
    fail(ErrorCode::InsufficientData, "escape tail needs at least " + std::to_string(min_events) +
                                          " escape events after essential returns");
  std::sort(r0s.begin(), r0s.end());
  t.r0_ref = r0s[r0s.size() / 2];
  t.h_r0 = 8.0 * d_hat * d_hat / t.r0_ref;
  t.h_gamma = 8.0 * d_hat * d_hat / gammaI;
  t.predicted_rate_r0 = 1.0 / (3.0 * t.h_r0);
  t.predicted_rate_gamma = 1.0 / (3.0 * t.h_gamma);
  t.threshold_t = threshold_override >= 0.0 ? threshold_override : 2.0 * t.h_r0 * t.r0_ref;

  std::map<long, long> hist;
  std::map<long, double> mass;
  double total = 0.0;
  for (const auto& [e, w] : ew) {
    ++hist[e];
    mass[e] += w;
    total += w;
  }
  t.histogram.assign(hist.begin(), hist.end());

  // complementary mass CDF on the log scale, fitted beyond the threshold
  std::vector<double> xs, ys;
  double seen = 0.0;
  for (const auto& [tv, m] : mass) {
    const double frac = (total - seen) / total;  // m(E >= tv) / m(escaped)
    if (static_cast<double>(tv) >= t.threshold_t && frac > 0.0) {
      xs.push_back(static_cast<double>(tv));
      ys.push_back(std::log(frac));
    }
    seen += m;
  }
  t.n_tail = static_cast<long>(xs.size());
  if (t.n_tail < 5) {
    t.note = "degenerate tail, fit skipped";
    return t;
  }
  const LinearFit fit = fit_line(xs, ys);
  t.fitted_rate = -fit.slope;
  t.fit_ok = true;
  return t;
}

const char* to_string(StartupOutcome o) {
  switch (o) {
    case StartupOutcome::EssentialReturn: return "essential-return";
    case StartupOutcome::Escaped: return "escaped";
    case StartupOutcome::HorizonSaturated: return "horizon-saturated";
  }
  return "?";
}

std::vector<StartupResult> startup_scan(const MarkedFamily& fam, const EngineConfig& cfg,
                                        long startup_min) {
  PartitionEngine probe(fam, cfg);  // reuse the element machinery on the root only
  Element e = probe.active_elements().front();

  std::vector<StartupResult> out;
  std::vector<bool> done(fam.tracks().size(), false);
  std::vector<CritTimeline> crit = e.crit;

  std::vector<RationalMap> maps;
  for (const auto& s : e.samples) maps.push_back(fam.map_at(s.a));

  for (long nu = 1; nu <= cfg.horizon; ++nu) {
    bool all_done = true;
    for (std::size_t si = 0; si < e.samples.size(); ++si)
      for (std::size_t l = 0; l < fam.tracks().size(); ++l)
        if (!done[l])
          advance_track_state(maps[si], fam, e.samples[si].a, e.samples[si].tracks[l], nu,
                              cfg.ladder.gammaI, cfg.recurrence.alpha);
    for (std::size_t l = 0; l < fam.tracks().size(); ++l) {
      if (done[l]) continue;
      all_done = false;
      double dist = std::numeric_limits<double>::infinity(), diam = 0.0;
      for (std::size_t i = 0; i < e.samples.size(); ++i) {
        dist = std::min(dist, e.samples[i].tracks[l].dist);
        for (std::size_t j = i + 1; j < e.samples.size(); ++j)
          diam = std::max(diam, chordal_distance(e.samples[i].tracks[l].xi,
                                                 e.samples[j].tracks[l].xi));
      }
      diam *= cfg.hull_inflation;
      const bool in_bound = nu <= crit[l].in_bound_until;
      if (dist < cfg.neighborhood.delta_prime && !in_bound) {
        if (dist < cfg.neighborhood.delta && essential_test(diam, dist)) {
          require(nu >= startup_min, ErrorCode::StartupFailure,
                  "square is not a partition element at small times; epsilon too large");
          out.push_back({static_cast<int>(l), nu, StartupOutcome::EssentialReturn,
                         -std::log(std::max(dist, 1e-300)), diam});
          done[l] = true;
          continue;
        }
        // inessential or pseudo return during startup: bind and continue
        std::vector<cplx> params;
        for (const auto& s : e.samples) params.push_back(s.a);
        int k_hit = 0;
        {
          double best = std::numeric_limits<double>::infinity();
          std::size_t bi = 0;
          for (std::size_t i = 0; i < e.samples.size(); ++i)
            if (e.samples[i].tracks[l].dist < best) {
              best = e.samples[i].tracks[l].dist;
              bi = i;
            }
          k_hit = nearest_jrit_index(fam, e.samples[bi].a, e.samples[bi].tracks[l].xi);
        }
        const BoundScan scan = bound_period_element_scan(fam, params, static_cast<int>(l), nu,
                                                         k_hit, cfg.recurrence,
                                                         cfg.bound_horizon);
        if (!scan.saturated) crit[l].in_bound_until = nu + scan.p;
      } else if (dist >= cfg.neighborhood.delta_prime && !in_bound &&
                 diam >= cfg.neighborhood.S) {
        require(nu >= startup_min, ErrorCode::StartupFailure,
                "square escaped immediately; epsilon too large");
        out.push_back({static_cast<int>(l), nu, StartupOutcome::Escaped, 0.0, diam});
        done[l] = true;
      }
    }
    if (all_done) break;
  }
  for (std::size_t l = 0; l < fam.tracks().size(); ++l)
    if (!done[l]) out.push_back({static_cast<int>(l), cfg.horizon,
                                 StartupOutcome::HorizonSaturated, 0.0, 0.0});
  std::sort(out.begin(), out.end(),
            [](const StartupResult& a, const StartupResult& b) { return a.N_l < b.N_l; });
  return out;
}

BracketStats bracket_statistics(const std::vector<ReturnEvent>& events,
                                const std::vector<EventAux>& aux, double gamma, double Gamma) {
  BracketStats st;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.kind == ReturnKind::BoundReturn || e.saturated) continue;
    ++st.n_returns;
    if (i >= aux.size() || !aux[i].qualifies) continue;
    ++st.n_qualifying;
    const auto [lo, hi] = bound_length_bracket(e.r, aux[i].d_i, gamma, Gamma);
    if (static_cast<double>(e.p) >= lo - 2.0 && static_cast<double>(e.p) <= hi + 2.0)
      ++st.n_in_bracket;
  }
  st.fraction = st.n_qualifying > 0
                    ? static_cast<double>(st.n_in_bracket) / static_cast<double>(st.n_qualifying)
                    : 0.0;
  return st;
}

}  // namespace parex
