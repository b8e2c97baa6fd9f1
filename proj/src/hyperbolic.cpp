#include "parex/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parex {

const char* to_string(HypStatus s) {
  switch (s) {
    case HypStatus::Hyperbolic: return "hyperbolic";
    case HypStatus::Undetermined: return "undetermined";
    case HypStatus::NumericFailure: return "numeric-failure";
  }
  return "?";
}

namespace {

// f^p(u) expressed in target_chart coordinates with the chain derivative
struct ChainResult {
  bool ok = false;
  cplx value{0, 0};
  cplx deriv{1, 0};
  SpherePoint point;
};

ChainResult iterate_chain(const RationalMap& f, const SpherePoint& u0, int p, Chart target) {
  ChainResult r;
  SpherePoint cur = u0;
  cplx chain{1.0, 0.0};
  for (int i = 0; i < p; ++i) {
    const auto step = f.evaluate_with_chart_derivative(cur);
    chain *= step.deriv;
    cur = step.value;
    if (!std::isfinite(chain.real()) || !std::isfinite(chain.imag())) return r;
  }
  if (cur.chart != target) {
    if (cur.value == cplx(0.0, 0.0)) return r;  // cannot re-chart across the pole
    chain *= -1.0 / (cur.value * cur.value);
    cur = {1.0 / cur.value, target};
  }
  r.ok = true;
  r.value = cur.value;
  r.deriv = chain;
  r.point = cur;
  return r;
}

double escape_radius(const RationalMap& f) {
  const auto& p = f.p();
  const int d = poly::degree(p);
  double s = 1.0;
  for (int i = 0; i < d; ++i) s += std::abs(p[static_cast<std::size_t>(i)]);
  return std::max(2.0, s / std::abs(p[static_cast<std::size_t>(d)]));
}

bool escaped(const SpherePoint& z, double R) {
  if (z.chart == Chart::Reciprocal) return std::abs(z.value) < 1.0 / R;
  return std::abs(z.value) > R;
}

SpherePoint cycle_representative(const RationalMap& f, const SpherePoint& pt, int period) {
  SpherePoint best = pt;
  SpherePoint cur = pt;
  auto key = [](const SpherePoint& s) {
    return std::tuple<int, double, double>(s.chart == Chart::Finite ? 0 : 1, s.value.real(),
                                           s.value.imag());
  };
  for (int i = 1; i < period; ++i) {
    cur = f.evaluate(cur);
    if (key(cur) < key(best)) best = cur;
  }
  return best;
}

}  // namespace

RefinedCycle refine_cycle(const RationalMap& f, const SpherePoint& guess, int period,
                          const ClassifyOptions& opt) {
  RefinedCycle out;
  SpherePoint u = SpherePoint::canonical(guess);
  for (int iter = 0; iter < 60; ++iter) {
    const ChainResult c = iterate_chain(f, u, period, u.chart);
    if (!c.ok) return out;
    const cplx g = c.value - u.value;
    const cplx gp = c.deriv - 1.0;
    if (std::abs(gp) == 0.0) return out;
    u.value -= g / gp;
    if (!std::isfinite(u.value.real()) || !std::isfinite(u.value.imag())) return out;
    if (std::abs(u.value) > 2.5) u = SpherePoint::canonical(u);
    if (std::abs(g) <= 1e-14 * (1.0 + std::abs(u.value))) break;
  }
  const ChainResult fin = iterate_chain(f, u, period, u.chart);
  if (!fin.ok || chordal_distance(fin.point, u) > opt.refine_tol) return out;

  // reduce to the minimal period
  int minimal = period;
  for (int q = 1; q < period; ++q) {
    if (period % q != 0) continue;
    const ChainResult c = iterate_chain(f, u, q, u.chart);
    if (c.ok && chordal_distance(c.point, u) <= opt.refine_tol * 10.0) {
      minimal = q;
      break;
    }
  }
  const ChainResult mc = iterate_chain(f, u, minimal, u.chart);
  if (!mc.ok) return out;
  out.ok = true;
  out.point = u;
  out.period = minimal;
  out.multiplier = mc.deriv;
  return out;
}

cplx cycle_multiplier(const RationalMap& f, const SpherePoint& point, int period) {
  const ChainResult c = iterate_chain(f, point, period, point.chart);
  require(c.ok, ErrorCode::NumericFailure, "multiplier chain did not close");
  return c.deriv;
}

namespace {

int dedup_add_cycle(std::vector<CycleRecord>& cycles, const RationalMap& f,
                    const RefinedCycle& rc, int basin_l) {
  const SpherePoint rep = cycle_representative(f, rc.point, rc.period);
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    if (cycles[i].period == rc.period && chordal_distance(cycles[i].representative, rep) <= 1e-8) {
      if (basin_l >= 0 &&
          std::find(cycles[i].basin_hits.begin(), cycles[i].basin_hits.end(), basin_l) ==
              cycles[i].basin_hits.end())
        cycles[i].basin_hits.push_back(basin_l);
      return static_cast<int>(i);
    }
  }
  CycleRecord rec;
  rec.period = rc.period;
  rec.representative = rep;
  rec.multiplier = rc.multiplier;
  if (basin_l >= 0) rec.basin_hits.push_back(basin_l);
  cycles.push_back(std::move(rec));
  return static_cast<int>(cycles.size()) - 1;
}

CritDiagnostic follow_orbit(const RationalMap& f, const SpherePoint& start, long horizon,
                            const ClassifyOptions& opt, std::vector<CycleRecord>& cycles,
                            bool polynomial, double R, int basin_l) {
  CritDiagnostic diag;
  std::vector<SpherePoint> ring(static_cast<std::size_t>(opt.max_period));
  std::vector<SpherePoint> rejected;
  SpherePoint z = SpherePoint::canonical(start);
  ring[0] = z;
  for (long n = 1; n <= horizon; ++n) {
    z = f.evaluate(z);
    if (polynomial && escaped(z, R)) {
      RefinedCycle inf_cycle;
      inf_cycle.ok = true;
      inf_cycle.point = SpherePoint::infinity();
      inf_cycle.period = 1;
      inf_cycle.multiplier = cplx(0.0, 0.0);
      diag.cycle_index = dedup_add_cycle(cycles, f, inf_cycle, basin_l);
      diag.converged = true;
      diag.escaped_to_infinity = true;
      diag.detect_time = n;
      return diag;
    }
    if (n > opt.burn_in) {
      bool skip = false;
      for (const auto& rej : rejected)
        if (chordal_distance(z, rej) < opt.near_tol) {
          skip = true;
          break;
        }
      if (!skip) {
        const long pmax = std::min<long>(n, opt.max_period);
        for (long p = 1; p <= pmax; ++p) {
          const SpherePoint& prev = ring[static_cast<std::size_t>((n - p) % opt.max_period)];
          if (chordal_distance(z, prev) >= opt.near_tol) continue;
          const RefinedCycle rc = refine_cycle(f, z, static_cast<int>(p), opt);
          if (rc.ok && std::abs(rc.multiplier) <= 1.0 - opt.multiplier_gap) {
            diag.cycle_index = dedup_add_cycle(cycles, f, rc, basin_l);
            diag.converged = true;
            diag.detect_time = n;
            return diag;
          }
          if (rc.ok) rejected.push_back(rc.point);
          break;
        }
      }
    }
    ring[static_cast<std::size_t>(n % opt.max_period)] = z;
  }
  return diag;
}

}  // namespace

HyperbolicityVerdict classify_parameter(const MarkedFamily& fam, cplx a, long horizon,
                                        const ClassifyOptions& opt) {
  HyperbolicityVerdict v;
  v.horizon = horizon;
  try {
    const RationalMap f = fam.map_at(a);
    const CriticalSet crit = critical_points(f);
    const bool polynomial = f.is_polynomial();
    const double R = polynomial ? escape_radius(f) : 0.0;
    bool all_converged = true;
    for (std::size_t i = 0; i < crit.points.size(); ++i) {
      const CritDiagnostic d = follow_orbit(f, crit.points[i].point, horizon, opt, v.cycles,
                                            polynomial, R, static_cast<int>(i));
      all_converged = all_converged && d.converged;
      v.diagnostics.push_back(d);
    }
    v.status = all_converged ? HypStatus::Hyperbolic : HypStatus::Undetermined;
  } catch (const Error&) {
    v.status = HypStatus::NumericFailure;
  }
  return v;
}

std::vector<CycleRecord> find_attracting_cycles(const RationalMap& f, int max_period,
                                                const std::vector<SpherePoint>& seeds,
                                                long horizon, const ClassifyOptions& opt) {
  require(max_period >= 1, ErrorCode::DomainError, "max_period must be >= 1");
  ClassifyOptions o = opt;
  o.max_period = max_period;
  std::vector<CycleRecord> cycles;
  const bool polynomial = f.is_polynomial();
  const double R = polynomial ? escape_radius(f) : 0.0;
  for (const auto& s : seeds) follow_orbit(f, s, horizon, o, cycles, polynomial, R, -1);
  return cycles;
}

std::vector<DensityRow> density_scan(const MarkedFamily& fam, cplx a0,
                                     const std::vector<double>& radii, long samples_per_square,
                                     long horizon, std::uint64_t seed, int workers,
                                     const ClassifyOptions& opt) {
  require(samples_per_square >= 100, ErrorCode::ConfigError,
          "density scan needs at least 100 samples per square");
  for (std::size_t i = 1; i < radii.size(); ++i)
    require(radii[i] < radii[i - 1], ErrorCode::ConfigError, "radii must be strictly decreasing");

  std::vector<DensityRow> rows;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double side = radii[ri];
    // pre-draw the sample set so worker count cannot change it
    Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (ri + 1)));
    std::vector<cplx> pts(static_cast<std::size_t>(samples_per_square));
    for (auto& p : pts) p = rng.uniform_complex(a0, side / 2.0);

    std::vector<int> verdicts(pts.size(), 0);
    parallel_for(static_cast<long>(pts.size()), workers, [&](long i) {
      const HyperbolicityVerdict v =
          classify_parameter(fam, pts[static_cast<std::size_t>(i)], horizon, opt);
      verdicts[static_cast<std::size_t>(i)] = v.status == HypStatus::Hyperbolic ? 1 : 0;
    });

    DensityRow row;
    row.radius = side;
    row.n_samples = samples_per_square;
    for (int v : verdicts) row.n_hyperbolic += v;
    row.n_undetermined = row.n_samples - row.n_hyperbolic;
    const WilsonInterval w = wilson95(row.n_hyperbolic, row.n_samples);
    row.wilson_lo = w.lo;
    row.wilson_hi = w.hi;
    rows.push_back(row);
  }
  return rows;
}

void apply_julia_flags(MarkedFamily& fam, long horizon, const ClassifyOptions& opt) {
  const cplx a = fam.domain().center;
  const RationalMap f = fam.map_at(a);
  const bool polynomial = f.is_polynomial();
  const double R = polynomial ? escape_radius(f) : 0.0;
  std::vector<CycleRecord> cycles;
  for (std::size_t l = 0; l < fam.tracks().size(); ++l) {
    const SpherePoint c = SpherePoint::finite(fam.tracks()[l].at(a));
    const CritDiagnostic d =
        follow_orbit(f, c, horizon, opt, cycles, polynomial, R, static_cast<int>(l));
    fam.tracks()[l].in_julia = !d.converged;
  }
}

}  // namespace parex
