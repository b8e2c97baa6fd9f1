#include "parex/returns.hpp"

#include <cmath>
#include <limits>

namespace parex {

NeighborhoodConfig NeighborhoodConfig::build(double Delta, double DeltaPrime, double epsilon1) {
  require(DeltaPrime > 0 && DeltaPrime < Delta, ErrorCode::ConfigError,
          "need 0 < DeltaPrime < Delta");
  require(epsilon1 > 0 && epsilon1 < 1, ErrorCode::ConfigError, "epsilon1 must lie in (0,1)");
  NeighborhoodConfig cfg;
  cfg.Delta = Delta;
  cfg.DeltaPrime = DeltaPrime;
  cfg.epsilon1 = epsilon1;
  cfg.delta = std::exp(-Delta);
  cfg.delta_prime = std::exp(-DeltaPrime);
  cfg.delta_sq = cfg.delta * cfg.delta;
  cfg.S = epsilon1 * cfg.delta;
  return cfg;
}

void NeighborhoodConfig::validate_against(const MarkedFamily& fam, double ratio) const {
  for (const auto& t : fam.tracks()) {
    double diam = 0.0;
    const auto pts = fam.domain().samples();
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j)
        diam = std::max(diam, chordal_distance(SpherePoint::finite(t.at(pts[i])),
                                               SpherePoint::finite(t.at(pts[j]))));
    require(diam * ratio <= 2.0 * delta, ErrorCode::ConfigError,
            "critical-point motion over the square is not small against diam(U)");
  }
}

const char* to_string(ReturnKind k) {
  switch (k) {
    case ReturnKind::Essential: return "essential";
    case ReturnKind::Inessential: return "inessential";
    case ReturnKind::Pseudo: return "pseudo";
    case ReturnKind::BoundReturn: return "bound";
  }
  return "?";
}

const char* to_string(StepClass c) {
  switch (c) {
    case StepClass::Outside: return "outside";
    case StepClass::InUPrime: return "U'";
    case StepClass::InU: return "U";
    case StepClass::InU2: return "U2";
  }
  return "?";
}

StepClass classify_distance(double dist, const NeighborhoodConfig& cfg) {
  if (dist < cfg.delta_sq) return StepClass::InU2;
  if (dist < cfg.delta) return StepClass::InU;
  if (dist < cfg.delta_prime) return StepClass::InUPrime;
  return StepClass::Outside;
}

StepClass classify_point_step(const MarkedFamily& fam, cplx a, int l, long n,
                              const NeighborhoodConfig& cfg) {
  const SpherePoint z = xi(fam, a, l, n);
  return classify_distance(dist_to_jrit(fam, a, z), cfg);
}

int nearest_jrit_index(const MarkedFamily& fam, cplx a, const SpherePoint& z) {
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (int j = 0; j < static_cast<int>(fam.tracks().size()); ++j) {
    const auto& t = fam.tracks()[static_cast<std::size_t>(j)];
    if (!t.in_julia) continue;
    const double d = chordal_distance(z, SpherePoint::finite(t.at(a)));
    if (d < bd) {
      bd = d;
      best = j;
    }
  }
  require(best >= 0, ErrorCode::PreconditionFailed, "no in-Julia critical track");
  return best;
}

BoundScan bound_period_point_scan(const MarkedFamily& fam, cplx a, int l, long nu, int k,
                                  const RecurrenceParams& params, long horizon) {
  require(horizon >= 1, ErrorCode::DomainError, "bound period scan needs a positive horizon");
  const RationalMap f = fam.map_at(a);
  SpherePoint zl = xi(fam, a, l, nu);
  SpherePoint zk = SpherePoint::finite(fam.track(k).at(a));
  BoundScan scan;
  for (long j = 1; j <= horizon; ++j) {
    zl = f.evaluate(zl);  // xi_{nu+j,l}
    zk = f.evaluate(zk);  // xi_{j,k}
    const double rhs = std::exp(-params.alpha * static_cast<double>(j)) * dist_to_jrit(fam, a, zk);
    if (chordal_distance(zl, zk) > rhs) return scan;
    scan.p = j;
  }
  scan.saturated = true;
  return scan;
}

long bound_period_point(const MarkedFamily& fam, cplx a, int l, long nu, int k,
                        const RecurrenceParams& params, const NeighborhoodConfig& cfg,
                        long horizon) {
  const SpherePoint z = xi(fam, a, l, nu);
  const double d = chordal_distance(z, SpherePoint::finite(fam.track(k).at(a)));
  require(d < cfg.delta_prime, ErrorCode::PreconditionFailed,
          "bound_period_point needs a return into U'_k");
  const BoundScan scan = bound_period_point_scan(fam, a, l, nu, k, params, horizon);
  if (scan.saturated)
    fail(ErrorCode::HorizonSaturated, "bound period still binding at the scan horizon");
  return scan.p;
}

BoundScan bound_period_element_scan(const MarkedFamily& fam, const std::vector<cplx>& samples,
                                    int l, long n, int k, const RecurrenceParams& params,
                                    long horizon) {
  require(horizon >= 1, ErrorCode::DomainError, "bound period scan needs a positive horizon");
  require(!samples.empty(), ErrorCode::DomainError, "bound period scan needs samples");
  const std::size_t m = samples.size();
  std::vector<RationalMap> maps;
  maps.reserve(m);
  std::vector<SpherePoint> zl(m), zk(m);
  for (std::size_t i = 0; i < m; ++i) {
    maps.push_back(fam.map_at(samples[i]));
    zl[i] = xi(fam, samples[i], l, n);
    zk[i] = SpherePoint::finite(fam.track(k).at(samples[i]));
  }
  BoundScan scan;
  for (long j = 1; j <= horizon; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      zl[i] = maps[i].evaluate(zl[i]);
      zk[i] = maps[i].evaluate(zk[i]);
    }
    // all (a,b) pairs: the image sample of a against the binding orbit of b
    for (std::size_t ia = 0; ia < m; ++ia) {
      for (std::size_t ib = 0; ib < m; ++ib) {
        const double rhs = std::exp(-params.alpha * static_cast<double>(j)) *
                           dist_to_jrit(fam, samples[ib], zk[ib]);
        if (chordal_distance(zl[ia], zk[ib]) > rhs) return scan;
      }
    }
    scan.p = j;
  }
  scan.saturated = true;
  return scan;
}

long bound_period_element(const MarkedFamily& fam, const ParameterSquare& A, int l, long n, int k,
                          const RecurrenceParams& params, const NeighborhoodConfig& cfg,
                          long horizon) {
  const auto samples = A.samples();
  bool meets = false;
  for (const auto& a : samples) {
    const double d =
        chordal_distance(xi(fam, a, l, n), SpherePoint::finite(fam.track(k).at(a)));
    if (d < cfg.delta_prime) meets = true;
  }
  require(meets, ErrorCode::PreconditionFailed, "bound_period_element needs the image to meet U'_k");
  const BoundScan scan = bound_period_element_scan(fam, samples, l, n, k, params, horizon);
  if (scan.saturated)
    fail(ErrorCode::HorizonSaturated, "bound period still binding at the scan horizon");
  return scan.p;
}

bool essential_test(double diam, double dist) {
  require(dist > 0.0 && dist < 1.0, ErrorCode::DomainError,
          "essential_test needs 0 < dist < 1");
  require(diam >= 0.0, ErrorCode::DomainError, "essential_test needs diam >= 0");
  const double lg = std::log(dist);
  return diam >= dist / (3.0 * lg * lg);
}

double partition_bound(double dist, const NeighborhoodConfig& cfg) {
  if (dist >= 1.0) return cfg.S;
  const double lg = std::log(dist);
  return dist / (lg * lg);
}

std::pair<double, double> bound_length_bracket(double r, int d_i, double gamma, double Gamma) {
  require(gamma > 0 && Gamma > 0, ErrorCode::DomainError, "bracket needs positive exponents");
  return {d_i * r / (2.0 * Gamma), 2.0 * d_i * r / gamma};
}

GammaSup estimate_gamma_sup(const MarkedFamily& fam, int grid_per_chart, double margin) {
  GammaSup g;
  double best = -std::numeric_limits<double>::infinity();
  // 3x3 parameter grid x two chart grids covering the sphere
  const double h = fam.domain().side / 2.0;
  for (int pi = -1; pi <= 1; ++pi) {
    for (int pj = -1; pj <= 1; ++pj) {
      const cplx a = fam.domain().center + cplx(h * pi, h * pj);
      const RationalMap f = fam.map_at(a);
      for (int chart = 0; chart < 2; ++chart) {
        for (int i = 0; i < grid_per_chart; ++i) {
          for (int j = 0; j < grid_per_chart; ++j) {
            const double x = -1.05 + 2.10 * i / (grid_per_chart - 1);
            const double y = -1.05 + 2.10 * j / (grid_per_chart - 1);
            const SpherePoint z{cplx(x, y), chart == 0 ? Chart::Finite : Chart::Reciprocal};
            const double s = f.spherical_derivative(z);
            if (s > 0.0) best = std::max(best, std::log(s));
          }
        }
      }
    }
  }
  g.Gamma = best + margin;
  return g;
}

}  // namespace parex
