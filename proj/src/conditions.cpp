#include "parex/conditions.hpp"

#include <cmath>
#include <limits>

namespace parex {

ExponentLadder ExponentLadder::build(double gamma0, double gammaH, double tau, double alpha,
                                     int d_hat) {
  require(gamma0 > 0 && gammaH > 0, ErrorCode::ConfigError, "ladder exponents must be positive");
  require(tau > 0 && tau < 1, ErrorCode::ConfigError, "tau must lie in (0,1)");
  require(alpha > 0, ErrorCode::ConfigError, "alpha must be positive");
  require(d_hat >= 2, ErrorCode::ConfigError, "d_hat must be >= 2");
  ExponentLadder lad;
  lad.gamma0 = gamma0;
  lad.gammaH = gammaH;
  lad.tau = tau;
  lad.alpha = alpha;
  lad.d_hat = d_hat;
  lad.gammaL = (1.0 / 6.0) * std::min(gamma0, gammaH) * (1.0 - tau);
  lad.gammaI = 2.0 * lad.gammaL;
  lad.gammaB = 4.5 * lad.gammaL;
  require(alpha * d_hat / lad.gammaI <= 1.0 / 100.0, ErrorCode::ConfigError,
          "alpha too large: alpha*d_hat/gammaI must be <= 1/100");
  return lad;
}

long ExponentLadder::auxiliary_horizon(long n) const {
  return static_cast<long>(std::floor(2.0 * d_hat * alpha * static_cast<double>(n) / gammaI));
}

HorizonReport ce_margin(const RationalMap& f, const CriticalPoint& c, long N, const CEParams& p) {
  require(c.in_julia, ErrorCode::PreconditionFailed,
          "ce_margin needs a critical point flagged in the Julia set");
  require(N >= 1, ErrorCode::DomainError, "ce_margin needs N >= 1");

  HorizonReport rep;
  rep.horizon = N;
  rep.per_step.reserve(static_cast<std::size_t>(N));
  rep.pass = true;

  const double logC0 = std::log(p.C0);
  SpherePoint z = f.evaluate(c.point);  // v = f(c)
  double log_d = 0.0;
  double est = std::numeric_limits<double>::infinity();
  for (long n = 1; n <= N; ++n) {
    log_d += std::log(f.spherical_derivative(z));
    z = f.evaluate(z);
    const double lyap = log_d / static_cast<double>(n);
    rep.per_step.emplace_back(n, lyap);
    if (log_d < logC0 + p.gamma0 * static_cast<double>(n) && !rep.witness) {
      rep.pass = false;
      rep.witness = n;
    }
    if (n >= (N + 1) / 2) est = std::min(est, lyap);
  }
  rep.exponent_estimate = est;
  return rep;
}

HorizonReport slow_recurrence_check(const RationalMap& f, const SpherePoint& z, long N,
                                    double alpha, const std::vector<SpherePoint>& jrit,
                                    double K_required) {
  require(N >= 1, ErrorCode::DomainError, "slow_recurrence_check needs N >= 1");
  HorizonReport rep;
  rep.horizon = N;
  if (jrit.empty()) {
    rep.pass = true;
    rep.k_min = std::numeric_limits<double>::infinity();
    return rep;
  }
  rep.per_step.reserve(static_cast<std::size_t>(N));
  double kmin = std::numeric_limits<double>::infinity();
  SpherePoint cur = z;
  for (long n = 1; n <= N; ++n) {
    cur = f.evaluate(cur);
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : jrit) d = std::min(d, chordal_distance(cur, c));
    const double val = d * std::exp(alpha * static_cast<double>(n));
    rep.per_step.emplace_back(n, val);
    if (val < kmin) {
      kmin = val;
      if (val < K_required && !rep.witness) rep.witness = n;
    }
  }
  rep.k_min = kmin;
  rep.pass = kmin >= K_required;
  if (rep.pass) rep.witness.reset();
  return rep;
}

double dist_to_jrit(const MarkedFamily& fam, cplx a, const SpherePoint& z) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& t : fam.tracks()) {
    if (!t.in_julia) continue;
    d = std::min(d, chordal_distance(z, SpherePoint::finite(t.at(a))));
  }
  return d;
}

HorizonReport basic_assumption_check(const MarkedFamily& fam, cplx a, int l, long n,
                                     const RecurrenceParams& p) {
  HorizonReport rep;
  rep.horizon = n;
  rep.pass = true;
  if (n < 1) return rep;
  const RationalMap f = fam.map_at(a);
  SpherePoint z = SpherePoint::finite(fam.track(l).at(a));
  rep.per_step.reserve(static_cast<std::size_t>(n));
  const double logK = std::log(p.K);
  for (long k = 1; k <= n; ++k) {
    z = f.evaluate(z);
    const double d = dist_to_jrit(fam, a, z);
    const double margin = std::log(d) + 2.0 * p.alpha * static_cast<double>(k) - logK;
    rep.per_step.emplace_back(k, margin);
    if (margin < 0.0 && !rep.witness) {
      rep.pass = false;
      rep.witness = k;
    }
  }
  return rep;
}

namespace {

// spherical log |Df^k(v_l(a))| >= log C0 + gamma k for 1 <= k <= horizon
bool derivative_growth_holds(const MarkedFamily& fam, cplx a, int l, long horizon, double gamma,
                             double C0) {
  if (horizon < 1) return true;
  const RationalMap f = fam.map_at(a);
  SpherePoint z = f.evaluate(SpherePoint::finite(fam.track(l).at(a)));  // v_l(a)
  const double logC0 = std::log(C0);
  double log_d = 0.0;
  for (long k = 1; k <= horizon; ++k) {
    log_d += std::log(f.spherical_derivative(z));
    z = f.evaluate(z);
    if (log_d < logC0 + gamma * static_cast<double>(k)) return false;
  }
  return true;
}

bool approach_rate_holds(const MarkedFamily& fam, cplx a, int l, long horizon,
                         const RecurrenceParams& p) {
  if (horizon < 1) return true;
  return basic_assumption_check(fam, a, l, horizon, p).pass;
}

}  // namespace

bool membership_E(const MarkedFamily& fam, cplx a, int l, long n, double gamma,
                  const ExponentLadder& ladder, double C0) {
  if (!derivative_growth_holds(fam, a, l, n - 1, gamma, C0)) return false;
  const long aux = ladder.auxiliary_horizon(n);
  for (int j = 0; j < static_cast<int>(fam.tracks().size()); ++j) {
    if (j == l) continue;
    if (!derivative_growth_holds(fam, a, j, aux, gamma, C0)) return false;
  }
  return true;
}

bool membership_B(const MarkedFamily& fam, cplx a, int l, long n, const RecurrenceParams& p,
                  const ExponentLadder& ladder) {
  if (!approach_rate_holds(fam, a, l, n - 1, p)) return false;
  const long aux = ladder.auxiliary_horizon(n);
  for (int j = 0; j < static_cast<int>(fam.tracks().size()); ++j) {
    if (j == l) continue;
    if (!approach_rate_holds(fam, a, j, aux, p)) return false;
  }
  return true;
}

}  // namespace parex
