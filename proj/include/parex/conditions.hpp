#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "parex/family.hpp"

namespace parex {

struct CEParams {
  double C0 = 0.5;
  double gamma0 = 0.05;  // per-step log growth
};

struct RecurrenceParams {
  double alpha = 1e-5;
  double K = 1e-6;
};

// gammaL = (1/6) min(gamma0, gammaH) (1 - tau), gammaI = 2 gammaL,
// gammaB = (9/2) gammaL; alpha must satisfy alpha*dhat/gammaI <= 1/100.
struct ExponentLadder {
  double gamma0 = 0.0;
  double gammaH = 0.0;
  double gammaL = 0.0;
  double gammaI = 0.0;
  double gammaB = 0.0;
  double tau = 0.0;
  double alpha = 0.0;
  int d_hat = 2;

  static ExponentLadder build(double gamma0, double gammaH, double tau, double alpha, int d_hat);

  // EE2/BB2 auxiliary horizon floor(2 dhat alpha n / gammaI)
  long auxiliary_horizon(long n) const;
};

struct HorizonReport {
  long horizon = 0;
  std::vector<std::pair<long, double>> per_step;
  bool pass = false;
  std::optional<long> witness;    // first violating step
  double exponent_estimate = 0;   // inf over n in [N/2, N] of (1/n) log D_n (CE only)
  double k_min = 0;               // slow recurrence only
};

// Collet-Eckmann margin along the orbit of the critical value f(c);
// per_step holds (n, log D_n / n), pass iff log D_n >= log C0 + gamma0 n.
HorizonReport ce_margin(const RationalMap& f, const CriticalPoint& c, long N, const CEParams& p);

// K_min = min_{1<=n<=N} dist(f^n(z), Jrit) e^{alpha n}; empty Jrit passes
// vacuously with K_min = +infinity.
HorizonReport slow_recurrence_check(const RationalMap& f, const SpherePoint& z, long N,
                                    double alpha, const std::vector<SpherePoint>& jrit,
                                    double K_required);

// chordal distance from a point to the marked in-Julia tracks at parameter a
double dist_to_jrit(const MarkedFamily& fam, cplx a, const SpherePoint& z);

// basic approach-rate assumption: dist(xi_{k,l}(a), Jrit_a) >= K e^{-2 alpha k}
// for 1 <= k <= n (the k = 0 self-distance is excluded)
HorizonReport basic_assumption_check(const MarkedFamily& fam, cplx a, int l, long n,
                                     const RecurrenceParams& p);

// EE1 for index l up to n-1 plus EE2 for every other index up to the
// auxiliary horizon; derivative products are spherical
bool membership_E(const MarkedFamily& fam, cplx a, int l, long n, double gamma,
                  const ExponentLadder& ladder, double C0);

// BB1/BB2 distance analogue of membership_E
bool membership_B(const MarkedFamily& fam, cplx a, int l, long n, const RecurrenceParams& p,
                  const ExponentLadder& ladder);

}  // namespace parex
