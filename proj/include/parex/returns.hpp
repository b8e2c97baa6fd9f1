#pragma once

#include <string>

#include "parex/conditions.hpp"

namespace parex {

// U = D(c_l, delta), U' = D(c_l, delta') with delta = e^-Delta < delta' =
// e^-Delta', U^2 = D(c_l, delta^2); S = epsilon1 * delta is the large scale.
struct NeighborhoodConfig {
  double Delta = 6.0;
  double DeltaPrime = 4.0;
  double epsilon1 = 0.5;

  double delta = 0.0;
  double delta_prime = 0.0;
  double delta_sq = 0.0;
  double S = 0.0;

  static NeighborhoodConfig build(double Delta, double DeltaPrime, double epsilon1);

  // diam(U_l) must dwarf the critical-point motion over the square
  void validate_against(const MarkedFamily& fam, double ratio = 100.0) const;
};

enum class StepClass { Outside, InUPrime, InU, InU2 };

enum class ReturnKind { Essential, Inessential, Pseudo, BoundReturn };

const char* to_string(ReturnKind k);
const char* to_string(StepClass c);

struct ReturnEvent {
  std::string element_id;
  int l = 0;            // critical index whose orbit returned
  long nu = 0;          // return time
  int hit_index = 0;    // which U'_k was hit
  double r = 0.0;       // depth, dist ~ e^-r
  ReturnKind kind = ReturnKind::Inessential;
  long p = 0;           // bound period length
  long L = 0;           // preceding free period length
  bool saturated = false;
};

// deepest containment for a given distance to the marked critical set
StepClass classify_distance(double dist, const NeighborhoodConfig& cfg);

// deepest containment of xi_{n,l}(a) among the marked neighborhoods
StepClass classify_point_step(const MarkedFamily& fam, cplx a, int l, long n,
                              const NeighborhoodConfig& cfg);

// index of the nearest in-Julia track (the component U'_k hit)
int nearest_jrit_index(const MarkedFamily& fam, cplx a, const SpherePoint& z);

struct BoundScan {
  long p = 0;
  bool saturated = false;  // inequality still held at the horizon
};

// largest p <= horizon with |xi_{nu+j,l}(a) - xi_{j,k}(a)| <= e^{-alpha j}
// dist(xi_{j,k}(a), Jrit_a) for all 0 < j <= p; throws HorizonSaturated when
// the scan never fails
long bound_period_point(const MarkedFamily& fam, cplx a, int l, long nu, int k,
                        const RecurrenceParams& params, const NeighborhoodConfig& cfg,
                        long horizon);
BoundScan bound_period_point_scan(const MarkedFamily& fam, cplx a, int l, long nu, int k,
                                  const RecurrenceParams& params, long horizon);

// element version over a parameter sample set (corners + center); the image
// samples are the xi_{n,l}(a) of the same parameters
long bound_period_element(const MarkedFamily& fam, const ParameterSquare& A, int l, long n, int k,
                          const RecurrenceParams& params, const NeighborhoodConfig& cfg,
                          long horizon);
BoundScan bound_period_element_scan(const MarkedFamily& fam, const std::vector<cplx>& samples,
                                    int l, long n, int k, const RecurrenceParams& params,
                                    long horizon);

// diam >= (1/3) dist / (log dist)^2; requires 0 < dist < 1
bool essential_test(double diam, double dist);

// partition rule bound: dist/(log dist)^2 inside U, the large scale outside
double partition_bound(double dist, const NeighborhoodConfig& cfg);

// d_i r / (2 Gamma) <= p <= 2 d_i r / gamma
std::pair<double, double> bound_length_bracket(double r, int d_i, double gamma, double Gamma);

// empirical sup of log spherical derivative over sphere grid x parameter grid
struct GammaSup {
  double Gamma = 0.0;
  double max_seen = -1e300;
  long violations = 0;

  // runtime assertion hook; returns false (and counts) on violation
  bool observe(double log_deriv) {
    if (log_deriv > max_seen) max_seen = log_deriv;
    if (log_deriv > Gamma) {
      ++violations;
      return false;
    }
    return true;
  }
};

GammaSup estimate_gamma_sup(const MarkedFamily& fam, int grid_per_chart = 181,
                            double margin = 0.05);

}  // namespace parex
