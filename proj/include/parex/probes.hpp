#pragma once

#include <map>
#include <string>

#include "parex/engine.hpp"

namespace parex {

struct ProbeResult {
  std::string lemma_id;
  long samples = 0;
  double worst_ratio = 0.0;
  double bound = 0.0;
  double pass_fraction = 1.0;
  std::vector<std::uint64_t> counterexamples;  // replay seeds
  std::map<std::string, double> details;
};

// |Df^n(z)/Df^n(w) - 1| against exp(C sum |f^j z - f^j w| / dist(f^j w, Jrit)) - 1
struct DistortionPair {
  double lhs = 0.0;
  double sum = 0.0;  // the distortion sum with C = 1
  bool envelope_ok = true;
};
DistortionPair pointwise_distortion_probe(const MarkedFamily& fam, cplx a, cplx z, cplx w, long n,
                                          double envelope);

// batch driver: C is fitted on the calibration half and validated on the rest
ProbeResult distortion_probe_batch(const MarkedFamily& fam, cplx a, long n_max, long samples,
                                   std::uint64_t seed, double envelope = 0.05);

// rebuild one batch case from its counterexample seed
DistortionPair distortion_replay(const MarkedFamily& fam, cplx a, long n_max,
                                 std::uint64_t master_seed, std::uint64_t case_seed,
                                 double envelope = 0.05);

struct ManeEstimate {
  double C_M = 0.0;
  double lambda_M = 0.0;  // Mane expansion base, > 1 when the fit succeeds
  double C_delta = 0.0;
  double gamma_outside = 0.0;  // no-hit exponent inside the Julia neighborhood
  double C_hit = 0.0;
  double gamma_H = 0.0;  // exponent for segments ending with a return to U
  long seeds_used = 0;
  long points_mane = 0;
  long points_outside = 0;
  long points_hit = 0;
};

// seeds drawn by backward iteration from a repelling fixed point; the seed
// cloud doubles as the epsilon_0-neighborhood membership oracle
std::vector<SpherePoint> julia_seed_cloud(const RationalMap& f, long count, std::uint64_t seed);

ManeEstimate mane_probe(const MarkedFamily& fam, cplx a, const NeighborhoodConfig& cfg,
                        long horizon, long n_seeds, std::uint64_t seed, double eps0 = 0.2,
                        bool use_marked_u = true);

struct WeakParamOptions {
  double Q = 1.05;
  double gamma1 = 0.0;  // hypothesis i) exponent; 0 = (3/2) gammaL from the ladder
  double C1 = 0.1;
};

// the two stretching inequalities of the weak-parameter-dependence lemma on
// the window [n0, n1]; reports the worst empirical Q that would certify them
ProbeResult weak_param_probe(const MarkedFamily& fam, cplx a, cplx b, int l, long n0, long n1,
                             const NeighborhoodConfig& cfg, const ExponentLadder& ladder,
                             const WeakParamOptions& opt = {});

// |Df_a^n(v_l(a)) / Df_b^n(v_l(b)) - 1| over sample pairs and n in [nu, nu']
ProbeResult mdl_probe(const MarkedFamily& fam, const ParameterSquare& A, int l, long nu,
                      long nu_prime, const NeighborhoodConfig& cfg, const ExponentLadder& ladder,
                      const RecurrenceParams& params, double C0, double eps_prime);

// factor-2 repulsion between consecutive free returns
ProbeResult repulsion_probe(const MarkedFamily& fam, const ParameterSquare& A, int l, long nu,
                            long nu_prime, const ExponentLadder& ladder,
                            const RecurrenceParams& params, double C0);

// exponent floor (9/10) min(gamma, gammaH) through bound and free periods
ProbeResult growth_after_return_probe(const MarkedFamily& fam, cplx a, int l, long nu,
                                      long nu_prime, const ExponentLadder& ladder,
                                      const RecurrenceParams& params, double C0, double gamma);

// bound-period distortion against the critical value orbit
ProbeResult bound_distortion_probe(const MarkedFamily& fam, cplx a, int l, long nu, int i,
                                   const NeighborhoodConfig& cfg, const ExponentLadder& ladder,
                                   const RecurrenceParams& params, double C0, double eps_prime);

// backward-orbit derivative growth (finite-horizon second Collet-Eckmann probe)
ProbeResult second_ce_probe(const RationalMap& f, const SpherePoint& c, int n_max, int branches,
                            std::uint64_t seed);

}  // namespace parex
