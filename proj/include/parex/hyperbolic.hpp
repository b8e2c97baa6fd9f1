#pragma once

#include "parex/family.hpp"

namespace parex {

struct CycleRecord {
  int period = 1;
  SpherePoint representative;
  cplx multiplier{0.0, 0.0};
  std::vector<int> basin_hits;  // critical indices attracted to this cycle
};

enum class HypStatus { Hyperbolic, Undetermined, NumericFailure };
const char* to_string(HypStatus s);

struct CritDiagnostic {
  bool converged = false;
  bool escaped_to_infinity = false;
  long detect_time = -1;
  int cycle_index = -1;  // into HyperbolicityVerdict::cycles
};

struct HyperbolicityVerdict {
  HypStatus status = HypStatus::Undetermined;
  long horizon = 0;
  std::vector<CycleRecord> cycles;
  std::vector<CritDiagnostic> diagnostics;  // one per critical point of f_a
};

struct ClassifyOptions {
  int max_period = 64;
  double near_tol = 1e-6;          // candidate detection distance
  double refine_tol = 1e-11;       // chordal fixed-point residual
  double multiplier_gap = 1e-6;    // attracting means |mult| <= 1 - gap
  long burn_in = 0;
};

// iterate every critical point of f_a; Hyperbolic iff each one locks onto an
// attracting cycle (escape of a polynomial orbit counts as the superattracting
// fixed point at infinity)
HyperbolicityVerdict classify_parameter(const MarkedFamily& fam, cplx a, long horizon,
                                        const ClassifyOptions& opt = {});

std::vector<CycleRecord> find_attracting_cycles(const RationalMap& f, int max_period,
                                                const std::vector<SpherePoint>& seeds,
                                                long horizon = 20000,
                                                const ClassifyOptions& opt = {});

// refine a candidate periodic point by Newton iteration on f^p(u) - u and
// compute the cycle multiplier through chart-consistent chain rule
struct RefinedCycle {
  bool ok = false;
  SpherePoint point;
  cplx multiplier{0.0, 0.0};
  int period = 0;
};
RefinedCycle refine_cycle(const RationalMap& f, const SpherePoint& guess, int period,
                          const ClassifyOptions& opt = {});

// recompute the multiplier of an existing cycle by an independent pass
cplx cycle_multiplier(const RationalMap& f, const SpherePoint& point, int period);

struct DensityRow {
  double radius = 0.0;
  long n_samples = 0;
  long n_hyperbolic = 0;
  long n_undetermined = 0;
  double wilson_lo = 0.0;
  double wilson_hi = 1.0;
};

std::vector<DensityRow> density_scan(const MarkedFamily& fam, cplx a0,
                                     const std::vector<double>& radii, long samples_per_square,
                                     long horizon, std::uint64_t seed, int workers = 1,
                                     const ClassifyOptions& opt = {});

// set in_julia flags from a bounded attracting-cycle search at the center
// parameter: a track is flagged in-Julia iff its orbit is not attracted
void apply_julia_flags(MarkedFamily& fam, long horizon, const ClassifyOptions& opt = {});

}  // namespace parex
