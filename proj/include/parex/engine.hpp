#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parex/returns.hpp"

namespace parex {

// Exact dyadic rational mant * 2^exp (mantissa kept odd). Element measures
// are 4^-depth in units of the square, so every ledger sum stays exact.
class Dyadic {
public:
  Dyadic() = default;
  Dyadic(long long mant, int exp);
  static Dyadic zero() { return {}; }
  static Dyadic one() { return {1, 0}; }
  static Dyadic pow2(int e) { return {1, e}; }

  Dyadic operator+(const Dyadic& o) const;
  Dyadic operator-(const Dyadic& o) const;
  Dyadic& operator+=(const Dyadic& o) { return *this = *this + o; }
  Dyadic& operator-=(const Dyadic& o) { return *this = *this - o; }
  bool operator==(const Dyadic& o) const { return mant_ == o.mant_ && exp_ == o.exp_; }
  bool operator!=(const Dyadic& o) const { return !(*this == o); }
  bool is_negative() const { return mant_ < 0; }
  bool is_zero() const { return mant_ == 0; }

  double to_double() const;
  std::string mantissa_str() const;  // decimal
  int exponent() const { return exp_; }

private:
  __int128 mant_ = 0;
  int exp_ = 0;
  void normalize();
  static __int128 shifted(__int128 m, int by);
};

enum class ElementStatus { Active, Escaped, Excluded, ResolutionExcluded };
const char* to_string(ElementStatus s);

struct ExclusionWitness {
  int l = 0;
  long k = 0;        // first violating time
  int sample = 0;    // which of the 5 parameter samples
  cplx a;
  double distance = 0.0;
  double bound = 0.0;  // K e^{-2 alpha k}
};

struct DeletionEvent {
  long nu = 0;
  Dyadic mass_deleted;
  Dyadic mass_before;
};

struct EscapeRecord {
  std::string element_id;
  int l = 0;
  int depth = 0;
  long escape_time = 0;
  long first_essential_nu = -1;
  double r0 = 0.0;
  long E = -1;  // escape_time - first_essential_nu when an essential return happened
};

struct Ledger {
  Dyadic active = Dyadic::one();
  Dyadic escaped;
  Dyadic excluded;
  Dyadic resolution_excluded;
  std::vector<Dyadic> omega_l;  // per-critical-index escaped mass
  std::vector<DeletionEvent> deletions;

  Dyadic total() const { return active + escaped + excluded + resolution_excluded; }
  bool conserved() const { return total() == Dyadic::one(); }
};

struct LedgerRow {
  long step = 0;
  Dyadic active, escaped, excluded, resolution_excluded;
};

struct EngineConfig {
  NeighborhoodConfig neighborhood;
  ExponentLadder ladder;
  RecurrenceParams recurrence;
  double C0 = 0.5;
  long horizon = 500;
  long bound_horizon = 4000;
  int max_depth = 40;
  bool exclude_any_sample = true;  // any violating sample excludes the element
  double hull_inflation = 1.2;
  int workers = 1;
  int gamma_grid = 181;
  double gamma_margin = 0.05;
};

// one parameter sample of one element
struct SampleTrackState {
  SpherePoint xi;              // xi_{n,l}(a)
  double log_D = 0.0;          // log |Df^{n-1}(v_l(a))|, spherical
  double min_E_margin = 1e300; // min_k (log D_k - gammaI k), k <= n-1
  double min_B_margin = 1e300; // min_k (log dist + 2 alpha k), k <= n
  double min_B_prev = 1e300;   // same over k <= n-1
  double dist = 1.0;           // dist(xi_{n,l}(a), Jrit_a)
};

struct ElementSample {
  cplx a;
  RationalMap map;  // f_a, cached for the element's lifetime
  std::vector<SampleTrackState> tracks;
};

struct CritTimeline {
  long in_bound_until = 0;
  long last_bound_end = 0;
  bool was_in_uprime = false;  // bound returns are recorded on entry only
  bool escaped = false;
  long escaped_at = -1;
  long first_essential_nu = -1;
  double first_essential_r = 0.0;
};

struct Element {
  int depth = 0;
  std::uint64_t ix = 0, iy = 0;
  long n = 0;
  bool parked = false;
  std::vector<ElementSample> samples;  // 4 corners + center (center last)
  std::vector<CritTimeline> crit;

  std::string id() const;
  Dyadic fraction() const { return Dyadic::pow2(-2 * depth); }
  ParameterSquare square(const ParameterSquare& root) const;
};

struct RetiredElement {
  Element element;
  ElementStatus status = ElementStatus::Active;
  long status_time = 0;
  std::optional<ExclusionWitness> witness;
};

// Def-2.3 check over the sampled hull: diam xi_{k,l}(A) <= dist/(log dist)^2
// when the image meets U, <= S otherwise, for every k <= n.
bool is_partition_element(const MarkedFamily& fam, const ParameterSquare& A, long n, int l,
                          const NeighborhoodConfig& cfg, double hull_inflation = 1.2);

class PartitionEngine {
public:
  PartitionEngine(MarkedFamily fam, EngineConfig cfg);

  void step();
  // run to the configured horizon, recording one ledger row per step
  void run();

  // exact dyadic quadrisection; children inherit timelines and return
  // history; throws DepthLimit at the configured maximum depth
  std::vector<Element> refine(const Element& e) const;

  long time() const { return clock_; }
  const MarkedFamily& family() const { return fam_; }
  const EngineConfig& config() const { return cfg_; }
  const Ledger& ledger() const { return ledger_; }
  const std::vector<LedgerRow>& ledger_rows() const { return rows_; }
  const std::vector<ReturnEvent>& events() const { return events_; }
  const std::vector<struct EventAux>& events_aux() const { return events_aux_; }
  const std::vector<EscapeRecord>& escape_records() const { return escapes_; }
  const std::vector<Element>& active_elements() const { return active_; }
  const std::vector<RetiredElement>& retired_elements() const { return retired_; }
  const GammaSup& gamma_sup() const { return gamma_; }
  long partition_rule_violations() const { return rule_violations_; }
  long band_violations() const { return band_violations_; }
  long bound_oversize_count() const { return bound_oversize_; }
  double parked_fraction() const;

  // exact re-sum over every element; true iff it matches the running ledger
  bool verify_conservation() const;

private:
  MarkedFamily fam_;
  EngineConfig cfg_;
  long clock_ = 0;
  Ledger ledger_;
  std::vector<LedgerRow> rows_;
  std::vector<Element> active_;
  std::vector<RetiredElement> retired_;
  std::vector<ReturnEvent> events_;
  std::vector<struct EventAux> events_aux_;
  std::vector<EscapeRecord> escapes_;
  GammaSup gamma_;
  long rule_violations_ = 0;
  long band_violations_ = 0;
  long bound_oversize_ = 0;

  Element make_root() const;
  void rebuild_samples(Element& e) const;  // replay orbits from time 0 to e.n
  void measure(const Element& e, int l, double& dist, double& diam) const;
  double advance_element(Element& e);  // returns the step's max log derivative
  void handle_free_return(Element e, int l, double dist, double diam,
                          std::vector<Element>& next);
  void bind_element(Element& e, int l, long nu, int k_hit, double r, ReturnKind kind, long L);
  bool exclude_if_ba_violated(Element& e, long nu);
  void retire(Element e, ElementStatus st, long t, std::optional<ExclusionWitness> w);
  void note_escape(Element& e, int l);
  void record_row();
};

// per essential return: observed deleted fraction against e^{-alpha nu}
struct DeletionCheckEntry {
  long nu = 0;
  double observed = 0.0;
  double bound = 0.0;
  bool violation = false;
};
std::vector<DeletionCheckEntry> deletion_fraction_check(const Ledger& ledger, double alpha);

struct EscapeTail {
  long n_events = 0;
  long n_tail = 0;
  double r0_ref = 0.0;      // median first-essential depth
  double h_r0 = 0.0;        // 8 dhat^2 / r0_ref
  double h_gamma = 0.0;     // 8 dhat^2 / gammaI (alternative reading)
  double threshold_t = 0.0; // 2 h r0 = 16 dhat^2
  double fitted_rate = 0.0;
  double predicted_rate_r0 = 0.0;
  double predicted_rate_gamma = 0.0;
  bool fit_ok = false;
  std::string note;
  std::vector<std::pair<long, long>> histogram;  // (t, count)
};

EscapeTail escape_tail(const std::vector<EscapeRecord>& records, int d_hat, double gammaI,
                       long min_events = 10, double threshold_override = -1.0);

enum class StartupOutcome { EssentialReturn, Escaped, HorizonSaturated };
const char* to_string(StartupOutcome o);

struct StartupResult {
  int l = 0;
  long N_l = 0;
  StartupOutcome outcome = StartupOutcome::HorizonSaturated;
  double r = 0.0;     // depth at an essential-return outcome
  double diam = 0.0;  // image diameter at the outcome time
};

// follow the whole square per critical index until it either makes its first
// essential return or reaches the large scale
std::vector<StartupResult> startup_scan(const MarkedFamily& fam, const EngineConfig& cfg,
                                        long startup_min = 1);

// engine-side context per recorded event (not serialized to events.csv)
struct EventAux {
  int d_i = 2;            // local degree of the hit critical point
  bool qualifies = false; // center sample in E(gammaI) and B at the return
};

struct BracketStats {
  long n_returns = 0;
  long n_qualifying = 0;
  long n_in_bracket = 0;
  double fraction = 0.0;
};

// Lemma-length bracket [d_i r/(2 Gamma) - 2, 2 d_i r/gamma + 2] over harvested
// free returns whose element center sample was in E(gammaI) and B at the time
BracketStats bracket_statistics(const std::vector<ReturnEvent>& events,
                                const std::vector<EventAux>& aux, double gamma, double Gamma);

}  // namespace parex
