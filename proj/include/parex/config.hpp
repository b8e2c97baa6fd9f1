#pragma once

#include <string>

#include "parex/engine.hpp"
#include "parex/hyperbolic.hpp"

namespace parex {

// Flat key-value run configuration with sections; decimal numbers only.
// One config = one run = one output directory.
struct RunConfig {
  // [family]
  std::string family_id = "quadratic";  // quadratic | unicritical:<d> | custom:<file>
  cplx center{-2.0, 0.0};
  double epsilon = 1e-3;

  // [neighborhood]
  double Delta = 6.0;
  double DeltaPrime = 4.0;
  double epsilon1 = 0.5;

  // [conditions]
  double C0 = 0.5;
  double gamma0 = 1.3;
  double gammaH = 0.45;
  double tau = 0.5;
  double alpha = 2e-5;
  double K = 1e-6;
  double iota = 0.1;
  double eps_prime = 0.1;

  // [horizons]
  long orbit_horizon = 1000;
  long engine_horizon = 500;
  long classify_horizon = 2000;
  long bound_horizon = 4000;
  long flag_horizon = 400;
  long startup_min = 1;

  // [sampling]
  long probe_samples = 1000;
  long samples_per_square = 1000;
  std::vector<double> radii = {0.1, 0.01, 0.001};
  int max_depth = 40;
  int max_period = 64;
  int gamma_grid = 181;
  double gamma_margin = 0.05;
  double hull_inflation = 1.2;
  std::uint64_t seed = 20240901;
  int workers = 1;
  std::string exclusion_mode = "any";  // any | all
  double park_fraction_max = 0.25;
  bool probes_enabled = false;
  long probe_n0 = 10;
  long probe_n1 = 15;
  double probe_pair_offset = 1e-12;

  // [output]
  std::string out_dir = "out";

  static RunConfig preset(const std::string& name);
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  // dotted section.key, e.g. "conditions.alpha"
  void set(const std::string& key, const std::string& value);

  void validate() const;
  std::string canonical() const;
  std::string fingerprint() const;

  MarkedFamily build_family(bool apply_flags = true) const;
  ExponentLadder make_ladder() const;
  NeighborhoodConfig make_neighborhood() const;
  RecurrenceParams make_recurrence() const;
  CEParams make_ce_params() const;
  ClassifyOptions make_classify_options() const;
  EngineConfig make_engine_config() const;
};

}  // namespace parex
