#include "parex/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace parex {

namespace {

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    require(used == v.size(), ErrorCode::ConfigError, "trailing characters in value for " + key);
    return x;
  } catch (const Error&) {
    throw;
  } catch (...) {
    fail(ErrorCode::ConfigError, "cannot parse number for " + key + ": '" + v + "'");
  }
}

long parse_long(const std::string& v, const std::string& key) {
  const double x = parse_double(v, key);
  require(x == std::floor(x), ErrorCode::ConfigError, key + " must be an integer");
  return static_cast<long>(x);
}

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::istringstream in(v);
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, key));
  require(!out.empty(), ErrorCode::ConfigError, key + " needs at least one value");
  return out;
}

std::vector<std::vector<cplx>> parse_coeff_rows(const std::map<std::string, std::string>& kv,
                                                char prefix, int degree,
                                                const std::string& where) {
  std::vector<std::vector<cplx>> rows(static_cast<std::size_t>(degree) + 1,
                                      std::vector<cplx>{cplx(0, 0)});
  for (int i = 0; i <= degree; ++i) {
    const std::string key = std::string(1, prefix) + std::to_string(i);
    auto it = kv.find(key);
    if (it == kv.end()) continue;
    const std::vector<double> vals = parse_list(it->second, where + "." + key);
    require(vals.size() % 2 == 0, ErrorCode::ConfigError,
            where + "." + key + " needs re/im pairs");
    std::vector<cplx> poly_a;
    for (std::size_t j = 0; j + 1 < vals.size(); j += 2) poly_a.emplace_back(vals[j], vals[j + 1]);
    rows[static_cast<std::size_t>(i)] = std::move(poly_a);
  }
  return rows;
}

MarkedFamily load_custom_family(const std::string& path, cplx center, double side) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ConfigError, "cannot open custom family file: " + path);
  std::map<std::string, std::string> kv;
  std::vector<std::string> track_lines;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trimmed(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    const std::size_t eq = t.find('=');
    require(eq != std::string::npos, ErrorCode::ConfigError,
            "custom family line missing '=': " + t);
    const std::string key = trimmed(t.substr(0, eq));
    const std::string val = trimmed(t.substr(eq + 1));
    if (key == "track")
      track_lines.push_back(val);
    else
      kv[key] = val;
  }
  auto dit = kv.find("degree");
  require(dit != kv.end(), ErrorCode::ConfigError, "custom family file needs degree");
  const int degree = static_cast<int>(parse_long(dit->second, "degree"));
  require(degree >= 2, ErrorCode::ConfigError, "custom family degree must be >= 2");

  auto p = parse_coeff_rows(kv, 'p', degree, path);
  auto q = parse_coeff_rows(kv, 'q', degree, path);

  std::vector<CriticalTrack> tracks;
  for (const auto& tl : track_lines) {
    std::istringstream ts(tl);
    int dl = 0;
    std::string flag;
    ts >> dl >> flag;
    require(dl >= 2 && (flag == "julia" || flag == "fatou"), ErrorCode::ConfigError,
            "track line needs: <d_l> julia|fatou <re im ...>: " + tl);
    std::vector<double> vals;
    double x;
    while (ts >> x) vals.push_back(x);
    require(!vals.empty() && vals.size() % 2 == 0, ErrorCode::ConfigError,
            "track coefficients need re/im pairs: " + tl);
    CriticalTrack tr;
    tr.local_degree = dl;
    tr.in_julia = flag == "julia";
    for (std::size_t j = 0; j + 1 < vals.size(); j += 2) tr.coeffs.emplace_back(vals[j], vals[j + 1]);
    tracks.push_back(std::move(tr));
  }
  require(!tracks.empty(), ErrorCode::ConfigError, "custom family file needs at least one track");
  MarkedFamily fam(std::move(p), std::move(q), std::move(tracks), {center, side},
                   "custom:" + path);
  fam.validate();
  return fam;
}

}  // namespace

RunConfig RunConfig::preset(const std::string& name) {
  RunConfig c;
  if (name == "chebyshev" || name == "smoke") {
    // quadratic family centered on the Chebyshev parameter; gammaH from the
    // outside-expansion probe on this family
    c.family_id = "quadratic";
    c.center = {-2.0, 0.0};
    c.epsilon = 1e-3;
    c.Delta = 6.0;
    c.DeltaPrime = 4.0;
    c.gamma0 = 1.3;
    c.gammaH = 0.68;
    c.tau = 0.5;
    c.alpha = 2e-5;
    c.K = 1e-6;
    c.engine_horizon = 500;
    return c;
  }
  if (name == "startup-mdl") {
    c = preset("chebyshev");
    c.epsilon = 1e-6;
    return c;
  }
  if (name == "recurrent") {
    // real parameter beside a period-7 superstable root: the critical orbit
    // slips within e^-6 of the critical point at n = 7 and unwinds slowly,
    // so elements make chains of deep returns before escaping. The small C0
    // reflects the derivative dips at each quasi-periodic pass.
    c.family_id = "quadratic";
    c.center = {-1.8322854, 0.0};
    c.epsilon = 3e-6;
    c.Delta = 5.0;
    c.DeltaPrime = 3.5;
    c.epsilon1 = 0.5;
    c.C0 = 1e-3;
    c.gamma0 = 0.45;
    c.gammaH = 0.45;
    c.tau = 0.8;
    c.alpha = 1e-5;
    c.K = 3e-4;
    c.engine_horizon = 200;
    c.bound_horizon = 4000;
    c.max_depth = 10;
    return c;
  }
  if (name == "misiurewicz-tip") {
    c = preset("chebyshev");
    c.radii = {0.1, 0.01, 0.001};
    c.samples_per_square = 1000;
    c.classify_horizon = 2000;
    return c;
  }
  if (name == "basilica") {
    c.family_id = "quadratic";
    c.center = {-1.0, 0.0};
    c.epsilon = 1e-3;
    return c;
  }
  if (name.rfind("quadratic:a=", 0) == 0) {
    c = preset("chebyshev");
    const std::string v = name.substr(std::string("quadratic:a=").size());
    const std::size_t comma = v.find(',');
    const double re = parse_double(comma == std::string::npos ? v : v.substr(0, comma), name);
    const double im = comma == std::string::npos ? 0.0 : parse_double(v.substr(comma + 1), name);
    c.center = {re, im};
    return c;
  }
  fail(ErrorCode::ConfigError, "unknown preset: " + name);
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line, section;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trimmed(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    if (t.front() == '[') {
      require(t.back() == ']', ErrorCode::ConfigError,
              "line " + std::to_string(lineno) + ": unterminated section header");
      section = t.substr(1, t.size() - 2);
      continue;
    }
    const std::size_t eq = t.find('=');
    require(eq != std::string::npos, ErrorCode::ConfigError,
            "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trimmed(t.substr(0, eq));
    const std::string val = trimmed(t.substr(eq + 1));
    try {
      if (key == "preset" && section.empty()) {
        c = preset(val);
      } else {
        c.set(section.empty() ? key : section + "." + key, val);
      }
    } catch (const Error& e) {
      fail(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ConfigError, "cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "family.id") family_id = value;
  else if (key == "family.center_re") center = {parse_double(value, key), center.imag()};
  else if (key == "family.center_im") center = {center.real(), parse_double(value, key)};
  else if (key == "family.epsilon") epsilon = parse_double(value, key);
  else if (key == "neighborhood.Delta") Delta = parse_double(value, key);
  else if (key == "neighborhood.DeltaPrime") DeltaPrime = parse_double(value, key);
  else if (key == "neighborhood.epsilon1") epsilon1 = parse_double(value, key);
  else if (key == "conditions.C0") C0 = parse_double(value, key);
  else if (key == "conditions.gamma0") gamma0 = parse_double(value, key);
  else if (key == "conditions.gammaH") gammaH = parse_double(value, key);
  else if (key == "conditions.tau") tau = parse_double(value, key);
  else if (key == "conditions.alpha") alpha = parse_double(value, key);
  else if (key == "conditions.K") K = parse_double(value, key);
  else if (key == "conditions.iota") iota = parse_double(value, key);
  else if (key == "conditions.eps_prime") eps_prime = parse_double(value, key);
  else if (key == "horizons.orbit") orbit_horizon = parse_long(value, key);
  else if (key == "horizons.engine") engine_horizon = parse_long(value, key);
  else if (key == "horizons.classify") classify_horizon = parse_long(value, key);
  else if (key == "horizons.bound") bound_horizon = parse_long(value, key);
  else if (key == "horizons.flag") flag_horizon = parse_long(value, key);
  else if (key == "horizons.startup_min") startup_min = parse_long(value, key);
  else if (key == "sampling.probe_samples") probe_samples = parse_long(value, key);
  else if (key == "sampling.samples_per_square") samples_per_square = parse_long(value, key);
  else if (key == "sampling.radii") radii = parse_list(value, key);
  else if (key == "sampling.max_depth") max_depth = static_cast<int>(parse_long(value, key));
  else if (key == "sampling.max_period") max_period = static_cast<int>(parse_long(value, key));
  else if (key == "sampling.gamma_grid") gamma_grid = static_cast<int>(parse_long(value, key));
  else if (key == "sampling.gamma_margin") gamma_margin = parse_double(value, key);
  else if (key == "sampling.hull_inflation") hull_inflation = parse_double(value, key);
  else if (key == "sampling.seed") seed = static_cast<std::uint64_t>(parse_long(value, key));
  else if (key == "sampling.workers") workers = static_cast<int>(parse_long(value, key));
  else if (key == "sampling.exclusion_mode") {
    require(value == "any" || value == "all", ErrorCode::ConfigError,
            "exclusion_mode must be any or all");
    exclusion_mode = value;
  } else if (key == "sampling.park_fraction_max") park_fraction_max = parse_double(value, key);
  else if (key == "sampling.probes_enabled") probes_enabled = value == "1" || value == "true";
  else if (key == "sampling.probe_n0") probe_n0 = parse_long(value, key);
  else if (key == "sampling.probe_n1") probe_n1 = parse_long(value, key);
  else if (key == "sampling.probe_pair_offset") probe_pair_offset = parse_double(value, key);
  else if (key == "output.dir") out_dir = value;
  else fail(ErrorCode::ConfigError, "unknown config key: " + key);
}

void RunConfig::validate() const {
  require(epsilon > 0, ErrorCode::ConfigError, "epsilon must be positive");
  require(DeltaPrime > 0 && DeltaPrime < Delta, ErrorCode::ConfigError,
          "need 0 < DeltaPrime < Delta");
  require(epsilon1 > 0 && epsilon1 < 1, ErrorCode::ConfigError, "epsilon1 must lie in (0,1)");
  require(K > 0, ErrorCode::ConfigError, "K must be positive");
  require(iota > 0, ErrorCode::ConfigError, "iota must be positive");
  require(workers >= 1, ErrorCode::ConfigError, "workers must be >= 1");
  require(max_depth >= 1 && max_depth <= 60, ErrorCode::ConfigError,
          "max_depth must lie in [1,60]");
  const MarkedFamily fam = build_family(false);
  const int d_hat = fam.max_local_degree();
  const ExponentLadder lad = ExponentLadder::build(gamma0, gammaH, tau, alpha, d_hat);
  require(32.0 * d_hat * d_hat * alpha / lad.gammaI <= iota / 2.0, ErrorCode::ConfigError,
          "alpha too large: 32 d_hat^2 alpha / gammaI must be <= iota/2");
}

std::string RunConfig::canonical() const {
  std::ostringstream o;
  o << "conditions.C0=" << fmt_double(C0) << "\n"
    << "conditions.K=" << fmt_double(K) << "\n"
    << "conditions.alpha=" << fmt_double(alpha) << "\n"
    << "conditions.eps_prime=" << fmt_double(eps_prime) << "\n"
    << "conditions.gamma0=" << fmt_double(gamma0) << "\n"
    << "conditions.gammaH=" << fmt_double(gammaH) << "\n"
    << "conditions.iota=" << fmt_double(iota) << "\n"
    << "conditions.tau=" << fmt_double(tau) << "\n"
    << "family.center_im=" << fmt_double(center.imag()) << "\n"
    << "family.center_re=" << fmt_double(center.real()) << "\n"
    << "family.epsilon=" << fmt_double(epsilon) << "\n"
    << "family.id=" << family_id << "\n"
    << "horizons.bound=" << bound_horizon << "\n"
    << "horizons.classify=" << classify_horizon << "\n"
    << "horizons.engine=" << engine_horizon << "\n"
    << "horizons.flag=" << flag_horizon << "\n"
    << "horizons.orbit=" << orbit_horizon << "\n"
    << "horizons.startup_min=" << startup_min << "\n"
    << "neighborhood.Delta=" << fmt_double(Delta) << "\n"
    << "neighborhood.DeltaPrime=" << fmt_double(DeltaPrime) << "\n"
    << "neighborhood.epsilon1=" << fmt_double(epsilon1) << "\n"
    << "sampling.exclusion_mode=" << exclusion_mode << "\n"
    << "sampling.gamma_grid=" << gamma_grid << "\n"
    << "sampling.gamma_margin=" << fmt_double(gamma_margin) << "\n"
    << "sampling.hull_inflation=" << fmt_double(hull_inflation) << "\n"
    << "sampling.max_depth=" << max_depth << "\n"
    << "sampling.max_period=" << max_period << "\n"
    << "sampling.park_fraction_max=" << fmt_double(park_fraction_max) << "\n"
    << "sampling.probe_n0=" << probe_n0 << "\n"
    << "sampling.probe_n1=" << probe_n1 << "\n"
    << "sampling.probe_pair_offset=" << fmt_double(probe_pair_offset) << "\n"
    << "sampling.probe_samples=" << probe_samples << "\n"
    << "sampling.probes_enabled=" << (probes_enabled ? 1 : 0) << "\n";
  o << "sampling.radii=";
  for (std::size_t i = 0; i < radii.size(); ++i) o << (i ? " " : "") << fmt_double(radii[i]);
  o << "\n"
    << "sampling.samples_per_square=" << samples_per_square << "\n"
    << "sampling.seed=" << seed << "\n";
  return o.str();
}

std::string RunConfig::fingerprint() const { return hex64(fnv1a(canonical())); }

MarkedFamily RunConfig::build_family(bool apply_flags) const {
  MarkedFamily fam = [&]() {
    if (family_id == "quadratic") return MarkedFamily::quadratic(center, epsilon);
    if (family_id.rfind("unicritical:", 0) == 0) {
      const int d = static_cast<int>(parse_long(family_id.substr(12), "family.id"));
      return MarkedFamily::unicritical(d, center, epsilon);
    }
    if (family_id.rfind("custom:", 0) == 0)
      return load_custom_family(family_id.substr(7), center, epsilon);
    fail(ErrorCode::ConfigError, "unknown family id: " + family_id);
  }();
  if (apply_flags) apply_julia_flags(fam, flag_horizon, make_classify_options());
  return fam;
}

ExponentLadder RunConfig::make_ladder() const {
  const MarkedFamily fam = build_family(false);
  return ExponentLadder::build(gamma0, gammaH, tau, alpha, fam.max_local_degree());
}

NeighborhoodConfig RunConfig::make_neighborhood() const {
  return NeighborhoodConfig::build(Delta, DeltaPrime, epsilon1);
}

RecurrenceParams RunConfig::make_recurrence() const { return {alpha, K}; }

CEParams RunConfig::make_ce_params() const { return {C0, gamma0}; }

ClassifyOptions RunConfig::make_classify_options() const {
  ClassifyOptions o;
  o.max_period = max_period;
  return o;
}

EngineConfig RunConfig::make_engine_config() const {
  EngineConfig e;
  e.neighborhood = make_neighborhood();
  e.ladder = make_ladder();
  e.recurrence = make_recurrence();
  e.C0 = C0;
  e.horizon = engine_horizon;
  e.bound_horizon = bound_horizon;
  e.max_depth = max_depth;
  e.exclude_any_sample = exclusion_mode == "any";
  e.hull_inflation = hull_inflation;
  e.workers = workers;
  e.gamma_grid = gamma_grid;
  e.gamma_margin = gamma_margin;
  return e;
}

}  // namespace parex
