#include "parex/probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parex {

namespace {

double guarded(double x, const char* where) { return finite_or_throw(x, where); }

// log |Df^n(z)| via spherical factors, guarded against non-finite values
double log_deriv_product(const RationalMap& f, SpherePoint z, long n) {
  double s = 0.0;
  for (long j = 0; j < n; ++j) {
    s += std::log(f.spherical_derivative(z));
    z = f.evaluate(z);
  }
  return guarded(s, "derivative product");
}

}  // namespace

DistortionPair pointwise_distortion_probe(const MarkedFamily& fam, cplx a, cplx z, cplx w, long n,
                                          double envelope) {
  const RationalMap f = fam.map_at(a);
  DistortionPair out;
  SpherePoint zc = SpherePoint::finite(z), wc = SpherePoint::finite(w);
  double log_dz = 0.0, log_dw = 0.0;
  for (long j = 0; j < n; ++j) {
    const double sep = chordal_distance(zc, wc);
    if (sep > envelope) {
      out.envelope_ok = false;
      fail(ErrorCode::EnvelopeViolated, "orbits separated beyond the closeness envelope");
    }
    const double dw = dist_to_jrit(fam, a, wc);
    require(dw > 0.0, ErrorCode::DomainError, "distortion sum hit a critical point");
    out.sum += sep / dw;
    log_dz += std::log(f.spherical_derivative(zc));
    log_dw += std::log(f.spherical_derivative(wc));
    zc = f.evaluate(zc);
    wc = f.evaluate(wc);
  }
  out.lhs = std::abs(std::exp(guarded(log_dz - log_dw, "distortion ratio")) - 1.0);
  guarded(out.sum, "distortion sum");
  return out;
}

namespace {

// one batch case, derived entirely from the seed cloud and a case seed so
// counterexamples replay bit-identically
DistortionPair run_distortion_case(const MarkedFamily& fam, cplx a,
                                   const std::vector<SpherePoint>& cloud, long n_max,
                                   double envelope, std::uint64_t case_seed) {
  Rng local(case_seed);
  const SpherePoint base = cloud[static_cast<std::size_t>(local.next_u64() % cloud.size())];
  const cplx z = base.to_cplx();
  require(std::isfinite(z.real()) && std::isfinite(z.imag()), ErrorCode::EnvelopeViolated,
          "seed at infinity");
  const double mag = std::exp(local.uniform(std::log(1e-12), std::log(1e-7)));
  const cplx w = z + std::polar(mag, local.uniform(0.0, 2.0 * M_PI));
  const long n = 2 + static_cast<long>(local.next_u64() % static_cast<std::uint64_t>(n_max - 1));
  return pointwise_distortion_probe(fam, a, z, w, n, envelope);
}

}  // namespace

DistortionPair distortion_replay(const MarkedFamily& fam, cplx a, long n_max,
                                 std::uint64_t master_seed, std::uint64_t case_seed,
                                 double envelope) {
  const RationalMap f = fam.map_at(a);
  const std::vector<SpherePoint> cloud = julia_seed_cloud(f, 512, master_seed ^ 0xabcdefULL);
  return run_distortion_case(fam, a, cloud, n_max, envelope, case_seed);
}

ProbeResult distortion_probe_batch(const MarkedFamily& fam, cplx a, long n_max, long samples,
                                   std::uint64_t seed, double envelope) {
  require(samples >= 4, ErrorCode::InsufficientData, "distortion batch needs >= 4 samples");
  const RationalMap f = fam.map_at(a);
  const std::vector<SpherePoint> cloud = julia_seed_cloud(f, 512, seed ^ 0xabcdefULL);

  Rng rng(seed);
  struct Case {
    std::uint64_t case_seed;
    DistortionPair pair;
  };
  std::vector<Case> cases;
  long attempts = 0;
  while (static_cast<long>(cases.size()) < samples && attempts < samples * 20) {
    ++attempts;
    const std::uint64_t cs = rng.fork();
    try {
      Case c{cs, run_distortion_case(fam, a, cloud, n_max, envelope, cs)};
      if (c.pair.sum > 0.0) cases.push_back(c);
    } catch (const Error&) {
      // envelope violations and critical hits are inapplicable draws, not failures
    }
  }
  require(static_cast<long>(cases.size()) >= 4, ErrorCode::InsufficientData,
          "too few applicable distortion pairs");

  // fit C on the first half with headroom, validate on the held-out half
  const std::size_t half = cases.size() / 2;
  double C = 0.0;
  for (std::size_t i = 0; i < half; ++i)
    C = std::max(C, std::log1p(cases[i].pair.lhs) / cases[i].pair.sum);
  C = std::max(C * 1.5, 1e-6);

  ProbeResult res;
  res.lemma_id = "distortion";
  res.samples = static_cast<long>(cases.size() - half);
  long passed = 0;
  double worst = 0.0;
  for (std::size_t i = half; i < cases.size(); ++i) {
    const double rhs = std::expm1(C * cases[i].pair.sum);
    const double ratio = cases[i].pair.lhs / std::max(rhs, 1e-300);
    if (cases[i].pair.lhs <= rhs) {
      ++passed;
    } else {
      res.counterexamples.push_back(cases[i].case_seed);
    }
    if (ratio > worst) worst = ratio;
  }
  res.worst_ratio = worst;
  res.bound = 1.0;
  res.pass_fraction = static_cast<double>(passed) / static_cast<double>(res.samples);
  res.details["fitted_C"] = C;
  res.details["calibration"] = static_cast<double>(half);
  return res;
}

std::vector<SpherePoint> julia_seed_cloud(const RationalMap& f, long count, std::uint64_t seed) {
  // find a repelling fixed point: roots of p(z) - z q(z)
  std::vector<cplx> fix = poly::subtract(f.p(), poly::multiply({cplx(0, 0), cplx(1, 0)}, f.q()));
  SpherePoint start;
  bool found = false;
  for (const auto& r : poly::roots(fix, 1e-10, 1e-7)) {
    const SpherePoint z = SpherePoint::finite(r.value);
    if (f.spherical_derivative(z) > 1.0 + 1e-9) {
      start = z;
      found = true;
      break;
    }
  }
  require(found, ErrorCode::InsufficientData, "no repelling fixed point found for seeding");

  // random backward branches fill out the Julia set
  Rng rng(seed);
  std::vector<SpherePoint> cloud;
  cloud.reserve(static_cast<std::size_t>(count));
  SpherePoint cur = start;
  long guard = 0;
  while (static_cast<long>(cloud.size()) < count && guard < count * 50) {
    ++guard;
    const cplx target = cur.to_cplx();
    if (!std::isfinite(target.real()) || !std::isfinite(target.imag())) {
      cur = start;
      continue;
    }
    std::vector<cplx> pre = poly::subtract(f.p(), poly::multiply({target}, f.q()));
    std::vector<poly::Root> roots;
    try {
      roots = poly::roots(pre, 1e-10, 1e-7);
    } catch (const Error&) {
      cur = start;
      continue;
    }
    std::vector<cplx> branch;
    for (const auto& r : roots) branch.push_back(r.value);
    if (branch.empty()) {
      cur = start;
      continue;
    }
    cur = SpherePoint::finite(branch[static_cast<std::size_t>(rng.next_u64() % branch.size())]);
    if (guard > 20) cloud.push_back(cur);  // discard the transient
  }
  require(static_cast<long>(cloud.size()) >= std::min<long>(count, 32), ErrorCode::InsufficientData,
          "backward iteration produced too few seeds");
  return cloud;
}

ManeEstimate mane_probe(const MarkedFamily& fam, cplx a, const NeighborhoodConfig& cfg,
                        long horizon, long n_seeds, std::uint64_t seed, double eps0,
                        bool use_marked_u) {
  require(horizon >= 2, ErrorCode::InsufficientData, "mane probe needs horizon >= 2");
  const RationalMap f = fam.map_at(a);
  const std::vector<SpherePoint> cloud = julia_seed_cloud(f, std::max<long>(n_seeds, 64), seed);

  auto in_u = [&](const SpherePoint& z) {
    if (!use_marked_u) return false;
    return dist_to_jrit(fam, a, z) < cfg.delta;
  };
  auto near_julia = [&](const SpherePoint& z) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : cloud) d = std::min(d, chordal_distance(z, c));
    return d <= eps0;
  };

  // infimum envelopes of log D_n over three segment families
  std::map<long, double> inf_mane, inf_outside, inf_hit;
  ManeEstimate est;
  est.seeds_used = std::min<long>(n_seeds, static_cast<long>(cloud.size()));
  for (long si = 0; si < est.seeds_used; ++si) {
    SpherePoint z = cloud[static_cast<std::size_t>(si)];
    if (in_u(z)) continue;
    double log_d = 0.0;
    bool inside_neighborhood = near_julia(z);
    SpherePoint cur = z;
    for (long n = 1; n <= horizon; ++n) {
      log_d += std::log(f.spherical_derivative(cur));
      cur = f.evaluate(cur);
      if (!std::isfinite(log_d)) break;
      const bool hit = in_u(cur);
      if (hit) {
        // z .. f^{n-1}(z) avoided U and f^n(z) lands in it
        auto it = inf_hit.find(n);
        if (it == inf_hit.end() || log_d < it->second) inf_hit[n] = log_d;
        break;
      }
      auto it = inf_mane.find(n);
      if (it == inf_mane.end() || log_d < it->second) inf_mane[n] = log_d;
      if (inside_neighborhood) {
        inside_neighborhood = near_julia(cur);
        if (inside_neighborhood) {
          auto ot = inf_outside.find(n);
          if (ot == inf_outside.end() || log_d < ot->second) inf_outside[n] = log_d;
        }
      }
    }
  }

  auto fit_envelope = [](const std::map<long, double>& env, double& C, double& rate) -> long {
    if (env.size() < 3) return static_cast<long>(env.size());
    std::vector<double> xs, ys;
    for (const auto& [n, v] : env) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(v);
    }
    const LinearFit fit = fit_line(xs, ys);
    rate = fit.slope;
    C = std::exp(fit.intercept);
    return static_cast<long>(env.size());
  };

  double rate = 0.0, c = 0.0;
  est.points_mane = fit_envelope(inf_mane, c, rate);
  require(est.points_mane >= 3, ErrorCode::InsufficientData, "too few Mane segments");
  est.C_M = c;
  est.lambda_M = std::exp(rate);
  est.points_outside = fit_envelope(inf_outside, est.C_delta, est.gamma_outside);
  est.points_hit = fit_envelope(inf_hit, est.C_hit, est.gamma_H);
  return est;
}

ProbeResult weak_param_probe(const MarkedFamily& fam, cplx a, cplx b, int l, long n0, long n1,
                             const NeighborhoodConfig& cfg, const ExponentLadder& ladder,
                             const WeakParamOptions& opt) {
  require(n0 >= 2 && n1 >= n0, ErrorCode::DomainError, "weak parameter probe needs 2 <= n0 <= n1");
  const double gamma1 = opt.gamma1 > 0.0 ? opt.gamma1 : 1.5 * ladder.gammaL;
  const RationalMap fa = fam.map_at(a);

  ProbeResult res;
  res.lemma_id = "weak-param";
  res.bound = opt.Q;

  // plane quantities throughout: euclidean separations against euclidean
  // derivative products, both in the finite chart
  const auto orb_a = xi_orbit(fam, a, l, n1);
  const auto orb_b = xi_orbit(fam, b, l, n1);
  std::vector<cplx> za(orb_a.size()), zb(orb_b.size());
  for (std::size_t i = 0; i < orb_a.size(); ++i) {
    za[i] = orb_a[i].to_cplx();
    zb[i] = orb_b[i].to_cplx();
    require(std::isfinite(std::abs(za[i])) && std::isfinite(std::abs(zb[i])),
            ErrorCode::NumericFailure, "orbit left the finite chart in the weak-parameter probe");
  }
  std::vector<double> log_d(static_cast<std::size_t>(n1) + 1, 0.0);  // log |Df^k(v_l(a))|
  for (long k = 1; k <= n1 - 1; ++k)
    log_d[static_cast<std::size_t>(k)] =
        log_d[static_cast<std::size_t>(k) - 1] +
        std::log(std::abs(fa.euclidean_derivative(za[static_cast<std::size_t>(k)])));

  // hypothesis i): growth at rate gamma1 up to the window end
  for (long n = 1; n <= n1 - 1; ++n) {
    if (log_d[static_cast<std::size_t>(n)] <
        std::log(opt.C1) + gamma1 * static_cast<double>(n))
      fail(ErrorCode::HypothesesFailed,
           "hypothesis i) failed at n = " + std::to_string(n) + ": derivative growth too slow");
  }
  // hypothesis ii): separation caps
  for (long n = 1; n <= n1; ++n) {
    const double sep = std::abs(za[static_cast<std::size_t>(n)] - zb[static_cast<std::size_t>(n)]);
    const double da = dist_to_jrit(fam, a, orb_a[static_cast<std::size_t>(n)]);
    const double db = dist_to_jrit(fam, b, orb_b[static_cast<std::size_t>(n)]);
    const bool in_u = da < cfg.delta || db < cfg.delta;
    if (!in_u) {
      if (sep > cfg.S)
        fail(ErrorCode::HypothesesFailed,
             "hypothesis ii) failed at n = " + std::to_string(n) + ": separation beyond S");
    } else {
      const double dmin = std::min(da, db);
      if (sep > partition_bound(dmin, cfg))
        fail(ErrorCode::HypothesesFailed,
             "hypothesis ii) failed at n = " + std::to_string(n) + ": separation beyond the rule");
    }
  }

  const double dab = std::abs(a - b);
  double q_cert = 1.0;
  long checked = 0;
  // endpoint stretching: |xi_n(a) - xi_n(b)| >= Q^{-(n-1)} |Df^{n-1}(v)| |a-b|
  for (long n = n0; n <= n1; ++n) {
    const double sep = std::abs(za[static_cast<std::size_t>(n)] - zb[static_cast<std::size_t>(n)]);
    if (sep <= 0.0 || dab == 0.0) continue;
    const double need =
        (log_d[static_cast<std::size_t>(n - 1)] + std::log(dab) - std::log(sep)) /
        static_cast<double>(n - 1);
    q_cert = std::max(q_cert, std::exp(std::max(0.0, need)));
    ++checked;
  }
  // interior comparability: |xi_n(a)-xi_n(b)| ~ |Df^j(xi_{n-j}(a))| |xi_{n-j}(a)-xi_{n-j}(b)|
  for (long n = n0; n <= n1; ++n) {
    const double sep_n =
        std::abs(za[static_cast<std::size_t>(n)] - zb[static_cast<std::size_t>(n)]);
    for (long j = 1; j <= n - n0; ++j) {
      const double sep_nj = std::abs(za[static_cast<std::size_t>(n - j)] -
                                     zb[static_cast<std::size_t>(n - j)]);
      if (sep_n <= 0.0 || sep_nj <= 0.0) continue;
      const double log_dj =
          log_d[static_cast<std::size_t>(n - 1)] - log_d[static_cast<std::size_t>(n - j - 1)];
      const double imbalance = std::abs(std::log(sep_n) - (log_dj + std::log(sep_nj)));
      q_cert = std::max(q_cert, std::exp(imbalance / static_cast<double>(j)));
      ++checked;
    }
  }
  res.samples = checked;
  res.worst_ratio = q_cert;
  res.pass_fraction = q_cert <= opt.Q ? 1.0 : 0.0;
  res.details["q_certificate"] = q_cert;
  res.details["gamma1"] = gamma1;
  return res;
}

namespace {

// complex log of Df^n(v_l(a)) as (log magnitude, accumulated phase), euclidean
// derivatives in the finite chart
std::pair<double, double> log_complex_deriv(const MarkedFamily& fam, cplx a, int l, long nu,
                                            long n) {
  const RationalMap f = fam.map_at(a);
  SpherePoint z = xi(fam, a, l, nu);
  double logm = 0.0, phase = 0.0;
  for (long j = 0; j < n; ++j) {
    const cplx zf = z.to_cplx();
    require(std::isfinite(zf.real()) && std::isfinite(zf.imag()), ErrorCode::NumericFailure,
            "orbit left the finite chart in a derivative-ratio probe");
    const cplx d = f.euclidean_derivative(zf);
    const double m = std::abs(d);
    require(m > 0.0, ErrorCode::DerivativeVanished, "derivative vanished in a ratio probe");
    logm += std::log(m);
    phase += std::arg(d);
    z = f.evaluate(z);
  }
  return {guarded(logm, "ratio log magnitude"), guarded(phase, "ratio phase")};
}

double complex_ratio_minus_one(std::pair<double, double> num, std::pair<double, double> den) {
  const double x = num.first - den.first;
  const double dphi = num.second - den.second;
  const double ex = std::exp(x);
  return std::hypot(ex * std::cos(dphi) - 1.0, ex * std::sin(dphi));
}

void check_membership(const MarkedFamily& fam, cplx a, int l, long nu,
                      const ExponentLadder& ladder, const RecurrenceParams& params, double C0) {
  if (!membership_E(fam, a, l, nu, ladder.gammaI, ladder, C0))
    fail(ErrorCode::PreconditionFailed, "parameter left E(gammaI) before the return");
  if (!membership_B(fam, a, l, nu, params, ladder))
    fail(ErrorCode::PreconditionFailed, "parameter left B before the return");
}

}  // namespace

ProbeResult mdl_probe(const MarkedFamily& fam, const ParameterSquare& A, int l, long nu,
                      long nu_prime, const NeighborhoodConfig& cfg, const ExponentLadder& ladder,
                      const RecurrenceParams& params, double C0, double eps_prime) {
  require(nu >= 1 && nu_prime >= nu, ErrorCode::DomainError, "mdl probe needs 1 <= nu <= nu'");
  const auto samples = A.samples();
  for (const auto& s : samples) check_membership(fam, s, l, nu, ladder, params, C0);

  // partition-rule window check over the sample hull
  long n_end = nu_prime;
  for (long n = nu; n <= nu_prime; ++n) {
    double dist = std::numeric_limits<double>::infinity(), diam = 0.0;
    std::vector<SpherePoint> pts;
    for (const auto& s : samples) {
      const SpherePoint z = xi(fam, s, l, n);
      dist = std::min(dist, dist_to_jrit(fam, s, z));
      pts.push_back(z);
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j)
        diam = std::max(diam, chordal_distance(pts[i], pts[j]));
    if (diam > partition_bound(dist, cfg)) {
      n_end = n - 1;
      break;
    }
  }
  require(n_end >= nu, ErrorCode::PreconditionFailed,
          "square is not a partition element on the probe window");

  ProbeResult res;
  res.lemma_id = "mdl";
  res.bound = eps_prime;
  double worst = 0.0;
  long count = 0;
  for (long n = nu; n <= n_end; ++n) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto da = log_complex_deriv(fam, samples[i], l, 1, n);  // Df^n(v_l(a))
      for (std::size_t j = 0; j < samples.size(); ++j) {
        if (i == j) continue;
        const auto db = log_complex_deriv(fam, samples[j], l, 1, n);
        worst = std::max(worst, complex_ratio_minus_one(da, db));
        ++count;
      }
    }
  }
  res.samples = count;
  res.worst_ratio = worst;
  res.pass_fraction = worst <= eps_prime ? 1.0 : 0.0;
  res.details["window_end"] = static_cast<double>(n_end);
  return res;
}

ProbeResult repulsion_probe(const MarkedFamily& fam, const ParameterSquare& A, int l, long nu,
                            long nu_prime, const ExponentLadder& ladder,
                            const RecurrenceParams& params, double C0) {
  require(nu_prime > nu, ErrorCode::DomainError, "repulsion probe needs nu' > nu");
  const auto samples = A.samples();
  for (const auto& s : samples) check_membership(fam, s, l, nu, ladder, params, C0);

  ProbeResult res;
  res.lemma_id = "repulsion";
  res.bound = 2.0;
  double worst = std::numeric_limits<double>::infinity();
  long count = 0, passed = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const double before = chordal_distance(xi(fam, samples[i], l, nu), xi(fam, samples[j], l, nu));
      const double after = chordal_distance(xi(fam, samples[i], l, nu_prime),
                                            xi(fam, samples[j], l, nu_prime));
      ++count;
      if (before <= 0.0) {
        ++passed;  // coincident parameters: 0 >= 2*0 holds vacuously
        continue;
      }
      const double factor = after / before;
      worst = std::min(worst, factor);
      if (factor >= 2.0) ++passed;
    }
  }
  require(count > 0, ErrorCode::InsufficientData, "no sample pairs");
  res.samples = count;
  res.worst_ratio = worst;
  res.pass_fraction = static_cast<double>(passed) / static_cast<double>(count);
  return res;
}

ProbeResult growth_after_return_probe(const MarkedFamily& fam, cplx a, int l, long nu,
                                      long nu_prime, const ExponentLadder& ladder,
                                      const RecurrenceParams& params, double C0, double gamma) {
  require(nu_prime > nu, ErrorCode::DomainError, "growth probe needs nu' > nu");
  check_membership(fam, a, l, nu, ladder, params, C0);

  const RationalMap f = fam.map_at(a);
  const double gamma1 = 0.9 * std::min(gamma, ladder.gammaH);
  ProbeResult res;
  res.lemma_id = "growth";
  res.bound = gamma1;

  SpherePoint z = xi(fam, a, l, 1);  // v_l(a)
  double log_d = 0.0;
  double worst = std::numeric_limits<double>::infinity();
  for (long n = 1; n <= nu_prime - 1; ++n) {
    log_d += std::log(f.spherical_derivative(z));
    z = f.evaluate(z);
    worst = std::min(worst, log_d / static_cast<double>(n));
  }
  res.samples = nu_prime - 1;
  res.worst_ratio = worst;
  res.pass_fraction = worst >= gamma1 ? 1.0 : 0.0;
  res.details["gamma1"] = gamma1;
  return res;
}

ProbeResult bound_distortion_probe(const MarkedFamily& fam, cplx a, int l, long nu, int i,
                                   const NeighborhoodConfig& cfg, const ExponentLadder& ladder,
                                   const RecurrenceParams& params, double C0, double eps_prime) {
  check_membership(fam, a, l, nu, ladder, params, C0);
  const long p = bound_period_point(fam, a, l, nu, i, params, cfg, 100000);

  ProbeResult res;
  res.lemma_id = "bound-distortion";
  res.bound = eps_prime;
  res.details["p"] = static_cast<double>(p);
  if (p == 0) {
    res.worst_ratio = 0.0;
    res.pass_fraction = 1.0;
    return res;
  }
  double worst = 0.0;
  for (long j = 1; j <= p; ++j) {
    const auto num = log_complex_deriv(fam, a, l, nu + 1, j);  // Df^j(xi_{nu+1,l})
    const auto den = log_complex_deriv(fam, a, i, 1, j);       // Df^j(xi_{1,i})
    worst = std::max(worst, complex_ratio_minus_one(num, den));
  }
  res.samples = p;
  res.worst_ratio = worst;
  res.pass_fraction = worst <= eps_prime ? 1.0 : 0.0;
  return res;
}

ProbeResult second_ce_probe(const RationalMap& f, const SpherePoint& c, int n_max, int branches,
                            std::uint64_t seed) {
  require(n_max >= 1, ErrorCode::DomainError, "second CE probe needs depth >= 1");
  require(branches >= 1, ErrorCode::InsufficientData, "second CE probe needs branches >= 1");

  ProbeResult res;
  res.lemma_id = "second-ce";
  Rng rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  long built = 0;
  for (int b = 0; b < branches; ++b) {
    const std::uint64_t bs = rng.fork();
    Rng local(bs);
    SpherePoint w = c;
    bool ok = true;
    for (int depth = 1; depth <= n_max; ++depth) {
      const cplx target = w.to_cplx();
      if (!std::isfinite(target.real()) || !std::isfinite(target.imag())) {
        ok = false;
        break;
      }
      std::vector<cplx> pre = poly::subtract(f.p(), poly::multiply({target}, f.q()));
      std::vector<poly::Root> roots;
      try {
        roots = poly::roots(pre, 1e-10, 1e-7);
      } catch (const Error&) {
        ok = false;
        break;
      }
      if (roots.empty()) {
        ok = false;
        break;
      }
      w = SpherePoint::finite(roots[static_cast<std::size_t>(local.next_u64() % roots.size())].value);
    }
    if (!ok) continue;
    ++built;
    // the forward product along the branch is |Df^n(w)| for w in f^{-n}(c)
    const double ly = log_deriv_product(f, w, n_max) / static_cast<double>(n_max);
    if (ly < worst) {
      worst = ly;
      res.counterexamples.assign(1, bs);
    }
  }
  require(built > 0, ErrorCode::BranchExhaustion, "no preimage branch could be completed");
  res.samples = built;
  res.worst_ratio = worst;
  res.bound = 0.0;
  res.pass_fraction = worst > 0.0 ? 1.0 : 0.0;
  return res;
}

}  // namespace parex
