#include "parex/family.hpp"

#include <algorithm>
#include <cmath>

namespace parex {

std::vector<cplx> ParameterSquare::samples() const {
  const double h = side / 2.0;
  return {center + cplx(-h, -h), center + cplx(h, -h), center + cplx(-h, h),
          center + cplx(h, h), center};
}

bool ParameterSquare::contains(cplx a) const {
  const double h = side / 2.0;
  return std::abs(a.real() - center.real()) <= h * (1.0 + 1e-12) &&
         std::abs(a.imag() - center.imag()) <= h * (1.0 + 1e-12);
}

MarkedFamily::MarkedFamily(std::vector<std::vector<cplx>> p_in_a,
                           std::vector<std::vector<cplx>> q_in_a,
                           std::vector<CriticalTrack> tracks, ParameterSquare domain,
                           std::string id)
    : p_in_a_(std::move(p_in_a)),
      q_in_a_(std::move(q_in_a)),
      tracks_(std::move(tracks)),
      domain_(domain),
      id_(std::move(id)) {
  require(!p_in_a_.empty() && !q_in_a_.empty(), ErrorCode::ConfigError,
          "family needs numerator and denominator coefficients");
  require(!tracks_.empty(), ErrorCode::ConfigError, "family needs at least one critical track");
  require(domain_.side > 0.0, ErrorCode::ConfigError, "parameter square side must be positive");
  for (const auto& t : tracks_)
    require(t.local_degree >= 2, ErrorCode::ConfigError, "critical track degree must be >= 2");
}

MarkedFamily MarkedFamily::quadratic(cplx center, double side) {
  // f_a(z) = z^2 + a
  std::vector<std::vector<cplx>> p = {{cplx(0, 0), cplx(1, 0)}, {cplx(0, 0)}, {cplx(1, 0)}};
  std::vector<std::vector<cplx>> q = {{cplx(1, 0)}};
  CriticalTrack c0{{cplx(0, 0)}, 2, true};
  return MarkedFamily(std::move(p), std::move(q), {c0}, {center, side}, "quadratic");
}

MarkedFamily MarkedFamily::unicritical(int d, cplx center, double side) {
  require(d >= 2, ErrorCode::ConfigError, "unicritical degree must be >= 2");
  std::vector<std::vector<cplx>> p(static_cast<std::size_t>(d) + 1, std::vector<cplx>{cplx(0, 0)});
  p[0] = {cplx(0, 0), cplx(1, 0)};
  p[static_cast<std::size_t>(d)] = {cplx(1, 0)};
  std::vector<std::vector<cplx>> q = {{cplx(1, 0)}};
  CriticalTrack c0{{cplx(0, 0)}, d, true};
  return MarkedFamily(std::move(p), std::move(q), {c0}, {center, side},
                      "unicritical:" + std::to_string(d));
}

RationalMap MarkedFamily::map_at(cplx a) const {
  std::vector<cplx> p(p_in_a_.size()), q(q_in_a_.size());
  for (std::size_t i = 0; i < p_in_a_.size(); ++i) p[i] = poly::eval(p_in_a_[i], a);
  for (std::size_t i = 0; i < q_in_a_.size(); ++i) q[i] = poly::eval(q_in_a_[i], a);
  return RationalMap(std::move(p), std::move(q));
}

cplx MarkedFamily::param_derivative(cplx a, cplx z) const {
  cplx pa{0, 0}, qa{0, 0}, p{0, 0}, q{0, 0};
  cplx zi{1, 0};
  for (std::size_t i = 0; i < std::max(p_in_a_.size(), q_in_a_.size()); ++i) {
    if (i < p_in_a_.size()) {
      p += poly::eval(p_in_a_[i], a) * zi;
      pa += poly::eval(poly::derivative(p_in_a_[i]), a) * zi;
    }
    if (i < q_in_a_.size()) {
      q += poly::eval(q_in_a_[i], a) * zi;
      qa += poly::eval(poly::derivative(q_in_a_[i]), a) * zi;
    }
    zi *= z;
  }
  return (pa * q - p * qa) / (q * q);
}

int MarkedFamily::max_local_degree() const {
  int d = 2;
  for (const auto& t : tracks_) d = std::max(d, t.local_degree);
  return d;
}

bool MarkedFamily::is_polynomial_family() const {
  for (std::size_t i = 1; i < q_in_a_.size(); ++i)
    for (const auto& c : q_in_a_[i])
      if (c != cplx(0, 0)) return false;
  return true;
}

const CriticalTrack& MarkedFamily::track(int l) const {
  require(l >= 0 && static_cast<std::size_t>(l) < tracks_.size(), ErrorCode::IndexError,
          "critical track index out of range");
  return tracks_[static_cast<std::size_t>(l)];
}

void MarkedFamily::validate(double tol) const {
  // 3x3 grid over the square
  std::vector<cplx> grid;
  const double h = domain_.side / 2.0;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) grid.push_back(domain_.center + cplx(h * i, h * j));

  for (const auto& a : grid) {
    const RationalMap f = map_at(a);
    const std::vector<cplx> w = poly::trim(
        poly::subtract(poly::multiply(poly::derivative(f.p()), f.q()),
                       poly::multiply(f.p(), poly::derivative(f.q()))),
        1e-14);
    double scale = 0.0;
    for (const auto& c : w) scale = std::max(scale, std::abs(c));
    for (const auto& t : tracks_) {
      const cplx c = t.at(a);
      // W and its first d_l-2 derivatives vanish at c, the next one does not
      std::vector<cplx> cur = w;
      for (int j = 0; j + 2 <= t.local_degree; ++j) {
        require(std::abs(poly::eval(cur, c)) <= tol * scale * std::pow(1.0 + std::abs(c), f.degree()),
                ErrorCode::ConfigError, "marked track is not a critical point of its degree");
        cur = poly::derivative(cur);
      }
      require(std::abs(poly::eval(cur, c)) > tol * scale, ErrorCode::ConfigError,
              "marked track has higher local degree than declared");
    }
  }
}

SpherePoint xi(const MarkedFamily& fam, cplx a, int l, long n) {
  require(n >= 0, ErrorCode::DomainError, "xi needs n >= 0");
  const CriticalTrack& t = fam.track(l);
  const RationalMap f = fam.map_at(a);
  SpherePoint z = SpherePoint::finite(t.at(a));
  for (long k = 0; k < n; ++k) z = f.evaluate(z);
  return z;
}

std::vector<SpherePoint> xi_orbit(const MarkedFamily& fam, cplx a, int l, long n) {
  require(n >= 0, ErrorCode::DomainError, "xi_orbit needs n >= 0");
  const CriticalTrack& t = fam.track(l);
  const RationalMap f = fam.map_at(a);
  std::vector<SpherePoint> orbit;
  orbit.reserve(static_cast<std::size_t>(n) + 1);
  SpherePoint z = SpherePoint::finite(t.at(a));
  orbit.push_back(z);
  for (long k = 0; k < n; ++k) {
    z = f.evaluate(z);
    orbit.push_back(z);
  }
  return orbit;
}

std::vector<SensitivityState> xi_with_sensitivity(const MarkedFamily& fam, cplx a, int l, long n) {
  require(n >= 0, ErrorCode::DomainError, "sensitivity propagation needs n >= 0");
  const CriticalTrack& t = fam.track(l);
  const RationalMap f = fam.map_at(a);
  std::vector<SensitivityState> states;
  states.reserve(static_cast<std::size_t>(n) + 1);
  SpherePoint z = SpherePoint::finite(t.at(a));
  cplx dz = t.deriv_at(a);
  states.push_back({z, dz});
  for (long k = 0; k < n; ++k) {
    const cplx zf = z.to_cplx();
    dz = f.euclidean_derivative(zf) * dz + fam.param_derivative(a, zf);
    z = f.evaluate(z);
    states.push_back({z, dz});
  }
  return states;
}

std::vector<cplx> transversality_ratio(const MarkedFamily& fam, cplx a, int l, long n,
                                       const TransversalityOptions& opt) {
  require(n >= 1, ErrorCode::DomainError, "transversality ratio needs n >= 1");
  const CriticalTrack& t = fam.track(l);
  const RationalMap f = fam.map_at(a);

  // ratio_{k+1} = ratio_k + d_a f(xi_k) / Df^k(v), accumulated through the
  // inverse product so nothing overflows before the guard trips
  std::vector<cplx> ratios;
  ratios.reserve(static_cast<std::size_t>(n));
  SpherePoint z = SpherePoint::finite(t.at(a));
  cplx dz = t.deriv_at(a);
  // advance to xi_1 = v_l(a)
  cplx zf = z.to_cplx();
  dz = f.euclidean_derivative(zf) * dz + fam.param_derivative(a, zf);
  z = f.evaluate(z);

  cplx ratio = dz;          // xi'_1 / P_1,  P_1 = 1
  cplx inv_prod{1.0, 0.0};  // 1 / Df^{k-1}(v), euclidean
  cplx phase{1.0, 0.0};     // P_k / |P_k|
  double sph_log = 0.0;     // log spherical product along the v-orbit
  double euc_log = 0.0;     // log |P_k|
  ratios.push_back(ratio);

  for (long k = 1; k < n; ++k) {
    zf = z.to_cplx();
    if (!std::isfinite(zf.real()) || !std::isfinite(zf.imag()))
      fail(ErrorCode::NumericFailure, "orbit left the finite chart during ratio accumulation");
    const cplx df = f.euclidean_derivative(zf);
    const double mdf = std::abs(df);
    if (mdf < opt.vanish_tol)
      fail(ErrorCode::DerivativeVanished, "derivative product vanished along the critical value orbit");
    if (opt.spherical_denominator) {
      sph_log += std::log(f.spherical_derivative(z));
      euc_log += std::log(mdf);
      phase *= df / mdf;
    }
    inv_prod /= df;                                    // 1 / Df^k(v)
    ratio += fam.param_derivative(a, zf) * inv_prod;   // ratio_{k+1}
    z = f.evaluate(z);
    if (opt.spherical_denominator) {
      // xi'_{k+1} / S_{k+1} = ratio * (P_{k+1} / S_{k+1})
      ratios.push_back(ratio * phase * std::exp(euc_log - sph_log));
    } else {
      ratios.push_back(ratio);
    }
  }
  return ratios;
}

TransversalityLimit estimate_transversality_limit(const MarkedFamily& fam, cplx a, int l,
                                                  long n_max, const TransversalityOptions& opt) {
  const CriticalTrack& t = fam.track(l);
  const RationalMap f = fam.map_at(a);
  SpherePoint z = SpherePoint::finite(t.at(a));
  cplx dz = t.deriv_at(a);
  cplx zf = z.to_cplx();
  dz = f.euclidean_derivative(zf) * dz + fam.param_derivative(a, zf);
  z = f.evaluate(z);

  cplx ratio = dz;
  cplx inv_prod{1.0, 0.0};
  double log_denom = 0.0;
  long used = 1;
  for (long k = 1; k < n_max; ++k) {
    zf = z.to_cplx();
    const cplx df = f.euclidean_derivative(zf);
    if (std::abs(df) < opt.vanish_tol)
      fail(ErrorCode::DerivativeVanished, "derivative product vanished along the critical value orbit");
    log_denom += std::log(std::abs(df));
    if (log_denom > 690.0) break;  // |Df^{n-1}| beyond 1e300
    inv_prod /= df;
    ratio += fam.param_derivative(a, zf) * inv_prod;
    z = f.evaluate(z);
    used = k + 1;
  }
  return {ratio, used};
}

}  // namespace parex
