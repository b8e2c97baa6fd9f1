#include "parex/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parex {

SpherePoint SpherePoint::canonical(SpherePoint p) {
  const double m = std::abs(p.value);
  if (!std::isfinite(m)) {
    // an infinite coordinate is the antipode of 0 in the other chart
    return {cplx(0.0, 0.0), p.chart == Chart::Finite ? Chart::Reciprocal : Chart::Finite};
  }
  if (m > 2.0) {
    p.value = 1.0 / p.value;
    p.chart = p.chart == Chart::Finite ? Chart::Reciprocal : Chart::Finite;
  }
  return p;
}

cplx SpherePoint::to_cplx() const {
  if (chart == Chart::Finite) return value;
  if (value == cplx(0.0, 0.0))
    return {std::numeric_limits<double>::infinity(), 0.0};
  return 1.0 / value;
}

double chordal_distance(const SpherePoint& a, const SpherePoint& b) {
  const double na = std::sqrt(1.0 + std::norm(a.value));
  const double nb = std::sqrt(1.0 + std::norm(b.value));
  if (a.chart == b.chart) return std::abs(a.value - b.value) / (na * nb);
  // mixed charts: |z - 1/w| / (sqrt(1+|z|^2) sqrt(1+1/|w|^2)) = |zw - 1| / (na nb)
  return std::abs(a.value * b.value - 1.0) / (na * nb);
}

namespace poly {

cplx eval(const std::vector<cplx>& c, cplx z) {
  cplx r{0.0, 0.0};
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * z + *it;
  return r;
}

std::vector<cplx> derivative(const std::vector<cplx>& c) {
  if (c.size() <= 1) return {cplx(0.0, 0.0)};
  std::vector<cplx> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
  return d;
}

std::vector<cplx> multiply(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<cplx> r(a.size() + b.size() - 1, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

std::vector<cplx> subtract(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<cplx> r(std::max(a.size(), b.size()), cplx(0.0, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  return r;
}

std::vector<cplx> trim(std::vector<cplx> c, double tol) {
  double scale = 0.0;
  for (const auto& x : c) scale = std::max(scale, std::abs(x));
  const double cut = scale * tol;
  while (c.size() > 1 && std::abs(c.back()) <= cut) c.pop_back();
  return c;
}

int degree(const std::vector<cplx>& c) {
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
    if (c[static_cast<std::size_t>(i)] != cplx(0.0, 0.0)) return i;
  return 0;
}

std::vector<cplx> reverse_pad(const std::vector<cplx>& c, int d) {
  std::vector<cplx> r(static_cast<std::size_t>(d) + 1, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < c.size() && static_cast<int>(i) <= d; ++i)
    r[static_cast<std::size_t>(d) - i] = c[i];
  return r;
}

std::vector<Root> roots(const std::vector<cplx>& coeffs, double residual_tol,
                        double cluster_radius) {
  std::vector<cplx> c = trim(coeffs, 1e-14);
  double scale = 0.0;
  for (const auto& x : c) scale = std::max(scale, std::abs(x));
  require(scale > 0.0, ErrorCode::RootFindingFailure, "zero polynomial has no root set");

  // strip exact (to tolerance) roots at the origin; Aberth converges slowly
  // on multiple roots and pure powers show up constantly (unicritical maps)
  int zero_mult = 0;
  std::size_t lo = 0;
  while (lo + 1 < c.size() && std::abs(c[lo]) <= scale * 1e-14) {
    ++lo;
    ++zero_mult;
  }
  c.erase(c.begin(), c.begin() + static_cast<long>(lo));

  std::vector<Root> out;
  if (zero_mult > 0) out.push_back({cplx(0.0, 0.0), zero_mult});

  const int n = degree(c);
  if (n >= 1) {
    // Cauchy bound for initial radius
    const double lead = std::abs(c.back());
    double bound = 0.0;
    for (int i = 0; i < n; ++i) bound = std::max(bound, std::abs(c[static_cast<std::size_t>(i)]) / lead);
    const double radius = 1.0 + bound;

    std::vector<cplx> zs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double ang = 2.0 * M_PI * (i + 0.25) / n + 0.5;  // asymmetric start
      zs[static_cast<std::size_t>(i)] = std::polar(radius * (0.5 + 0.5 * (i % 3) / 3.0), ang);
    }

    const std::vector<cplx> dc = derivative(c);
    const int max_iter = 400;
    bool converged = false;
    for (int iter = 0; iter < max_iter && !converged; ++iter) {
      converged = true;
      for (int i = 0; i < n; ++i) {
        const cplx zi = zs[static_cast<std::size_t>(i)];
        const cplx pz = eval(c, zi);
        const cplx dz = eval(dc, zi);
        cplx sum{0.0, 0.0};
        for (int j = 0; j < n; ++j)
          if (j != i) sum += 1.0 / (zi - zs[static_cast<std::size_t>(j)]);
        const cplx newton = (dz == cplx(0.0, 0.0)) ? cplx(0.0, 0.0) : pz / dz;
        const cplx denom = 1.0 - newton * sum;
        cplx step = (denom == cplx(0.0, 0.0)) ? newton : newton / denom;
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag()))
          step = cplx(1e-3, 1e-3);  // collision escape
        zs[static_cast<std::size_t>(i)] -= step;
        if (std::abs(step) > 1e-14 * (1.0 + std::abs(zi))) converged = false;
      }
    }

    // residual check; near multiple roots the residual scales like |dz|^m
    for (const auto& z : zs) {
      const double res = std::abs(eval(c, z));
      const double tol = scale * std::max(residual_tol, std::pow(cluster_radius, 2.0));
      require(res <= tol * std::pow(1.0 + std::abs(z), n), ErrorCode::RootFindingFailure,
              "root iteration did not reach the residual tolerance");
    }

    // cluster within cluster_radius into multiplicity groups
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    std::sort(zs.begin(), zs.end(),
              [](const cplx& a, const cplx& b) {
                return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
              });
    for (int i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      cplx acc = zs[static_cast<std::size_t>(i)];
      int mult = 1;
      used[static_cast<std::size_t>(i)] = true;
      for (int j = i + 1; j < n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        if (std::abs(zs[static_cast<std::size_t>(j)] - acc / static_cast<double>(mult)) <=
            cluster_radius * (1.0 + std::abs(zs[static_cast<std::size_t>(i)]))) {
          acc += zs[static_cast<std::size_t>(j)];
          ++mult;
          used[static_cast<std::size_t>(j)] = true;
        }
      }
      out.push_back({acc / static_cast<double>(mult), mult});
    }
  }
  return out;
}

}  // namespace poly

RationalMap::RationalMap(std::vector<cplx> p, std::vector<cplx> q)
    : p_(poly::trim(std::move(p), 1e-14)), q_(poly::trim(std::move(q), 1e-14)) {
  degree_ = std::max(poly::degree(p_), poly::degree(q_));
  require(degree_ >= 2, ErrorCode::ConfigError, "rational map degree must be >= 2");

  double qs = 0.0;
  for (const auto& x : q_) qs = std::max(qs, std::abs(x));
  require(qs > 0.0, ErrorCode::ConfigError, "zero denominator polynomial");

  // common-root guard: p must not vanish at any root of q (and vice versa)
  if (poly::degree(q_) >= 1) {
    double pscale = 0.0;
    for (const auto& x : p_) pscale = std::max(pscale, std::abs(x));
    for (const auto& r : poly::roots(q_, 1e-10, 1e-7)) {
      require(std::abs(poly::eval(p_, r.value)) > 1e-9 * pscale * std::pow(1.0 + std::abs(r.value), degree_),
              ErrorCode::ConfigError, "numerator and denominator share a root");
    }
  }

  prev_ = poly::reverse_pad(p_, degree_);
  qrev_ = poly::reverse_pad(q_, degree_);
  dp_ = poly::derivative(p_);
  dq_ = poly::derivative(q_);
  dprev_ = poly::derivative(prev_);
  dqrev_ = poly::derivative(qrev_);
}

SpherePoint RationalMap::evaluate(const SpherePoint& z) const {
  const bool fin = z.chart == Chart::Finite;
  const cplx a = poly::eval(fin ? p_ : prev_, z.value);
  const cplx b = poly::eval(fin ? q_ : qrev_, z.value);
  const double ma = std::abs(a), mb = std::abs(b);
  double scale = 0.0;
  for (const auto& x : fin ? p_ : prev_) scale = std::max(scale, std::abs(x));
  for (const auto& x : fin ? q_ : qrev_) scale = std::max(scale, std::abs(x));
  if (ma <= 1e-14 * scale && mb <= 1e-14 * scale)
    fail(ErrorCode::IndeterminateForm, "p and q vanish simultaneously");
  if (ma <= 2.0 * mb) return {a / b, Chart::Finite};
  return {b / a, Chart::Reciprocal};
}

double RationalMap::spherical_derivative(const SpherePoint& z) const {
  const bool fin = z.chart == Chart::Finite;
  const cplx a = poly::eval(fin ? p_ : prev_, z.value);
  const cplx b = poly::eval(fin ? q_ : qrev_, z.value);
  const cplx da = poly::eval(fin ? dp_ : dprev_, z.value);
  const cplx db = poly::eval(fin ? dq_ : dqrev_, z.value);
  const double denom = std::norm(a) + std::norm(b);
  if (denom == 0.0) fail(ErrorCode::IndeterminateForm, "p and q vanish simultaneously");
  // |W| (1+|u|^2) / (|p|^2+|q|^2) with W = p'q - pq'; identical for either
  // output chart, so no case split on |f| is needed
  return std::abs(da * b - a * db) * (1.0 + std::norm(z.value)) / denom;
}

RationalMap::ChartStep RationalMap::evaluate_with_chart_derivative(const SpherePoint& z) const {
  const bool fin = z.chart == Chart::Finite;
  const cplx a = poly::eval(fin ? p_ : prev_, z.value);
  const cplx b = poly::eval(fin ? q_ : qrev_, z.value);
  const cplx da = poly::eval(fin ? dp_ : dprev_, z.value);
  const cplx db = poly::eval(fin ? dq_ : dqrev_, z.value);
  if (std::abs(a) == 0.0 && std::abs(b) == 0.0)
    fail(ErrorCode::IndeterminateForm, "p and q vanish simultaneously");
  const cplx w = da * b - a * db;
  ChartStep step;
  if (std::abs(a) <= 2.0 * std::abs(b)) {
    step.value = {a / b, Chart::Finite};  // prev/qrev already give the finite value
    step.deriv = w / (b * b);
  } else {
    step.value = {b / a, Chart::Reciprocal};
    step.deriv = -w / (a * a);
  }
  return step;
}

cplx RationalMap::euclidean_derivative(cplx z) const {
  const cplx a = poly::eval(p_, z), b = poly::eval(q_, z);
  const cplx da = poly::eval(dp_, z), db = poly::eval(dq_, z);
  return (da * b - a * db) / (b * b);
}

cplx RationalMap::evaluate_finite(cplx z) const {
  return poly::eval(p_, z) / poly::eval(q_, z);
}

int CriticalSet::riemann_hurwitz_sum() const {
  int s = 0;
  for (const auto& c : points) s += c.local_degree - 1;
  return s;
}

CriticalSet critical_points(const RationalMap& f, double residual_tol, double cluster_radius) {
  // finite critical points are the zeros of W = p'q - pq' (this includes
  // multiple poles); infinity carries whatever multiplicity W drops in degree
  std::vector<cplx> w = poly::trim(
      poly::subtract(poly::multiply(poly::derivative(f.p()), f.q()),
                     poly::multiply(f.p(), poly::derivative(f.q()))),
      1e-12);
  const int expect = 2 * f.degree() - 2;
  const int deg_w = poly::degree(w);
  require(deg_w <= expect, ErrorCode::RootFindingFailure, "Wronskian degree exceeds 2d-2");

  CriticalSet cs;
  const int inf_mult = expect - deg_w;
  if (inf_mult >= 1) cs.points.push_back({SpherePoint::infinity(), inf_mult + 1, false});
  if (deg_w >= 1) {
    for (const auto& r : poly::roots(w, residual_tol, cluster_radius))
      cs.points.push_back({SpherePoint::finite(r.value), r.multiplicity + 1, false});
  }
  require(cs.riemann_hurwitz_sum() == expect, ErrorCode::RootFindingFailure,
          "critical multiplicities violate Riemann-Hurwitz");
  return cs;
}

OrbitRecord orbit_with_derivative(const RationalMap& f, const SpherePoint& z, int n) {
  require(n >= 0, ErrorCode::DomainError, "orbit length must be >= 0");
  OrbitRecord rec;
  rec.points.reserve(static_cast<std::size_t>(n) + 1);
  rec.deriv_products.reserve(static_cast<std::size_t>(n) + 1);
  rec.log_deriv.reserve(static_cast<std::size_t>(n) + 1);
  SpherePoint cur = SpherePoint::canonical(z);
  rec.points.push_back(cur);
  rec.deriv_products.push_back(1.0);
  rec.log_deriv.push_back(0.0);
  for (int j = 0; j < n; ++j) {
    const double s = f.spherical_derivative(cur);
    cur = f.evaluate(cur);
    rec.points.push_back(cur);
    rec.deriv_products.push_back(rec.deriv_products.back() * s);
    rec.log_deriv.push_back(rec.log_deriv.back() + std::log(s));
  }
  return rec;
}

}  // namespace parex
