#pragma once

#include <vector>

#include "parex/util.hpp"

namespace parex {

// A point on the Riemann sphere in one of two charts. Finite chart stores z
// itself, the reciprocal chart stores w = 1/z (w = 0 is the point at
// infinity). Canonical points keep |value| <= 2; the overlap band
// 0.5 < |value| < 2 gives re-charting hysteresis.
enum class Chart { Finite, Reciprocal };

struct SpherePoint {
  cplx value{0.0, 0.0};
  Chart chart = Chart::Finite;

  static SpherePoint finite(cplx z) { return canonical({z, Chart::Finite}); }
  static SpherePoint infinity() { return {cplx(0.0, 0.0), Chart::Reciprocal}; }
  static SpherePoint canonical(SpherePoint p);

  bool is_infinity() const { return chart == Chart::Reciprocal && value == cplx(0.0, 0.0); }

  // finite-chart coordinate; +inf magnitude at the point at infinity
  cplx to_cplx() const;
};

// chordal metric normalized to diameter 1: dist(0, infinity) = 1
double chordal_distance(const SpherePoint& a, const SpherePoint& b);

// complex polynomials as ascending coefficient vectors
namespace poly {

cplx eval(const std::vector<cplx>& c, cplx z);
std::vector<cplx> derivative(const std::vector<cplx>& c);
std::vector<cplx> multiply(const std::vector<cplx>& a, const std::vector<cplx>& b);
std::vector<cplx> subtract(const std::vector<cplx>& a, const std::vector<cplx>& b);
// drop leading coefficients below tol relative to the largest magnitude
std::vector<cplx> trim(std::vector<cplx> c, double tol = 0.0);
int degree(const std::vector<cplx>& c);
// coefficients of z^d * p(1/z) for the given padding degree d
std::vector<cplx> reverse_pad(const std::vector<cplx>& c, int d);

// All roots with multiplicity (Aberth-Ehrlich simultaneous iteration,
// exact zero roots stripped first, clustered to multiplicities afterwards).
struct Root {
  cplx value;
  int multiplicity;
};
std::vector<Root> roots(const std::vector<cplx>& c, double residual_tol = 1e-12,
                        double cluster_radius = 1e-8);

}  // namespace poly

class RationalMap {
public:
  // f = p/q, max(deg p, deg q) = d >= 2, p and q with no common root.
  RationalMap(std::vector<cplx> p, std::vector<cplx> q);

  int degree() const { return degree_; }
  const std::vector<cplx>& p() const { return p_; }
  const std::vector<cplx>& q() const { return q_; }
  bool is_polynomial() const { return poly::degree(q_) == 0; }

  SpherePoint evaluate(const SpherePoint& z) const;

  // |f'(z)| (1+|z|^2) / (1+|f(z)|^2), computed chart-robustly as
  // |p'q - pq'| (1+|u|^2) / (|p|^2 + |q|^2) in the point's own chart.
  double spherical_derivative(const SpherePoint& z) const;

  // euclidean f'(z) in the finite chart (used by parameter-derivative ratios)
  cplx euclidean_derivative(cplx z) const;
  cplx evaluate_finite(cplx z) const;

  // f(z) together with the derivative of the chart form of f taken from the
  // input point's chart into the output point's chart
  struct ChartStep {
    SpherePoint value;
    cplx deriv{0.0, 0.0};
  };
  ChartStep evaluate_with_chart_derivative(const SpherePoint& z) const;

private:
  std::vector<cplx> p_, q_;        // finite chart
  std::vector<cplx> prev_, qrev_;  // reciprocal chart: f(1/w) = prev(w)/qrev(w)
  std::vector<cplx> dp_, dq_, dprev_, dqrev_;
  int degree_;
};

struct CriticalPoint {
  SpherePoint point;
  int local_degree;       // d_l >= 2
  bool in_julia = false;  // Jrit membership, asserted by configuration
};

struct CriticalSet {
  std::vector<CriticalPoint> points;
  // sum of (d_l - 1) = 2d - 2 (Riemann-Hurwitz), checked on construction
  int riemann_hurwitz_sum() const;
};

CriticalSet critical_points(const RationalMap& f, double residual_tol = 1e-12,
                            double cluster_radius = 1e-8);

struct OrbitRecord {
  std::vector<SpherePoint> points;     // xi_0 .. xi_n
  std::vector<double> deriv_products;  // D_j = |Df^j(xi_0)|, spherical, D_0 = 1
  std::vector<double> log_deriv;       // running sum of log spherical derivatives
};

OrbitRecord orbit_with_derivative(const RationalMap& f, const SpherePoint& z, int n);

}  // namespace parex
