#pragma once

#include <optional>
#include <string>
#include <vector>

#include "parex/sphere.hpp"

namespace parex {

struct ParameterSquare {
  cplx center{0.0, 0.0};
  double side = 0.0;  // epsilon

  // 4 corners + center, the element-level sample set used everywhere
  std::vector<cplx> samples() const;
  bool contains(cplx a) const;
};

// One marked critical track c_l(a), a polynomial curve in the parameter.
struct CriticalTrack {
  std::vector<cplx> coeffs;  // c_l(a) = sum coeffs[j] a^j
  int local_degree = 2;      // d_l, constant over the square
  bool in_julia = false;

  cplx at(cplx a) const { return poly::eval(coeffs, a); }
  cplx deriv_at(cplx a) const { return poly::eval(poly::derivative(coeffs), a); }
};

// One-complex-parameter analytic family f_a = p(z;a)/q(z;a) with every map
// coefficient a polynomial in a, plus marked critical tracks of fixed local
// degree.
class MarkedFamily {
public:
  // coefficient matrices: p_in_a[i] is the polynomial in a multiplying z^i
  MarkedFamily(std::vector<std::vector<cplx>> p_in_a, std::vector<std::vector<cplx>> q_in_a,
               std::vector<CriticalTrack> tracks, ParameterSquare domain, std::string id);

  static MarkedFamily quadratic(cplx center, double side);          // z^2 + a
  static MarkedFamily unicritical(int d, cplx center, double side); // z^d + a

  RationalMap map_at(cplx a) const;
  // d/da of f_a(z) at fixed z, finite chart
  cplx param_derivative(cplx a, cplx z) const;

  const std::vector<CriticalTrack>& tracks() const { return tracks_; }
  std::vector<CriticalTrack>& tracks() { return tracks_; }
  const ParameterSquare& domain() const { return domain_; }
  ParameterSquare& domain() { return domain_; }
  const std::string& id() const { return id_; }
  int max_local_degree() const;  // \hat d over marked tracks
  bool is_polynomial_family() const;

  const CriticalTrack& track(int l) const;

  // residual + local-degree verification of every track over sampled a
  void validate(double tol = 1e-8) const;

private:
  std::vector<std::vector<cplx>> p_in_a_, q_in_a_;
  std::vector<CriticalTrack> tracks_;
  ParameterSquare domain_;
  std::string id_;
};

// xi_{n,l}(a) = f_a^n(c_l(a))
SpherePoint xi(const MarkedFamily& fam, cplx a, int l, long n);

// full orbit xi_0..xi_n as sphere points
std::vector<SpherePoint> xi_orbit(const MarkedFamily& fam, cplx a, int l, long n);

struct SensitivityState {
  SpherePoint xi;
  cplx dxi_da;  // d/da f_a^n(c_l(a)), euclidean, finite chart
};

// forward sensitivity propagation: xi'_{k+1} = Df_a(xi_k) xi'_k + d_a f_a(xi_k)
std::vector<SensitivityState> xi_with_sensitivity(const MarkedFamily& fam, cplx a, int l, long n);

struct TransversalityOptions {
  bool spherical_denominator = false;  // default: euclidean derivative in the finite chart
  double vanish_tol = 1e-280;          // |Df| underflow guard
};

// trailing sequence of xi'_{n,l}(a) / Df_a^{n-1}(v_l(a)), indices 1..n
std::vector<cplx> transversality_ratio(const MarkedFamily& fam, cplx a, int l, long n,
                                       const TransversalityOptions& opt = {});

struct TransversalityLimit {
  cplx value;
  long n_used;  // largest n before the log-space denominator guard trips
};

// numerical stand-in for the transversality limit; no non-degeneracy claim
TransversalityLimit estimate_transversality_limit(const MarkedFamily& fam, cplx a, int l,
                                                  long n_max,
                                                  const TransversalityOptions& opt = {});

}  // namespace parex
