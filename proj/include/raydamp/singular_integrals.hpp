#pragma once

// Principal-value primitives in the square-root variable z = v(y) and the
// regularized integrals built on top of them.

#include "raydamp/numerics.hpp"
#include "raydamp/profiles.hpp"
#include "raydamp/rayleigh.hpp"

#include <vector>

namespace raydamp {

// Symmetric grid on (-v(1), v(1)): +-(k + 1/2) * delta, k < n_half, with the
// extreme nodes at distance endpoint_gap from +-v(1). No node at 0.
struct PVGrid {
  double v1 = 0.0;
  double endpoint_gap = 0.0;
  double delta = 0.0;
  std::vector<double> c_tilde_nodes; // increasing, length 2 n_half
  std::vector<double> weights;       // midpoint weights (= delta)

  // The positive half, which is the c-grid used by the tables.
  std::vector<double> positive() const;
};

inline constexpr double kDefaultGapFraction = 1.0 / 1048576.0; // 2^-20

PVGrid make_pv_grid(double v1, std::size_t n_half = 1024, double gap_fraction = kDefaultGapFraction);

// H(g)(c) = p.v. int_{-v1}^{v1} g(z) / (c - z) dz by subtracting g(c) and adding
// g(c) ln|(c + v1)/(v1 - c)|. The smooth remainder uses composite Gauss rules
// graded toward c, 0 and the extra breakpoints. Throws EndpointTooClose when
// c is within `gap` of +-v1.
double hilbert_pv(const RealFn& g, double c, double v1, double gap = 0.0, std::span<const double> breaks = {});
cplx hilbert_pv(const ComplexFn& g, double c, double v1, double gap = 0.0, std::span<const double> breaks = {});

// d/dc H(g) for even g: H(g') + 2 g(v1) v1 / (v1^2 - c^2).
double hilbert_pv_derivative_even(const RealFn& g, const RealFn& dg, double c, double v1, double gap = 0.0);
cplx hilbert_pv_derivative_even(const ComplexFn& g, const ComplexFn& dg, double c, double v1, double gap = 0.0);

// Int(phi)(y) = int_0^y phi, extended evenly to [-1, 1], and its composition
// with v^{-1}.
class IntProfile {
public:
  IntProfile(ComplexFn phi, const SqrtCoordinate& sq);

  cplx phi(double y) const { return phi_(y); }
  cplx operator()(double y) const;
  // g(z) = Int(phi)(v^{-1}(z)) (v^{-1})'(z) and its z-derivative.
  cplx g(double z) const;
  cplx dg(double z) const;

private:
  ComplexFn phi_;
  const SqrtCoordinate* sq_;
};

struct PVInverse {
  double P = 0.0;  // p.v. int_0^1 dy / (u - c)
  double dP = 0.0; // d/dc of the above
};

PVInverse pv_inverse(const SqrtCoordinate& sq, double c, double gap = 0.0);

// Z(g)(c) = g'(c) - g(c)/c for even g with g(0) = 0; Z(g)(0) = 0.
double op_Z(const RealFn& g, const RealFn& dg, const RealFn& d2g, double c);

// Mean of g over [c, z]; equals g(z) when c == z.
double op_average(const RealFn& g, double z, double c);

// p.v. int_0^1 (u'(y) - u'(y_c)) / (u(y) - c)^2 dy.
double II_2(const ShearProfile& profile, double c);

// int_0^1 (1/phi1^2 - 1) / (u - c)^2 dy for real c.
double II_3(const RayleighSolution& sol);

// p.v. int_0^1 (Int(phi)(y) - Int(phi)(y_c)) / (u(y) - u(y_c))^2 dy in the
// variable c_tilde.
cplx II_11(const IntProfile& ip, const SqrtCoordinate& sq, double c, double gap = 0.0);

// int_0^1 int_{y_c}^z phi(y) (phi1(y)/phi1(z)^2 - 1) / (u(z) - c)^2 dy dz.
cplx II_12(const ComplexFn& phi, const RayleighSolution& sol);

// int_{y_c}^0 phi phi1 dy.
cplx E_op(const ComplexFn& phi, const RayleighSolution& sol);

} // namespace raydamp
