#pragma once

#include "raydamp/numerics.hpp"

#include <string>
#include <vector>

namespace raydamp {

enum class ProfileClass { K, S };

// Config-level description of a base flow.
//   type "builtin":   name in {poiseuille, scaled_poiseuille, couette};
//                     scaled_poiseuille reads coeffs = {a, b} for u = a y^2 + b.
//   type "poly_even": u(y) = sum_k coeffs[k] y^(2k).
struct ProfileDescriptor {
  std::string name;
  std::string type = "builtin";
  std::vector<double> coeffs;
  ProfileClass requested = ProfileClass::S;
};

struct ValidationReport {
  double c0 = 0.0;          // min u'(y)/y on (0, 1]
  double c1 = 0.0;          // min v'(y) on [0, 1]
  double ratio_bound = 0.0; // C with (u'(y)+u'(y'))(y-y')/(u(y)-u(y')) in [1/C, C]
  double tol = 0.0;         // threshold used for the "nonzero" checks
  std::size_t points = 0;
};

// Polynomial base flow u(y) = sum coeffs[k] y^k on [-1, 1] with exact
// derivatives of every order. Immutable once built.
class ShearProfile {
public:
  ShearProfile(std::string name, std::vector<double> coeffs, ProfileClass cls);

  double u(double y) const { return derivative(0, y); }
  double du(double y) const { return derivative(1, y); }
  double d2u(double y) const { return derivative(2, y); }
  double d3u(double y) const { return derivative(3, y); }
  double d4u(double y) const { return derivative(4, y); }
  double derivative(int order, double y) const;

  const std::string& name() const { return name_; }
  ProfileClass class_tag() const { return class_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double u0() const { return u(0.0); }
  double u1() const { return u(1.0); }
  double c2_norm() const { return c2_norm_; }

  // Root of u(y) = c on [0, 1] (class S only): bisection then Newton, 1e-12 in y.
  double y_of(double c) const;

  const ValidationReport& validation() const { return report_; }
  void set_validation(const ValidationReport& r) { report_ = r; }

private:
  std::string name_;
  std::vector<double> coeffs_;
  ProfileClass class_;
  double c2_norm_ = 0.0;
  ValidationReport report_;
};

// Builds and validates a profile on 2049 Chebyshev-Lobatto points of [0, 1]
// (and their mirror images). Throws ClassViolation or NonSymmetric.
ShearProfile build_profile(const ProfileDescriptor& descriptor);

// Validation alone; `points` is the number of sample points on [0, 1].
ValidationReport validate_profile(const ShearProfile& profile, std::size_t points = 2049);

// v(y) = sqrt(u(y) - u(0)) continued oddly, evaluated as y m(y)^(1/2) with
// m(y) = int_0^1 (1-t) u''(t y) dt so nothing divides by zero at y = 0.
class SqrtCoordinate {
public:
  explicit SqrtCoordinate(const ShearProfile& profile);

  double v(double y) const;
  double dv(double y) const;
  double d2v(double y) const;
  double d3v(double y) const;
  double v1() const { return v1_; }
  double c1() const { return c1_; }

  // v^{-1} on [-v(1), v(1)] and its first two derivatives.
  double inverse(double z) const;
  double dinverse(double z) const;
  double d2inverse(double z) const;

  const ShearProfile& profile() const { return profile_; }

private:
  struct Jet {
    double w, w1, w2, w3; // sqrt(m) and derivatives
  };
  Jet jet(double y) const;
  double m_derivative(int k, double y) const;

  ShearProfile profile_;
  double v1_ = 0.0;
  double c1_ = 0.0;
};

enum class DomainTag { D0, DEps, BLeft, BRight };

// A spectral parameter with its critical layer and endpoint weights.
struct CriticalValue {
  cplx c;
  DomainTag tag = DomainTag::D0;
  double c_r = 0.0;
  double y_c = 0.0;
  double c_tilde = 0.0;
  double rho = 0.0;  // (c_r - u(0)) (u(1) - c_r)
  double rho0 = 0.0; // rho / u'(y_c)
  double rho1 = 0.0; // c_r - u(0)
  double du_c = 0.0; // u'(y_c)
  double d2u_c = 0.0;
};

CriticalValue critical_value(const ShearProfile& profile, cplx c, DomainTag tag = DomainTag::D0);

// Real critical value at c = u(0) + c_tilde^2, with y_c = v^{-1}(c_tilde).
CriticalValue critical_value_from_tilde(const SqrtCoordinate& sq, double c_tilde);

} // namespace raydamp
