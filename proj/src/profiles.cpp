#include "raydamp/profiles.hpp"

#include "raydamp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace raydamp {

namespace {

std::string at(double y) {
  std::ostringstream os;
  os.precision(6);
  os << " at y=" << y;
  return os.str();
}

std::vector<double> chebyshev_points(std::size_t n) {
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) {
    y[j] = 0.5 * (1.0 - std::cos(kPi * static_cast<double>(j) / (n - 1)));
  }
  y.front() = 0.0;
  y.back() = 1.0;
  return y;
}

} // namespace

ShearProfile::ShearProfile(std::string name, std::vector<double> coeffs, ProfileClass cls)
    : name_(std::move(name)), coeffs_(std::move(coeffs)), class_(cls) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
  for (double y : linspace(-1.0, 1.0, 401)) {
    for (int k = 0; k <= 2; ++k) c2_norm_ = std::max(c2_norm_, std::abs(derivative(k, y)));
  }
}

double ShearProfile::derivative(int order, double y) const {
  const int n = static_cast<int>(coeffs_.size());
  double acc = 0.0;
  for (int k = n - 1; k >= order; --k) {
    double f = 1.0;
    for (int j = 0; j < order; ++j) f *= static_cast<double>(k - j);
    acc = acc * y + f * coeffs_[k];
  }
  return acc;
}

double ShearProfile::y_of(double c) const {
  const double a = u0();
  const double b = u1();
  if (!(c >= a && c <= b)) {
    std::ostringstream os;
    os << "c=" << c << " outside [" << a << ", " << b << "]";
    throw OutOfRange(os.str());
  }
  if (c == a) return 0.0;
  if (c == b) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    double mid = 0.5 * (lo + hi);
    if (u(mid) < c) lo = mid;
    else hi = mid;
  }
  double y = 0.5 * (lo + hi);
  double slope = du(y);
  if (slope > 1e-6) {
    double step = (u(y) - c) / slope;
    if (std::abs(step) < 1e-12) y -= step;
  }
  return std::clamp(y, 0.0, 1.0);
}

ValidationReport validate_profile(const ShearProfile& profile, std::size_t points) {
  ValidationReport report;
  report.points = points;
  report.tol = 1e-8 * std::max(profile.c2_norm(), 1e-300);
  const double tol = report.tol;
  const auto ys = chebyshev_points(points);

  if (profile.class_tag() == ProfileClass::S) {
    if (std::abs(profile.du(0.0)) > tol) {
      throw ClassViolation("u'(0) must vanish for class S" + at(0.0));
    }
    if (profile.d2u(0.0) <= tol) {
      throw ClassViolation("u''(0) must be positive for class S" + at(0.0));
    }
    for (double y : ys) {
      if (std::abs(profile.u(y) - profile.u(-y)) > tol) {
        throw NonSymmetric("u(y) != u(-y)" + at(y));
      }
    }
    double c0 = std::numeric_limits<double>::infinity();
    for (double y : ys) {
      if (y == 0.0) continue;
      double d = profile.du(y);
      if (d <= 0.0) throw ClassViolation("u'(y) must be positive on (0, 1]" + at(y));
      c0 = std::min(c0, d / y);
    }
    report.c0 = c0;

    const auto coarse = chebyshev_points(257);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        double y = coarse[i];
        double yp = coarse[j];
        double r = (profile.du(y) + profile.du(yp)) * (y - yp) / (profile.u(y) - profile.u(yp));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
    report.ratio_bound = std::max(hi, 1.0 / lo);
  } else {
    if (std::abs(profile.du(1.0)) <= tol || std::abs(profile.du(-1.0)) <= tol) {
      throw ClassViolation("u'(+-1) must be nonzero for class K");
    }
    for (double y : ys) {
      for (double s : {y, -y}) {
        if (std::abs(profile.du(s)) < tol && std::abs(profile.d2u(s)) <= tol) {
          throw ClassViolation("degenerate critical point" + at(s));
        }
      }
    }
    double c0 = std::numeric_limits<double>::infinity();
    for (double y : ys) {
      if (y > 0.0) c0 = std::min(c0, profile.du(y) / y);
    }
    report.c0 = c0;
  }
  return report;
}

ShearProfile build_profile(const ProfileDescriptor& d) {
  std::vector<double> coeffs;
  std::string name = d.name;
  ProfileClass cls = d.requested;
  if (d.type == "builtin") {
    if (d.name == "poiseuille") {
      coeffs = {0.0, 0.0, 1.0};
    } else if (d.name == "scaled_poiseuille") {
      if (d.coeffs.size() != 2) throw ClassViolation("scaled_poiseuille needs coeffs {a, b}");
      coeffs = {d.coeffs[1], 0.0, d.coeffs[0]};
    } else if (d.name == "couette") {
      coeffs = {0.0, 1.0};
    } else {
      throw ClassViolation("unknown builtin profile '" + d.name + "'");
    }
  } else if (d.type == "poly_even") {
    if (d.coeffs.empty()) throw ClassViolation("poly_even needs at least one coefficient");
    coeffs.assign(2 * d.coeffs.size() - 1, 0.0);
    for (std::size_t k = 0; k < d.coeffs.size(); ++k) coeffs[2 * k] = d.coeffs[k];
    if (name.empty()) name = "poly_even";
  } else {
    throw ClassViolation("unknown profile type '" + d.type + "'");
  }
  ShearProfile profile(name, std::move(coeffs), cls);
  ValidationReport report = validate_profile(profile);
  if (cls == ProfileClass::S) report.c1 = SqrtCoordinate(profile).c1();
  profile.set_validation(report);
  return profile;
}

// ---------------------------------------------------------------------------

SqrtCoordinate::SqrtCoordinate(const ShearProfile& profile) : profile_(profile) {
  const double tol = 1e-8 * std::max(profile_.c2_norm(), 1e-300);
  c1_ = std::numeric_limits<double>::infinity();
  for (double y : linspace(0.0, 1.0, 2049)) {
    double m = m_derivative(0, y);
    if (m < tol) throw DegenerateCurvature("m(y) below tolerance" + at(y));
    c1_ = std::min(c1_, dv(y));
  }
  v1_ = v(1.0);
}

// For a polynomial u, m(y) = int_0^1 (1-t) u''(t y) dt is the polynomial
// sum_{k>=2} a_k y^(k-2); its derivatives follow by Horner.
double SqrtCoordinate::m_derivative(int k, double y) const {
  const auto& a = profile_.coefficients();
  const int n = static_cast<int>(a.size());
  double acc = 0.0;
  for (int j = n - 3; j >= k; --j) {
    double f = 1.0;
    for (int i = 0; i < k; ++i) f *= static_cast<double>(j - i);
    acc = acc * y + f * a[j + 2];
  }
  return acc;
}

SqrtCoordinate::Jet SqrtCoordinate::jet(double y) const {
  double m0 = m_derivative(0, y);
  double m1 = m_derivative(1, y);
  double m2 = m_derivative(2, y);
  double m3 = m_derivative(3, y);
  Jet j;
  j.w = std::sqrt(m0);
  j.w1 = m1 / (2.0 * j.w);
  j.w2 = (m2 - 2.0 * j.w1 * j.w1) / (2.0 * j.w);
  j.w3 = (m3 - 6.0 * j.w1 * j.w2) / (2.0 * j.w);
  return j;
}

double SqrtCoordinate::v(double y) const { return y * std::sqrt(m_derivative(0, y)); }

double SqrtCoordinate::dv(double y) const {
  Jet j = jet(y);
  return j.w + y * j.w1;
}

double SqrtCoordinate::d2v(double y) const {
  Jet j = jet(y);
  return 2.0 * j.w1 + y * j.w2;
}

double SqrtCoordinate::d3v(double y) const {
  Jet j = jet(y);
  return 3.0 * j.w2 + y * j.w3;
}

double SqrtCoordinate::inverse(double z) const {
  const double a = std::min(std::abs(z), v1_);
  double lo = 0.0;
  double hi = 1.0;
  double y = std::clamp(a / dv(0.0), 0.0, 1.0);
  for (int it = 0; it < 100; ++it) {
    const double f = v(y) - a;
    if (f < 0.0) lo = y;
    else hi = y;
    double next = y - f / dv(y);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - y);
    y = next;
    if (step < 1e-16 || hi - lo < 1e-16) break;
  }
  return z < 0.0 ? -y : y;
}

double SqrtCoordinate::dinverse(double z) const { return 1.0 / dv(inverse(z)); }

double SqrtCoordinate::d2inverse(double z) const {
  double y = inverse(z);
  double d1 = dv(y);
  return -d2v(y) / (d1 * d1 * d1);
}

// ---------------------------------------------------------------------------

namespace {

void fill_weights(const ShearProfile& profile, CriticalValue& cv) {
  const double a = profile.u0();
  const double b = profile.u1();
  cv.rho1 = cv.c_r - a;
  cv.rho = (cv.c_r - a) * (b - cv.c_r);
  cv.du_c = profile.du(cv.y_c);
  cv.d2u_c = profile.d2u(cv.y_c);
  cv.rho0 = cv.y_c > 0.0 ? cv.rho / cv.du_c : 0.0;
}

} // namespace

CriticalValue critical_value(const ShearProfile& profile, cplx c, DomainTag tag) {
  CriticalValue cv;
  cv.c = c;
  cv.tag = tag;
  const double a = profile.u0();
  const double b = profile.u1();
  switch (tag) {
  case DomainTag::D0:
    if (c.imag() != 0.0) throw OutOfRange("D0 requires real c");
    cv.c_r = c.real();
    break;
  case DomainTag::DEps:
    if (c.imag() == 0.0) throw OutOfRange("D_eps requires Im c != 0");
    cv.c_r = c.real();
    break;
  case DomainTag::BLeft:
    cv.c_r = a;
    break;
  case DomainTag::BRight:
    cv.c_r = b;
    break;
  }
  cv.y_c = profile.y_of(cv.c_r);
  cv.c_tilde = std::sqrt(std::max(cv.c_r - a, 0.0));
  fill_weights(profile, cv);
  return cv;
}

CriticalValue critical_value_from_tilde(const SqrtCoordinate& sq, double c_tilde) {
  const ShearProfile& profile = sq.profile();
  if (!(c_tilde >= 0.0 && c_tilde <= sq.v1())) {
    throw OutOfRange("c_tilde outside [0, v(1)]");
  }
  CriticalValue cv;
  cv.c_tilde = c_tilde;
  cv.c_r = profile.u0() + c_tilde * c_tilde;
  cv.c = cv.c_r;
  cv.y_c = sq.inverse(c_tilde);
  fill_weights(profile, cv);
  return cv;
}

} // namespace raydamp
