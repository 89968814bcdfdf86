#include "raydamp/singular_integrals.hpp"

#include "raydamp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace raydamp {

namespace {

constexpr int kRule = 12;
constexpr double kFirstPanel = 1e-4; // relative to the interval length
constexpr double kGrowth = 2.0;

// Composite rule on [a, b] graded toward both ends.
template <class Fn>
auto integrate_two_sided(const Fn& f, double a, double b) -> decltype(f(a)) {
  using T = decltype(f(a));
  if (b <= a) return T{};
  const double mid = 0.5 * (a + b);
  const double first = kFirstPanel * (b - a);
  auto left = graded_breaks(a, mid, first, kGrowth);
  auto right = graded_breaks(b, mid, first, kGrowth);
  std::reverse(right.begin(), right.end());
  const GaussRule& g = gauss_legendre(kRule);
  T sum{};
  auto run = [&](const std::vector<double>& br) {
    for (std::size_t p = 0; p + 1 < br.size(); ++p) {
      const double lo = br[p];
      const double hi = br[p + 1];
      const double c = 0.5 * (lo + hi);
      const double h = 0.5 * (hi - lo);
      T part{};
      for (int k = 0; k < kRule; ++k) part += g.weights[k] * f(c + h * g.nodes[k]);
      sum += h * part;
    }
  };
  run(left);
  run(right);
  return sum;
}

template <class Fn>
auto hilbert_impl(const Fn& g, double c, double v1, double gap, std::span<const double> extra)
    -> decltype(g(c)) {
  if (!(v1 - std::abs(c) > 0.0) || v1 - std::abs(c) < gap) {
    std::ostringstream os;
    os << "c_tilde=" << c << " within " << gap << " of +-" << v1;
    throw EndpointTooClose(os.str());
  }
  const auto gc = g(c);
  std::vector<double> br{-v1, 0.0, c, v1};
  for (double b : extra) {
    if (b > -v1 && b < v1) br.push_back(b);
  }
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  auto smooth = [&](double z) { return (g(z) - gc) / (c - z); };
  decltype(g(c)) sum{};
  for (std::size_t i = 0; i + 1 < br.size(); ++i) sum += integrate_two_sided(smooth, br[i], br[i + 1]);
  return sum + gc * std::log((c + v1) / (v1 - c));
}

// (p(y) - p(x)) / (y - x) for the polynomial with the given coefficients;
// equals p'(x) when y == x.
double divided_difference(const std::vector<double>& a, double y, double x) {
  // Horner on the synthetic-division quotient.
  const int n = static_cast<int>(a.size());
  double q = 0.0;
  double acc = 0.0;
  for (int k = n - 1; k >= 1; --k) {
    q = q * x + a[k];
    acc = acc * y + q;
  }
  return acc;
}

std::vector<double> derivative_coeffs(const std::vector<double>& a) {
  std::vector<double> d;
  for (std::size_t k = 1; k < a.size(); ++k) d.push_back(static_cast<double>(k) * a[k]);
  if (d.empty()) d.push_back(0.0);
  return d;
}

double interior_c_tilde(const ShearProfile& profile, double c) {
  if (!(c > profile.u0() && c < profile.u1())) {
    std::ostringstream os;
    os << "c=" << c << " must lie strictly inside (" << profile.u0() << ", " << profile.u1() << ")";
    throw OutOfRange(os.str());
  }
  return std::sqrt(c - profile.u0());
}

} // namespace

std::vector<double> PVGrid::positive() const {
  return {c_tilde_nodes.begin() + static_cast<std::ptrdiff_t>(c_tilde_nodes.size() / 2), c_tilde_nodes.end()};
}

PVGrid make_pv_grid(double v1, std::size_t n_half, double gap_fraction) {
  if (n_half < 4) throw OutOfRange("PV grid needs at least 4 nodes per side");
  PVGrid g;
  g.v1 = v1;
  g.endpoint_gap = gap_fraction * v1;
  g.delta = 2.0 * (v1 - g.endpoint_gap) / static_cast<double>(2 * n_half - 1);
  g.c_tilde_nodes.resize(2 * n_half);
  for (std::size_t k = 0; k < n_half; ++k) {
    double x = (static_cast<double>(k) + 0.5) * g.delta;
    g.c_tilde_nodes[n_half + k] = x;
    g.c_tilde_nodes[n_half - 1 - k] = -x;
  }
  g.c_tilde_nodes.back() = v1 - g.endpoint_gap;
  g.c_tilde_nodes.front() = -(v1 - g.endpoint_gap);
  g.weights.assign(2 * n_half, g.delta);
  return g;
}

double hilbert_pv(const RealFn& g, double c, double v1, double gap, std::span<const double> breaks) {
  return hilbert_impl(g, c, v1, gap, breaks);
}

cplx hilbert_pv(const ComplexFn& g, double c, double v1, double gap, std::span<const double> breaks) {
  return hilbert_impl(g, c, v1, gap, breaks);
}

double hilbert_pv_derivative_even(const RealFn& g, const RealFn& dg, double c, double v1, double gap) {
  return hilbert_pv(dg, c, v1, gap) + 2.0 * g(v1) * v1 / ((v1 - c) * (v1 + c));
}

cplx hilbert_pv_derivative_even(const ComplexFn& g, const ComplexFn& dg, double c, double v1, double gap) {
  return hilbert_pv(dg, c, v1, gap) + 2.0 * g(v1) * v1 / ((v1 - c) * (v1 + c));
}

// ---------------------------------------------------------------------------

IntProfile::IntProfile(ComplexFn phi, const SqrtCoordinate& sq) : phi_(std::move(phi)), sq_(&sq) {}

cplx IntProfile::operator()(double y) const {
  const double a = std::abs(y);
  if (a == 0.0) return cplx{};
  const GaussRule& g = gauss_legendre(24);
  cplx sum{};
  for (std::size_t k = 0; k < g.nodes.size(); ++k) sum += g.weights[k] * phi_(0.5 * a * (g.nodes[k] + 1.0));
  return 0.5 * a * sum;
}

cplx IntProfile::g(double z) const {
  const double y = sq_->inverse(z);
  return (*this)(y) / sq_->dv(y);
}

cplx IntProfile::dg(double z) const {
  const double y = sq_->inverse(z);
  const double d1 = sq_->dv(y);
  const double yp = 1.0 / d1;
  const double ypp = -sq_->d2v(y) / (d1 * d1 * d1);
  const double sgn = y < 0.0 ? -1.0 : 1.0;
  return sgn * phi_(std::abs(y)) * yp * yp + (*this)(y) * ypp;
}

PVInverse pv_inverse(const SqrtCoordinate& sq, double c, double gap) {
  const double ct = interior_c_tilde(sq.profile(), c);
  const double v1 = sq.v1();
  RealFn g = [&](double z) { return sq.dinverse(z); };
  RealFn dg = [&](double z) { return sq.d2inverse(z); };
  const double H = hilbert_pv(g, ct, v1, gap);
  const double Hp = hilbert_pv_derivative_even(g, dg, ct, v1, gap);
  PVInverse out;
  out.P = -H / (2.0 * ct);
  out.dP = (H / (2.0 * ct * ct) - Hp / (2.0 * ct)) / (2.0 * ct);
  return out;
}

double op_Z(const RealFn& g, const RealFn& dg, const RealFn& d2g, double c) {
  for (double x : {0.1, 0.25, 0.5}) {
    if (std::abs(g(x) - g(-x)) > 1e-12 * std::max(1.0, std::abs(g(x)))) {
      std::ostringstream os;
      os << "g(" << x << ") != g(" << -x << ")";
      throw NotEven(os.str());
    }
  }
  if (std::abs(g(0.0)) > 1e-14) throw NonzeroOrigin("g(0) must vanish");
  if (c == 0.0) return 0.0;
  if (std::abs(c) < 1e-6) return 0.5 * d2g(c) * c;
  return dg(c) - g(c) / c;
}

double op_average(const RealFn& g, double z, double c) {
  if (c == z) return g(z);
  return integrate(g, c, z, 4, 16) / (z - c);
}

double II_2(const ShearProfile& profile, double c) {
  interior_c_tilde(profile, c);
  const double yc = profile.y_of(c);
  const double a = profile.du(yc);
  const double kappa = profile.d2u(yc) / (a * a);
  const auto& cu = profile.coefficients();
  const auto cdu = derivative_coeffs(cu);
  auto remainder = [&](double y) {
    const double s = y - yc;
    const double q0 = divided_difference(cu, y, yc);
    const double q1 = divided_difference(cdu, y, yc);
    return (q1 / (q0 * q0) - kappa) / s;
  };
  double sum = integrate_two_sided(remainder, 0.0, yc) + integrate_two_sided(remainder, yc, 1.0);
  return sum + kappa * std::log((1.0 - yc) / yc);
}

double II_3(const RayleighSolution& sol) {
  const CriticalGrid& grid = *sol.grid;
  const auto& cv = sol.cv;
  if (cv.c.imag() != 0.0) throw OutOfRange("II_3 requires real c");
  if (!(cv.y_c > 0.0)) throw OutOfRange("II_3 diverges at y_c = 0");
  const std::size_t n = grid.size();
  const std::size_t ic = grid.critical_index();
  const double a = cv.du_c;
  std::vector<cplx> r(n);
  const auto& sn = grid.shifted_nodes();
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = i == ic ? cplx(sol.alpha * sol.alpha / (6.0 * a * a)) : sol.phi1_minus_one[i] / (sn[i] * sn[i]);
  }
  std::span<const cplx> rs(r);
  std::span<const cplx> ms(sol.phi1_minus_one);
  cplx v = grid.integrate([&](std::size_t cell, int q) {
    cplx m = grid.interp(ms, cell, q);
    cplx p = 1.0 + m;
    return -grid.interp(rs, cell, q) * (2.0 + m) / (p * p);
  });
  return v.real();
}

cplx II_11(const IntProfile& ip, const SqrtCoordinate& sq, double c, double gap) {
  const double ct = interior_c_tilde(sq.profile(), c);
  const double v1 = sq.v1();
  ComplexFn g = [&](double z) { return ip.g(z); };
  ComplexFn dg = [&](double z) { return ip.dg(z); };
  const cplx H = hilbert_pv(g, ct, v1, gap);
  const cplx Hp = hilbert_pv_derivative_even(g, dg, ct, v1, gap);
  const cplx dQ = (H / (2.0 * ct * ct) - Hp / (2.0 * ct)) / (2.0 * ct);
  const PVInverse pv = pv_inverse(sq, c, gap);
  return dQ - ip(sq.inverse(ct)) * pv.dP;
}

cplx II_12(const ComplexFn& phi, const RayleighSolution& sol) {
  const CriticalGrid& grid = *sol.grid;
  const std::size_t n = grid.size();
  const std::size_t ic = grid.critical_index();
  std::span<const cplx> ms(sol.phi1_minus_one);
  std::vector<cplx> phq(grid.cells() * CriticalGrid::kQuad);
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    for (int q = 0; q < CriticalGrid::kQuad; ++q) phq[c * CriticalGrid::kQuad + q] = phi(grid.quad_point(c, q));
  }
  auto D = grid.cumulative_from_critical(
      [&](std::size_t c, int q) { return phq[c * CriticalGrid::kQuad + q] * grid.interp(ms, c, q); });
  auto P0 = grid.cumulative_from_critical([&](std::size_t c, int q) { return phq[c * CriticalGrid::kQuad + q]; });
  const auto& sn = grid.shifted_nodes();
  std::vector<cplx> ratio(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == ic) {
      ratio[i] = 0.0;
      continue;
    }
    const cplx m = sol.phi1_minus_one[i];
    const cplx p2 = sol.phi1[i] * sol.phi1[i];
    const cplx N = D[i] / p2 - P0[i] * m * (2.0 + m) / p2;
    ratio[i] = N / (sn[i] * sn[i]);
  }
  std::span<const cplx> rs(ratio);
  return grid.integrate([&](std::size_t c, int q) { return grid.interp(rs, c, q); });
}

cplx E_op(const ComplexFn& phi, const RayleighSolution& sol) {
  const CriticalGrid& grid = *sol.grid;
  std::span<const cplx> ps(sol.phi1);
  auto cum = grid.cumulative_from_critical(
      [&](std::size_t c, int q) { return phi(grid.quad_point(c, q)) * grid.interp(ps, c, q); });
  return cum.front();
}

} // namespace raydamp
