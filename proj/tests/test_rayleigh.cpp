#include "doctest.h"

#include "raydamp/errors.hpp"
#include "raydamp/oracle.hpp"
#include "raydamp/rayleigh.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

using namespace raydamp;

namespace {

ShearProfile poiseuille() { return build_profile({"poiseuille"}); }

// Nested adaptive quadrature of the double integral defining T applied to 1.
double T_one_oracle(const ShearProfile& p, double c, double y) {
  using boost::math::quadrature::gauss_kronrod;
  const double yc = p.y_of(c);
  auto inner = [&](double yp) {
    auto g = [&](double z) { double s = p.u(z) - c; return s * s; };
    double G = gauss_kronrod<double, 31>::integrate(g, yc, yp, 10, 1e-14);
    double s = p.u(yp) - c;
    return G / (s * s);
  };
  return gauss_kronrod<double, 31>::integrate(inner, yc, y, 10, 1e-13);
}

} // namespace

TEST_CASE("T of zero and at the critical point") {
  auto p = poiseuille();
  auto cv = critical_value(p, 0.25);
  CriticalGrid grid(p, cv, 257);
  std::vector<cplx> zero(grid.size(), cplx{});
  for (const cplx& v : apply_T(grid, zero)) CHECK(v == cplx{});
  std::vector<cplx> one(grid.size(), cplx{1.0});
  auto t = apply_T(grid, one);
  CHECK(t[grid.critical_index()] == cplx{});
}

TEST_CASE("T of one against nested adaptive quadrature") {
  auto p = poiseuille();
  auto cv = critical_value(p, 0.25);
  CriticalGrid grid(p, cv, 1025);
  std::vector<cplx> one(grid.size(), cplx{1.0});
  auto t = apply_T(grid, one);
  for (double y : {0.0, 0.75, 1.0}) {
    cplx got = grid.value_at(std::span<const cplx>(t), y);
    double want = T_one_oracle(p, 0.25, y);
    CHECK(std::abs(got - want) <= 1e-8 * std::abs(want));
    CHECK(std::abs(got.imag()) < 1e-14);
  }
  // Same through caller-provided nodes.
  std::vector<double> nodes = linspace(0.0, 1.0, 401);
  std::vector<cplx> f(nodes.size(), cplx{1.0});
  auto t2 = apply_T(p, cv, nodes, f);
  CHECK(std::abs(t2.back() - T_one_oracle(p, 0.25, 1.0)) < 1e-8);
  std::vector<double> bad = {0.0, 0.5 + 1e-11, 1.0};
  std::vector<cplx> fb(3, cplx{1.0});
  CHECK_THROWS_AS(apply_T(p, cv, bad, fb), SingularEvaluation);
}

TEST_CASE("phi1 with alpha zero") {
  auto p = poiseuille();
  auto sol = solve_phi1(p, 0.0, critical_value(p, 0.25));
  for (const cplx& v : sol.phi1) CHECK(v == cplx{1.0});
  auto ld = log_derivatives(p, sol);
  for (const cplx& v : ld.F) CHECK(v == cplx{});
  auto bv = boundary_values(sol);
  CHECK(bv.phi1_at_0 == cplx{1.0});
  CHECK(bv.dphi1_at_0 == cplx{});
}

TEST_CASE("phi1 for poiseuille at c = 0.25") {
  auto p = poiseuille();
  const double alpha = 1.0;
  auto cv = critical_value(p, 0.25);
  RayleighOptions opt;
  auto sol = solve_phi1(p, alpha, cv, opt);
  const std::size_t ic = sol.grid->critical_index();
  CHECK(sol.phi1[ic] == cplx{1.0});
  CHECK(sol.fixed_point_residual < 10 * opt.tol);
  for (std::size_t i = 0; i < sol.y.size(); ++i) {
    CHECK(sol.phi1[i].real() >= 1.0 - 1e-10);
    CHECK(std::abs(sol.phi1[i].imag()) < 1e-14);
    if (i > ic) CHECK(sol.dphi1[i].real() > 0.0);
    if (i < ic) CHECK(sol.dphi1[i].real() < 0.0);
  }
  for (double y : {0.0, 0.2, 0.49, 0.51, 0.8, 1.0}) {
    Phi1Value ref = phi1_ivp(p, alpha, 0.25, y);
    CHECK(std::abs(sol.phi1_at(y).real() - ref.phi1) < 1e-6 * ref.phi1);
    CHECK(std::abs(sol.dphi1_at(y).real() - ref.dphi1) < 1e-6 * std::max(1.0, std::abs(ref.dphi1)));
  }

  auto ld = log_derivatives(p, sol, opt);
  CHECK(ld.F[ic] == cplx{});
  CHECK(ld.G[ic] == cplx{});
  CHECK(ld.G1[ic] == cplx{});
  CHECK(std::abs(ld.slope_at_critical.real() - alpha * alpha / 3.0) < 1e-3 * alpha * alpha / 3.0);
  CHECK(ld.riccati_residual < 1e-4 * alpha * alpha);
  for (const cplx& F : ld.F) CHECK(std::abs(F) <= alpha);

  // F(0) < 0 and of size alpha min(alpha y_c, 1).
  cplx F0 = ld.F.front();
  CHECK(F0.real() < 0.0);
  double scale = alpha * std::min(alpha * cv.y_c, 1.0);
  CHECK(std::abs(F0) < 10 * scale);
  CHECK(std::abs(F0) > scale / 10);
}

TEST_CASE("G against the c-derivative of the series solution") {
  auto p = poiseuille();
  const double alpha = 1.0;
  const double c = 0.36;
  auto sol = solve_phi1(p, alpha, critical_value(p, c));
  auto ld = log_derivatives(p, sol);
  const double hc = 1e-5;
  for (double y : {0.0, 0.3, 0.9, 1.0}) {
    std::size_t i = static_cast<std::size_t>(
        std::lower_bound(sol.y.begin(), sol.y.end(), y - 1e-15) - sol.y.begin());
    double d = (phi1_ivp(p, alpha, c + hc, sol.y[i]).phi1 - phi1_ivp(p, alpha, c - hc, sol.y[i]).phi1) / (2 * hc);
    double want = d / phi1_ivp(p, alpha, c, sol.y[i]).phi1;
    CHECK(std::abs(ld.G[i].real() - want) < 1e-5 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("boundary values near the origin") {
  auto p = poiseuille();
  auto bv = boundary_values(p, 1.0, critical_value(p, 0.0));
  CHECK(bv.dphi1_at_0 == cplx{});
  CHECK(bv.phi1_at_0 == cplx{1.0});
  auto near = boundary_values(p, 1.0, critical_value(p, 1e-6));
  CHECK(std::abs(near.dphi1_at_0) < 1e-3);
}

TEST_CASE("complex c conjugate symmetry") {
  auto p = poiseuille();
  auto a = solve_phi1(p, 1.0, critical_value(p, cplx(0.3, 0.05), DomainTag::DEps));
  auto b = solve_phi1(p, 1.0, critical_value(p, cplx(0.3, -0.05), DomainTag::DEps));
  for (std::size_t i = 0; i < a.y.size(); ++i) CHECK(std::abs(a.phi1[i] - std::conj(b.phi1[i])) < 1e-13);
}

TEST_CASE("unresolved wavenumber is refused") {
  auto p = poiseuille();
  RayleighOptions opt;
  opt.n_uniform = 65;
  CHECK_THROWS_AS(solve_phi1(p, 100.0, critical_value(p, 0.25), opt), NoConvergence);
}

TEST_CASE("grid refinement") {
  auto p = poiseuille();
  auto cv = critical_value(p, 0.49);
  RayleighOptions coarse;
  coarse.n_uniform = 257;
  RayleighOptions fine;
  fine.n_uniform = 513;
  auto a = solve_phi1(p, 2.0, cv, coarse);
  auto b = solve_phi1(p, 2.0, cv, fine);
  double diff = 0.0;
  for (double y : linspace(0.0, 1.0, 41)) diff = std::max(diff, std::abs(a.phi1_at(y) - b.phi1_at(y)));
  // Fourth-order model with a generous constant.
  CHECK(diff < 4.0 * std::pow(1.0 / 256.0, 4) * 1e3);
}
