#include "doctest.h"

#include "raydamp/errors.hpp"
#include "raydamp/oracle.hpp"
#include "raydamp/spectral_quantities.hpp"

#include <cmath>
#include <sstream>

using namespace raydamp;

namespace {

ShearProfile poiseuille() { return build_profile({"poiseuille"}); }

SpectralOptions small(std::size_t n_half) {
  SpectralOptions o;
  o.n_half = n_half;
  o.rayleigh.n_uniform = 513;
  return o;
}

double ratio_window(const SpectralTables& t, bool second) {
  double lo = INFINITY, hi = 0.0;
  const double a = t.alpha;
  for (const auto& r : t.rows) {
    const double w = 1.0 + a * r.cv.rho0;
    double q = second ? (r.A2 * r.A2 + r.B2 * r.B2) * std::pow(a, 4) / (w * w * std::pow(1 + a * r.cv.y_c, 4))
                      : (r.A * r.A + r.B * r.B) / (w * w);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  return std::max(hi, 1.0 / lo);
}

} // namespace

TEST_CASE("B and A at single nodes") {
  auto p = poiseuille();
  SqrtCoordinate sq(p);
  auto sol = solve_phi1(p, 1.0, critical_value(p, 0.25));
  auto row = spectral_row(sq, sol, 0.0);
  CHECK(row.B == doctest::Approx(0.375 * kPi).epsilon(1e-14));
  for (double c : {0.1, 0.5, 0.9}) {
    auto r = spectral_row(sq, solve_phi1(p, 1.0, critical_value(p, c)), 0.0);
    CHECK(r.B == doctest::Approx(0.5 * kPi * (1.0 - c)).epsilon(1e-13));
    CHECK(r.A == doctest::Approx(r.A1 + r.cv.du_c * r.cv.rho * r.II3).epsilon(1e-15));
    CHECK(r.A2 == doctest::Approx(-c * r.A + r.J).epsilon(1e-15));
    CHECK(r.B2 == doctest::Approx(-c * r.B).epsilon(1e-15));
    CHECK(r.identity_residual < 1e-9);
  }
  auto r0 = spectral_row(sq, solve_phi1(p, 0.0, critical_value(p, 0.25)), 0.0);
  CHECK(r0.A == r0.A1);
}

TEST_CASE("J against the series solution and its y_c -> 0 limit") {
  auto p = poiseuille();
  const double alpha = 1.5;
  for (double c : {0.04, 0.3, 0.8}) {
    auto cv = critical_value(p, c);
    auto bv = boundary_values(p, alpha, cv);
    double J = compute_J(p, alpha, cv, bv);
    auto ref = phi1_ivp(p, alpha, c, 0.0);
    CHECK(J == doctest::Approx(cv.du_c * (1 - c) / (ref.phi1 * ref.dphi1)).epsilon(1e-6));
    CHECK(J < 0.0);
  }
  const double limit = -15.0 * 2.0 / (8.0 * alpha * alpha);
  auto cv0 = critical_value(p, 0.0);
  bool lim = false;
  CHECK(compute_J(p, alpha, cv0, boundary_values(p, alpha, cv0), &lim) == doctest::Approx(limit));
  CHECK(lim);
  auto cvs = critical_value(p, 1e-6);
  CHECK(compute_J(p, alpha, cvs, boundary_values(p, alpha, cvs)) == doctest::Approx(limit).epsilon(1e-4));
  auto cv1 = critical_value(p, 1.0 - 1e-8);
  CHECK(std::abs(compute_J(p, alpha, cv1, boundary_values(p, alpha, cv1))) < 1e-6);
}

TEST_CASE("tables for poiseuille") {
  auto p = poiseuille();
  auto t = build_spectral_tables(p, 1.0, small(128));
  REQUIRE(t.rows.size() == 128);
  const auto& last = t.rows.back();
  CHECK(std::abs(last.A1 - (p.u0() - p.u1())) < 1e-4);
  const auto& first = t.rows.front();
  CHECK(std::abs(first.A2 - first.J) < 1e-4 * std::abs(first.J));
  CHECK(std::abs(first.B2) < 1e-4);
  double fitted = 0.0;
  for (const auto& r : t.rows) {
    CHECK(std::isfinite(r.A));
    CHECK(std::isfinite(r.A2));
    CHECK(r.identity_residual < 1e-6);
    CHECK(r.J < 0.0);
    fitted = std::max(fitted, std::abs(r.A1) / (r.cv.c_tilde * r.cv.c_tilde));
    // J bound with the same fitted-constant protocol is checked below.
  }
  CHECK(fitted < 10.0);
  std::ostringstream os;
  write_csv(t, os);
  std::string header;
  std::getline(std::istringstream(os.str()), header);
  CHECK(header == "c,y_c,A1,A,B,J,A2,B2,II2,II3");
}

TEST_CASE("A1 matches the closed form for poiseuille") {
  auto p = poiseuille();
  SqrtCoordinate sq(p);
  auto g = make_pv_grid(sq.v1(), 64);
  for (double ct : g.positive()) {
    const double c = ct * ct;
    double want = -0.5 * (1.0 - c) * std::log((1.0 - ct) / (1.0 + ct)) - ct;
    CHECK(compute_A1(sq, c, g.endpoint_gap) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("J bound and lower bounds are refinement stable") {
  auto p = poiseuille();
  for (double alpha : {1.0, 4.0}) {
    auto coarse = build_spectral_tables(p, alpha, small(64));
    auto fine = build_spectral_tables(p, alpha, small(128));
    for (bool second : {false, true}) {
      double c1 = ratio_window(coarse, second);
      double c2 = ratio_window(fine, second);
      CHECK(c1 < 1e3);
      CHECK(c2 < 2.0 * c1);
    }
    double cj = 0.0;
    for (const auto& r : fine.rows)
      cj = std::max(cj, std::abs(r.J) * r.phi1_at_0 * alpha * alpha / (1.0 - r.cv.y_c));
    CHECK(cj < 10.0);
  }
}

TEST_CASE("no embedding candidates for poiseuille") {
  auto p = poiseuille();
  for (double alpha : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    auto t = build_spectral_tables(p, alpha, small(64));
    auto s = scan_embedding(t);
    CHECK(s.candidates.empty());
    CHECK(s.min_AB > 1e-8);
    CHECK(s.min_A2B2 > 1e-8);
  }
}

TEST_CASE("II3 stencil derivatives are bounded") {
  auto p = poiseuille();
  const double alpha = 2.0;
  auto t = build_spectral_tables(p, alpha, small(128));
  auto ct = t.c_tilde();
  std::vector<double> ii3;
  for (const auto& r : t.rows) ii3.push_back(r.II3);
  auto d1 = c_derivative(ct, ii3);
  auto d2 = c_derivative(ct, d1);
  double worst1 = 0.0, worst2 = 0.0;
  for (std::size_t i = 4; i + 4 < ct.size(); ++i) {
    const auto& cv = t.rows[i].cv;
    double bound = std::min(alpha * alpha / cv.du_c, alpha / (cv.du_c * cv.du_c));
    worst1 = std::max(worst1, cv.rho * std::abs(d1[i]) / bound);
    worst2 = std::max(worst2, cv.rho * cv.rho * std::abs(d2[i]) / bound);
  }
  CHECK(worst1 < 50.0);
  CHECK(worst2 < 50.0);
}

TEST_CASE("c derivative of polynomials") {
  std::vector<double> ct = linspace(0.1, 0.9, 33);
  std::vector<double> v;
  for (double x : ct) v.push_back(std::pow(x * x, 2)); // c^2
  auto d = c_derivative(ct, v);
  for (std::size_t i = 0; i < ct.size(); ++i) CHECK(d[i] == doctest::Approx(2 * ct[i] * ct[i]).epsilon(1e-10));
}
