#include "doctest.h"

#include "raydamp/errors.hpp"
#include "raydamp/profiles.hpp"

#include <cmath>

using namespace raydamp;

namespace {

ShearProfile poiseuille() { return build_profile({"poiseuille"}); }

} // namespace

TEST_CASE("poiseuille values and derivatives") {
  auto p = poiseuille();
  CHECK(p.u(0.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p.du(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  for (double y : {-1.0, -0.3, 0.0, 0.7, 1.0}) CHECK(p.d2u(y) == 2.0);
  CHECK(p.validation().c0 >= 1.0 - 1e-12);
  CHECK(p.validation().ratio_bound >= 1.0);
  CHECK(std::isfinite(p.validation().ratio_bound));
}

TEST_CASE("class violations") {
  ProfileDescriptor couette{"couette"};
  CHECK_THROWS_AS(build_profile(couette), ClassViolation);
  ProfileDescriptor odd{"odd_part", "poly_even", {0.0, 1.0}};
  CHECK_NOTHROW(build_profile(odd));
  ShearProfile skew("skew", {0.0, 0.0, 1.0, 0.3}, ProfileClass::S);
  CHECK_THROWS_AS(validate_profile(skew), NonSymmetric);
  ProfileDescriptor unknown{"nope"};
  CHECK_THROWS_AS(build_profile(unknown), ClassViolation);
  couette.requested = ProfileClass::K;
  CHECK_NOTHROW(build_profile(couette));
}

TEST_CASE("square-root coordinate") {
  SqrtCoordinate sq(poiseuille());
  for (double y : linspace(0.0, 1.0, 11)) {
    CHECK(sq.v(y) == doctest::Approx(y).epsilon(1e-14));
    CHECK(sq.dv(y) == doctest::Approx(1.0).epsilon(1e-13));
  }
  CHECK(sq.v1() == doctest::Approx(1.0));
  for (double z : {-0.9, -0.2, 0.3, 0.8}) CHECK(sq.dinverse(z) == doctest::Approx(1.0).epsilon(1e-13));

  SqrtCoordinate sq2(build_profile({"scaled_poiseuille", "builtin", {2.0, 0.0}}));
  CHECK(sq2.v(0.4) == doctest::Approx(std::sqrt(2.0) * 0.4).epsilon(1e-14));
  CHECK(sq2.c1() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("square-root coordinate on a quartic profile") {
  auto p = build_profile({"quartic", "poly_even", {0.0, 1.0, 0.5}});
  SqrtCoordinate sq(p);
  for (double y : linspace(0.0, 1.0, 257)) {
    double v = sq.v(y);
    CHECK(std::abs(v * v - (p.u(y) - p.u0())) < 1e-12 * std::max(1.0, std::abs(p.u(y))));
    CHECK(sq.v(-y) == doctest::Approx(-v));
    CHECK(sq.inverse(v) == doctest::Approx(y).epsilon(1e-11));
  }
  // v' against a centered difference.
  for (double y : {0.1, 0.5, 0.9}) {
    const double h = 1e-5;
    CHECK(sq.dv(y) == doctest::Approx((sq.v(y + h) - sq.v(y - h)) / (2 * h)).epsilon(1e-8));
    CHECK(sq.d2v(y) == doctest::Approx((sq.dv(y + h) - sq.dv(y - h)) / (2 * h)).epsilon(1e-7));
  }
}

TEST_CASE("inverse map consistency") {
  auto p = build_profile({"quartic", "poly_even", {0.1, 1.0, 0.5}});
  for (double y : linspace(0.0, 1.0, 1001)) CHECK(std::abs(p.y_of(p.u(y)) - y) < 1e-10);
  CHECK_THROWS_AS(p.y_of(p.u1() + 1e-3), OutOfRange);
}

TEST_CASE("critical values") {
  auto p = poiseuille();
  auto cv = critical_value(p, 0.25);
  CHECK(cv.y_c == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cv.c_tilde == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cv.rho == doctest::Approx(0.1875));
  CHECK(cv.rho0 == doctest::Approx(0.1875));
  auto c0 = critical_value(p, 0.0);
  CHECK(c0.y_c == 0.0);
  CHECK(c0.rho == 0.0);
  auto c64 = critical_value(p, 0.64);
  CHECK(c64.y_c == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(c64.rho == doctest::Approx(0.2304));
  CHECK_THROWS_AS(critical_value(p, 1.5), OutOfRange);
  CHECK_THROWS_AS(critical_value(p, cplx(0.25, 0.1), DomainTag::D0), OutOfRange);
  auto ce = critical_value(p, cplx(0.25, 0.1), DomainTag::DEps);
  CHECK(ce.c_r == 0.25);
}
