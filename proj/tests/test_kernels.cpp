#include "doctest.h"

#include "oracles.hpp"

#include "raydamp/errors.hpp"
#include "raydamp/kernels.hpp"

#include <cmath>

using namespace raydamp;

namespace {

ShearProfile poiseuille() { return build_profile({"poiseuille"}); }

TestFunctionPair odd_sine() {
  return {Channel::Odd, [](double y) { return cplx(std::sin(kPi * y)); },
          [](double y) { return cplx(kPi * std::cos(kPi * y)); },
          [](double y) { return cplx(-kPi * kPi * std::sin(kPi * y)); }};
}

TestFunctionPair even_cosine() {
  return {Channel::Even, [](double y) { return cplx(std::cos(0.5 * kPi * y)); },
          [](double y) { return cplx(-0.5 * kPi * std::sin(0.5 * kPi * y)); },
          [](double y) { return cplx(-0.25 * kPi * kPi * std::cos(0.5 * kPi * y)); }};
}

KernelOptions small(std::size_t n) {
  KernelOptions o;
  o.spectral.n_half = n;
  o.spectral.rayleigh.n_uniform = 513;
  return o;
}

} // namespace

TEST_CASE("test function parity contracts") {
  CHECK_NOTHROW(odd_sine().validate());
  CHECK_NOTHROW(even_cosine().validate());
  auto bad = even_cosine();
  bad.channel = Channel::Odd;
  CHECK_THROWS_AS(bad.validate(), ParityViolation);
  TestFunctionPair tilted{Channel::Even, [](double y) { return cplx(1.0 - y); }, [](double) { return cplx(-1.0); },
                          [](double) { return cplx(0.0); }};
  CHECK_THROWS_AS(tilted.validate(), ParityViolation);
  KernelInputs in;
  in.g_e = tilted;
  CHECK_THROWS_AS(build_kernels(poiseuille(), 1.0, in, small(16)), ParityViolation);
}

TEST_CASE("vorticity split") {
  VorticityData d{[](double y) { return cplx(std::exp(y), y * y); }};
  for (double y : {0.0, 0.3, 0.9}) {
    CHECK(std::abs(d.odd(y) + d.even(y) - d.omega0(y)) < 1e-15);
    CHECK(std::abs(d.odd(-y) + d.odd(y)) < 1e-15);
  }
  CHECK(d.odd(0.0) == cplx{});
}

TEST_CASE("Lambda operators at single nodes") {
  auto p = poiseuille();
  SqrtCoordinate sq(p);
  auto sol0 = solve_phi1(p, 0.0, critical_value(p, 0.25));
  auto row0 = spectral_row(sq, sol0, 0.0);

  auto zero = singular_parts(ComplexFn{}, sq, sol0, 0.0, true);
  CHECK(lambda_1(zero, row0).total() == cplx{});
  CHECK(lambda_2(zero, cplx{}, row0).total() == cplx{});

  ComplexFn w = [](double y) { return cplx(std::cos(kPi * y) + y); };
  auto wp = singular_parts(w, sq, sol0, 0.0, false);
  CHECK(std::abs(wp.II12) < 1e-15);
  auto L1 = lambda_1(wp, row0);
  CHECK(std::abs(L1.second) < 1e-15);
  CHECK(std::abs(L1.total() - (row0.A1 * wp.at_critical + row0.cv.rho * 2.0 * wp.II11)) < 1e-15);

  // Lambda_2 at alpha = 0 against a direct principal value of its definition.
  auto g = odd_sine();
  ComplexFn gu2 = [&](double y) { return 2.0 * g.g(y); };
  auto gp = singular_parts(gu2, sq, sol0, 0.0, false);
  const double yc = 0.5;
  auto Int = [](double y) { return 2.0 * (1.0 - std::cos(kPi * y)) / kPi; };
  auto f = [&](double y) {
    if (y == yc) return 2.0 * std::sin(kPi * yc) / std::pow(2 * yc, 2);
    return (Int(y) - Int(yc)) / (y - yc) / std::pow(y + yc, 2);
  };
  double II11 = oracle::cauchy_pv(f, 0.0, 1.0, yc, 1e-11);
  double want = row0.A1 * std::sin(kPi * yc) + row0.cv.rho * II11;
  CHECK(lambda_2(gp, g.g(yc), row0).total().real() == doctest::Approx(want).epsilon(1e-5));

  // omega_e = 1 at alpha = 0: u''/u' E + omega(y_c) cancels exactly.
  ComplexFn one = [](double) { return cplx(1.0); };
  auto ep = singular_parts(one, sq, sol0, 0.0, true);
  CHECK(ep.E.real() == doctest::Approx(-0.5));
  CHECK(std::abs(row0.cv.d2u_c / row0.cv.du_c * ep.E + ep.at_critical) < 1e-13);
}

TEST_CASE("Lambda_3 and Lambda_4 decompositions") {
  auto p = poiseuille();
  SqrtCoordinate sq(p);
  auto sol = solve_phi1(p, 1.0, critical_value(p, 0.36));
  auto row = spectral_row(sq, sol, 0.0);
  ComplexFn w = [](double y) { return cplx(std::cos(0.5 * kPi * y)); };
  auto wp = singular_parts(w, sq, sol, 0.0, true);
  auto L3 = lambda_3(wp, row);
  CHECK(std::abs(L3.second + row.cv.rho1 * lambda_1(wp, row).total()) < 1e-15);
  CHECK(std::abs(L3.first - row.J * (row.cv.d2u_c / row.cv.du_c * wp.E + wp.at_critical)) < 1e-15);
  auto g = even_cosine();
  ComplexFn gu2 = [&](double y) { return 2.0 * g.g(y); };
  auto gp = singular_parts(gu2, sq, sol, 0.0, true);
  auto L4 = lambda_4(gp, g.g(row.cv.y_c), row);
  CHECK(std::abs(L4.second + row.cv.rho1 * lambda_2(gp, g.g(row.cv.y_c), row).total()) < 1e-15);
  // Near c = u(0) the -rho1 Lambda_1 part vanishes linearly in rho1.
  double prev = 0.0;
  for (double c : {1e-4, 1e-6}) {
    auto s = solve_phi1(p, 1.0, critical_value(p, c));
    auto r = spectral_row(sq, s, 0.0);
    double part = std::abs(lambda_3(singular_parts(w, sq, s, 0.0, true), r).second);
    if (prev > 0.0) CHECK(part / prev == doctest::Approx(1e-2).epsilon(0.05));
    prev = part;
  }
}

TEST_CASE("kernels on a coarse grid") {
  auto p = poiseuille();
  KernelInputs in;
  in.omega_o = [](double y) { return cplx(std::sin(kPi * y)); };
  in.omega_e = [](double y) { return cplx(std::cos(0.5 * kPi * y)); };
  in.g_o = odd_sine();
  in.g_e = even_cosine();
  auto kt = build_kernels(p, 1.0, in, small(128));
  auto ct = kt.c_tilde();
  for (Channel ch : {Channel::Odd, Channel::Even}) {
    auto K = kt.K(ch);
    auto n = kernel_norms(ct, K);
    CHECK(n.max_abs > 0.0);
    CHECK(n.first_abs < 1e-2 * n.max_abs);
    CHECK(n.last_abs < 1e-2 * n.max_abs);
    for (const cplx& k : K) CHECK(std::abs(k.imag()) <= 1e-12 * n.max_abs);
  }
  // Lambda_2 tends to zero toward c = u(1).
  CHECK(std::abs(kt.rows.back().L2.total()) < 1e-2 * std::abs(kt.rows[64].L2.total()));

  // Bilinearity.
  KernelInputs scaled = in;
  scaled.omega_o = [](double y) { return cplx(0.0, -3.0) * std::sin(kPi * y); };
  scaled.omega_e = {};
  scaled.g_e = {Channel::Even, {}, {}, {}};
  auto ks = build_kernels(p, 1.0, scaled, small(128));
  const double kmax = kernel_norms(ct, kt.K(Channel::Odd)).max_abs;
  for (std::size_t i = 0; i < kt.rows.size(); ++i)
    CHECK(std::abs(ks.rows[i].K_o - cplx(0.0, -3.0) * kt.rows[i].K_o) <= 1e-13 * kmax);

  // Zero data.
  KernelInputs none;
  none.g_o = odd_sine();
  auto kz = build_kernels(p, 1.0, none, small(32));
  for (const auto& r : kz.rows) CHECK(r.K_o == cplx{});
}

TEST_CASE("kernel norms under c-grid doubling") {
  auto p = poiseuille();
  KernelInputs in;
  in.omega_o = [](double y) { return cplx(std::sin(kPi * y)); };
  in.omega_e = [](double y) { return cplx(std::cos(0.5 * kPi * y)); };
  in.g_o = odd_sine();
  in.g_e = even_cosine();
  auto a = build_kernels(p, 2.0, in, small(128));
  auto b = build_kernels(p, 2.0, in, small(256));
  for (Channel ch : {Channel::Odd, Channel::Even}) {
    auto na = kernel_norms(a.c_tilde(), a.K(ch));
    auto nb = kernel_norms(b.c_tilde(), b.K(ch));
    CHECK(std::abs(nb.L1 / na.L1 - 1.0) < 0.05);
    CHECK(std::abs(nb.dL1 / na.dL1 - 1.0) < 0.1);
    CHECK(std::isfinite(nb.d2L1));
  }
}
