#include "doctest.h"

#include "oracles.hpp"

#include "raydamp/errors.hpp"
#include "raydamp/evolution.hpp"
#include "raydamp/oracle.hpp"

#include <cmath>
#include <sstream>

using namespace raydamp;

namespace {

ShearProfile poiseuille() { return build_profile({"poiseuille"}); }

RepresentationOptions small(std::size_t n_half) {
  RepresentationOptions o;
  o.spectral.n_half = n_half;
  o.spectral.rayleigh.n_uniform = 513;
  return o;
}

std::vector<double> uniform(std::size_t n) {
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
  return y;
}

// int_a^b (p0 + p1 x + p2 x^2) e^{-i w x} dx from the antiderivative -sum p^(k) / (i w)^(k+1).
cplx poly_exp(double p0, double p1, double p2, double w, double a, double b) {
  auto F = [&](double x) {
    if (w == 0.0) return cplx(p0 * x + p1 * x * x / 2 + p2 * x * x * x / 3);
    const cplx iw(0.0, w);
    const cplx q = -(p0 + p1 * x + p2 * x * x) / iw - (p1 + 2 * p2 * x) / (iw * iw) - 2 * p2 / (iw * iw * iw);
    return std::exp(-iw * x) * q;
  };
  return F(b) - F(a);
}

double rel_l2(const std::vector<double>& y, const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<cplx> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return trapezoid_l2(y, d) / trapezoid_l2(y, b);
}

} // namespace

TEST_CASE("Filon weights integrate quadratics exactly") {
  std::vector<double> x = {0.0, 0.03, 0.1, 0.22, 0.4, 0.45, 0.7, 0.9, 1.3};
  for (double w : {0.0, 2.5, 40.0, -17.0}) {
    auto wt = filon_weights(x, w);
    cplx s{};
    for (std::size_t k = 0; k < x.size(); ++k) s += wt[k] * (0.3 - x[k] + 2.0 * x[k] * x[k]);
    const cplx want = poly_exp(0.3, -1.0, 2.0, w, x.front(), x.back());
    CHECK(std::abs(s - want) < 1e-13 * std::max(1.0, std::abs(want)));
  }
  CHECK_THROWS_AS(filon_weights(x, 1e4, 8), UnderResolved);
  CHECK_THROWS_AS(filon_weights(std::vector<double>{0.0, 1.0}, 1.0), ConfigError);
}

TEST_CASE("Filon weights on a smooth amplitude") {
  std::vector<double> x(201);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::pow(static_cast<double>(k) / 200.0, 1.5);
  const double w = 30.0;
  auto wt = filon_weights(x, w);
  cplx s{};
  for (std::size_t k = 0; k < x.size(); ++k) s += wt[k] * std::exp(-x[k]) * std::cos(2 * x[k]);
  const double re = oracle::adaptive([&](double t) { return std::exp(-t) * std::cos(2 * t) * std::cos(w * t); }, 0, 1);
  const double im = oracle::adaptive([&](double t) { return -std::exp(-t) * std::cos(2 * t) * std::sin(w * t); }, 0, 1);
  CHECK(std::abs(s - cplx(re, im)) < 1e-6);
}

TEST_CASE("limit coefficients at a single node") {
  auto p = poiseuille();
  SqrtCoordinate sq(p);
  const double alpha = 1.5;
  for (double c : {0.05, 0.36, 0.8}) {
    auto sol = solve_phi1(p, alpha, critical_value(p, c));
    auto row = spectral_row(sq, sol, 0.0);
    ComplexFn wo = [](double y) { return cplx(std::sin(kPi * y)); };
    ComplexFn we = [](double y) { return cplx(std::cos(0.5 * kPi * y) + y * y); };
    auto cc = channel_coefficients(singular_parts(wo, sq, sol, 0.0, false), singular_parts(we, sq, sol, 0.0, true),
                                   row.cv);
    auto L = limit_coefficients(row, alpha, cc);
    // Real data: the two limits are conjugate up to sign.
    CHECK(std::abs(L.mu_o_minus + std::conj(L.mu_o_plus)) < 1e-12 * std::abs(L.mu_o_plus));
    CHECK(std::abs(L.mu_e_minus + std::conj(L.mu_e_plus)) < 1e-12 * std::abs(L.mu_e_plus));
    CHECK(std::abs(L.nu_e_minus + std::conj(L.nu_e_plus)) < 1e-12 * std::abs(L.nu_e_plus));
    const double C = cc.C_o.real(), D = cc.D_o.real();
    const double jump = 2.0 * (C * row.A + D * row.B) / (alpha * (row.A * row.A + row.B * row.B));
    CHECK(std::abs(L.mu_o_minus - L.mu_o_plus - jump) < 1e-12 * std::abs(jump));
    CHECK(std::abs(L.mu1 * 2.0 * row.cv.rho / alpha - jump) < 1e-12 * std::abs(jump));
    const double q = -row.cv.rho1;
    const double phiphi = q * q * row.phi1_at_0 * row.dphi1_at_0;
    CHECK(std::abs(L.mu2 + phiphi * L.nu1) < 1e-10 * std::abs(L.mu2));
    CHECK(L.denominator_residual < 1e-8);
  }
  auto sol = solve_phi1(p, alpha, critical_value(p, 0.36));
  auto row = spectral_row(sq, sol, 0.0);
  CHECK_THROWS_AS(limit_coefficients(row, alpha, {}, 1e12), SpectralDegeneracy);
  CHECK_THROWS_AS(limit_coefficients(row, 0.0, {}), ConfigError);
}

TEST_CASE("representation against the matrix exponential") {
  auto p = poiseuille();
  const double alpha = 1.0;
  ComplexFn w0 = [](double y) { return cplx(std::pow(1 - y * y, 2) * (1 + 0.5 * y), 0.3 * y * (1 - y * y)); };
  std::vector<double> t = {0.0, 2.0, 5.0};
  auto orc = oracle_evolution(p, alpha, w0, 129, t);
  CHECK(orc.projection_noop);
  CHECK(orc.max_stream_residual < 1e-10);
  auto rep = build_representation(p, alpha, w0, orc.y, small(128));
  CHECK(rep.max_denominator_residual < 1e-8);
  CHECK(rep.c.size() == 130);
  CHECK(rep.c.front() == 0.0);
  CHECK(rep.c.back() == 1.0);
  auto st = representation_evolution(rep, t);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(rel_l2(st.y, st.psi[k], orc.psi[k]) < 1e-3);

  SUBCASE("zero data") {
    auto z = build_representation(p, alpha, [](double) { return cplx{}; }, orc.y, small(16));
    for (const cplx& v : psi_pointwise(z, 3.0)) CHECK(v == cplx{});
  }
  SUBCASE("parity") {
    ComplexFn odd = [](double y) { return cplx(y * (1 - y * y)); };
    auto r = build_representation(p, alpha, odd, orc.y, small(32));
    auto psi = psi_pointwise(r, 4.0);
    const std::size_t n = psi.size();
    double top = 0.0;
    for (const cplx& v : psi) top = std::max(top, std::abs(v));
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(psi[i] + psi[n - 1 - i]) < 1e-12 * top);
  }
}

TEST_CASE("projected representation against the oracle pairing") {
  auto p = poiseuille();
  const double alpha = 1.0;
  ComplexFn w0 = [](double y) { return cplx(std::sin(kPi * y) * (1 - y * y)); };
  TestFunctionPair g{Channel::Odd, [](double y) { return cplx(std::sin(kPi * y)); },
                     [](double y) { return cplx(kPi * std::cos(kPi * y)); },
                     [](double y) { return cplx(-kPi * kPi * std::sin(kPi * y)); }};
  KernelInputs in;
  in.omega_o = w0;
  in.g_o = g;
  KernelOptions ko;
  ko.spectral.n_half = 256;
  ko.spectral.rayleigh.n_uniform = 513;
  auto kt = build_kernels(p, alpha, in, ko);
  std::vector<double> c;
  for (const auto& r : kt.rows) c.push_back(r.c);
  auto K = kt.K(Channel::Odd);

  std::vector<double> t = {0.0, 3.0, 8.0};
  auto orc = oracle_evolution(p, alpha, w0, 513, t);
  for (std::size_t k = 0; k < t.size(); ++k) {
    // Simpson over [0, 1] of psi f.
    const std::size_t mid = orc.y.size() / 2;
    const double h = orc.y[1] - orc.y[0];
    cplx s{};
    for (std::size_t i = mid; i < orc.y.size(); ++i) {
      const std::size_t j = i - mid;
      const double w = (j == 0 || i + 1 == orc.y.size()) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      s += w * orc.psi[k][i] * g.f(orc.y[i], alpha);
    }
    s *= h / 3.0;
    const cplx proj = psi_projected(c, K, p.u0(), p.u1(), alpha, t[k]);
    CHECK(std::abs(proj - s) < 2e-3 * std::abs(s));
  }
}

TEST_CASE("finite differences and norms") {
  auto y = uniform(101);
  std::vector<cplx> f(y.size()), df(y.size()), d2f(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x = y[i];
    f[i] = cplx(x * x * x * x - 2 * x, x * x);
    df[i] = cplx(4 * x * x * x - 2, 2 * x);
    d2f[i] = cplx(12 * x * x, 2);
  }
  auto a = d_dy(y, f);
  auto b = d2_dy2(y, f);
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(std::abs(a[i] - df[i]) < 1e-10);
    CHECK(std::abs(b[i] - d2f[i]) < 1e-8);
  }
  std::vector<cplx> psi(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) psi[i] = std::pow(1 - y[i] * y[i], 2);
  auto fine = uniform(513);
  std::vector<cplx> v(fine.size());
  for (std::size_t i = 0; i < fine.size(); ++i) v[i] = std::pow(1 - fine[i] * fine[i], 2) * cplx(1.0, fine[i]);
  CHECK(energy_identity_residual(fine, v, 1.3) < 1e-6);

  EvolutionState s;
  s.alpha = 2.0;
  s.y = y;
  s.t = {0.0};
  s.psi = {psi};
  complete_state(s);
  // psi = (1 - y^2)^2: ||psi'||^2 = 256/105, ||psi||^2 = 256/315.
  CHECK(s.norm_V[0] == doctest::Approx(std::sqrt(256.0 / 105 + 4.0 * 256.0 / 315)).epsilon(1e-4));
  CHECK(s.norm_V2[0] == doctest::Approx(2.0 * std::sqrt(256.0 / 315)).epsilon(1e-4));
  // omega = -(psi'' - 4 psi) at y = 0 is 4 + 4.
  CHECK(s.omega_at_0[0] == doctest::Approx(8.0).epsilon(1e-8));
}

TEST_CASE("transport reference") {
  auto p = poiseuille();
  ComplexFn w = [](double y) { return cplx(1 - y * y + 0.3 * y); };
  ComplexFn eta = [](double y) { return cplx(std::cos(0.5 * kPi * y) + 0.2); };
  const double direct = oracle::adaptive([&](double y) { return (w(y) * eta(y)).real(); }, -1, 1);
  CHECK(std::abs(transport_reference(p, w, eta, 1.0, 0.0) - direct) < 1e-12);

  // Stationary phase at y = 0 with u'' = 2: |I| ~ |omega0 eta|(0) sqrt(pi / (alpha t)).
  const double t = 1e4;
  CHECK(std::abs(transport_reference(p, w, eta, 1.0, t)) ==
        doctest::Approx(1.2 * std::sqrt(kPi / t)).epsilon(0.02));
  CHECK_THROWS_AS(transport_reference(p, w, eta, 1.0, 1e6, 1000), UnderResolved);

  // Against the transport-only matrix exponential.
  auto s = oracle_evolution(p, 1.0, w, 513, {0.0, 3.0}, 0.6, true);
  cplx pairing{};
  for (std::size_t i = 0; i + 1 < s.y.size(); ++i)
    pairing += 0.5 * (s.y[i + 1] - s.y[i]) * (s.omega[1][i] * eta(s.y[i]) + s.omega[1][i + 1] * eta(s.y[i + 1]));
  // The Dirichlet ends drop omega there; compare on the interior pairing.
  const cplx ref = transport_reference(p, w, eta, 1.0, 3.0);
  CHECK(std::abs(pairing - ref) < 5e-3 * std::abs(ref));

  auto d = depletion_series(s, 0.0);
  CHECK(d.ratio_at_end == doctest::Approx(1.0).epsilon(1e-6));
  auto sc = scattering_profile(s, p, 1);
  const std::size_t mid = s.y.size() / 2;
  CHECK(std::abs(sc[mid] - w(0.0)) < 1e-6);
}

TEST_CASE("decay fits") {
  auto t = log_times(10, 100, 20);
  CHECK(t.front() == 10.0);
  CHECK(t.back() == 100.0);
  CHECK(t[1] / t[0] == doctest::Approx(t[19] / t[18]));
  std::vector<double> a, b, c;
  for (double x : t) {
    a.push_back(3.0 / x);
    b.push_back(0.5 / (x * x));
    c.push_back(2.0);
  }
  CHECK(decay_fit(t, a, 10, 100).exponent == doctest::Approx(-1.0));
  CHECK(decay_fit(t, b, 10, 100).exponent == doctest::Approx(-2.0));
  CHECK(decay_fit(t, a, 10, 100).r_squared == doctest::Approx(1.0));
  CHECK(std::abs(decay_fit(t, c, 10, 100).exponent) < 1e-12);
  CHECK(decay_fit(t, a, 10, 100).samples == 20);
  CHECK_THROWS_AS(decay_fit(t, a, 10, 20), DegenerateSeries);
  a[3] = 0.0;
  CHECK_THROWS_AS(decay_fit(t, a, 10, 100), DegenerateSeries);
}

TEST_CASE("series and snapshot csv") {
  EvolutionState s;
  s.alpha = 1.0;
  s.y = uniform(9);
  s.t = {0.0, 1.0};
  s.psi.assign(2, std::vector<cplx>(9, cplx{}));
  complete_state(s);
  std::ostringstream a, b;
  write_series_csv(s, a);
  write_snapshot_csv(s, 1, b);
  CHECK(a.str().rfind("t,norm_V,norm_V2,omega0_abs,omega_probe_abs\n", 0) == 0);
  CHECK(b.str().rfind("y,re_psi,im_psi,re_omega,im_omega\n", 0) == 0);
}

TEST_CASE("limiting solution against the complex-shift boundary value problem") {
  auto p = poiseuille();
  const double alpha = 1.0, c = 0.25;
  ComplexFn w0 = [](double y) { return cplx(std::cos(0.5 * kPi * y) + 0.5 * std::sin(kPi * y)); };
  BvpOptions opt;
  opt.h_max = 1.0 / 512;
  auto y = graded_grid(p, c, 1e-3, opt);
  auto plus = limiting_solution(p, alpha, w0, c, y, +1);
  auto minus = limiting_solution(p, alpha, w0, c, y, -1);
  auto bvp = solve_inhom_bvp(p, alpha, cplx(c, 1e-3), [&](double z) { return w0(z) / cplx(0.0, alpha); }, y, opt);
  double top = 0.0, err = 0.0, sym = 0.0, jump = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    top = std::max(top, std::abs(plus[i]));
    err = std::max(err, std::abs(bvp.Phi[i] - plus[i]));
    // Imaginary right-hand side: Phi_- = -conj(Phi_+).
    sym = std::max(sym, std::abs(minus[i] + std::conj(plus[i])));
    jump = std::max(jump, std::abs(plus[i] - minus[i]));
  }
  CHECK(err < 1e-2 * top);
  CHECK(sym < 1e-12 * top);
  CHECK(jump > 0.1 * top);
  // Boundary values.
  CHECK(std::abs(plus.front()) < 1e-12 * top);
  CHECK(std::abs(plus.back()) < 1e-12 * top);
}
