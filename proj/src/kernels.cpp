#include "raydamp/kernels.hpp"

#include "raydamp/errors.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace raydamp {

ComplexFn VorticityData::odd_part() const {
  auto w = omega0;
  return [w](double y) { return 0.5 * (w(y) - w(-y)); };
}

ComplexFn VorticityData::even_part() const {
  auto w = omega0;
  return [w](double y) { return 0.5 * (w(y) + w(-y)); };
}

void TestFunctionPair::validate(double tol) const {
  if (!g || !dg || !d2g) throw ParityViolation("test function: g, g' and g'' are required");
  const double scale = std::max(1.0, std::abs(g(0.5)));
  if (std::abs(g(1.0)) > tol * scale) throw ParityViolation("test function: g(1) != 0");
  if (channel == Channel::Odd && std::abs(g(0.0)) > tol * scale)
    throw ParityViolation("odd test function: g(0) != 0");
  if (channel == Channel::Even && std::abs(dg(0.0)) > tol * scale)
    throw ParityViolation("even test function: g'(0) != 0");
}

SingularParts singular_parts(const ComplexFn& phi, const SqrtCoordinate& sq, const RayleighSolution& sol,
                             double gap, bool with_E) {
  SingularParts s;
  if (!phi) return s;
  s.at_critical = phi(sol.cv.y_c);
  IntProfile ip(phi, sq);
  s.II11 = II_11(ip, sq, sol.cv.c_r, gap);
  s.II12 = II_12(phi, sol);
  if (with_E) s.E = E_op(phi, sol);
  return s;
}

LambdaParts lambda_1(const SingularParts& w, const SpectralRow& row) {
  const auto& cv = row.cv;
  LambdaParts L;
  L.first = row.A1 * w.at_critical + cv.rho * cv.d2u_c * w.II11;
  L.second = cv.rho * cv.d2u_c * w.II12 + cv.du_c * cv.rho * row.II3 * w.at_critical;
  return L;
}

LambdaParts lambda_2(const SingularParts& gu2, cplx g_c, const SpectralRow& row) {
  const auto& cv = row.cv;
  LambdaParts L;
  L.first = row.A1 * g_c + cv.rho * gu2.II11;
  L.second = cv.rho * gu2.II12 + cv.du_c * cv.rho * row.II3 * g_c;
  return L;
}

LambdaParts lambda_3(const SingularParts& w, const SpectralRow& row) {
  const auto& cv = row.cv;
  LambdaParts L;
  L.first = row.J * (cv.d2u_c / cv.du_c * w.E + w.at_critical);
  L.second = -cv.rho1 * lambda_1(w, row).total();
  return L;
}

LambdaParts lambda_4(const SingularParts& gu2, cplx g_c, const SpectralRow& row) {
  const auto& cv = row.cv;
  LambdaParts L;
  L.first = row.J * (gu2.E / cv.du_c + g_c);
  L.second = -cv.rho1 * lambda_2(gu2, g_c, row).total();
  return L;
}

std::vector<cplx> KernelTables::K(Channel ch) const {
  std::vector<cplx> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(ch == Channel::Odd ? r.K_o : r.K_e);
  return out;
}

void check_degeneracy(const SpectralRow& row, double alpha, Channel ch, double threshold) {
  const auto& cv = row.cv;
  const double w = 1.0 + alpha * cv.rho0;
  if (ch == Channel::Odd) {
    const double d = row.A * row.A + row.B * row.B;
    if (!(d > threshold * w * w))
      throw SpectralDegeneracy("A^2 + B^2 = " + std::to_string(d) + " at c = " + std::to_string(cv.c_r));
  } else {
    const double d = row.A2 * row.A2 + row.B2 * row.B2;
    const double scale = w * w * std::pow(1.0 + alpha * cv.y_c, 4) / std::pow(alpha, 4);
    if (!(d > threshold * scale))
      throw SpectralDegeneracy("A2^2 + B2^2 = " + std::to_string(d) + " at c = " + std::to_string(cv.c_r));
  }
}

KernelRow kernel_row(const SqrtCoordinate& sq, const SpectralRow& row, const RayleighSolution& sol,
                     const KernelInputs& in, double gap, double threshold) {
  const auto& cv = row.cv;
  const ShearProfile& p = sq.profile();
  KernelRow k;
  k.c = cv.c_r;
  k.c_tilde = cv.c_tilde;

  auto with_u2 = [&p](const ComplexFn& g) -> ComplexFn {
    if (!g) return {};
    return [&p, g](double y) { return p.d2u(y) * g(y); };
  };

  if (in.omega_o || in.g_o.g) {
    check_degeneracy(row, sol.alpha, Channel::Odd, threshold);
    const auto wo = singular_parts(in.omega_o, sq, sol, gap, false);
    const auto go = singular_parts(with_u2(in.g_o.g), sq, sol, gap, false);
    const cplx g_c = in.g_o.g ? in.g_o.g(cv.y_c) : cplx{};
    k.C_o = cv.rho * wo.at_critical / cv.du_c * kPi;
    k.D_o = cv.du_c * cv.rho * wo.II1();
    k.L1 = lambda_1(wo, row);
    k.L2 = lambda_2(go, g_c, row);
    k.K_o = k.L1.total() * k.L2.total() / ((row.A * row.A + row.B * row.B) * cv.du_c);
  }
  if (in.omega_e || in.g_e.g) {
    check_degeneracy(row, sol.alpha, Channel::Even, threshold);
    const auto we = singular_parts(in.omega_e, sq, sol, gap, true);
    const auto ge = singular_parts(with_u2(in.g_e.g), sq, sol, gap, true);
    const cplx g_c = in.g_e.g ? in.g_e.g(cv.y_c) : cplx{};
    k.C_e = cv.rho * we.at_critical / cv.du_c * kPi;
    k.D_e = cv.du_c * cv.rho * we.II1();
    k.E_e = we.E;
    k.L3 = lambda_3(we, row);
    k.L4 = lambda_4(ge, g_c, row);
    k.K_e = k.L3.total() * k.L4.total() / (cv.du_c * (row.A2 * row.A2 + row.B2 * row.B2));
  }
  return k;
}

KernelTables build_kernels(const ShearProfile& profile, double alpha, const KernelInputs& in,
                           const KernelOptions& opt) {
  if (in.g_o.g) in.g_o.validate();
  if (in.g_e.g) in.g_e.validate();
  SqrtCoordinate sq(profile);
  KernelTables kt;
  kt.alpha = alpha;
  kt.rows.resize(opt.spectral.n_half);
  double gap = make_pv_grid(sq.v1(), opt.spectral.n_half, opt.spectral.gap_fraction).endpoint_gap;
  kt.spectral = build_spectral_tables(profile, alpha, opt.spectral,
                                      [&](std::size_t i, const SpectralRow& row, const RayleighSolution& sol) {
                                        kt.rows[i] = kernel_row(sq, row, sol, in, gap, opt.degeneracy);
                                      });
  return kt;
}

KernelNorms kernel_norms(const std::vector<double>& ct, const std::vector<cplx>& K) {
  KernelNorms n;
  const std::size_t m = K.size();
  if (m < 5) throw ConfigError("kernel_norms needs at least 5 nodes");
  const double h = (ct.back() - ct.front()) / static_cast<double>(m - 1);
  auto d1 = c_derivative(ct, K);
  auto d2 = c_derivative(ct, d1);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = 2.0 * ct[i] * h;
    n.L1 += w * std::abs(K[i]);
    n.dL1 += w * std::abs(d1[i]);
    n.d2L1 += w * std::abs(d2[i]);
    n.max_abs = std::max(n.max_abs, std::abs(K[i]));
  }
  n.first_abs = std::abs(K.front());
  n.last_abs = std::abs(K.back());
  return n;
}

void write_csv(const KernelTables& kt, std::ostream& out) {
  out << "c,K_o,K_e,Lambda1,Lambda2,Lambda3,Lambda4\n";
  char buf[256];
  for (const auto& r : kt.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.c, r.K_o.real(), r.K_e.real(),
                  r.L1.total().real(), r.L2.total().real(), r.L3.total().real(), r.L4.total().real());
    out << buf;
  }
}

} // namespace raydamp
