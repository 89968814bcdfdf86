#include "raydamp/evolution.hpp"

#include "raydamp/errors.hpp"
#include "raydamp/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>

namespace raydamp {

ChannelCoefficients channel_coefficients(const SingularParts& wo, const SingularParts& we, const CriticalValue& cv) {
  ChannelCoefficients cc;
  cc.C_o = cv.rho * wo.at_critical / cv.du_c * kPi;
  cc.D_o = cv.du_c * cv.rho * wo.II1();
  cc.C_e = cv.rho * we.at_critical / cv.du_c * kPi;
  cc.D_e = cv.du_c * cv.rho * we.II1();
  cc.E_e = we.E;
  return cc;
}

namespace {

// phi1(0) phi1'(0), recovered from J in the y_c -> 0 limit channel.
double boundary_product(const SpectralRow& row, double u1) {
  if (row.J_limit) return row.cv.du_c * (u1 - row.cv.c_r) / row.J;
  return row.phi1_at_0 * row.dphi1_at_0;
}

} // namespace

LimitCoefficients limit_coefficients(const SpectralRow& row, double alpha, const ChannelCoefficients& cc,
                                     double threshold) {
  if (!(alpha > 0.0)) throw ConfigError("limit coefficients need alpha > 0");
  check_degeneracy(row, alpha, Channel::Odd, threshold);
  check_degeneracy(row, alpha, Channel::Even, threshold);
  const auto& cv = row.cv;
  const cplx I(0.0, 1.0);
  const cplx Ap(row.A, row.B), Am(row.A, -row.B);
  const cplx A2p(row.A2, row.B2), A2m(row.A2, -row.B2);
  const double q = -cv.rho1;
  const double u1 = cv.c_r + cv.rho / std::max(cv.rho1, 1e-300);
  const double P0 = boundary_product(row, u1);
  const double phiphi = q * q * P0;

  LimitCoefficients L;
  L.mu_o_plus = (-cc.C_o + I * cc.D_o) / (alpha * Am);
  L.mu_o_minus = (cc.C_o + I * cc.D_o) / (alpha * Ap);
  L.mu_e_plus = (q * (I * cc.D_e - cc.C_e) + I * cc.E_e * row.J) / (alpha * A2m);
  L.mu_e_minus = (q * (I * cc.D_e + cc.C_e) + I * cc.E_e * row.J) / (alpha * A2p);
  L.nu_e_plus = -(I * cc.D_e - cc.C_e - I * cc.E_e * Am) / (alpha * q * P0 * A2m);
  L.nu_e_minus = -(I * cc.D_e + cc.C_e - I * cc.E_e * Ap) / (alpha * q * P0 * A2p);
  L.mu1 = (L.mu_o_minus - L.mu_o_plus) * alpha / (2.0 * cv.rho);
  L.nu1 = (L.nu_e_minus - L.nu_e_plus) * alpha / 2.0;
  L.mu2 = (L.mu_e_minus - L.mu_e_plus) * alpha / 2.0;

  const cplx lhs = phiphi * Ap - cv.du_c * cv.rho;
  const cplx rhs = P0 * q * A2p;
  L.denominator_residual = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return L;
}

// ---------------------------------------------------------------------------

namespace {

// int_0^h x^l e^{-i omega x} dx for |omega h| <= 1.
cplx moment_series(int l, double h, double omega) {
  const cplx z(0.0, -omega * h);
  cplx term(1.0);
  cplx sum(0.0);
  for (int n = 0; n < 30; ++n) {
    sum += term / static_cast<double>(l + n + 1);
    term *= z / static_cast<double>(n + 1);
    if (std::abs(term) < 1e-18) break;
  }
  return std::pow(h, l + 1) * sum;
}

// int_0^h x^m e^{-i omega x} dx for m = 0, 1, 2 with subdivision.
void panel_moments(double h, double omega, std::size_t max_sub, cplx out[3]) {
  const double phase = std::abs(omega) * h;
  std::size_t pieces = phase > 1.0 ? static_cast<std::size_t>(std::ceil(phase)) : 1;
  if (pieces > max_sub) throw UnderResolved("Filon panel needs " + std::to_string(pieces) + " subdivisions");
  const double hs = h / static_cast<double>(pieces);
  const cplx mu0 = moment_series(0, hs, omega);
  const cplx mu1 = moment_series(1, hs, omega);
  const cplx mu2 = moment_series(2, hs, omega);
  out[0] = out[1] = out[2] = 0.0;
  for (std::size_t j = 0; j < pieces; ++j) {
    const double x0 = static_cast<double>(j) * hs;
    const cplx e = std::exp(cplx(0.0, -omega * x0));
    out[0] += e * mu0;
    out[1] += e * (x0 * mu0 + mu1);
    out[2] += e * (x0 * x0 * mu0 + 2.0 * x0 * mu1 + mu2);
  }
}

} // namespace

std::vector<cplx> filon_weights(std::span<const double> x, double omega, std::size_t max_sub) {
  const std::size_t m = x.size();
  if (m < 3) throw ConfigError("Filon quadrature needs at least 3 nodes");
  std::vector<cplx> w(m, cplx{});
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const double h = x[k + 1] - x[k];
    cplx M[3];
    panel_moments(h, omega, max_sub, M);
    const cplx e = std::exp(cplx(0.0, -omega * x[k]));
    const bool left = k >= 1;
    const bool right = k + 2 < m;
    const double share = left && right ? 0.5 : 1.0;
    for (int side = 0; side < 2; ++side) {
      if ((side == 0 && !left) || (side == 1 && !right)) continue;
      const std::size_t s = side == 0 ? k - 1 : k;
      for (int a = 0; a < 3; ++a) {
        const double xa = x[s + a] - x[k];
        const double xb = x[s + (a + 1) % 3] - x[k];
        const double xc = x[s + (a + 2) % 3] - x[k];
        const double den = (xa - xb) * (xa - xc);
        // (x - xb)(x - xc) / den integrated against the moments.
        const cplx v = (M[2] - (xb + xc) * M[1] + xb * xc * M[0]) / den;
        w[s + a] += share * e * v;
      }
    }
  }
  return w;
}

// ---------------------------------------------------------------------------

namespace {

// int g between `from` and `to`, both on one side of y_c, with panels
// doubling in width away from the end nearest y_c.
template <class F>
auto graded_integral(const F& g, double yc, double from, double to) -> decltype(g(0.0)) {
  using T = decltype(g(0.0));
  if (from == to) return T{};
  const double near = std::abs(to - yc) < std::abs(from - yc) ? to : from;
  const double far = near == to ? from : to;
  const double dir = far > near ? 1.0 : -1.0;
  double d = std::abs(near - yc);
  if (!(d > 0.0)) throw SingularEvaluation("graded integral touches y_c");
  double pos = near;
  T acc{};
  const auto& gl = gauss_legendre(10);
  while (dir * (far - pos) > 0.0) {
    double next = pos + dir * std::min(d, 0.05);
    if (dir * (next - far) > 0.0) next = far;
    const double mid = 0.5 * (pos + next);
    const double half = 0.5 * (next - pos);
    T s{};
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) s += gl.weights[i] * g(mid + half * gl.nodes[i]);
    acc += s * half;
    d = std::abs(next - yc);
    pos = next;
  }
  return near == from ? acc : -acc;
}

double inverse_square_integral(const ShearProfile& p, double c, double yc, double from, double to) {
  return graded_integral(
      [&](double z) {
        const double w = p.u(z) - c;
        return 1.0 / (w * w);
      },
      yc, from, to);
}

// phi int phi^{-2} from 0 (left of y_c) or from 1 (right of it), assembled in
// the phi1 form, together with phi itself on the left of y_c.
class SecondSolution {
public:
  SecondSolution(const ShearProfile& p, const RayleighSolution& sol) : p_(p), sol_(sol) {
    const CriticalGrid& grid = *sol.grid;
    const double a = sol.cv.du_c;
    const std::size_t n = grid.size();
    const std::size_t ic = grid.critical_index();
    const auto& sn = grid.shifted_nodes();
    std::vector<cplx> r(n);
    for (std::size_t i = 0; i < n; ++i)
      r[i] = i == ic ? cplx(sol.alpha * sol.alpha / (6.0 * a * a)) : sol.phi1_minus_one[i] / (sn[i] * sn[i]);
    std::span<const cplx> rs(r);
    std::span<const cplx> ms(sol.phi1_minus_one);
    R_ = grid.cumulative_from_critical([&](std::size_t cell, int q) {
      const cplx m = grid.interp(ms, cell, q);
      const cplx ph = 1.0 + m;
      return -grid.interp(rs, cell, q) * (2.0 + m) / (ph * ph);
    });
  }

  // Requires y != y_c.
  void at(double y, cplx& S, cplx& phi) const {
    const double c = sol_.cv.c_r;
    const double yc = sol_.cv.y_c;
    const double w = p_.u(y) - c;
    const cplx ph1 = sol_.phi1_at(y);
    const cplx R = sol_.grid->value_at(std::span<const cplx>(R_), y);
    if (y < yc) {
      S = w * ph1 * (R - R_.front() + inverse_square_integral(p_, c, yc, 0.0, y));
      phi = w * ph1;
    } else {
      S = w * ph1 * (R - R_.back() + inverse_square_integral(p_, c, yc, 1.0, y));
      phi = 0.0;
    }
  }

private:
  const ShearProfile& p_;
  const RayleighSolution& sol_;
  std::vector<cplx> R_;
};

struct ColumnValues {
  std::vector<cplx> S;
  std::vector<cplx> phi;
  std::size_t collar = 0;
};

ColumnValues second_solution(const ShearProfile& p, const RayleighSolution& sol, const std::vector<double>& ys,
                             double collar) {
  const SecondSolution ss(p, sol);
  const double yc = sol.cv.y_c;
  ColumnValues out;
  out.S.resize(ys.size());
  out.phi.resize(ys.size());
  const cplx S_c = -1.0 / sol.cv.du_c;
  for (std::size_t j = 0; j < ys.size(); ++j) {
    const double y = ys[j];
    const double d = y - yc;
    if (std::abs(d) >= collar && d != 0.0) {
      ss.at(y, out.S[j], out.phi[j]);
      continue;
    }
    ++out.collar;
    double edge = d < 0.0 ? std::max(0.0, yc - collar) : std::min(1.0, yc + collar);
    if (edge == yc) {
      out.S[j] = S_c;
      out.phi[j] = 0.0;
      continue;
    }
    cplx Se, pe;
    ss.at(edge, Se, pe);
    const double lam = d / (edge - yc);
    out.S[j] = S_c + lam * (Se - S_c);
    out.phi[j] = d < 0.0 ? lam * pe : cplx{};
  }
  return out;
}

} // namespace

Representation build_representation(const ShearProfile& profile, double alpha, const ComplexFn& omega0,
                                    const std::vector<double>& y, const RepresentationOptions& opt) {
  if (!(alpha > 0.0)) throw ConfigError("the representation needs alpha > 0");
  SqrtCoordinate sq(profile);
  const std::size_t nc = opt.spectral.n_half;
  const double gap = make_pv_grid(sq.v1(), nc, opt.spectral.gap_fraction).endpoint_gap;
  const double collar = opt.collar_cells / static_cast<double>(opt.spectral.rayleigh.n_uniform - 1);

  VorticityData data{omega0};
  const ComplexFn wo = data.odd_part();
  const ComplexFn we = data.even_part();

  std::vector<double> ay(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) ay[j] = std::abs(y[j]);

  Representation rep;
  rep.alpha = alpha;
  rep.y = y;
  rep.phi_tilde = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(nc + 2));
  rep.coefficients.resize(nc);
  std::atomic<std::size_t> collar_count{0};

  rep.tables = build_spectral_tables(
      profile, alpha, opt.spectral, [&](std::size_t k, const SpectralRow& row, const RayleighSolution& sol) {
        const auto po = singular_parts(wo, sq, sol, gap, false);
        const auto pe = singular_parts(we, sq, sol, gap, true);
        const auto L = limit_coefficients(row, alpha, channel_coefficients(po, pe, row.cv), opt.degeneracy);
        rep.coefficients[k] = L;
        const auto col = second_solution(profile, sol, ay, collar);
        collar_count += col.collar;
        const cplx dmu_o = L.mu_o_minus - L.mu_o_plus;
        const cplx dmu_e = L.mu_e_minus - L.mu_e_plus;
        const cplx dnu_e = L.nu_e_minus - L.nu_e_plus;
        for (std::size_t j = 0; j < y.size(); ++j) {
          const cplx odd = dmu_o * col.S[j];
          const cplx even = dmu_e * col.S[j] + dnu_e * col.phi[j];
          rep.phi_tilde(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k + 1)) =
              (y[j] < 0.0 ? -odd : odd) + even;
        }
      });
  rep.collar_evaluations = collar_count.load();
  for (const auto& L : rep.coefficients)
    rep.max_denominator_residual = std::max(rep.max_denominator_residual, L.denominator_residual);

  rep.c.resize(nc + 2);
  rep.c.front() = profile.u0();
  rep.c.back() = profile.u1();
  for (std::size_t k = 0; k < nc; ++k) rep.c[k + 1] = rep.tables.rows[k].cv.c_r;

  auto extrapolate = [&](Eigen::Index target, Eigen::Index s) {
    double nodes[3] = {rep.c[s], rep.c[s + 1], rep.c[s + 2]};
    double w[3];
    lagrange_weights(std::span<const double>(nodes, 3), rep.c[target], std::span<double>(w, 3));
    rep.phi_tilde.col(target) =
        w[0] * rep.phi_tilde.col(s) + w[1] * rep.phi_tilde.col(s + 1) + w[2] * rep.phi_tilde.col(s + 2);
  };
  extrapolate(0, 1);
  const auto last = static_cast<Eigen::Index>(nc + 1);
  extrapolate(last, last - 3);
  return rep;
}

std::vector<cplx> psi_pointwise(const Representation& rep, double t) {
  const auto w = filon_weights(rep.c, rep.alpha * t);
  Eigen::Map<const Eigen::VectorXcd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  Eigen::VectorXcd psi = (rep.alpha / (2.0 * kPi)) * (rep.phi_tilde * wv);
  return {psi.data(), psi.data() + psi.size()};
}

cplx psi_projected(const std::vector<double>& c_nodes, const std::vector<cplx>& K, double u0, double u1,
                   double alpha, double t) {
  std::vector<double> x;
  std::vector<cplx> f;
  x.reserve(c_nodes.size() + 2);
  f.reserve(c_nodes.size() + 2);
  x.push_back(u0);
  f.push_back(0.0);
  for (std::size_t k = 0; k < c_nodes.size(); ++k) {
    x.push_back(c_nodes[k]);
    f.push_back(K[k]);
  }
  x.push_back(u1);
  f.push_back(0.0);
  const auto w = filon_weights(x, alpha * t);
  cplx acc{};
  for (std::size_t k = 0; k < x.size(); ++k) acc += w[k] * f[k];
  return -acc;
}

namespace {

// z -> int_{y_c}^z phi1 f on [0, 1], tabulated on 256 uniform cells.
class CriticalPrimitive {
public:
  CriticalPrimitive(const RayleighSolution& sol, ComplexFn f) : sol_(sol), f_(std::move(f)), F_(kCells + 1) {
    for (std::size_t k = 0; k < kCells; ++k) F_[k + 1] = F_[k] + piece(knot(k), knot(k + 1));
    Fc_ = raw(sol.cv.y_c);
  }
  cplx operator()(double z) const { return raw(z) - Fc_; }

private:
  static constexpr std::size_t kCells = 256;
  static double knot(std::size_t k) { return static_cast<double>(k) / kCells; }
  cplx piece(double a, double b) const {
    const auto& gl = gauss_legendre(10);
    cplx s{};
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double z = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
      s += gl.weights[i] * sol_.phi1_at(z) * f_(z);
    }
    return 0.5 * (b - a) * s;
  }
  cplx raw(double z) const {
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(z * kCells), kCells - 1);
    return F_[k] + piece(knot(k), z);
  }

  const RayleighSolution& sol_;
  ComplexFn f_;
  std::vector<cplx> F_;
  cplx Fc_{};
};

// (u - c) phi1(y) int_a^y I(z) / ((u - c) phi1)^2 dz at the given points of
// one side of y_c (a = 0 on the left, 1 on the right).
std::vector<cplx> particular_part(const ShearProfile& p, const RayleighSolution& sol, const CriticalPrimitive& I,
                                  std::vector<double> pts, bool left) {
  const double c = sol.cv.c_r;
  const double yc = sol.cv.y_c;
  auto g = [&](double z) {
    const cplx phi = (p.u(z) - c) * sol.phi1_at(z);
    return I(z) / (phi * phi);
  };
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return left ? pts[a] < pts[b] : pts[a] > pts[b];
  });
  std::vector<cplx> out(pts.size());
  double pos = left ? 0.0 : 1.0;
  cplx acc{};
  for (std::size_t i : order) {
    acc += graded_integral(g, yc, pos, pts[i]);
    pos = pts[i];
    out[i] = (p.u(pts[i]) - c) * sol.phi1_at(pts[i]) * acc;
  }
  return out;
}

} // namespace

std::vector<cplx> limiting_solution(const ShearProfile& profile, double alpha, const ComplexFn& omega0, double c,
                                    const std::vector<double>& y, int side, const RayleighOptions& ropt) {
  if (!(alpha > 0.0)) throw ConfigError("the limiting solution needs alpha > 0");
  SqrtCoordinate sq(profile);
  const auto sol = solve_phi1(profile, alpha, critical_value(profile, c), ropt);
  const auto row = spectral_row(sq, sol, 0.0);
  VorticityData data{omega0};
  const ComplexFn wo = data.odd_part();
  const ComplexFn we = data.even_part();
  const auto L = limit_coefficients(
      row, alpha, channel_coefficients(singular_parts(wo, sq, sol, 0.0, false), singular_parts(we, sq, sol, 0.0, true), row.cv));
  const cplx mu_o = side > 0 ? L.mu_o_plus : L.mu_o_minus;
  const cplx mu_e = side > 0 ? L.mu_e_plus : L.mu_e_minus;
  const cplx nu_e = side > 0 ? L.nu_e_plus : L.nu_e_minus;

  const cplx inv_ia = 1.0 / cplx(0.0, alpha);
  const CriticalPrimitive Io(sol, [&](double z) { return inv_ia * wo(z); });
  const CriticalPrimitive Ie(sol, [&](double z) { return inv_ia * we(z); });
  const double yc = sol.cv.y_c;

  std::vector<double> lo, hi;
  std::vector<std::size_t> lo_idx, hi_idx;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double a = std::abs(y[j]);
    if (a < yc) {
      lo.push_back(a);
      lo_idx.push_back(j);
    } else if (a > yc) {
      hi.push_back(a);
      hi_idx.push_back(j);
    }
  }
  std::vector<cplx> Po(y.size()), Pe(y.size());
  auto scatter = [](const std::vector<cplx>& v, const std::vector<std::size_t>& idx, std::vector<cplx>& out) {
    for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = v[i];
  };
  scatter(particular_part(profile, sol, Io, lo, true), lo_idx, Po);
  scatter(particular_part(profile, sol, Io, hi, false), hi_idx, Po);
  scatter(particular_part(profile, sol, Ie, lo, true), lo_idx, Pe);
  scatter(particular_part(profile, sol, Ie, hi, false), hi_idx, Pe);

  const SecondSolution ss(profile, sol);
  std::vector<cplx> out(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double a = std::abs(y[j]);
    cplx S = -1.0 / sol.cv.du_c, phi{};
    if (a != yc) ss.at(a, S, phi);
    const cplx odd = Po[j] + mu_o * S;
    const cplx even = Pe[j] + mu_e * S + nu_e * phi;
    out[j] = (y[j] < 0.0 ? -odd : odd) + even;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<cplx> d_dy(const std::vector<double>& y, const std::vector<cplx>& f) {
  const std::size_t n = f.size();
  if (n < 6) throw ConfigError("d_dy needs at least 6 nodes");
  const double h = y[1] - y[0];
  std::vector<cplx> d(n);
  static constexpr double e0[5] = {-25.0, 48.0, -36.0, 16.0, -3.0};
  static constexpr double e1[5] = {-3.0, -10.0, 18.0, -6.0, 1.0};
  for (std::size_t i = 2; i + 2 < n; ++i) d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
  cplx a0{}, a1{}, b0{}, b1{};
  for (int k = 0; k < 5; ++k) {
    a0 += e0[k] * f[k];
    a1 += e1[k] * f[k];
    b0 -= e0[k] * f[n - 1 - k];
    b1 -= e1[k] * f[n - 1 - k];
  }
  d[0] = a0 / (12.0 * h);
  d[1] = a1 / (12.0 * h);
  d[n - 1] = b0 / (12.0 * h);
  d[n - 2] = b1 / (12.0 * h);
  return d;
}

std::vector<cplx> d2_dy2(const std::vector<double>& y, const std::vector<cplx>& f) {
  const std::size_t n = f.size();
  if (n < 6) throw ConfigError("d2_dy2 needs at least 6 nodes");
  const double h = y[1] - y[0];
  const double h2 = 12.0 * h * h;
  std::vector<cplx> d(n);
  static constexpr double e0[6] = {45.0, -154.0, 214.0, -156.0, 61.0, -10.0};
  static constexpr double e1[6] = {10.0, -15.0, -4.0, 14.0, -6.0, 1.0};
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / h2;
  cplx a0{}, a1{}, b0{}, b1{};
  for (int k = 0; k < 6; ++k) {
    a0 += e0[k] * f[k];
    a1 += e1[k] * f[k];
    b0 += e0[k] * f[n - 1 - k];
    b1 += e1[k] * f[n - 1 - k];
  }
  d[0] = a0 / h2;
  d[1] = a1 / h2;
  d[n - 1] = b0 / h2;
  d[n - 2] = b1 / h2;
  return d;
}

double trapezoid_l2(const std::vector<double>& y, const std::vector<cplx>& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i)
    acc += 0.5 * (y[i + 1] - y[i]) * (std::norm(f[i]) + std::norm(f[i + 1]));
  return std::sqrt(acc);
}

namespace {

cplx cubic_at(const std::vector<double>& y, const std::vector<cplx>& f, double x) {
  const std::size_t n = y.size();
  auto it = std::upper_bound(y.begin(), y.end(), x);
  std::size_t j = it == y.begin() ? 0 : static_cast<std::size_t>(it - y.begin()) - 1;
  std::size_t s = j >= 1 ? j - 1 : 0;
  s = std::min(s, n - 4);
  double w[4];
  lagrange_weights(std::span<const double>(&y[s], 4), x, std::span<double>(w, 4));
  cplx acc{};
  for (int k = 0; k < 4; ++k) acc += w[k] * f[s + k];
  return acc;
}

} // namespace

void complete_state(EvolutionState& s) {
  const double a2 = s.alpha * s.alpha;
  const std::size_t nt = s.psi.size();
  s.omega.assign(nt, {});
  s.norm_V.assign(nt, 0.0);
  s.norm_V2.assign(nt, 0.0);
  s.omega_at_0.assign(nt, 0.0);
  s.omega_probe.assign(nt, 0.0);
  const std::size_t mid = static_cast<std::size_t>(
      std::min_element(s.y.begin(), s.y.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }) -
      s.y.begin());
  for (std::size_t k = 0; k < nt; ++k) {
    const auto& psi = s.psi[k];
    auto d2 = d2_dy2(s.y, psi);
    auto d1 = d_dy(s.y, psi);
    std::vector<cplx> w(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) w[i] = -(d2[i] - a2 * psi[i]);
    const double n1 = trapezoid_l2(s.y, d1);
    const double n0 = trapezoid_l2(s.y, psi);
    s.norm_V[k] = std::sqrt(n1 * n1 + a2 * n0 * n0);
    s.norm_V2[k] = s.alpha * n0;
    s.omega_at_0[k] = std::abs(w[mid]);
    s.omega_probe[k] = std::abs(cubic_at(s.y, w, s.y_probe));
    s.omega[k] = std::move(w);
  }
}

EvolutionState representation_evolution(const Representation& rep, const std::vector<double>& t, double y_probe) {
  EvolutionState s;
  s.alpha = rep.alpha;
  s.y_probe = y_probe;
  s.y = rep.y;
  s.t = t;
  s.psi.resize(t.size());
  parallel_for(t.size(), [&](std::size_t k) { s.psi[k] = psi_pointwise(rep, t[k]); });
  complete_state(s);
  return s;
}

EvolutionState oracle_evolution(const ShearProfile& profile, double alpha, const ComplexFn& omega0, std::size_t n,
                                const std::vector<double>& t, double y_probe, bool transport_only) {
  const OperatorMatrix M = assemble(profile, alpha, n, transport_only);
  Eigen::VectorXcd psi0 = stream_from_vorticity(M, sample_interior(M, omega0));
  EvolutionState s;
  s.alpha = alpha;
  s.y_probe = y_probe;
  s.y = M.y;
  s.t = t;
  if (!transport_only) {
    const auto spec = discrete_spectrum(M);
    s.projection_noop = !project_out(spec, psi0);
  }
  const auto traj = evolve_direct(M, psi0, t);
  s.psi.resize(t.size());
  double resid = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::vector<cplx> full(n, cplx{});
    for (Eigen::Index i = 0; i < traj[k].size(); ++i) full[static_cast<std::size_t>(i) + 1] = traj[k](i);
    s.psi[k] = std::move(full);
  }
  complete_state(s);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Eigen::VectorXcd w = vorticity_from_stream(M, traj[k]);
    double top = 0.0, diff = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      top = std::max(top, std::abs(w(i)));
      diff = std::max(diff, std::abs(w(i) - s.omega[k][static_cast<std::size_t>(i) + 1]));
    }
    resid = std::max(resid, diff / std::max(top, 1e-300));
  }
  s.max_stream_residual = resid;
  return s;
}

double energy_identity_residual(const std::vector<double>& y, const std::vector<cplx>& psi, double alpha) {
  const auto d1 = d_dy(y, psi);
  const auto d2 = d2_dy2(y, psi);
  const double a2 = alpha * alpha;
  double V2 = 0.0, dual = 0.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    const double h = y[i + 1] - y[i];
    auto v = [&](std::size_t j) { return std::norm(d1[j]) + a2 * std::norm(psi[j]); };
    auto q = [&](std::size_t j) { return -(psi[j] * (std::conj(d2[j]) - a2 * std::conj(psi[j]))).real(); };
    V2 += 0.5 * h * (v(i) + v(i + 1));
    dual += 0.5 * h * (q(i) + q(i + 1));
  }
  return std::abs(V2 - dual) / std::max(std::abs(V2), 1e-300);
}

DepletionSeries depletion_series(const EvolutionState& s, double t_after) {
  DepletionSeries d;
  d.t = s.t;
  d.at_zero = s.omega_at_0;
  d.at_probe = s.omega_probe;
  if (d.at_zero.empty()) return d;
  d.ratio_at_end = d.at_zero.back() / d.at_zero.front();
  std::size_t total = 0, down = 0;
  for (std::size_t k = 1; k < d.t.size(); ++k) {
    if (d.t[k - 1] < t_after) continue;
    ++total;
    if (d.at_zero[k] < d.at_zero[k - 1]) ++down;
  }
  d.fraction_decreasing = total ? static_cast<double>(down) / static_cast<double>(total) : 0.0;
  return d;
}

std::vector<cplx> scattering_profile(const EvolutionState& s, const ShearProfile& profile, std::size_t k) {
  std::vector<cplx> out(s.y.size());
  for (std::size_t i = 0; i < s.y.size(); ++i)
    out[i] = s.omega[k][i] * std::exp(cplx(0.0, s.alpha * profile.u(s.y[i]) * s.t[k]));
  return out;
}

cplx transport_reference(const ShearProfile& profile, const ComplexFn& omega0, const ComplexFn& eta, double alpha,
                         double t, std::size_t max_panels) {
  SqrtCoordinate sq(profile);
  const double v1 = sq.v1();
  const double rate = 2.0 * std::abs(alpha) * t * v1;
  const double width = std::min(0.05, rate > 0.0 ? 2.0 / rate : 0.05);
  const auto panels = static_cast<std::size_t>(std::ceil(2.0 * v1 / width));
  if (panels > max_panels) throw UnderResolved("transport quadrature needs " + std::to_string(panels) + " panels");
  const double w = 2.0 * v1 / static_cast<double>(panels);
  const auto& gl = gauss_legendre(16);
  const double u0 = profile.u0();
  cplx acc{};
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = -v1 + (static_cast<double>(p) + 0.5) * w;
    cplx s{};
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double z = mid + 0.5 * w * gl.nodes[i];
      const double y = sq.inverse(z);
      s += gl.weights[i] * omega0(y) * eta(y) * sq.dinverse(z) * std::exp(cplx(0.0, -alpha * (u0 + z * z) * t));
    }
    acc += 0.5 * w * s;
  }
  return acc;
}

DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& v, double t_lo, double t_hi) {
  std::vector<double> x, y;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_lo || t[k] > t_hi) continue;
    if (!(v[k] > 0.0) || !(t[k] > 0.0)) throw DegenerateSeries("non-positive value in the fit window");
    x.push_back(std::log(t[k]));
    y.push_back(std::log(v[k]));
  }
  if (x.size() < 10) throw DegenerateSeries("fit window holds " + std::to_string(x.size()) + " samples (< 10)");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  DecayFit f;
  f.samples = x.size();
  f.exponent = sxy / sxx;
  f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

std::vector<double> log_times(double t_lo, double t_hi, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
    t[k] = t_lo * std::pow(t_hi / t_lo, s);
  }
  t.front() = t_lo;
  t.back() = t_hi;
  return t;
}

void write_series_csv(const EvolutionState& s, std::ostream& out) {
  out << "t,norm_V,norm_V2,omega0_abs,omega_probe_abs\n";
  char buf[160];
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t[k], s.norm_V[k], s.norm_V2[k],
                  s.omega_at_0[k], s.omega_probe[k]);
    out << buf;
  }
}

void write_snapshot_csv(const EvolutionState& s, std::size_t k, std::ostream& out) {
  out << "y,re_psi,im_psi,re_omega,im_omega\n";
  char buf[160];
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", s.y[i], s.psi[k][i].real(), s.psi[k][i].imag(),
                  s.omega[k][i].real(), s.omega[k][i].imag());
    out << buf;
  }
}

} // namespace raydamp
