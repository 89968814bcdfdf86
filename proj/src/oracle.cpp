#include "raydamp/oracle.hpp"

#include "raydamp/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace raydamp {

OperatorMatrix assemble(const ShearProfile& profile, double alpha, std::size_t n, bool transport_only) {
  if (n < 64) throw OutOfRange("oracle grid needs n >= 64");
  OperatorMatrix M;
  M.n = n;
  M.alpha = alpha;
  M.transport_only = transport_only;
  M.y = linspace(-1.0, 1.0, n);
  M.h = 2.0 / static_cast<double>(n - 1);
  const std::size_t m = n - 2;
  const double s = 1.0 / (12.0 * M.h * M.h);
  Eigen::MatrixXd D2 = Eigen::MatrixXd::Zero(m, m);
  // Interior node j = i + 1; columns for node k are k - 1 (ends are zero).
  auto put = [&](std::size_t i, std::size_t k, double w) {
    if (k >= 1 && k <= m) D2(i, k - 1) += w * s;
  };
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + 1;
    if (j == 1) {
      const double w[6] = {10, -15, -4, 14, -6, 1};
      for (int k = 0; k < 6; ++k) put(i, k, w[k]);
    } else if (j == n - 2) {
      const double w[6] = {10, -15, -4, 14, -6, 1};
      for (int k = 0; k < 6; ++k) put(i, n - 1 - k, w[k]);
    } else {
      const double w[5] = {-1, 16, -30, 16, -1};
      for (int k = 0; k < 5; ++k) put(i, j - 2 + k, w[k]);
    }
  }
  M.L = D2 - alpha * alpha * Eigen::MatrixXd::Identity(m, m);
  M.u.resize(m);
  M.d2u.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    M.u(i) = profile.u(M.y[i + 1]);
    M.d2u(i) = transport_only ? 0.0 : profile.d2u(M.y[i + 1]);
  }
  M.L_lu.compute(M.L);
  if (!(std::abs(M.L_lu.determinant()) > 0.0)) throw SingularAssembly("alpha^2 - d^2/dy^2 is singular");
  Eigen::MatrixXd rhs = M.u.asDiagonal() * M.L;
  rhs.diagonal() -= M.d2u;
  M.R = M.L_lu.solve(rhs);
  return M;
}

Eigen::VectorXcd stream_from_vorticity(const OperatorMatrix& M, const Eigen::VectorXcd& omega) {
  Eigen::VectorXd re = M.L_lu.solve(omega.real());
  Eigen::VectorXd im = M.L_lu.solve(omega.imag());
  Eigen::VectorXcd psi(omega.size());
  psi.real() = -re;
  psi.imag() = -im;
  return psi;
}

Eigen::VectorXcd vorticity_from_stream(const OperatorMatrix& M, const Eigen::VectorXcd& psi) {
  return -(M.L.cast<cplx>() * psi);
}

Eigen::VectorXcd sample_interior(const OperatorMatrix& M, const ComplexFn& f) {
  Eigen::VectorXcd v(M.interior());
  for (std::size_t i = 0; i < M.interior(); ++i) v(i) = f(M.y[i + 1]);
  return v;
}

std::vector<Eigen::VectorXcd> evolve_direct(const OperatorMatrix& M, const Eigen::VectorXcd& psi0,
                                            const std::vector<double>& t_samples) {
  std::vector<Eigen::VectorXcd> out;
  out.reserve(t_samples.size());
  Eigen::VectorXcd psi = psi0;
  double t_prev = 0.0;
  double dt_cached = -1.0;
  Eigen::MatrixXcd step;
  const Eigen::MatrixXcd R = M.R.cast<cplx>();
  for (double t : t_samples) {
    const double dt = t - t_prev;
    if (dt < 0.0) throw OutOfRange("time samples must be non-decreasing and start at t >= 0");
    if (dt > 0.0) {
      if (std::abs(dt - dt_cached) > 1e-12 * std::max(1.0, dt)) {
        Eigen::MatrixXcd A = cplx(0.0, -M.alpha * dt) * R;
        step = A.exp();
        dt_cached = dt;
      }
      psi = step * psi;
      if (!psi.allFinite()) {
        std::ostringstream os;
        os << "non-finite stream function at t=" << t;
        throw StepFailure(os.str());
      }
    }
    out.push_back(psi);
    t_prev = t;
  }
  return out;
}

double l2_norm(const OperatorMatrix& M, const Eigen::VectorXcd& v) {
  return std::sqrt(M.h * v.squaredNorm());
}

Eigen::VectorXcd dy_full(const OperatorMatrix& M, const Eigen::VectorXcd& psi) {
  const std::size_t n = M.n;
  Eigen::VectorXcd p = Eigen::VectorXcd::Zero(n);
  p.segment(1, n - 2) = psi;
  Eigen::VectorXcd d(n);
  const double s = 1.0 / (12.0 * M.h);
  for (std::size_t j = 2; j + 2 < n; ++j) d(j) = s * (p(j - 2) - 8.0 * p(j - 1) + 8.0 * p(j + 1) - p(j + 2));
  d(0) = s * (-25.0 * p(0) + 48.0 * p(1) - 36.0 * p(2) + 16.0 * p(3) - 3.0 * p(4));
  d(1) = s * (-3.0 * p(0) - 10.0 * p(1) + 18.0 * p(2) - 6.0 * p(3) + p(4));
  d(n - 1) = -s * (-25.0 * p(n - 1) + 48.0 * p(n - 2) - 36.0 * p(n - 3) + 16.0 * p(n - 4) - 3.0 * p(n - 5));
  d(n - 2) = -s * (-3.0 * p(n - 1) - 10.0 * p(n - 2) + 18.0 * p(n - 3) - 6.0 * p(n - 4) + p(n - 5));
  return d;
}

VelocityNorms velocity_norms(const OperatorMatrix& M, const Eigen::VectorXcd& psi) {
  Eigen::VectorXcd d = dy_full(M, psi);
  double dd = 0.0;
  for (std::size_t j = 0; j < M.n; ++j) {
    double w = (j == 0 || j + 1 == M.n) ? 0.5 : 1.0;
    dd += w * std::norm(d(j));
  }
  dd *= M.h;
  const double pp = M.h * psi.squaredNorm();
  VelocityNorms out;
  out.V = std::sqrt(dd + M.alpha * M.alpha * pp);
  out.V2 = M.alpha * std::sqrt(pp);
  Eigen::VectorXcd omega = vorticity_from_stream(M, psi);
  out.V_energy = std::sqrt(std::max(0.0, M.h * psi.dot(omega).real()));
  return out;
}

cplx value_at(const OperatorMatrix& M, const Eigen::VectorXcd& v, double y) {
  const std::size_t n = M.n;
  double pos = (y + 1.0) / M.h;
  std::size_t j = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(n - 2)));
  std::size_t s = j >= 1 ? j - 1 : 0;
  s = std::min(s, n - 4);
  double w[4];
  lagrange_weights(std::span<const double>(&M.y[s], 4), y, std::span<double>(w, 4));
  cplx acc{};
  for (std::size_t k = 0; k < 4; ++k) {
    std::size_t node = s + k;
    if (node == 0 || node == n - 1) continue;
    acc += w[k] * v(node - 1);
  }
  return acc;
}

// ---------------------------------------------------------------------------

std::vector<double> graded_grid(const ShearProfile& profile, double c_real, double eps, const BvpOptions& opt) {
  std::vector<double> crit;
  if (c_real >= profile.u0() && c_real <= profile.u1()) {
    double yc = profile.y_of(c_real);
    crit = {-yc, yc};
  }
  const double h_min = std::min(opt.h_max, std::max(opt.h_min_factor * std::abs(eps), 1e-12));
  auto spacing = [&](double y) {
    double d = 2.0;
    for (double yc : crit) d = std::min(d, std::abs(y - yc));
    return std::clamp(opt.grading * d, h_min, opt.h_max);
  };
  std::vector<double> y{-1.0};
  double cur = -1.0;
  while (true) {
    double h = spacing(cur);
    // Do not step across a critical point with a large stride.
    for (double yc : crit) {
      if (yc > cur && cur + h > yc) h = std::max(h_min, std::min(h, yc - cur + h_min));
    }
    if (cur + 1.5 * h >= 1.0) break;
    cur += h;
    y.push_back(cur);
  }
  y.push_back(1.0);
  return y;
}

namespace {

std::vector<cplx> solve_three_point(const ShearProfile& profile, double alpha, cplx c, const ComplexFn& omega,
                                    const std::vector<double>& y) {
  const std::size_t N = y.size();
  const std::size_t m = N - 2;
  using SpMat = Eigen::SparseMatrix<cplx>;
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(3 * m);
  Eigen::VectorXcd rhs(m);
  for (std::size_t i = 1; i + 1 < N; ++i) {
    const double hl = y[i] - y[i - 1];
    const double hr = y[i + 1] - y[i];
    const cplx s = profile.u(y[i]) - c;
    if (std::abs(s) < 1e-14) {
      std::ostringstream os;
      os << "|u - c| below 1e-14 at y=" << y[i];
      throw NearSingular(os.str());
    }
    const double wl = 2.0 / (hl * (hl + hr));
    const double wc = -2.0 / (hl * hr);
    const double wr = 2.0 / (hr * (hl + hr));
    const std::size_t r = i - 1;
    if (i >= 2) trip.emplace_back(r, r - 1, s * wl);
    trip.emplace_back(r, r, s * (wc - alpha * alpha) - profile.d2u(y[i]));
    if (i + 2 < N) trip.emplace_back(r, r + 1, s * wr);
    rhs(r) = omega(y[i]);
  }
  SpMat A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw NearSingular("sparse factorization failed");
  Eigen::VectorXcd x = lu.solve(rhs);
  std::vector<cplx> out(N, cplx{});
  for (std::size_t i = 0; i < m; ++i) out[i + 1] = x(i);
  return out;
}

} // namespace

BvpSolution solve_inhom_bvp(const ShearProfile& profile, double alpha, cplx c, const ComplexFn& omega,
                            std::vector<double> nodes, const BvpOptions& opt) {
  if (nodes.empty()) nodes = graded_grid(profile, c.real(), c.imag(), opt);
  BvpSolution sol;
  sol.c = c;
  sol.y = nodes;
  sol.Phi = solve_three_point(profile, alpha, c, omega, nodes);
  if (opt.richardson) {
    std::vector<double> fine;
    fine.reserve(2 * nodes.size());
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      fine.push_back(nodes[i]);
      fine.push_back(0.5 * (nodes[i] + nodes[i + 1]));
    }
    fine.push_back(nodes.back());
    std::vector<cplx> pf = solve_three_point(profile, alpha, c, omega, fine);
    for (std::size_t i = 0; i < nodes.size(); ++i) sol.Phi[i] = (4.0 * pf[2 * i] - sol.Phi[i]) / 3.0;
  }
  return sol;
}

LimitingAbsorptionReport limiting_absorption(const ShearProfile& profile, double alpha, double c_real,
                                             const std::vector<double>& eps, const ComplexFn& omega,
                                             const ComplexFn& limit, const BvpOptions& opt) {
  if (eps.empty()) throw OutOfRange("empty eps sequence");
  LimitingAbsorptionReport rep;
  rep.eps = eps;
  const double eps_min = *std::min_element(eps.begin(), eps.end());
  rep.y = graded_grid(profile, c_real, eps_min, opt);
  for (double e : eps) {
    rep.Phi.push_back(solve_inhom_bvp(profile, alpha, cplx(c_real, e), omega, rep.y, opt).Phi);
  }
  auto sup_diff = [&](const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  };
  for (std::size_t k = 0; k + 1 < eps.size(); ++k) rep.cauchy.push_back(sup_diff(rep.Phi[k], rep.Phi[k + 1]));
  rep.cauchy_decreasing = true;
  for (std::size_t k = 1; k < rep.cauchy.size(); ++k) {
    if (!(rep.cauchy[k] < rep.cauchy[k - 1])) rep.cauchy_decreasing = false;
  }
  if (limit) {
    std::vector<cplx> lim(rep.y.size());
    for (std::size_t i = 0; i < rep.y.size(); ++i) {
      lim[i] = limit(rep.y[i]);
      rep.limit_norm = std::max(rep.limit_norm, std::abs(lim[i]));
    }
    for (const auto& p : rep.Phi) rep.error_vs_limit.push_back(sup_diff(p, lim));
  }
  return rep;
}

// ---------------------------------------------------------------------------

SpectrumReport discrete_spectrum(const OperatorMatrix& M, double threshold) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(M.R, true);
  SpectrumReport rep;
  const Eigen::VectorXcd ev = es.eigenvalues();
  std::vector<double> im;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    rep.eigenvalues.push_back(ev(k));
    im.push_back(std::abs(ev(k).imag()));
    rep.max_abs_imag = std::max(rep.max_abs_imag, im.back());
  }
  std::vector<double> sorted = im;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  rep.median_abs_imag = sorted[sorted.size() / 2];
  rep.threshold = threshold >= 0.0 ? threshold : 10.0 * rep.median_abs_imag;
  std::vector<Eigen::Index> picked;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (im[k] > rep.threshold) {
      rep.discrete.push_back(ev(k));
      picked.push_back(k);
    }
  }
  if (!picked.empty()) {
    const Eigen::MatrixXcd V = es.eigenvectors();
    const Eigen::MatrixXcd Vinv = V.inverse();
    rep.projection = Eigen::MatrixXcd::Zero(V.rows(), V.cols());
    for (Eigen::Index k : picked) rep.projection += V.col(k) * Vinv.row(k);
  }
  return rep;
}

bool project_out(const SpectrumReport& s, Eigen::VectorXcd& psi) {
  if (s.projection.size() == 0) return false;
  psi -= s.projection * psi;
  return true;
}

// ---------------------------------------------------------------------------

Phi1Value phi1_ivp(const ShearProfile& profile, double alpha, double c_real, double y) {
  const double yc = profile.y_of(c_real);
  const double a2 = alpha * alpha;
  const double s0 = 1e-4;
  const double d = y - yc;
  const bool at_origin = yc == 0.0;
  auto series = [&](double s) {
    Phi1Value v;
    if (at_origin) {
      v.phi1 = 1.0 + a2 * s * s / 10.0;
      v.dphi1 = a2 * s / 5.0;
    } else {
      const double beta = 0.5 * profile.d2u(yc) / profile.du(yc);
      v.phi1 = 1.0 + a2 * s * s / 6.0 - beta * a2 * s * s * s / 18.0;
      v.dphi1 = a2 * s / 3.0 - beta * a2 * s * s / 6.0;
    }
    return v;
  };
  if (std::abs(d) <= s0) return series(d);
  const double dir = d > 0.0 ? 1.0 : -1.0;
  if (at_origin && dir < 0.0) {
    Phi1Value mirror = phi1_ivp(profile, alpha, c_real, -y);
    return {mirror.phi1, -mirror.dphi1};
  }

  using State = std::array<double, 2>;
  Phi1Value start = series(dir * s0);
  State x{start.phi1, start.dphi1};
  auto rhs = [&](const State& s, State& ds, double yy) {
    const double shift = profile.u(yy) - c_real;
    ds[0] = s[1];
    ds[1] = a2 * s[0] - 2.0 * profile.du(yy) / shift * s[1];
  };
  namespace ode = boost::numeric::odeint;
  ode::integrate_adaptive(ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>()), rhs, x,
                          yc + dir * s0, y, dir * 1e-5);
  return {x[0], x[1]};
}

} // namespace raydamp
