#include "raydamp/spectral_quantities.hpp"

#include "raydamp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace raydamp {

std::vector<double> SpectralTables::c() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.cv.c_r);
  return out;
}

std::vector<double> SpectralTables::c_tilde() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.cv.c_tilde);
  return out;
}

double compute_A1(const SqrtCoordinate& sq, double c, double gap) {
  const auto cv = critical_value(sq.profile(), c);
  return cv.rho * cv.du_c * pv_inverse(sq, c, gap).dP;
}

void compute_AB(SpectralRow& row) {
  const auto& cv = row.cv;
  row.B = kPi * cv.rho * cv.d2u_c / (cv.du_c * cv.du_c);
  row.A = row.A1 + cv.du_c * cv.rho * row.II3;
}

void compute_A2B2(SpectralRow& row, double u0) {
  const double q = u0 - row.cv.c_r;
  row.A2 = q * row.A + row.J;
  row.B2 = q * row.B;
}

double compute_J(const ShearProfile& profile, double alpha, const CriticalValue& cv, const BoundaryValues& bv,
                 bool* limit) {
  if (limit) *limit = false;
  if (cv.y_c <= 1e-10) {
    if (alpha == 0.0) throw DegenerateBoundary("J: alpha = 0 with y_c = 0");
    if (limit) *limit = true;
    return -15.0 * profile.d2u(0.0) * (profile.u1() - profile.u0()) / (8.0 * alpha * alpha);
  }
  const double d = (bv.phi1_at_0 * bv.dphi1_at_0).real();
  if (std::abs(d) < 1e-300 || std::abs(bv.dphi1_at_0) < 1e-14 * std::max(1.0, alpha * alpha) * cv.y_c) {
    throw DegenerateBoundary("J: phi1'(0, c) vanishes at y_c = " + std::to_string(cv.y_c));
  }
  return cv.du_c * (profile.u1() - cv.c_r) / d;
}

SpectralRow spectral_row(const SqrtCoordinate& sq, const RayleighSolution& sol, double gap) {
  const ShearProfile& p = sq.profile();
  SpectralRow row;
  row.cv = sol.cv;
  row.A1 = compute_A1(sq, row.cv.c_r, gap);
  row.II2 = II_2(p, row.cv.c_r);
  row.II3 = II_3(sol);
  const auto bv = boundary_values(sol);
  row.phi1_at_0 = bv.phi1_at_0.real();
  row.dphi1_at_0 = bv.dphi1_at_0.real();
  compute_AB(row);
  if (sol.alpha > 0.0) {
    row.J = compute_J(p, sol.alpha, row.cv, bv, &row.J_limit);
    compute_A2B2(row, p.u0());
  } else {
    row.J = row.A2 = row.B2 = NAN;
  }
  row.identity_residual = std::abs(row.A1 - (p.u0() - p.u1() - row.cv.rho * row.II2));
  return row;
}

SpectralTables build_spectral_tables(const ShearProfile& profile, double alpha, const SpectralOptions& opt,
                                     const NodeVisitor& visit) {
  SqrtCoordinate sq(profile);
  SpectralTables t;
  t.alpha = alpha;
  t.grid = make_pv_grid(sq.v1(), opt.n_half, opt.gap_fraction);
  const auto nodes = t.grid.positive();
  t.rows.resize(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t k) {
    const auto cv = critical_value_from_tilde(sq, nodes[k]);
    const auto sol = solve_phi1(profile, alpha, cv, opt.rayleigh);
    t.rows[k] = spectral_row(sq, sol, t.grid.endpoint_gap);
    if (visit) visit(k, t.rows[k], sol);
  });
  return t;
}

EmbeddingScan scan_embedding(const SpectralTables& tables, double threshold, double curvature_tol) {
  EmbeddingScan scan;
  scan.min_AB = INFINITY;
  scan.min_A2B2 = INFINITY;
  const double a = tables.alpha;
  for (const auto& r : tables.rows) {
    const double w = 1.0 + a * r.cv.rho0;
    const double ab = (r.A * r.A + r.B * r.B) / (w * w);
    const double a2b2 = (r.A2 * r.A2 + r.B2 * r.B2) * std::pow(a, 4) / (w * w * std::pow(1.0 + a * r.cv.y_c, 4));
    scan.min_AB = std::min(scan.min_AB, ab);
    scan.min_A2B2 = std::min(scan.min_A2B2, a2b2);
    if (std::min(ab, a2b2) < threshold && std::abs(r.cv.d2u_c) < curvature_tol) scan.candidates.push_back(r.cv.c_r);
  }
  return scan;
}

namespace {

template <class T>
std::vector<T> c_derivative_impl(const std::vector<double>& ct, const std::vector<T>& v) {
  const std::size_t n = v.size();
  if (n < 5 || ct.size() != n) throw ConfigError("c_derivative needs at least 5 matching nodes");
  const double h = (ct.back() - ct.front()) / static_cast<double>(n - 1);
  static constexpr double kCentral[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
  static constexpr double kEdge0[5] = {-25.0, 48.0, -36.0, 16.0, -3.0};
  static constexpr double kEdge1[5] = {-3.0, -10.0, 18.0, -6.0, 1.0};
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    T d{};
    if (i >= 2 && i + 2 < n) {
      for (int k = 0; k < 5; ++k) d += kCentral[k] * v[i - 2 + k];
    } else if (i == 0) {
      for (int k = 0; k < 5; ++k) d += kEdge0[k] * v[k];
    } else if (i == 1) {
      for (int k = 0; k < 5; ++k) d += kEdge1[k] * v[k];
    } else if (i == n - 2) {
      for (int k = 0; k < 5; ++k) d -= kEdge1[k] * v[n - 1 - k];
    } else {
      for (int k = 0; k < 5; ++k) d -= kEdge0[k] * v[n - 1 - k];
    }
    out[i] = d / (12.0 * h) / (2.0 * ct[i]);
  }
  return out;
}

} // namespace

std::vector<double> c_derivative(const std::vector<double>& c_tilde, const std::vector<double>& values) {
  return c_derivative_impl(c_tilde, values);
}

std::vector<cplx> c_derivative(const std::vector<double>& c_tilde, const std::vector<cplx>& values) {
  return c_derivative_impl(c_tilde, values);
}

void write_csv(const SpectralTables& tables, std::ostream& out) {
  out << "c,y_c,A1,A,B,J,A2,B2,II2,II3\n";
  char buf[64];
  auto put = [&](double x, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf << sep;
  };
  for (const auto& r : tables.rows) {
    put(r.cv.c_r, ',');
    put(r.cv.y_c, ',');
    put(r.A1, ',');
    put(r.A, ',');
    put(r.B, ',');
    put(r.J, ',');
    put(r.A2, ',');
    put(r.B2, ',');
    put(r.II2, ',');
    put(r.II3, '\n');
  }
}

} // namespace raydamp
