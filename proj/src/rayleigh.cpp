#include "raydamp/rayleigh.hpp"

#include "raydamp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace raydamp {

namespace {

double sup_abs(std::span<const cplx> v) {
  double m = 0.0;
  for (const cplx& x : v) m = std::max(m, std::abs(x));
  return m;
}

} // namespace

CriticalGrid::CriticalGrid(const ShearProfile& profile, const CriticalValue& cv, std::size_t n_uniform,
                           double merge_fraction)
    : cv_(cv), profile_(profile) {
  if (n_uniform < 5) throw OutOfRange("grid needs at least 5 uniform points");
  const double h = 1.0 / static_cast<double>(n_uniform - 1);
  const double yc = cv.y_c;
  y_.reserve(n_uniform + 1);
  for (std::size_t i = 0; i < n_uniform; ++i) {
    double y = i + 1 == n_uniform ? 1.0 : static_cast<double>(i) * h;
    bool boundary = i == 0 || i + 1 == n_uniform;
    if (!boundary && std::abs(y - yc) < merge_fraction * h) continue;
    y_.push_back(y);
  }
  auto it = std::lower_bound(y_.begin(), y_.end(), yc);
  if (it == y_.end() || *it != yc) it = y_.insert(it, yc);
  ic_ = static_cast<std::size_t>(it - y_.begin());
  h_ = h;
  build();
}

CriticalGrid::CriticalGrid(const ShearProfile& profile, const CriticalValue& cv, std::vector<double> nodes)
    : cv_(cv), profile_(profile), y_(std::move(nodes)) {
  if (y_.size() < 2) throw OutOfRange("grid needs at least 2 nodes");
  for (std::size_t i = 1; i < y_.size(); ++i) {
    if (!(y_[i] > y_[i - 1])) throw OutOfRange("grid nodes must be strictly increasing");
  }
  auto it = std::find(y_.begin(), y_.end(), cv.y_c);
  if (it == y_.end()) throw SingularEvaluation("grid does not contain y_c");
  ic_ = static_cast<std::size_t>(it - y_.begin());
  for (std::size_t i = 1; i < y_.size(); ++i) h_ = std::max(h_, y_[i] - y_[i - 1]);
  build();
}

cplx CriticalGrid::shifted(double y) const {
  const double d = y - cv_.y_c;
  double diff;
  if (std::abs(d) < 1e-4) {
    const GaussRule& g = gauss_legendre(8);
    double avg = 0.0;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      double t = 0.5 * (g.nodes[k] + 1.0);
      avg += 0.5 * g.weights[k] * profile_.du(cv_.y_c + t * d);
    }
    diff = d * avg;
  } else {
    diff = profile_.u(y) - cv_.c_r;
  }
  return diff + (cv_.c_r - cv_.c);
}

void CriticalGrid::side_bounds(std::size_t cell, std::size_t& lo, std::size_t& hi) const {
  if (cell < ic_) {
    lo = 0;
    hi = ic_;
  } else {
    lo = ic_;
    hi = y_.size() - 1;
  }
}

void CriticalGrid::build() {
  const std::size_t n = y_.size();
  const std::size_t nc = n - 1;
  shift_node_.resize(n);
  for (std::size_t i = 0; i < n; ++i) shift_node_[i] = shifted(y_[i]);
  shift_node_[ic_] = cv_.c_r - cv_.c;

  const GaussRule& g = gauss_legendre(kQuad);
  xq_.resize(nc * kQuad);
  wq_.resize(nc * kQuad);
  shift_quad_.resize(nc * kQuad);
  stencil_start_.resize(nc);
  stencil_size_.resize(nc);
  lw_.assign(nc * kQuad * kStencil, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    const double a = y_[c];
    const double b = y_[c + 1];
    std::size_t lo;
    std::size_t hi;
    side_bounds(c, lo, hi);
    const std::size_t m = std::min<std::size_t>(kStencil, hi - lo + 1);
    std::size_t s = c > lo ? c - 1 : lo;
    s = std::min(s, hi + 1 - m);
    stencil_start_[c] = s;
    stencil_size_[c] = static_cast<int>(m);
    for (int q = 0; q < kQuad; ++q) {
      const std::size_t k = c * kQuad + q;
      xq_[k] = 0.5 * (a + b) + 0.5 * (b - a) * g.nodes[q];
      wq_[k] = 0.5 * (b - a) * g.weights[q];
      shift_quad_[k] = shifted(xq_[k]);
      lagrange_weights(std::span<const double>(&y_[s], m), xq_[k],
                       std::span<double>(&lw_[k * kStencil], m));
    }
  }
}

// ---------------------------------------------------------------------------

std::vector<cplx> apply_T(const CriticalGrid& grid, std::span<const cplx> f, std::vector<cplx>* inner) {
  if (f.size() != grid.size()) throw OutOfRange("apply_T: sample count does not match grid");
  std::vector<cplx> G = grid.cumulative_from_critical([&](std::size_t c, int q) {
    cplx s = grid.shifted_quad(c, q);
    return grid.interp(f, c, q) * s * s;
  });
  const auto& sn = grid.shifted_nodes();
  const std::size_t ic = grid.critical_index();
  std::vector<cplx> t22(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t22[i] = i == ic ? cplx{} : G[i] / (sn[i] * sn[i]);
  }
  std::span<const cplx> t22s(t22);
  std::vector<cplx> out = grid.cumulative_from_critical(
      [&](std::size_t c, int q) { return grid.interp(t22s, c, q); });
  if (inner) *inner = std::move(t22);
  return out;
}

std::vector<cplx> apply_T(const ShearProfile& profile, const CriticalValue& cv, std::span<const double> nodes,
                          std::span<const cplx> f) {
  if (nodes.size() != f.size()) throw OutOfRange("apply_T: nodes and samples differ in length");
  std::vector<double> y(nodes.begin(), nodes.end());
  std::vector<cplx> vals(f.begin(), f.end());
  const bool real_c = cv.c.imag() == 0.0;
  bool has_critical = false;
  for (double yy : y) {
    double d = std::abs(yy - cv.y_c);
    if (d == 0.0) has_critical = true;
    else if (real_c && d < 1e-9) {
      std::ostringstream os;
      os << "node " << yy << " lies within 1e-9 of y_c=" << cv.y_c;
      throw SingularEvaluation(os.str());
    }
  }
  std::size_t pos = 0;
  if (!has_critical) {
    auto it = std::lower_bound(y.begin(), y.end(), cv.y_c);
    pos = static_cast<std::size_t>(it - y.begin());
    // f at y_c from the nearest four samples.
    std::size_t m = std::min<std::size_t>(4, y.size());
    std::size_t s = pos >= 2 ? pos - 2 : 0;
    s = std::min(s, y.size() - m);
    double w[4];
    lagrange_weights(std::span<const double>(&y[s], m), cv.y_c, std::span<double>(w, m));
    cplx fc{};
    for (std::size_t k = 0; k < m; ++k) fc += w[k] * vals[s + k];
    y.insert(it, cv.y_c);
    vals.insert(vals.begin() + static_cast<std::ptrdiff_t>(pos), fc);
  }
  CriticalGrid grid(profile, cv, y);
  std::vector<cplx> out = apply_T(grid, vals);
  if (!has_critical) out.erase(out.begin() + static_cast<std::ptrdiff_t>(pos));
  return out;
}

cplx RayleighSolution::phi1_at(double yy) const {
  return 1.0 + grid->value_at(std::span<const cplx>(phi1_minus_one), yy);
}

cplx RayleighSolution::dphi1_at(double yy) const {
  return grid->value_at(std::span<const cplx>(dphi1), yy);
}

RayleighSolution solve_phi1(const ShearProfile& profile, double alpha, const CriticalValue& cv,
                            const RayleighOptions& options) {
  if (alpha < 0.0) throw OutOfRange("alpha must be non-negative");
  if (!(options.tol > 0.0)) throw OutOfRange("tol must be positive");
  auto grid = std::make_shared<const CriticalGrid>(profile, cv, options.n_uniform);
  if (alpha * grid->spacing() > 0.25) {
    std::ostringstream os;
    os << "alpha=" << alpha << " is not resolved by a grid of spacing " << grid->spacing();
    throw NoConvergence(os.str());
  }
  const std::size_t n = grid->size();
  const double a2 = alpha * alpha;

  RayleighSolution sol;
  sol.alpha = alpha;
  sol.cv = cv;
  sol.y = grid->nodes();
  std::vector<cplx> m1(n, cplx{});
  std::vector<cplx> phi1(n, cplx{1.0, 0.0});
  std::vector<cplx> inner;
  double update = 0.0;
  double prev_update = 0.0;
  int it = 0;
  if (alpha > 0.0) {
    for (it = 1; it <= options.max_iter; ++it) {
      std::vector<cplx> next = apply_T(*grid, phi1, &inner);
      update = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        next[i] *= a2;
        update = std::max(update, std::abs(next[i] - m1[i]));
      }
      m1 = std::move(next);
      for (std::size_t i = 0; i < n; ++i) phi1[i] = 1.0 + m1[i];
      if (update < options.tol * std::max(1.0, sup_abs(phi1))) break;
      prev_update = update;
    }
    if (it > options.max_iter) {
      std::ostringstream os;
      os << "Picard iteration did not converge in " << options.max_iter << " steps; last update " << update
         << ", contraction estimate " << (prev_update > 0.0 ? update / prev_update : 0.0);
      throw NoConvergence(os.str());
    }
    // Derivative and residual from the converged iterate.
    std::vector<cplx> t = apply_T(*grid, phi1, &inner);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(phi1[i] - 1.0 - a2 * t[i]));
    sol.fixed_point_residual = res;
    sol.dphi1.resize(n);
    for (std::size_t i = 0; i < n; ++i) sol.dphi1[i] = a2 * inner[i];
  } else {
    sol.dphi1.assign(n, cplx{});
  }
  sol.iterations = it;
  sol.last_update = update;
  sol.phi1_minus_one = std::move(m1);
  sol.phi1 = std::move(phi1);
  sol.phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.phi[i] = grid->shifted_nodes()[i] * sol.phi1[i];
  sol.grid = std::move(grid);
  return sol;
}

LogDerivatives log_derivatives(const ShearProfile& profile, const RayleighSolution& sol,
                               const RayleighOptions& options) {
  const CriticalGrid& grid = *sol.grid;
  const std::size_t n = grid.size();
  const std::size_t ic = grid.critical_index();
  LogDerivatives out;
  out.F.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.F[i] = sol.dphi1[i] / sol.phi1[i];

  // c-stencil for the c-derivative at fixed y.
  const double hc = 1e-4 * (profile.u1() - profile.u0());
  const cplx c = sol.cv.c;
  const double cr = sol.cv.c_r;
  std::vector<double> offsets;
  std::vector<double> weights;
  if (cr - hc < profile.u0()) {
    offsets = {0.0, hc, 2.0 * hc};
    weights = {-1.5 / hc, 2.0 / hc, -0.5 / hc};
  } else if (cr + hc > profile.u1()) {
    offsets = {0.0, -hc, -2.0 * hc};
    weights = {1.5 / hc, -2.0 / hc, 0.5 / hc};
  } else {
    offsets = {-hc, hc};
    weights = {-0.5 / hc, 0.5 / hc};
  }
  std::vector<cplx> dc(n, cplx{});
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    if (offsets[k] == 0.0) {
      for (std::size_t i = 0; i < n; ++i) dc[i] += weights[k] * sol.phi1_minus_one[i];
      continue;
    }
    const cplx ck = c + offsets[k];
    DomainTag tag = ck.imag() == 0.0 ? DomainTag::D0 : DomainTag::DEps;
    CriticalValue cvk = critical_value(profile, ck, tag);
    RayleighSolution sk = solve_phi1(profile, sol.alpha, cvk, options);
    std::span<const cplx> vals(sk.phi1_minus_one);
    for (std::size_t i = 0; i < n; ++i) dc[i] += weights[k] * sk.grid->value_at(vals, grid.node(i));
  }
  out.G.resize(n);
  out.G1.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.G[i] = dc[i] / sol.phi1[i];
    out.G1[i] = out.F[i] / sol.cv.du_c + out.G[i];
  }
  out.F[ic] = 0.0;
  out.G[ic] = 0.0;
  out.G1[ic] = 0.0;

  std::span<const cplx> Fs(out.F);
  const auto& sn = grid.shifted_nodes();
  const double a2 = sol.alpha * sol.alpha;
  const double yc = sol.cv.y_c;
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double y = grid.node(i);
    if (std::abs(y - yc) <= 2.0 * grid.spacing()) continue;
    cplx dF = grid.derivative_at(Fs, i);
    cplx r = dF + out.F[i] * out.F[i] + 2.0 * profile.du(y) / sn[i] * out.F[i] - a2;
    res = std::max(res, std::abs(r));
  }
  out.riccati_residual = res;
  out.slope_at_critical = grid.derivative_at(Fs, ic, true);
  return out;
}

BoundaryValues boundary_values(const RayleighSolution& sol) {
  return {sol.phi1.front(), sol.dphi1.front()};
}

BoundaryValues boundary_values(const ShearProfile& profile, double alpha, const CriticalValue& cv,
                               const RayleighOptions& options) {
  return boundary_values(solve_phi1(profile, alpha, cv, options));
}

} // namespace raydamp
