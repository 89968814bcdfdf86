#pragma once

#include "raydamp/numerics.hpp"
#include "raydamp/profiles.hpp"

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace raydamp {

// Nodes on [0, 1]: a uniform grid with the critical point y_c inserted.
// Uniform nodes closer to y_c than `merge_fraction` of a cell are dropped.
// Every cell carries a 4-point Gauss rule whose values come from cubic
// interpolation restricted to the cell's own side of y_c.
class CriticalGrid {
public:
  static constexpr int kQuad = 4;
  static constexpr int kStencil = 4;

  CriticalGrid(const ShearProfile& profile, const CriticalValue& cv, std::size_t n_uniform,
               double merge_fraction = 0.05);

  // Grid built from explicit nodes; they must include y_c (throws otherwise).
  CriticalGrid(const ShearProfile& profile, const CriticalValue& cv, std::vector<double> nodes);

  std::size_t size() const { return y_.size(); }
  std::size_t cells() const { return y_.size() - 1; }
  std::size_t critical_index() const { return ic_; }
  const std::vector<double>& nodes() const { return y_; }
  double node(std::size_t i) const { return y_[i]; }
  double spacing() const { return h_; }
  const CriticalValue& critical() const { return cv_; }

  // u(y) - c at nodes and at quadrature points (removable form near y_c).
  const std::vector<cplx>& shifted_nodes() const { return shift_node_; }
  cplx shifted_quad(std::size_t cell, int q) const { return shift_quad_[cell * kQuad + q]; }
  double quad_point(std::size_t cell, int q) const { return xq_[cell * kQuad + q]; }
  double quad_weight(std::size_t cell, int q) const { return wq_[cell * kQuad + q]; }

  // Cubic interpolant of nodal values at quadrature point q of a cell.
  template <class T>
  T interp(std::span<const T> values, std::size_t cell, int q) const {
    const std::size_t s = stencil_start_[cell];
    const int m = stencil_size_[cell];
    const double* w = &lw_[(cell * kQuad + q) * kStencil];
    T acc{};
    for (int k = 0; k < m; ++k) acc += w[k] * values[s + k];
    return acc;
  }

  // Interpolated value at an arbitrary y (one-sided stencils).
  template <class T>
  T value_at(std::span<const T> values, double y) const;

  // Cumulative integral from y_c outward: out[i] = int_{y_c}^{y_i} g, where the
  // integrand at quadrature points is produced by `integrand(cell, q)`.
  template <class Fn>
  std::vector<cplx> cumulative_from_critical(const Fn& integrand) const;

  // Integral over the whole of [0, 1] of the quadrature-point integrand.
  template <class Fn>
  cplx integrate(const Fn& integrand) const {
    cplx acc{};
    for (std::size_t c = 0; c < cells(); ++c) {
      for (int q = 0; q < kQuad; ++q) acc += quad_weight(c, q) * integrand(c, q);
    }
    return acc;
  }

  // u(y) - c evaluated through the averaged-derivative form when |y - y_c| < 1e-4.
  cplx shifted(double y) const;

  // First derivative of nodal values at node i from a 5-point one-sided-safe stencil.
  template <class T>
  T derivative_at(std::span<const T> values, std::size_t i, bool allow_cross = false) const;

private:
  void build();
  void side_bounds(std::size_t cell, std::size_t& lo, std::size_t& hi) const;

  CriticalValue cv_;
  ShearProfile profile_;
  std::vector<double> y_;
  std::size_t ic_ = 0;
  double h_ = 0.0;
  std::vector<cplx> shift_node_;
  std::vector<cplx> shift_quad_;
  std::vector<double> xq_;
  std::vector<double> wq_;
  std::vector<std::size_t> stencil_start_;
  std::vector<int> stencil_size_;
  std::vector<double> lw_;
};

struct RayleighOptions {
  std::size_t n_uniform = 1025;
  double tol = 1e-12;  // relative to max(1, sup|phi1|)
  int max_iter = 200;
};

// Regular solution of the homogeneous Rayleigh equation written as
// phi = (u - c) phi1, with phi1(y_c) = 1 and phi1'(y_c) = 0.
struct RayleighSolution {
  double alpha = 0.0;
  CriticalValue cv;
  std::vector<double> y;
  std::vector<cplx> phi1;
  std::vector<cplx> phi1_minus_one; // alpha^2 T phi1, kept separately for relative accuracy near y_c
  std::vector<cplx> dphi1;
  std::vector<cplx> phi;
  int iterations = 0;
  double last_update = 0.0;
  double fixed_point_residual = 0.0;
  std::shared_ptr<const CriticalGrid> grid;

  cplx phi1_at(double yy) const;
  cplx dphi1_at(double yy) const;
};

// T f(y) = int_{y_c}^y (u - c)^{-2} int_{y_c}^{y'} f (u - c)^2 dz dy' on the grid nodes.
// When `inner` is non-null it receives the inner operator (the y-derivative of T f).
std::vector<cplx> apply_T(const CriticalGrid& grid, std::span<const cplx> f,
                          std::vector<cplx>* inner = nullptr);

// Same on caller-provided nodes in [0, 1]. For real c a node closer to y_c than
// 1e-9 (other than y_c itself) raises SingularEvaluation.
std::vector<cplx> apply_T(const ShearProfile& profile, const CriticalValue& cv,
                          std::span<const double> nodes, std::span<const cplx> f);

RayleighSolution solve_phi1(const ShearProfile& profile, double alpha, const CriticalValue& cv,
                            const RayleighOptions& options = {});

struct LogDerivatives {
  std::vector<cplx> F;  // phi1' / phi1
  std::vector<cplx> G;  // d_c phi1 / phi1 at fixed y
  std::vector<cplx> G1; // F / u'(y_c) + G
  double riccati_residual = 0.0;   // sup away from a 2h neighbourhood of y_c
  cplx slope_at_critical{};        // dF/dy at y_c
};

LogDerivatives log_derivatives(const ShearProfile& profile, const RayleighSolution& sol,
                               const RayleighOptions& options = {});

struct BoundaryValues {
  cplx phi1_at_0;
  cplx dphi1_at_0;
};

BoundaryValues boundary_values(const ShearProfile& profile, double alpha, const CriticalValue& cv,
                               const RayleighOptions& options = {});
BoundaryValues boundary_values(const RayleighSolution& sol);

} // namespace raydamp

#include "raydamp/detail/critical_grid_impl.hpp"
