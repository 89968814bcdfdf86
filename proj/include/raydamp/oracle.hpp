#pragma once

// Independent reference computations on [-1, 1]: a fourth-order finite
// difference discretization of the linearized operator, exact-in-time
// evolution through the matrix exponential, the inhomogeneous Rayleigh
// boundary value problem at complex c, and discrete spectra.

#include "raydamp/numerics.hpp"
#include "raydamp/profiles.hpp"

#include <Eigen/Dense>

#include <vector>

namespace raydamp {

struct OperatorMatrix {
  std::size_t n = 0;            // nodes including the two Dirichlet ends
  double alpha = 0.0;
  double h = 0.0;
  bool transport_only = false;  // u'' term dropped
  std::vector<double> y;        // all n nodes
  Eigen::MatrixXd L;            // d^2/dy^2 - alpha^2 on interior nodes
  Eigen::MatrixXd R;            // L^{-1} (diag(u) L - diag(u''))
  Eigen::VectorXd u;            // interior values
  Eigen::VectorXd d2u;
  Eigen::PartialPivLU<Eigen::MatrixXd> L_lu;

  std::size_t interior() const { return n - 2; }
  std::vector<double> interior_nodes() const { return {y.begin() + 1, y.end() - 1}; }
};

OperatorMatrix assemble(const ShearProfile& profile, double alpha, std::size_t n, bool transport_only = false);

// psi = -L^{-1} omega and omega = -L psi on interior nodes.
Eigen::VectorXcd stream_from_vorticity(const OperatorMatrix& M, const Eigen::VectorXcd& omega);
Eigen::VectorXcd vorticity_from_stream(const OperatorMatrix& M, const Eigen::VectorXcd& psi);

// Samples a function at the interior nodes.
Eigen::VectorXcd sample_interior(const OperatorMatrix& M, const ComplexFn& f);

// psi(t) = exp(-i alpha t R) psi0 at each requested time (non-decreasing).
// One exponential is formed per distinct step length and reused.
std::vector<Eigen::VectorXcd> evolve_direct(const OperatorMatrix& M, const Eigen::VectorXcd& psi0,
                                            const std::vector<double>& t_samples);

// Trapezoid L^2 norm over [-1, 1] of an interior vector padded with zeros.
double l2_norm(const OperatorMatrix& M, const Eigen::VectorXcd& v);

// d/dy of an interior vector (Dirichlet ends), all n nodes, fourth order.
Eigen::VectorXcd dy_full(const OperatorMatrix& M, const Eigen::VectorXcd& psi);

struct VelocityNorms {
  double V = 0.0;   // ||(-psi', i alpha psi)||
  double V2 = 0.0;  // ||i alpha psi||
  double V_energy = 0.0; // sqrt(Re <psi, omega>), the same quantity through the vorticity
};

VelocityNorms velocity_norms(const OperatorMatrix& M, const Eigen::VectorXcd& psi);

// Interior-node value of an interior vector at an arbitrary y (cubic).
cplx value_at(const OperatorMatrix& M, const Eigen::VectorXcd& v, double y);

// ---------------------------------------------------------------------------

struct BvpOptions {
  double h_max = 1.0 / 2048.0;  // spacing far from the critical layers
  double grading = 0.05;        // spacing / distance to the nearest critical point
  double h_min_factor = 0.1;    // smallest spacing relative to |Im c|
  bool richardson = true;       // combine with a bisected grid
};

struct BvpSolution {
  cplx c;
  std::vector<double> y;
  std::vector<cplx> Phi;
};

// Nodes on [-1, 1] clustered at +-y_c.
std::vector<double> graded_grid(const ShearProfile& profile, double c_real, double eps, const BvpOptions& opt);

// (u - c)(Phi'' - alpha^2 Phi) - u'' Phi = omega with Phi(+-1) = 0, three-point
// stencil on `nodes` (graded_grid when empty), sparse direct solve.
BvpSolution solve_inhom_bvp(const ShearProfile& profile, double alpha, cplx c, const ComplexFn& omega,
                            std::vector<double> nodes = {}, const BvpOptions& opt = {});

struct LimitingAbsorptionReport {
  std::vector<double> eps;
  std::vector<double> cauchy;          // ||Phi(eps_k) - Phi(eps_{k+1})||_inf
  bool cauchy_decreasing = false;
  std::vector<double> error_vs_limit;  // ||Phi(eps_k) - Phi_limit||_inf, when supplied
  double limit_norm = 0.0;
  std::vector<double> y;
  std::vector<std::vector<cplx>> Phi;
};

// Solves at c_real + i eps_k on one grid built for the smallest eps. If
// `limit` is non-empty it is evaluated at the grid nodes and compared.
LimitingAbsorptionReport limiting_absorption(const ShearProfile& profile, double alpha, double c_real,
                                             const std::vector<double>& eps, const ComplexFn& omega,
                                             const ComplexFn& limit = {}, const BvpOptions& opt = {});

// ---------------------------------------------------------------------------

struct SpectrumReport {
  std::vector<cplx> eigenvalues;
  double max_abs_imag = 0.0;
  double median_abs_imag = 0.0;
  double threshold = 0.0;
  std::vector<cplx> discrete;          // |Im| above threshold
  Eigen::MatrixXcd projection;         // onto their span (empty when none)
};

// Full eigensolve of R. `threshold` < 0 means 10x the median |Im lambda|.
SpectrumReport discrete_spectrum(const OperatorMatrix& M, double threshold = -1.0);

// Removes the discrete-spectrum component; returns false when that was a no-op.
bool project_out(const SpectrumReport& s, Eigen::VectorXcd& psi);

// ---------------------------------------------------------------------------

// phi1 and its y-derivative at y for real c, by adaptive Runge-Kutta
// integration of phi1'' + 2u'/(u-c) phi1' = alpha^2 phi1 from a series start
// next to y_c.
struct Phi1Value {
  double phi1 = 1.0;
  double dphi1 = 0.0;
};
Phi1Value phi1_ivp(const ShearProfile& profile, double alpha, double c_real, double y);

} // namespace raydamp
