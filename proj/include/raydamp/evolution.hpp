#pragma once

// Time evolution from the spectral representation: limiting coefficients,
// the jump Phi_tilde(y, c) = Phi_-(y, c) - Phi_+(y, c), oscillatory
// integration over c, diagnostics and decay fits.

#include "raydamp/kernels.hpp"

#include <Eigen/Dense>

#include <ostream>
#include <span>
#include <vector>

namespace raydamp {

struct LimitCoefficients {
  cplx mu_o_plus{}, mu_o_minus{};
  cplx mu_e_plus{}, mu_e_minus{};
  cplx nu_e_plus{}, nu_e_minus{};
  cplx mu1{}; // (mu_o_minus - mu_o_plus) = (2/alpha) rho mu1
  cplx nu1{}; // (nu_e_minus - nu_e_plus) = (2/alpha) nu1
  cplx mu2{}; // (mu_e_minus - mu_e_plus) = (2/alpha) mu2
  // |phi phi'(0)(A + iB) - u' rho - phi1 phi1'(0)(u(0) - c)(A2 + iB2)| relative.
  double denominator_residual = 0.0;
};

struct ChannelCoefficients {
  cplx C_o{}, D_o{}, C_e{}, D_e{}, E_e{};
};

ChannelCoefficients channel_coefficients(const SingularParts& omega_o, const SingularParts& omega_e,
                                         const CriticalValue& cv);

// Throws SpectralDegeneracy when A^2 + B^2 or A2^2 + B2^2 is below threshold.
LimitCoefficients limit_coefficients(const SpectralRow& row, double alpha, const ChannelCoefficients& cc,
                                     double threshold = 1e-8);

// Weights w_k with sum_k w_k F(c_k) = int_{c_0}^{c_last} P(c) e^{-i omega c} dc,
// P the piecewise quadratic interpolant of F (the two neighbouring three-point
// stencils averaged on interior panels). Panels with omega * width > 1 are
// subdivided; more than `max_subdivision` pieces raises UnderResolved.
std::vector<cplx> filon_weights(std::span<const double> nodes, double omega, std::size_t max_subdivision = 4096);

struct RepresentationOptions {
  SpectralOptions spectral{};
  double collar_cells = 0.5;     // collar half-width in Rayleigh solver cells
  double degeneracy = 1e-8;
};

// Phi_tilde on a y grid in [-1, 1] for every c node, with the two endpoint
// columns c = u(0), u(1) filled by quadratic extrapolation.
struct Representation {
  double alpha = 0.0;
  std::vector<double> y;
  std::vector<double> c;         // u(0), c nodes..., u(1)
  Eigen::MatrixXcd phi_tilde;    // y.size() x c.size()
  SpectralTables tables;
  std::vector<LimitCoefficients> coefficients;
  std::size_t collar_evaluations = 0; // (y, c) pairs filled by collar interpolation
  double max_denominator_residual = 0.0;
};

Representation build_representation(const ShearProfile& profile, double alpha, const ComplexFn& omega0,
                                    const std::vector<double>& y, const RepresentationOptions& opt = {});

// psi(t, y) = (alpha / 2 pi) int Phi_tilde(y, c) e^{-i alpha c t} dc on the representation grid.
std::vector<cplx> psi_pointwise(const Representation& rep, double t);

// -int K(c) e^{-i alpha c t} dc with K = 0 at both ends of [u(0), u(1)].
cplx psi_projected(const std::vector<double>& c_nodes, const std::vector<cplx>& K, double u0, double u1,
                   double alpha, double t);

// Limit Phi_+ (side > 0) or Phi_- (side < 0) at real c in (u(0), u(1)) of
// (u - c)(Phi'' - alpha^2 Phi) - u'' Phi = omega0 / (i alpha), Phi(+-1) = 0,
// assembled from the closed-form coefficients at the points y in [-1, 1].
std::vector<cplx> limiting_solution(const ShearProfile& profile, double alpha, const ComplexFn& omega0, double c,
                                    const std::vector<double>& y, int side, const RayleighOptions& options = {});

struct EvolutionState {
  double alpha = 0.0;
  double y_probe = 0.6;
  std::vector<double> y;                    // uniform grid on [-1, 1]
  std::vector<double> t;
  std::vector<std::vector<cplx>> psi;       // per t
  std::vector<std::vector<cplx>> omega;     // per t
  std::vector<double> norm_V, norm_V2, omega_at_0, omega_probe;
  double max_stream_residual = 0.0;         // sup |omega + (d^2 - alpha^2) psi| / sup|omega|
  bool projection_noop = true;
};

// Fourth-order derivatives on a uniform grid (one-sided at the ends).
std::vector<cplx> d_dy(const std::vector<double>& y, const std::vector<cplx>& f);
std::vector<cplx> d2_dy2(const std::vector<double>& y, const std::vector<cplx>& f);
double trapezoid_l2(const std::vector<double>& y, const std::vector<cplx>& f);

// Fills omega = -(d^2 - alpha^2) psi and the norm series for each stored psi.
void complete_state(EvolutionState& s);

// Representation-pipeline evolution at the requested times.
EvolutionState representation_evolution(const Representation& rep, const std::vector<double>& t,
                                        double y_probe = 0.6);

// Matrix-exponential evolution from omega0 (spectral projection applied when
// discrete eigenvalues are detected).
EvolutionState oracle_evolution(const ShearProfile& profile, double alpha, const ComplexFn& omega0,
                                std::size_t n, const std::vector<double>& t, double y_probe = 0.6,
                                bool transport_only = false);

// ||V||^2 against -Re int psi (conj(psi)'' - alpha^2 conj(psi)) dy; relative difference.
double energy_identity_residual(const std::vector<double>& y, const std::vector<cplx>& psi, double alpha);

struct DepletionSeries {
  std::vector<double> t;
  std::vector<double> at_zero;
  std::vector<double> at_probe;
  double ratio_at_end = 0.0;         // at_zero.back() / at_zero.front()
  double fraction_decreasing = 0.0;  // successive differences after t_after
};

DepletionSeries depletion_series(const EvolutionState& s, double t_after = 10.0);

// omega(t, y) e^{i alpha u(y) t} on the state grid at sample k.
std::vector<cplx> scattering_profile(const EvolutionState& s, const ShearProfile& profile, std::size_t k);

// int omega0 eta e^{-i alpha u t} dy over [-1, 1] in the variable z = v(y),
// composite Gauss rules with panels resolving the phase alpha z^2 t.
cplx transport_reference(const ShearProfile& profile, const ComplexFn& omega0, const ComplexFn& eta, double alpha,
                         double t, std::size_t max_panels = 1u << 20);

struct DecayFit {
  double exponent = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

// Least-squares slope of log(value) against log(t) over t in [t_lo, t_hi].
DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& values, double t_lo, double t_hi);

// Geometric sample times including both ends.
std::vector<double> log_times(double t_lo, double t_hi, std::size_t n);

void write_series_csv(const EvolutionState& s, std::ostream& out);
void write_snapshot_csv(const EvolutionState& s, std::size_t k, std::ostream& out);

} // namespace raydamp
