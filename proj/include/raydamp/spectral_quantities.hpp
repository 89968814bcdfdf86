#pragma once

// Scalar functions of c assembled from the homogeneous solution and the
// singular integrals, tabulated on a grid uniform in c_tilde.

#include "raydamp/profiles.hpp"
#include "raydamp/rayleigh.hpp"
#include "raydamp/singular_integrals.hpp"

#include <functional>
#include <ostream>
#include <vector>

namespace raydamp {

struct SpectralRow {
  CriticalValue cv;
  double A1 = 0.0;
  double A = 0.0;
  double B = 0.0;
  double J = 0.0;
  double A2 = 0.0;
  double B2 = 0.0;
  double II2 = 0.0;
  double II3 = 0.0;
  double phi1_at_0 = 1.0;
  double dphi1_at_0 = 0.0;
  bool J_limit = false;       // J taken from its y_c -> 0 limit
  double identity_residual = 0.0; // |A1 - (u(0) - u(1) - rho II2)|
};

struct SpectralOptions {
  std::size_t n_half = 1024;
  double gap_fraction = kDefaultGapFraction;
  RayleighOptions rayleigh{};
};

struct SpectralTables {
  double alpha = 0.0;
  PVGrid grid;
  std::vector<SpectralRow> rows; // one per positive c_tilde node

  std::vector<double> c() const;
  std::vector<double> c_tilde() const;
};

double compute_A1(const SqrtCoordinate& sq, double c, double gap = 0.0);

// Fills B, A, A2, B2 of a row whose A1, II3 and J are set.
void compute_AB(SpectralRow& row);
void compute_A2B2(SpectralRow& row, double u0);

// J = u'(y_c)(u(1) - c)/(phi1(0) phi1'(0)); below y_c = 1e-10 the limit
// -15 u''(0)(u(1) - u(0))/(8 alpha^2) is returned and `limit` is set.
double compute_J(const ShearProfile& profile, double alpha, const CriticalValue& cv,
                 const BoundaryValues& bv, bool* limit = nullptr);

// All row quantities at one node from an already solved phi1. J, A2 and B2
// are NaN when alpha = 0.
SpectralRow spectral_row(const SqrtCoordinate& sq, const RayleighSolution& sol, double gap);

// Solves phi1 at every node (in parallel) and calls `visit` with the finished
// row and solution; rows are stored in node order.
using NodeVisitor = std::function<void(std::size_t, const SpectralRow&, const RayleighSolution&)>;
SpectralTables build_spectral_tables(const ShearProfile& profile, double alpha, const SpectralOptions& opt = {},
                                     const NodeVisitor& visit = {});

struct EmbeddingScan {
  std::vector<double> candidates;
  double min_AB = 0.0;   // min (A^2 + B^2)/(1 + alpha rho0)^2
  double min_A2B2 = 0.0; // min of the scaled A2^2 + B2^2
};

// Nodes where either scaled denominator falls below `threshold` and
// |u''(y_c)| < `curvature_tol`.
EmbeddingScan scan_embedding(const SpectralTables& tables, double threshold = 1e-8, double curvature_tol = 1e-6);

// Derivative in c of nodal values: 5-point stencils in c_tilde (uniform),
// one-sided at the ends, then d/dc = (2 c_tilde)^{-1} d/dc_tilde.
std::vector<double> c_derivative(const std::vector<double>& c_tilde, const std::vector<double>& values);
std::vector<cplx> c_derivative(const std::vector<double>& c_tilde, const std::vector<cplx>& values);

// Columns c,y_c,A1,A,B,J,A2,B2,II2,II3 with 17 significant digits.
void write_csv(const SpectralTables& tables, std::ostream& out);

} // namespace raydamp
