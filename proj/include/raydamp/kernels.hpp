#pragma once

// Odd and even damping kernels K_o(c), K_e(c) built from the Lambda
// operators and the spectral tables.

#include "raydamp/spectral_quantities.hpp"

#include <ostream>
#include <vector>

namespace raydamp {

enum class Channel { Odd, Even };

// Vorticity data on [-1, 1] split into odd and even parts.
struct VorticityData {
  ComplexFn omega0;

  cplx odd(double y) const { return 0.5 * (omega0(y) - omega0(-y)); }
  cplx even(double y) const { return 0.5 * (omega0(y) + omega0(-y)); }
  ComplexFn odd_part() const;
  ComplexFn even_part() const;
};

// Test function g on [0, 1] with f = g'' - alpha^2 g. Odd channel requires
// g(0) = g(1) = 0, even channel g'(0) = g(1) = 0.
struct TestFunctionPair {
  Channel channel = Channel::Odd;
  ComplexFn g;
  ComplexFn dg;
  ComplexFn d2g;

  cplx f(double y, double alpha) const { return d2g(y) - alpha * alpha * g(y); }
  // Throws ParityViolation when the boundary data do not match the channel.
  void validate(double tol = 1e-12) const;
};

// Point value at y_c and the singular integrals of one function at one node.
struct SingularParts {
  cplx at_critical{};
  cplx II11{};
  cplx II12{};
  cplx E{};
  cplx II1() const { return II11 + II12; }
};

SingularParts singular_parts(const ComplexFn& phi, const SqrtCoordinate& sq, const RayleighSolution& sol,
                             double gap, bool with_E);

struct LambdaParts {
  cplx first{};  // Lambda_{j,1}
  cplx second{}; // Lambda_{j,2} (or the J part for j = 3, 4)
  cplx total() const { return first + second; }
};

// omega enters through its own parts; g through the parts of u'' g and g(y_c).
LambdaParts lambda_1(const SingularParts& omega, const SpectralRow& row);
LambdaParts lambda_2(const SingularParts& gu2, cplx g_at_critical, const SpectralRow& row);
// Lambda_3 = -rho1 Lambda_1 + Lambda_{3,1} (first = Lambda_{3,1}, second = -rho1 Lambda_1).
LambdaParts lambda_3(const SingularParts& omega_e, const SpectralRow& row);
LambdaParts lambda_4(const SingularParts& gu2, cplx g_at_critical, const SpectralRow& row);

struct KernelInputs {
  ComplexFn omega_o; // empty means zero
  ComplexFn omega_e;
  TestFunctionPair g_o{Channel::Odd, {}, {}, {}};
  TestFunctionPair g_e{Channel::Even, {}, {}, {}};
};

struct KernelRow {
  double c = 0.0;
  double c_tilde = 0.0;
  cplx C_o{}, D_o{}, C_e{}, D_e{}, E_e{};
  LambdaParts L1, L2, L3, L4;
  cplx K_o{};
  cplx K_e{};
};

struct KernelOptions {
  SpectralOptions spectral{};
  double degeneracy = 1e-8;
};

struct KernelTables {
  double alpha = 0.0;
  SpectralTables spectral;
  std::vector<KernelRow> rows;

  std::vector<double> c_tilde() const { return spectral.c_tilde(); }
  std::vector<cplx> K(Channel ch) const;
};

// A^2 + B^2 and A2^2 + B2^2 against their degeneracy thresholds; throws
// SpectralDegeneracy naming the node.
void check_degeneracy(const SpectralRow& row, double alpha, Channel ch, double threshold = 1e-8);

KernelRow kernel_row(const SqrtCoordinate& sq, const SpectralRow& row, const RayleighSolution& sol,
                     const KernelInputs& in, double gap, double threshold = 1e-8);

KernelTables build_kernels(const ShearProfile& profile, double alpha, const KernelInputs& in,
                           const KernelOptions& opt = {});

struct KernelNorms {
  double L1 = 0.0;
  double dL1 = 0.0;
  double d2L1 = 0.0;
  double max_abs = 0.0;
  double first_abs = 0.0; // |K| at the smallest c node
  double last_abs = 0.0;  // |K| at the largest c node
};

// Discrete L^1_c norms of K, d_c K, d_c^2 K on the c_tilde grid (midpoint
// rule with dc = 2 c_tilde dc_tilde).
KernelNorms kernel_norms(const std::vector<double>& c_tilde, const std::vector<cplx>& K);

// Columns c,K_o,K_e,Lambda1,Lambda2,Lambda3,Lambda4 (real parts).
void write_csv(const KernelTables& tables, std::ostream& out);

} // namespace raydamp
