#pragma once

// Small numerical building blocks shared by every module: Gauss-Legendre
// rules, local Lagrange interpolation on nonuniform nodes, composite
// quadrature of callables and a minimal parallel loop.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace raydamp {

using cplx = std::complex<double>;
using RealFn = std::function<double(double)>;
using ComplexFn = std::function<cplx(double)>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

struct GaussRule {
  std::vector<double> nodes;   // on [-1, 1]
  std::vector<double> weights;
};

// Cached n-point Gauss-Legendre rule on [-1, 1].
const GaussRule& gauss_legendre(int n);

// Integral of f over [a, b] with `panels` equal panels of an n-point rule.
double integrate(const RealFn& f, double a, double b, int panels = 8, int n = 10);
cplx integrate(const ComplexFn& f, double a, double b, int panels = 8, int n = 10);

// Panels on [a, b] whose widths grow geometrically away from `a`
// (ratio `growth`, first width `first`). Returns breakpoints a..b.
std::vector<double> graded_breaks(double a, double b, double first, double growth = 1.6);

// Same integrand over a list of breakpoints, one n-point rule per panel.
double integrate_breaks(const RealFn& f, std::span<const double> breaks, int n = 10);
cplx integrate_breaks(const ComplexFn& f, std::span<const double> breaks, int n = 10);

// Lagrange weights for evaluating the interpolant through `nodes` at x.
void lagrange_weights(std::span<const double> nodes, double x, std::span<double> out);

// Weights of the derivative of that interpolant at x.
void lagrange_derivative_weights(std::span<const double> nodes, double x, std::span<double> out);

// Number of worker threads: RAYDAMP_THREADS if set, else hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n) on worker_count() threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Uniform grid of n points on [a, b].
std::vector<double> linspace(double a, double b, std::size_t n);

} // namespace raydamp
