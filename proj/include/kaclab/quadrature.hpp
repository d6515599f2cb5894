#pragma once

#include <functional>
#include <span>
#include <vector>

namespace kaclab::quad {

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod integral over [a, b]; b may be +infinity.
double integrate(const Integrand& f, double a, double b, double rel_tol = 1e-13);

/// Integral over [0, infinity). The interval is split at multiples of each
/// characteristic length in `scales` so that features of very different
/// widths (e.g. mixture components with variance ratio 1e4) are all resolved.
double integrate_half_line(const Integrand& f, std::span<const double> scales, double rel_tol = 1e-13);

/// Composite trapezoid weights for n equally spaced nodes.
std::vector<double> trapezoid_weights(int n, double dx);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre
{
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int order);

} // namespace kaclab::quad
