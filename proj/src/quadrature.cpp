#include "kaclab/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace kaclab::quad {

double integrate(const Integrand& f, double a, double b, double rel_tol)
{
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 20, rel_tol, &err);
}

double integrate_half_line(const Integrand& f, std::span<const double> scales, double rel_tol)
{
  std::vector<double> cuts{ 0.0 };
  double largest = 0.0;
  for (double s : scales) {
    if (!(s > 0.0))
      continue;
    largest = std::max(largest, s);
    for (int k = -4; k <= 6; ++k)
      cuts.push_back(s * std::ldexp(1.0, k));
  }
  if (largest == 0.0)
    throw std::invalid_argument("integrate_half_line needs a positive scale");
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    total += integrate(f, cuts[k], cuts[k + 1], rel_tol);
  total += integrate(f, cuts.back(), std::numeric_limits<double>::infinity(), rel_tol);
  return total;
}

std::vector<double> trapezoid_weights(int n, double dx)
{
  std::vector<double> w(static_cast<std::size_t>(n), dx);
  if (n >= 1) {
    w.front() = 0.5 * dx;
    w.back() = 0.5 * dx;
  }
  return w;
}

namespace {

GaussLegendre compute_gauss_legendre(int order)
{
  GaussLegendre gl;
  gl.nodes.resize(static_cast<std::size_t>(order));
  gl.weights.resize(static_cast<std::size_t>(order));
  // Newton iteration on P_n from Chebyshev initial guesses.
  for (int i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    gl.nodes[static_cast<std::size_t>(i)] = x;
    gl.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return gl;
}

} // namespace

const GaussLegendre& gauss_legendre(int order)
{
  static std::mutex mu;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(order);
  if (it == cache.end())
    it = cache.emplace(order, compute_gauss_legendre(order)).first;
  return it->second;
}

} // namespace kaclab::quad
