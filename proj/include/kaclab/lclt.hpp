#pragma once

#include "kaclab/density.hpp"
#include "kaclab/fourier.hpp"

#include <iosfwd>
#include <vector>

namespace kaclab::lclt {

using density::GridDensity1D;
using fourier::cplx;

/// Symmetric uniform frequency grid xi_j = j dxi, j = -J..J.
struct FrequencyGrid
{
  double xi_max = 8.0;
  int half_points = 2048;

  double step() const { return xi_max / half_points; }
  void validate() const;
};

/// g^(xi) = int exp(-2 pi i x xi) g(x) dx sampled on a FrequencyGrid.
struct CharacteristicFunction
{
  std::vector<double> xi;
  std::vector<cplx> values;

  int size() const { return static_cast<int>(xi.size()); }
  double step() const { return xi[1] - xi[0]; }
};

/// Trapezoid-rule transform of a normalized, standardized grid density
/// (mass within 1e-6, mean within 1e-3, variance within 1e-3 of 1).
/// Values at -xi are the conjugates of those at xi.
CharacteristicFunction char_fn(const GridDensity1D& g, const FrequencyGrid& grid = {});

/// e^{-2 pi^2 xi^2} on the same frequencies.
CharacteristicFunction gaussian_char_fn(const FrequencyGrid& grid = {});

struct AlphaMeasurement
{
  double eta = 0.0;
  /// 1 - max_{|xi| >= eta} |g^(xi)| over the grid.
  double measured = 0.0;
  /// (3/8) e^{-8h} (pi h)^2 / (2 (1 + 1/eta)^2).
  double constructive_bound = 0.0;
  double h = 0.0;
  double entropy = 0.0;
};

/// h(H, R) = H + 2 + log(2 pi) + log(2R) - log(1 - 1/R^2).
double entropy_parameter(double entropy, double radius = 2.0);
double constructive_alpha_bound(double entropy, double eta);

/// Measured alpha only; throws std::out_of_range if eta exceeds the grid.
double measure_alpha(const CharacteristicFunction& cf, double eta);
/// Measured alpha together with the entropy-based lower bound for g.
AlphaMeasurement measure_alpha(const CharacteristicFunction& cf, const GridDensity1D& g, double eta);

/// max_{0 < |xi| <= delta} |g^(xi) - 1 + 2 pi^2 xi^2| / xi^2.
double measure_eps(const CharacteristicFunction& cf, double delta);

/// inf_r [2 pi eta / r + chi(r)] with chi the tail energy of g.
double eps_majorant_stated(const GridDensity1D& g, double eta);
/// 4 pi^2 inf_r [pi eta / r + chi(r)], which carries the constants of the
/// Taylor remainder.
double eps_majorant(const GridDensity1D& g, double eta);

struct BoundCheck
{
  bool holds = false;
  /// min over the grid of max(1 - pi^2 xi^2, 1 - alpha0) - |g^(xi)|.
  double worst_margin = 0.0;
  double worst_xi = 0.0;
};

BoundCheck check_bound_iii(const CharacteristicFunction& cf, double alpha0);

/// alpha0 = alpha(eta*) at the crossing pi^2 eta*^2 = alpha(eta*).
struct Alpha0
{
  double eta = 0.0;
  double alpha0 = 0.0;
};
Alpha0 crossing_alpha0(const CharacteristicFunction& cf);

/// g_N(x) = sqrt(N) g^{*N}(sqrt(N) x) on the grid of g, computed as the
/// inverse transform of g^(xi / sqrt N)^N. Throws NumericalError when
/// |g_N^| at the band edge exceeds 1e-8.
GridDensity1D rescaled_convolution(const GridDensity1D& g, int n);

/// max over grid nodes of |g(x) - gamma(x)|.
double sup_error_to_gaussian(const GridDensity1D& g);

/// L^p norm raised to p' = p/(p-1): (int g^p)^{1/(p-1)}.
double lp_norm_power(const GridDensity1D& g, double p);

struct LcltBoundReport
{
  int n = 0;
  int k = 1;
  double p = 2.0;
  double p_conj = 2.0;
  double delta = 0.0;
  double alpha = 0.0;
  double alpha0 = 0.0;
  double eps_delta = 0.0;
  double lp_norm_power = 0.0;
  double term_high = 0.0;
  double term_gauss_tail = 0.0;
  double term_low = 0.0;
  double bound_total = 0.0;
  /// term_low with 2 sqrt(eps) in place of sqrt(2 eps).
  double term_low_geometric = 0.0;
  double observed_sup_error = 0.0;
  double log_term_high = 0.0;
  double log_term_gauss_tail = 0.0;
  double log_term_low = 0.0;
  double log_bound_total = 0.0;
  double log_observed_sup_error = 0.0;

  void write_json(std::ostream& out) const;
};

/// Three-term sup-norm bound with k = 1 and alpha measured at eta = delta.
LcltBoundReport lclt_error_bound(const GridDensity1D& g, int n, double delta, double p = 2.0);

/// Uniform density on [-sqrt3, sqrt3] with its edges on grid nodes (value
/// halved there), so its trapezoid mass is exactly 1.
GridDensity1D standardized_uniform(int cells_per_half_width = 512, int half_width_multiple = 8);

} // namespace kaclab::lclt
