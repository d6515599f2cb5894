#include "kaclab/lclt.hpp"

#include "kaclab/common.hpp"
#include "kaclab/quadrature.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace kaclab::lclt {

namespace {

constexpr double kPi = std::numbers::pi;

void require_standardized(const GridDensity1D& g)
{
  const auto m = density::moments(g);
  if (std::abs(m.mean) > 1e-3)
    throw std::invalid_argument(fmt::format("density is not centred (mean {:.3g})", m.mean));
  if (std::abs(m.energy - m.mean * m.mean - 1.0) > 1e-3)
    throw std::invalid_argument(fmt::format("density does not have unit variance ({:.6g})", m.energy));
}

cplx ipow(cplx z, int n)
{
  cplx acc{ 1.0, 0.0 };
  while (n > 0) {
    if (n & 1)
      acc *= z;
    z *= z;
    n >>= 1;
  }
  return acc;
}

// suffix[j] = max_{i >= j} |g^(xi_i)| over the nonnegative half of the grid.
std::vector<double> tail_max(const CharacteristicFunction& cf)
{
  const int half = cf.size() / 2;
  std::vector<double> out(static_cast<std::size_t>(half) + 1);
  double run = 0.0;
  for (int j = half; j >= 0; --j) {
    run = std::max(run, std::abs(cf.values[static_cast<std::size_t>(half + j)]));
    out[static_cast<std::size_t>(j)] = run;
  }
  return out;
}

template <class Chi>
double inf_over_r(double a, Chi&& chi)
{
  double best = std::numeric_limits<double>::infinity();
  const int n = 4000;
  for (int i = 0; i <= n; ++i) {
    const double r = std::pow(10.0, -3.0 + 6.0 * i / n);
    best = std::min(best, a / r + chi(r));
  }
  return best;
}

} // namespace

void FrequencyGrid::validate() const
{
  if (!(xi_max > 0.0) || half_points < 8)
    throw std::invalid_argument("frequency grid needs xi_max > 0 and at least 8 points per side");
}

CharacteristicFunction char_fn(const GridDensity1D& g, const FrequencyGrid& grid)
{
  grid.validate();
  require_standardized(g);
  if (grid.xi_max >= 0.5 / g.step())
    throw std::invalid_argument("frequency grid extends beyond the Nyquist frequency of the density grid");
  const int half = grid.half_points;
  const double dxi = grid.step();
  const auto w = quad::trapezoid_weights(g.size(), g.step());
  const auto vals = g.values();

  CharacteristicFunction cf;
  cf.xi.resize(static_cast<std::size_t>(2 * half + 1));
  cf.values.resize(cf.xi.size());
  for (int j = 0; j <= half; ++j) {
    const double xi = dxi * j;
    double re = 0.0, im = 0.0;
    for (int k = 0; k < g.size(); ++k) {
      const double m = w[static_cast<std::size_t>(k)] * vals[static_cast<std::size_t>(k)];
      if (m == 0.0)
        continue;
      const double t = g.node(k) * xi;
      const double ang = 2.0 * kPi * (t - std::round(t));
      re += m * std::cos(ang);
      im -= m * std::sin(ang);
    }
    cf.xi[static_cast<std::size_t>(half + j)] = xi;
    cf.xi[static_cast<std::size_t>(half - j)] = -xi;
    cf.values[static_cast<std::size_t>(half + j)] = { re, im };
    cf.values[static_cast<std::size_t>(half - j)] = { re, -im };
  }
  return cf;
}

CharacteristicFunction gaussian_char_fn(const FrequencyGrid& grid)
{
  grid.validate();
  const int half = grid.half_points;
  CharacteristicFunction cf;
  cf.xi.resize(static_cast<std::size_t>(2 * half + 1));
  cf.values.resize(cf.xi.size());
  for (int j = -half; j <= half; ++j) {
    const double xi = grid.step() * j;
    cf.xi[static_cast<std::size_t>(half + j)] = xi;
    cf.values[static_cast<std::size_t>(half + j)] = std::exp(-2.0 * kPi * kPi * xi * xi);
  }
  return cf;
}

// ---------------------------------------------------------------------------

double entropy_parameter(double entropy, double radius)
{
  if (!(radius > 1.0))
    throw std::invalid_argument("radius must exceed 1");
  return entropy + 2.0 + std::log(2.0 * kPi) + std::log(2.0 * radius) - std::log(1.0 - 1.0 / (radius * radius));
}

double constructive_alpha_bound(double entropy, double eta)
{
  if (!(eta > 0.0))
    throw std::invalid_argument("eta must be positive");
  const double h = entropy_parameter(entropy);
  const double q = 1.0 + 1.0 / eta;
  return 0.375 * std::exp(-8.0 * h) * (kPi * h) * (kPi * h) / (2.0 * q * q);
}

double measure_alpha(const CharacteristicFunction& cf, double eta)
{
  if (!(eta > 0.0))
    throw std::invalid_argument("eta must be positive");
  const double top = cf.xi.back();
  if (eta > top * (1.0 + 1e-12))
    throw std::out_of_range(fmt::format("eta = {} lies beyond the frequency grid (max {})", eta, top));
  const int half = cf.size() / 2;
  const auto j0 = static_cast<int>(std::ceil(eta / cf.step() - 1e-9));
  const auto tm = tail_max(cf);
  return 1.0 - tm[static_cast<std::size_t>(std::min(j0, half))];
}

AlphaMeasurement measure_alpha(const CharacteristicFunction& cf, const GridDensity1D& g, double eta)
{
  AlphaMeasurement a;
  a.eta = eta;
  a.measured = measure_alpha(cf, eta);
  a.entropy = density::entropy_integral(g);
  a.h = entropy_parameter(a.entropy);
  a.constructive_bound = constructive_alpha_bound(a.entropy, eta);
  return a;
}

double measure_eps(const CharacteristicFunction& cf, double delta)
{
  if (!(delta > 0.0))
    throw std::invalid_argument("delta must be positive");
  double worst = -1.0;
  for (std::size_t j = 0; j < cf.xi.size(); ++j) {
    const double xi = cf.xi[j];
    if (xi == 0.0 || std::abs(xi) > delta * (1.0 + 1e-12))
      continue;
    const double x2 = xi * xi;
    worst = std::max(worst, std::abs(cf.values[j] - cplx(1.0 - 2.0 * kPi * kPi * x2, 0.0)) / x2);
  }
  if (worst < 0.0)
    throw std::invalid_argument("no grid frequency in 0 < |xi| <= delta");
  return worst;
}

double eps_majorant_stated(const GridDensity1D& g, double eta)
{
  return inf_over_r(2.0 * kPi * eta, [&](double r) { return density::tail_energy(g, r); });
}

double eps_majorant(const GridDensity1D& g, double eta)
{
  return 4.0 * kPi * kPi * inf_over_r(kPi * eta, [&](double r) { return density::tail_energy(g, r); });
}

BoundCheck check_bound_iii(const CharacteristicFunction& cf, double alpha0)
{
  if (!(alpha0 > 0.0 && alpha0 < 1.0))
    throw std::invalid_argument("alpha0 must lie in (0, 1)");
  BoundCheck out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cf.xi.size(); ++j) {
    const double xi = cf.xi[j];
    const double margin = std::max(1.0 - kPi * kPi * xi * xi, 1.0 - alpha0) - std::abs(cf.values[j]);
    if (margin < out.worst_margin) {
      out.worst_margin = margin;
      out.worst_xi = xi;
    }
  }
  out.holds = out.worst_margin >= -1e-12;
  return out;
}

Alpha0 crossing_alpha0(const CharacteristicFunction& cf)
{
  const int half = cf.size() / 2;
  const auto tm = tail_max(cf);
  for (int j = 1; j <= half; ++j) {
    const double xi = cf.xi[static_cast<std::size_t>(half + j)];
    const double a = 1.0 - tm[static_cast<std::size_t>(j)];
    if (kPi * kPi * xi * xi >= a)
      return { xi, a };
  }
  throw NumericalError("pi^2 eta^2 never reaches alpha(eta) on the frequency grid");
}

// ---------------------------------------------------------------------------

GridDensity1D rescaled_convolution(const GridDensity1D& g, int n)
{
  if (n < 2)
    throw std::invalid_argument("rescaled_convolution needs N >= 2");
  require_standardized(g);
  const int size = g.size();
  const int len = size % 2 == 0 ? size : size + 1;
  const double dx = g.step();
  const double x0 = g.spec().v_min;

  std::vector<double> samples(static_cast<std::size_t>(len), 0.0);
  std::copy(g.values().begin(), g.values().end(), samples.begin());
  fourier::GridTransform fwd(len, x0, dx, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<cplx> spec(static_cast<std::size_t>(len));
  fwd.apply(samples, spec);
  for (auto& z : spec)
    z = ipow(z, n);

  const int edge = std::max(1, len / 64);
  double edge_max = 0.0;
  for (int m = 0; m < edge; ++m)
    edge_max = std::max({ edge_max, std::abs(spec[static_cast<std::size_t>(m)]),
                          std::abs(spec[static_cast<std::size_t>(len - 1 - m)]) });
  if (edge_max > 1e-8)
    throw NumericalError(
      fmt::format("N = {}: transform of g_N is {:.3g} at the band edge; refine the grid", n, edge_max));

  fourier::GridInverse inv(len, x0, dx);
  std::vector<double> out(static_cast<std::size_t>(len));
  inv.apply(spec, out);
  out.resize(static_cast<std::size_t>(size));
  double peak = 0.0;
  for (double x : out)
    peak = std::max(peak, x);
  for (double& x : out) {
    if (x < -1e-8 * peak)
      throw NumericalError(fmt::format("N = {}: g_N has a negative value {:.3g}", n, x));
    x = std::max(0.0, x);
  }
  return GridDensity1D::normalized(g.spec(), std::move(out));
}

double sup_error_to_gaussian(const GridDensity1D& g)
{
  double worst = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    const double x = g.node(k);
    const double gamma = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
    worst = std::max(worst, std::abs(g.values()[static_cast<std::size_t>(k)] - gamma));
  }
  return worst;
}

double lp_norm_power(const GridDensity1D& g, double p)
{
  if (!(p > 1.0) || !std::isfinite(p))
    throw std::invalid_argument("p must lie in (1, infinity)");
  const auto w = quad::trapezoid_weights(g.size(), g.step());
  double acc = 0.0;
  for (int k = 0; k < g.size(); ++k)
    acc += w[static_cast<std::size_t>(k)] * std::pow(g.values()[static_cast<std::size_t>(k)], p);
  return std::pow(acc, 1.0 / (p - 1.0));
}

void LcltBoundReport::write_json(std::ostream& out) const
{
  nlohmann::json j = {
    { "N", n },
    { "k", k },
    { "p", p },
    { "p_conj", p_conj },
    { "delta", delta },
    { "alpha", alpha },
    { "alpha0", alpha0 },
    { "eps_delta", eps_delta },
    { "lp_norm_power", lp_norm_power },
    { "term_high", term_high },
    { "term_gauss_tail", term_gauss_tail },
    { "term_low", term_low },
    { "term_low_geometric", term_low_geometric },
    { "bound_total", bound_total },
    { "observed_sup_error", observed_sup_error },
    { "log_term_high", log_term_high },
    { "log_term_gauss_tail", log_term_gauss_tail },
    { "log_term_low", log_term_low },
    { "log_bound_total", log_bound_total },
    { "log_observed_sup_error", log_observed_sup_error },
  };
  out << j.dump(2) << "\n";
}

LcltBoundReport lclt_error_bound(const GridDensity1D& g, int n, double delta, double p)
{
  if (!(p > 1.0) || !std::isfinite(p))
    throw std::invalid_argument("p must lie in (1, infinity)");
  if (!(delta > 0.0))
    throw std::invalid_argument("delta must be positive");
  const double pc = p / (p - 1.0);
  if (n < pc)
    throw std::invalid_argument(fmt::format("N = {} is below p' = {}", n, pc));

  LcltBoundReport r;
  r.n = n;
  r.p = p;
  r.p_conj = pc;
  r.delta = delta;

  const FrequencyGrid grid{};
  const auto cf = char_fn(g, grid);
  const auto cg = gaussian_char_fn(grid);
  r.alpha = measure_alpha(cf, delta);
  r.alpha0 = crossing_alpha0(cf).alpha0;
  r.eps_delta = std::max(measure_eps(cf, delta), measure_eps(cg, delta));
  r.lp_norm_power = lp_norm_power(g, p);

  const double nn = n;
  r.log_term_high = 0.5 * std::log(nn) + (nn - pc) * std::log1p(-r.alpha) + std::log(r.lp_norm_power);
  r.log_term_gauss_tail = -2.0 * kPi * kPi * nn * delta * delta - 0.5 * std::log(nn) - std::log(delta);
  const double bracket = 2.0 / (kPi * kPi) + std::pow(1.0 - r.alpha0, 0.5 * nn) * delta * delta * nn;
  r.term_low = std::sqrt(2.0 * r.eps_delta) * bracket;
  r.term_low_geometric = 2.0 * std::sqrt(r.eps_delta) * bracket;
  r.log_term_low = std::log(r.term_low);
  r.term_high = std::exp(r.log_term_high);
  r.term_gauss_tail = std::exp(r.log_term_gauss_tail);
  r.bound_total = r.term_high + r.term_gauss_tail + r.term_low;
  const double terms[3] = { r.log_term_high, r.log_term_gauss_tail, r.log_term_low };
  const double top = *std::max_element(std::begin(terms), std::end(terms));
  double acc = 0.0;
  for (double t : terms)
    acc += std::exp(t - top);
  r.log_bound_total = top + std::log(acc);

  r.observed_sup_error = sup_error_to_gaussian(rescaled_convolution(g, n));
  r.log_observed_sup_error = std::log(r.observed_sup_error);
  return r;
}

GridDensity1D standardized_uniform(int cells_per_half_width, int half_width_multiple)
{
  if (cells_per_half_width < 8 || half_width_multiple < 2)
    throw std::invalid_argument("uniform grid needs >= 8 cells and a support multiple >= 2");
  const double dx = std::sqrt(3.0) / cells_per_half_width;
  const int half = cells_per_half_width * half_width_multiple;
  density::GridSpec spec{ -half * dx, half * dx, 2 * half + 1 };
  const double c = 1.0 / (2.0 * std::sqrt(3.0));
  std::vector<double> v(static_cast<std::size_t>(spec.n_points), 0.0);
  for (int k = 0; k < spec.n_points; ++k) {
    const int off = std::abs(k - half);
    if (off < cells_per_half_width)
      v[static_cast<std::size_t>(k)] = c;
    else if (off == cells_per_half_width)
      v[static_cast<std::size_t>(k)] = 0.5 * c;
  }
  return GridDensity1D(spec, std::move(v));
}

} // namespace kaclab::lclt
