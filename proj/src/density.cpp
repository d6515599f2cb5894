#include "kaclab/density.hpp"

#include "kaclab/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kaclab::density {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178; // log(2 pi) / 2

double log_gaussian(double v)
{
  return -0.5 * v * v - kHalfLog2Pi;
}

std::vector<double> component_scales(const GaussianMixture& f)
{
  std::vector<double> s;
  for (const auto& c : f.components())
    s.push_back(std::sqrt(c.variance));
  return s;
}

void require_same_grid(const GridDensity1D& f, const GridDensity1D& g)
{
  if (!(f.spec() == g.spec()))
    throw std::invalid_argument("densities live on incompatible grids");
}

void require_normalized(const GridDensity1D& f, double tol = 1e-6)
{
  const double m = f.mass();
  if (!(std::abs(m - 1.0) <= tol))
    throw std::invalid_argument(fmt::format("grid density is not normalized (mass {:.17g})", m));
}

} // namespace

// ---------------------------------------------------------------------------
// GaussianMixture

GaussianMixture GaussianMixture::make(std::vector<MaxwellianComponent> components)
{
  if (components.empty())
    throw std::invalid_argument("mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0))
      throw std::invalid_argument("mixture weights must be positive");
    if (!(c.variance > 0.0) || !std::isfinite(c.variance))
      throw std::invalid_argument("mixture variances must be positive and finite");
    total += c.weight;
  }
  if (!(std::abs(total - 1.0) <= 1e-12))
    throw std::invalid_argument(fmt::format("mixture weights sum to {:.17g}, not 1", total));
  return GaussianMixture(std::move(components));
}

double GaussianMixture::max_variance() const
{
  double m = 0.0;
  for (const auto& c : components_)
    m = std::max(m, c.variance);
  return m;
}

double GaussianMixture::min_variance() const
{
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : components_)
    m = std::min(m, c.variance);
  return m;
}

double GaussianMixture::evaluate(double v) const
{
  double acc = 0.0;
  for (const auto& c : components_)
    acc += c.weight * std::exp(-0.5 * v * v / c.variance) / std::sqrt(2.0 * std::numbers::pi * c.variance);
  return acc;
}

double GaussianMixture::log_ratio_to_gaussian(double v) const
{
  // log sum_i w_i a_i^{-1/2} exp(-v^2 (1/a_i - 1) / 2)
  const double v2 = v * v;
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& c : components_) {
    const double t = std::log(c.weight) - 0.5 * std::log(c.variance) - 0.5 * v2 * (1.0 / c.variance - 1.0);
    peak = std::max(peak, t);
  }
  if (components_.size() == 1)
    return peak;
  double acc = 0.0;
  for (const auto& c : components_) {
    const double t = std::log(c.weight) - 0.5 * std::log(c.variance) - 0.5 * v2 * (1.0 / c.variance - 1.0);
    acc += std::exp(t - peak);
  }
  return peak + std::log(acc);
}

double GaussianMixture::log_evaluate(double v) const
{
  return log_ratio_to_gaussian(v) + log_gaussian(v);
}

// ---------------------------------------------------------------------------
// Grids

void GridSpec::validate() const
{
  if (n_points < 3)
    throw std::invalid_argument("grid needs at least 3 points");
  if (!(v_min < 0.0 && 0.0 < v_max))
    throw std::invalid_argument("grid must satisfy v_min < 0 < v_max");
}

GridDensity1D::GridDensity1D(GridSpec spec, std::vector<double> values)
  : spec_(spec)
  , values_(std::move(values))
{
  spec_.validate();
  if (static_cast<int>(values_.size()) != spec_.n_points)
    throw std::invalid_argument("grid value count does not match n_points");
  for (double x : values_)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw std::invalid_argument("grid density values must be finite and non-negative");
}

GridDensity1D GridDensity1D::normalized(GridSpec spec, std::vector<double> values)
{
  GridDensity1D g(spec, std::move(values));
  const double m = g.mass();
  if (!(m > 0.0))
    throw std::invalid_argument("grid density has zero mass");
  for (double& x : g.values_)
    x /= m;
  return g;
}

double GridDensity1D::evaluate(double v) const
{
  if (v < spec_.v_min || v > spec_.v_max)
    return 0.0;
  const double pos = (v - spec_.v_min) / step();
  const auto k = std::min(static_cast<int>(pos), spec_.n_points - 2);
  const double t = pos - k;
  return (1.0 - t) * values_[static_cast<std::size_t>(k)] + t * values_[static_cast<std::size_t>(k) + 1];
}

double GridDensity1D::mass() const
{
  double acc = 0.0;
  for (double x : values_)
    acc += x;
  acc -= 0.5 * (values_.front() + values_.back());
  return acc * step();
}

// ---------------------------------------------------------------------------
// Constructors

GaussianMixture maxwellian(double variance)
{
  if (!(variance > 0.0))
    throw std::invalid_argument("Maxwellian variance must be positive");
  return GaussianMixture::make({ { 1.0, variance } });
}

GaussianMixture bc_mixture(double delta)
{
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("bc_mixture needs delta in (0, 1)");
  const double a = 1.0 / (2.0 * (1.0 - delta));
  const double b = 1.0 / (2.0 * delta);
  return GaussianMixture::make({ { 1.0 - delta, a }, { delta, b } });
}

double evaluate(const GaussianMixture& f, double v)
{
  return f.evaluate(v);
}

double evaluate(const GridDensity1D& f, double v)
{
  return f.evaluate(v);
}

// ---------------------------------------------------------------------------
// Moments

MomentReport moments(const GaussianMixture& f)
{
  MomentReport r;
  r.mass = 1.0;
  r.mean = 0.0;
  for (const auto& c : f.components()) {
    r.energy += c.weight * c.variance;
    r.fourth_moment += 3.0 * c.weight * c.variance * c.variance;
  }
  r.sigma = std::sqrt(std::max(0.0, r.fourth_moment - r.energy * r.energy));
  return r;
}

MomentReport moments(const GridDensity1D& f)
{
  require_normalized(f);
  const auto w = quad::trapezoid_weights(f.size(), f.step());
  MomentReport r;
  double m1 = 0.0, m2 = 0.0, m4 = 0.0;
  for (int k = 0; k < f.size(); ++k) {
    const double x = f.node(k);
    const double p = w[static_cast<std::size_t>(k)] * f.values()[static_cast<std::size_t>(k)];
    r.mass += p;
    m1 += p * x;
    m2 += p * x * x;
    m4 += p * x * x * x * x;
  }
  r.mean = m1;
  r.energy = m2;
  r.fourth_moment = m4;
  r.sigma = std::sqrt(std::max(0.0, m4 - 2.0 * m2 * m2 + m2 * m2 * r.mass));
  return r;
}

// ---------------------------------------------------------------------------
// Tails and entropies

double tail_energy(const GaussianMixture& f, double r)
{
  if (!(r > 0.0))
    throw std::invalid_argument("tail_energy needs r > 0");
  const double t = 1.0 / r;
  double acc = 0.0;
  for (const auto& c : f.components()) {
    const double z = t / std::sqrt(c.variance);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    acc += c.weight * c.variance * (std::erfc(z / std::numbers::sqrt2) + 2.0 * z * pdf);
  }
  return acc;
}

double tail_energy(const GridDensity1D& f, double r)
{
  if (!(r > 0.0))
    throw std::invalid_argument("tail_energy needs r > 0");
  const double t = 1.0 / r;
  const auto w = quad::trapezoid_weights(f.size(), f.step());
  double acc = 0.0;
  for (int k = 0; k < f.size(); ++k) {
    const double x = f.node(k);
    if (std::abs(x) >= t)
      acc += w[static_cast<std::size_t>(k)] * f.values()[static_cast<std::size_t>(k)] * x * x;
  }
  return acc;
}

double relative_entropy_to_gaussian(const GaussianMixture& f)
{
  const auto scales = component_scales(f);
  const double half = quad::integrate_half_line(
    [&](double v) {
      const double p = f.evaluate(v);
      return p > 0.0 ? p * f.log_ratio_to_gaussian(v) : 0.0;
    },
    scales);
  return 2.0 * half;
}

double relative_entropy_to_gaussian(const GridDensity1D& f)
{
  const auto w = quad::trapezoid_weights(f.size(), f.step());
  double acc = 0.0;
  for (int k = 0; k < f.size(); ++k) {
    const double p = f.values()[static_cast<std::size_t>(k)];
    if (p > 0.0)
      acc += w[static_cast<std::size_t>(k)] * p * (std::log(p) - log_gaussian(f.node(k)));
  }
  return acc;
}

double relative_entropy(const GridDensity1D& f, const GridDensity1D& g)
{
  require_same_grid(f, g);
  const auto w = quad::trapezoid_weights(f.size(), f.step());
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double p = f.values()[k];
    const double q = g.values()[k];
    if (p <= 0.0 || w[k] == 0.0)
      continue;
    if (q <= 0.0)
      return std::numeric_limits<double>::infinity();
    acc += w[k] * p * std::log(p / q);
  }
  return acc;
}

double tv_distance(const GridDensity1D& f, const GridDensity1D& g)
{
  require_same_grid(f, g);
  const auto w = quad::trapezoid_weights(f.size(), f.step());
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k)
    acc += w[k] * std::abs(f.values()[k] - g.values()[k]);
  return acc;
}

double entropy_integral(const GridDensity1D& f)
{
  const auto w = quad::trapezoid_weights(f.size(), f.step());
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double p = f.values()[k];
    if (p > 0.0)
      acc += w[k] * p * std::log(p);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Approximation pipeline

GridDensity1D standardize(const GridDensity1D& f)
{
  const GridSpec spec = f.spec();
  GridDensity1D current = GridDensity1D::normalized(spec, { f.values().begin(), f.values().end() });
  for (int iter = 0; iter < 60; ++iter) {
    const MomentReport m = moments(current);
    const double var = m.energy - m.mean * m.mean;
    if (!(var > 0.0))
      throw std::invalid_argument("cannot standardize a density with zero variance");
    const double s = std::sqrt(var);
    if (std::abs(m.mean) < 1e-13 && std::abs(m.energy - 1.0) < 1e-13)
      break;
    std::vector<double> vals(static_cast<std::size_t>(spec.n_points));
    for (int k = 0; k < spec.n_points; ++k)
      vals[static_cast<std::size_t>(k)] = s * current.evaluate(m.mean + s * current.node(k));
    current = GridDensity1D::normalized(spec, std::move(vals));
  }
  return current;
}

GridDensity1D mollify_standardize(const GridDensity1D& f, double delta)
{
  if (!(delta > 0.0))
    throw std::invalid_argument("mollification parameter must be positive");
  const GridSpec spec = f.spec();
  const double cut = 1.0 / delta;
  std::vector<double> truncated(f.values().begin(), f.values().end());
  bool any = false;
  for (int k = 0; k < spec.n_points; ++k) {
    if (std::abs(f.node(k)) > cut)
      truncated[static_cast<std::size_t>(k)] = 0.0;
    else if (truncated[static_cast<std::size_t>(k)] > 0.0)
      any = true;
  }
  if (!any)
    throw std::invalid_argument("truncation window [-1/delta, 1/delta] holds no mass");

  // Heat kernel e^{delta Laplacian}: Gaussian of variance 2 delta.
  const double dx = spec.step();
  const double sd = std::sqrt(2.0 * delta);
  const int half = std::max(1, static_cast<int>(std::ceil(10.0 * sd / dx)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  double ksum = 0.0;
  for (int j = -half; j <= half; ++j) {
    const double z = j * dx / sd;
    const double kv = std::exp(-0.5 * z * z);
    kernel[static_cast<std::size_t>(j + half)] = kv;
    ksum += kv;
  }
  for (double& kv : kernel)
    kv /= ksum;

  const int n = spec.n_points;
  std::vector<double> smoothed(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    const double src = truncated[static_cast<std::size_t>(k)];
    if (src == 0.0)
      continue;
    const int lo = std::max(0, k - half);
    const int hi = std::min(n - 1, k + half);
    for (int j = lo; j <= hi; ++j)
      smoothed[static_cast<std::size_t>(j)] += src * kernel[static_cast<std::size_t>(j - k + half)];
  }
  return standardize(GridDensity1D::normalized(spec, std::move(smoothed)));
}

GridDensity1D to_grid(const GaussianMixture& m, const GridSpec& spec)
{
  spec.validate();
  const double reach = 8.0 * std::sqrt(m.max_variance());
  if (spec.v_max < reach || -spec.v_min < reach)
    throw std::invalid_argument(fmt::format(
      "grid [{}, {}] does not cover 8 standard deviations ({:.6g}) of the widest component",
      spec.v_min, spec.v_max, reach));
  std::vector<double> vals(static_cast<std::size_t>(spec.n_points));
  const double dx = spec.step();
  for (int k = 0; k < spec.n_points; ++k)
    vals[static_cast<std::size_t>(k)] = m.evaluate(spec.v_min + k * dx);
  return GridDensity1D::normalized(spec, std::move(vals));
}

// ---------------------------------------------------------------------------
// Text IO

void write_grid(std::ostream& out, const GridDensity1D& f)
{
  out << fmt::format("# grid {:.17g} {:.17g} {}\n", f.spec().v_min, f.spec().v_max, f.spec().n_points);
  for (double x : f.values())
    out << fmt::format("{:.17g}\n", x);
}

GridDensity1D read_grid(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty grid file");
  std::istringstream header(line);
  std::string hash, tag;
  GridSpec spec;
  if (!(header >> hash >> tag >> spec.v_min >> spec.v_max >> spec.n_points) || hash != "#" || tag != "grid")
    throw std::invalid_argument("bad grid header, expected '# grid v_min v_max n_points'");
  spec.validate();
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(spec.n_points));
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::size_t used = 0;
    const double x = std::stod(line, &used);
    vals.push_back(x);
  }
  if (static_cast<int>(vals.size()) != spec.n_points)
    throw std::invalid_argument(fmt::format("grid file has {} values, header says {}", vals.size(), spec.n_points));
  return GridDensity1D(spec, std::move(vals));
}

} // namespace kaclab::density
