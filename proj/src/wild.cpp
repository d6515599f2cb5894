#include "kaclab/wild.hpp"

#include "kaclab/common.hpp"
#include "kaclab/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace kaclab::wild {

namespace {

constexpr double kNegativeClamp = 1e-12;

double trapezoid_sum(std::span<const double> values, double dx)
{
  double acc = 0.0;
  for (double x : values)
    acc += x;
  acc -= 0.5 * (values.front() + values.back());
  return acc * dx;
}

} // namespace

ThetaQuadrature ThetaQuadrature::uniform(int n)
{
  if (n < 16)
    throw std::invalid_argument("theta quadrature needs at least 16 nodes");
  ThetaQuadrature q;
  q.nodes.resize(static_cast<std::size_t>(n));
  q.weights.assign(static_cast<std::size_t>(n), 1.0 / n);
  for (int k = 0; k < n; ++k)
    q.nodes[static_cast<std::size_t>(k)] = 2.0 * std::numbers::pi * k / n;
  return q;
}

// ---------------------------------------------------------------------------
// Mixture path

GaussianMixture wild_convolution(const GaussianMixture& f, const GaussianMixture& g, const ThetaQuadrature& quad)
{
  std::map<double, double> merged;
  for (const auto& cf : f.components()) {
    for (const auto& cg : g.components()) {
      for (int k = 0; k < quad.size(); ++k) {
        const double c = std::cos(quad.nodes[static_cast<std::size_t>(k)]);
        const double s = std::sin(quad.nodes[static_cast<std::size_t>(k)]);
        const double var = cf.variance == cg.variance ? cf.variance : cf.variance * c * c + cg.variance * s * s;
        merged[var] += cf.weight * cg.weight * quad.weights[static_cast<std::size_t>(k)];
      }
    }
  }
  std::vector<density::MaxwellianComponent> comps;
  comps.reserve(merged.size());
  double total = 0.0;
  for (const auto& [var, w] : merged)
    total += w;
  for (const auto& [var, w] : merged)
    comps.push_back({ w / total, var });
  return GaussianMixture::make(std::move(comps));
}

// ---------------------------------------------------------------------------
// Grid path

WildOperator::WildOperator(const GridSpec& spec, const ThetaQuadrature& quad)
  : spec_(spec)
  , quad_(quad)
{
  spec_.validate();
  if (quad_.size() < 1)
    throw std::invalid_argument("empty theta quadrature");
  const int n = spec_.n_points;
  padded_ = 2 * n;
  pad_left_ = (padded_ - n) / 2;
  const double dx = spec_.step();
  const double x0 = spec_.v_min - pad_left_ * dx;

  auto scale_index = [&](double a) {
    for (std::size_t i = 0; i < scales_.size(); ++i)
      if (std::abs(scales_[i] - a) < 1e-14)
        return static_cast<int>(i);
    scales_.push_back(a);
    return static_cast<int>(scales_.size() - 1);
  };
  for (int k = 0; k < quad_.size(); ++k) {
    const double th = quad_.nodes[static_cast<std::size_t>(k)];
    const double c = std::cos(th);
    const double s = std::sin(th);
    Node node{};
    node.cos_idx = scale_index(std::abs(c));
    node.sin_idx = scale_index(std::abs(s));
    node.cos_neg = c < 0.0;
    node.sin_neg = s < 0.0;
    node.weight = quad_.weights[static_cast<std::size_t>(k)];
    nodes_.push_back(node);
  }
  for (double a : scales_)
    transforms_.push_back(std::make_unique<fourier::GridTransform>(padded_, x0, dx, a));
  inverse_ = std::make_unique<fourier::GridInverse>(padded_, x0, dx);
}

WildOperator::~WildOperator() = default;

void WildOperator::transform_all(std::span<const double> values, std::vector<std::vector<fourier::cplx>>& out)
{
  if (static_cast<int>(values.size()) != spec_.n_points)
    throw std::invalid_argument("value count does not match the operator grid");
  std::vector<double> padded(static_cast<std::size_t>(padded_), 0.0);
  std::copy(values.begin(), values.end(), padded.begin() + pad_left_);
  out.resize(scales_.size());
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    out[i].resize(static_cast<std::size_t>(padded_));
    transforms_[i]->apply(padded, out[i]);
  }
}

std::vector<double> WildOperator::apply(std::span<const double> f, std::span<const double> g)
{
  transform_all(f, f_hat_);
  const bool same = f.data() == g.data() && f.size() == g.size();
  if (!same)
    transform_all(g, g_hat_);
  const auto& gh = same ? f_hat_ : g_hat_;

  std::vector<fourier::cplx> spectrum(static_cast<std::size_t>(padded_));
  for (const Node& node : nodes_) {
    const auto& fa = f_hat_[static_cast<std::size_t>(node.cos_idx)];
    const auto& gb = gh[static_cast<std::size_t>(node.sin_idx)];
    for (std::size_t m = 0; m < spectrum.size(); ++m) {
      const fourier::cplx a = node.cos_neg ? std::conj(fa[m]) : fa[m];
      const fourier::cplx b = node.sin_neg ? std::conj(gb[m]) : gb[m];
      spectrum[m] += node.weight * a * b;
    }
  }
  std::vector<double> full(static_cast<std::size_t>(padded_));
  inverse_->apply(spectrum, full);
  return { full.begin() + pad_left_, full.begin() + pad_left_ + spec_.n_points };
}

std::vector<double> WildOperator::apply_self(std::span<const double> f)
{
  return apply(f, f);
}

GridDensity1D wild_convolution(const GridDensity1D& f, const GridDensity1D& g, const ThetaQuadrature& quad)
{
  if (!(f.spec() == g.spec()))
    throw std::invalid_argument("wild_convolution needs densities on a common grid");
  WildOperator op(f.spec(), quad);
  auto vals = op.apply(f.values(), g.values());
  for (double& x : vals) {
    if (x < -kNegativeClamp)
      throw NumericalError(fmt::format("wild convolution produced a negative value {:.3g}", x));
    x = std::max(0.0, x);
  }
  return GridDensity1D(f.spec(), std::move(vals));
}

// ---------------------------------------------------------------------------
// Entropy production

namespace {

double gaussian(double c, double v)
{
  return std::exp(-0.5 * v * v / c) / std::sqrt(2.0 * std::numbers::pi * c);
}

// (M_a o M_b)(v) = (2/pi) int_0^{pi/2} M_{a cos^2 + b sin^2}(v) d theta.
double wild_kernel(double a, double b, double v)
{
  return (2.0 / std::numbers::pi) * quad::integrate(
                                      [&](double th) {
                                        const double c = std::cos(th), s = std::sin(th);
                                        return gaussian(a * c * c + b * s * s, v);
                                      },
                                      0.0, 0.5 * std::numbers::pi, 1e-11);
}

} // namespace

double entropy_production_D(const GaussianMixture& f)
{
  const auto comps = f.components();
  double total = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    for (std::size_t j = i + 1; j < comps.size(); ++j) {
      const double a = comps[i].variance;
      const double b = comps[j].variance;
      if (a == b)
        continue;
      const double scales[2] = { std::sqrt(a), std::sqrt(b) };
      // Even integrand: twice the half line.
      const double half = quad::integrate_half_line(
        [&](double v) {
          return -f.log_evaluate(v) * (2.0 * wild_kernel(a, b, v) - gaussian(a, v) - gaussian(b, v));
        },
        scales, 1e-10);
      total += comps[i].weight * comps[j].weight * 2.0 * half;
    }
  }
  if (total < 0.0 && total > -1e-12)
    total = 0.0;
  return total;
}

double entropy_production_D(const GridDensity1D& f, std::span<const double> f_wild_f)
{
  if (static_cast<int>(f_wild_f.size()) != f.size())
    throw std::invalid_argument("f o f has the wrong length");
  const auto vals = f.values();
  double peak = 0.0;
  for (double x : f_wild_f)
    peak = std::max(peak, x);
  const auto w = quad::trapezoid_weights(f.size(), f.step());
  double acc = 0.0;
  for (std::size_t k = 0; k < vals.size(); ++k) {
    const double ff = f_wild_f[k];
    if (vals[k] <= 0.0) {
      if (ff > 1e-12 * peak)
        throw NumericalError(fmt::format(
          "f vanishes at v = {:.6g} where f o f = {:.3g}: entropy production is infinite", f.node(static_cast<int>(k)), ff));
      continue;
    }
    acc += w[k] * (-std::log(vals[k])) * (ff - vals[k]);
  }
  if (acc < 0.0 && acc > -1e-10)
    acc = 0.0;
  return acc;
}

double entropy_production_D(const GridDensity1D& f, const ThetaQuadrature& quad)
{
  WildOperator op(f.spec(), quad);
  const auto ff = op.apply_self(f.values());
  return entropy_production_D(f, ff);
}

double dsmall_stated_bound(double delta)
{
  return -delta * (std::log(delta) - std::log(std::numbers::pi)) + 2.0 * delta * delta;
}

double dsmall_corrected_bound(double delta)
{
  const double a = 1.0 / (2.0 * (1.0 - delta));
  const double b = 1.0 / (2.0 * delta);
  return -3.0 * delta * std::log(delta) + delta * std::log(std::numbers::pi) + delta * delta * (a + b);
}

DsmallReport dsmall_report(double delta)
{
  if (!(delta > 0.0 && delta < 0.5))
    throw std::invalid_argument("dsmall_report needs delta in (0, 1/2)");
  const auto f = density::bc_mixture(delta);
  DsmallReport r;
  r.delta = delta;
  r.entropy = density::relative_entropy_to_gaussian(f);
  r.production = entropy_production_D(f);
  r.ratio = r.production / r.entropy;
  r.paper_upper_bound = dsmall_stated_bound(delta);
  r.corrected_upper_bound = dsmall_corrected_bound(delta);
  return r;
}

// ---------------------------------------------------------------------------
// Time evolution

void EvolutionTrace::write_csv(std::ostream& out) const
{
  out << "t,H,D,mass,energy\n";
  for (std::size_t i = 0; i < times.size(); ++i)
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", times[i], entropy[i], production[i], mass[i],
                       energy[i]);
}

Evolution evolve(const GridDensity1D& f0, double duration, double dt, const ThetaQuadrature& quad, int record_every)
{
  if (!(dt > 0.0 && dt <= 0.1))
    throw std::invalid_argument("time step must lie in (0, 0.1]");
  if (!(duration >= 0.0))
    throw std::invalid_argument("duration must be non-negative");
  if (record_every < 1)
    throw std::invalid_argument("record_every must be >= 1");
  if (!(std::abs(f0.mass() - 1.0) <= 1e-6))
    throw std::invalid_argument("initial density is not normalized");

  const auto steps = static_cast<std::int64_t>(std::llround(duration / dt));
  const GridSpec spec = f0.spec();
  const double dx = spec.step();
  const auto w = quad::trapezoid_weights(spec.n_points, dx);
  WildOperator op(spec, quad);

  std::vector<double> f(f0.values().begin(), f0.values().end());
  double mass_before = f0.mass();
  Evolution out{ {}, f0 };

  for (std::int64_t s = 0;; ++s) {
    const GridDensity1D current(spec, f);
    auto ff = op.apply_self(f);
    for (double& x : ff) {
      if (x < -kNegativeClamp)
        throw NumericalError(fmt::format("step {}: f o f has a negative value {:.3g}", s, x));
      x = std::max(0.0, x);
    }
    if (s % record_every == 0 || s == steps) {
      double energy = 0.0;
      for (std::size_t k = 0; k < f.size(); ++k)
        energy += w[k] * f[k] * current.node(static_cast<int>(k)) * current.node(static_cast<int>(k));
      out.trace.times.push_back(static_cast<double>(s) * dt);
      out.trace.entropy.push_back(density::relative_entropy_to_gaussian(current));
      out.trace.production.push_back(entropy_production_D(current, ff));
      out.trace.mass.push_back(mass_before);
      out.trace.energy.push_back(energy);
    }
    if (s == steps) {
      out.final_density = current;
      break;
    }
    for (std::size_t k = 0; k < f.size(); ++k) {
      double x = f[k] + dt * (ff[k] - f[k]);
      if (x < -kNegativeClamp)
        throw NumericalError(fmt::format("step {}: Euler update went negative ({:.3g}); reduce dt", s, x));
      f[k] = std::max(0.0, x);
    }
    mass_before = trapezoid_sum(f, dx);
    if (!(mass_before > 0.0) || !std::isfinite(mass_before))
      throw NumericalError("evolution lost all mass");
    for (double& x : f)
      x /= mass_before;
  }
  return out;
}

} // namespace kaclab::wild
