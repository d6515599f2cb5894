#include "kaclab/conditioned.hpp"

#include "kaclab/fourier.hpp"
#include "kaclab/quadrature.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kaclab::conditioned {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kReliable = 1e-12;

void require_size(int n, int min_n)
{
  if (n < min_n)
    throw std::invalid_argument(fmt::format("need N >= {}, got {}", min_n, n));
}

// Cells of [0, u_max] pushed through v -> v^2 for the symmetrized density
// g(w) = f(w) + f(-w), w >= 0.
RadialDensity pushforward(const std::function<double(double)>& g, const RadialGrid& grid)
{
  if (!(grid.u_max > 0.0) || grid.n_cells < 2)
    throw std::invalid_argument("radial grid needs u_max > 0 and at least 2 cells");
  const int n = grid.n_cells;
  const double du = grid.u_max / n;
  const auto& gl = quad::gauss_legendre(8);
  std::vector<double> masses(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 0; k < n; ++k) {
    const double u0 = du * k;
    const double u1 = du * (k + 1);
    const double w0 = std::sqrt(u0);
    const double w1 = std::sqrt(u1);
    const double half = 0.5 * (w1 - w0);
    const double mid = 0.5 * (w1 + w0);
    double m = 0.0, mu = 0.0;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double w = mid + half * gl.nodes[q];
      const double val = g(w) * gl.weights[q] * half;
      m += val;
      mu += val * w * w;
    }
    if (m <= 0.0)
      continue;
    const double c = std::clamp(mu / m, u0, u1);
    masses[static_cast<std::size_t>(k)] += m * (u1 - c) / du;
    masses[static_cast<std::size_t>(k) + 1] += m * (c - u0) / du;
  }
  return RadialDensity(du, std::move(masses));
}

std::complex<double> ipow(std::complex<double> z, int n)
{
  std::complex<double> acc{ 1.0, 0.0 };
  while (n > 0) {
    if (n & 1)
      acc *= z;
    z *= z;
    n >>= 1;
  }
  return acc;
}

ZTable make_table(int n, double energy, double sigma, double du, std::span<const double> lattice)
{
  ZTable t;
  t.n_particles = n;
  t.energy = energy;
  t.sigma = sigma;
  t.du = du;
  const std::size_t len = lattice.size();
  t.u.resize(len);
  t.log_Z.resize(len);
  t.log_Z_prime.resize(len);
  double peak = 0.0;
  for (double x : lattice)
    peak = std::max(peak, x);
  const double log_area = log_sphere_area(n);
  for (std::size_t k = 0; k < len; ++k) {
    const double u = du * static_cast<double>(k);
    t.u[k] = u;
    const double s = lattice[k];
    if (k == 0 || !(s > kReliable * peak)) {
      t.log_Z[k] = kNegInf;
      t.log_Z_prime[k] = kNegInf;
      continue;
    }
    t.log_Z[k] = std::numbers::ln2 + std::log(s / du) - (0.5 * n - 1.0) * std::log(u) - log_area;
    t.log_Z_prime[k] = t.log_Z[k] - log_Z_gaussian(n, u);
  }
  return t;
}

double log_alpha(int n, double u)
{
  return (0.5 * n - 1.0) * std::log(u) - 0.5 * u;
}

// Composite Gauss-Legendre on [a, b]; the tables are piecewise linear, so
// fixed panels are used instead of an adaptive rule.
template <class F>
double panel_integral(F&& fn, double a, double b, int panels)
{
  const auto& gl = quad::gauss_legendre(16);
  const double h = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + h * (p + 0.5);
    for (std::size_t q = 0; q < gl.nodes.size(); ++q)
      acc += gl.weights[q] * 0.5 * h * fn(mid + 0.5 * h * gl.nodes[q]);
  }
  return acc;
}

// log(p / f^{(x)k}) as a function of s^2 = |y|^2.
double log_radial_ratio(const ConditionedProduct& cp, int k, double s2)
{
  const int n = cp.size();
  if (s2 >= n)
    return kNegInf;
  const double y[2] = { std::sqrt(s2), 0.0 };
  const double lz = cp.table(k).log_Z_prime_at(n - s2);
  if (lz == kNegInf)
    return kNegInf;
  return 0.5 * s2 + 0.5 * k * kLog2Pi + lz - cp.log_normalization() +
         log_marginal_sigma(n, std::span<const double>(y, static_cast<std::size_t>(k)));
}

} // namespace

double log_sphere_area(int n)
{
  if (n < 1)
    throw std::invalid_argument("sphere dimension must be positive");
  return std::numbers::ln2 + 0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n);
}

// ---------------------------------------------------------------------------

RadialDensity::RadialDensity(double du, std::vector<double> masses)
  : du_(du)
  , masses_(std::move(masses))
{
  if (!(du > 0.0) || masses_.size() < 2)
    throw std::invalid_argument("radial density needs du > 0 and two nodes");
}

double RadialDensity::mass() const
{
  double acc = 0.0;
  for (double m : masses_)
    acc += m;
  return acc;
}

double RadialDensity::mean() const
{
  double acc = 0.0;
  for (std::size_t k = 0; k < masses_.size(); ++k)
    acc += masses_[k] * du_ * static_cast<double>(k);
  return acc / mass();
}

double RadialDensity::variance() const
{
  const double mu = mean();
  double acc = 0.0;
  for (std::size_t k = 0; k < masses_.size(); ++k) {
    const double d = du_ * static_cast<double>(k) - mu;
    acc += masses_[k] * d * d;
  }
  return acc / mass();
}

RadialGrid RadialGrid::for_size(int n_particles, double energy, double sigma)
{
  require_size(n_particles, 1);
  if (!(energy > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("radial grid needs positive energy and sigma");
  RadialGrid g;
  const double n = n_particles;
  g.u_max = n * energy + 12.0 * std::sqrt(n) * sigma;
  g.n_cells = 1 << 16;
  return g;
}

RadialDensity squared_pushforward(const GaussianMixture& f, const RadialGrid& grid)
{
  return pushforward([&](double w) { return 2.0 * f.evaluate(w); }, grid);
}

RadialDensity squared_pushforward(const GridDensity1D& f, const RadialGrid& grid)
{
  return pushforward([&](double w) { return f.evaluate(w) + f.evaluate(-w); }, grid);
}

std::vector<std::vector<double>> convolve_powers(const RadialDensity& h, std::span<const int> powers)
{
  const auto nodes = static_cast<std::size_t>(h.n_cells()) + 1;
  const int len = fourier::next_pow2(static_cast<int>(2 * nodes));
  fourier::RealFft fft(len);
  auto real = fft.real();
  std::fill(real.begin(), real.end(), 0.0);
  std::copy(h.masses().begin(), h.masses().end(), real.begin());
  fft.forward();
  const std::vector<fourier::cplx> base(fft.spectrum().begin(), fft.spectrum().end());

  std::vector<std::vector<double>> out;
  for (int p : powers) {
    require_size(p, 1);
    auto spec = fft.spectrum();
    for (std::size_t m = 0; m < spec.size(); ++m)
      spec[m] = ipow(base[m], p);
    fft.backward();
    const double inv = 1.0 / len;
    double leak = 0.0;
    for (std::size_t k = nodes; k < static_cast<std::size_t>(len); ++k)
      leak += std::abs(real[k]) * inv;
    if (leak > 1e-4)
      throw NumericalError(fmt::format("convolution power {}: {:.3g} of the mass lies beyond u_max", p, leak));
    std::vector<double> s(nodes);
    for (std::size_t k = 0; k < nodes; ++k)
      s[k] = real[k] * inv;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> convolve_power(const RadialDensity& h, int n_particles)
{
  const int p[1] = { n_particles };
  return std::move(convolve_powers(h, p).front());
}

// ---------------------------------------------------------------------------

double log_Z_gaussian(int n_particles, double u)
{
  return -0.5 * n_particles * kLog2Pi - 0.5 * u;
}

double ZTable::log_Z_prime_at(double u_value) const
{
  if (!(u_value >= 0.0) || u.empty())
    return kNegInf;
  const double x = u_value / du;
  const auto k = static_cast<std::size_t>(x);
  if (k + 1 >= u.size())
    return kNegInf;
  const double a = log_Z_prime[k];
  const double b = log_Z_prime[k + 1];
  if (a == kNegInf || b == kNegInf)
    return kNegInf;
  const double t = x - static_cast<double>(k);
  return a + t * (b - a);
}

double ZTable::log_Z_at(double u_value) const
{
  return log_Z_prime_at(u_value) + log_Z_gaussian(n_particles, u_value);
}

void ZTable::write_csv(std::ostream& out) const
{
  nlohmann::json header = { { "N", n_particles }, { "E", energy }, { "Sigma", sigma }, { "du", du } };
  out << "# " << header.dump() << "\n";
  out << "u,log_Z,log_Z_prime\n";
  for (std::size_t k = 0; k < u.size(); ++k)
    out << fmt::format("{:.17g},{:.17g},{:.17g}\n", u[k], log_Z[k], log_Z_prime[k]);
}

ZTable ZTable::read_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::invalid_argument("ZTable CSV: missing JSON header");
  const auto header = nlohmann::json::parse(line.substr(2));
  ZTable t;
  t.n_particles = header.at("N").get<int>();
  t.energy = header.at("E").get<double>();
  t.sigma = header.at("Sigma").get<double>();
  t.du = header.at("du").get<double>();
  if (!std::getline(in, line) || line != "u,log_Z,log_Z_prime")
    throw std::invalid_argument("ZTable CSV: unexpected column header");
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    double vals[3];
    const char* p = line.c_str();
    for (double& v : vals) {
      char* end = nullptr;
      v = std::strtod(p, &end);
      if (end == p)
        throw std::invalid_argument("ZTable CSV: malformed row: " + line);
      p = (*end == ',') ? end + 1 : end;
    }
    t.u.push_back(vals[0]);
    t.log_Z.push_back(vals[1]);
    t.log_Z_prime.push_back(vals[2]);
  }
  return t;
}

std::vector<ZTable> build_ztables(const GaussianMixture& f, std::span<const int> sizes)
{
  if (sizes.empty())
    throw std::invalid_argument("no table sizes requested");
  for (int n : sizes)
    require_size(n, 2);
  const auto mom = density::moments(f);
  const int n_max = *std::max_element(sizes.begin(), sizes.end());
  const auto h = squared_pushforward(f, RadialGrid::for_size(n_max, mom.energy, mom.sigma));
  const auto powers = convolve_powers(h, sizes);
  std::vector<ZTable> out;
  for (std::size_t i = 0; i < sizes.size(); ++i)
    out.push_back(make_table(sizes[i], mom.energy, mom.sigma, h.du(), powers[i]));
  return out;
}

ZTable build_ztable(const GaussianMixture& f, int n_particles)
{
  const int sizes[1] = { n_particles };
  return std::move(build_ztables(f, sizes).front());
}

ZTable build_ztable(const GridDensity1D& f, int n_particles)
{
  require_size(n_particles, 2);
  const auto mom = density::moments(f);
  const auto h = squared_pushforward(f, RadialGrid::for_size(n_particles, mom.energy, mom.sigma));
  return make_table(n_particles, mom.energy, mom.sigma, h.du(), convolve_power(h, n_particles));
}

// ---------------------------------------------------------------------------

double asymptotic_log_Z(double energy, double sigma, int n_particles, double r)
{
  require_size(n_particles, 2);
  if (!(r > 0.0))
    throw std::invalid_argument("radius must be positive");
  if (!(sigma > 0.0))
    throw std::invalid_argument("asymptotics need Sigma > 0");
  const double n = n_particles;
  const double u = r * r;
  const double dev = u - n * energy;
  return std::log(std::numbers::sqrt2 / sigma) + log_Z_gaussian(n_particles, u) + log_alpha(n_particles, n) -
         log_alpha(n_particles, u) - dev * dev / (2.0 * n * sigma * sigma);
}

double asymptotic_log_Z(const GaussianMixture& f, int n_particles, double r)
{
  const auto mom = density::moments(f);
  return asymptotic_log_Z(mom.energy, mom.sigma, n_particles, r);
}

double log_marginal_sigma(int n_particles, std::span<const double> y)
{
  const int k = static_cast<int>(y.size());
  if (k < 1)
    throw std::invalid_argument("marginal dimension must be at least 1");
  if (k >= n_particles - 1)
    throw std::invalid_argument(fmt::format("marginal dimension {} needs N >= {}", k, k + 2));
  double s2 = 0.0;
  for (double x : y)
    s2 += x * x;
  const double n = n_particles;
  if (s2 >= n)
    return kNegInf;
  return 0.5 * (n - k - 2) * std::log1p(-s2 / n) + log_sphere_area(n_particles - k) - 0.5 * k * std::log(n) -
         log_sphere_area(n_particles);
}

double marginal_sigma(int n_particles, std::span<const double> y)
{
  return std::exp(log_marginal_sigma(n_particles, y));
}

// ---------------------------------------------------------------------------

ConditionedProduct::ConditionedProduct(const GaussianMixture& f, int n_particles)
  : f_(f)
  , n_(n_particles)
{
  require_size(n_particles, 4);
  const int sizes[3] = { n_particles, n_particles - 1, n_particles - 2 };
  tables_ = build_ztables(f, sizes);
  log_norm_ = tables_[0].log_Z_prime_at(n_particles);
  if (!std::isfinite(log_norm_))
    throw NumericalError("log Z'_N(f, sqrt N) is not finite");
}

double ConditionedProduct::log_density(const walk::SphereState& state) const
{
  if (state.size() != n_)
    throw std::invalid_argument("state size does not match the conditioned product");
  double acc = 0.0;
  for (double v : state.velocities())
    acc += f_.log_ratio_to_gaussian(v);
  return acc - log_norm_;
}

double marginal_conditioned(const ConditionedProduct& cp, std::span<const double> y)
{
  const int k = static_cast<int>(y.size());
  if (k < 1 || k > 2)
    throw std::invalid_argument("conditioned marginals are supported for k = 1, 2");
  double s2 = 0.0, lr = 0.0;
  for (double x : y) {
    s2 += x * x;
    lr += cp.base().log_ratio_to_gaussian(x);
  }
  const int n = cp.size();
  if (s2 >= n)
    return 0.0;
  const double lz = cp.table(k).log_Z_prime_at(n - s2);
  if (lz == kNegInf)
    return 0.0;
  return std::exp(lr + lz - cp.log_normalization() + log_marginal_sigma(n, y));
}

double marginal_conditioned(const GaussianMixture& f, int n_particles, std::span<const double> y)
{
  return marginal_conditioned(ConditionedProduct(f, n_particles), y);
}

MarginalGap marginal_entropy_gap(const ConditionedProduct& cp, int k)
{
  if (k != 1 && k != 2)
    throw std::invalid_argument("marginal entropy gap is supported for k = 1, 2");
  const auto& f = cp.base();
  const double top = std::sqrt(static_cast<double>(cp.size()));
  const int panels = 1024;
  double mass = 0.0, acc = 0.0;
  if (k == 1) {
    // p = f R, symmetric in y.
    mass = 2.0 * panel_integral(
                   [&](double y) {
                     const double lr = log_radial_ratio(cp, 1, y * y);
                     return lr == kNegInf ? 0.0 : f.evaluate(y) * std::exp(lr);
                   },
                   0.0, top, panels);
    acc = 2.0 * panel_integral(
                  [&](double y) {
                    const double lr = log_radial_ratio(cp, 1, y * y);
                    return lr == kNegInf ? 0.0 : f.evaluate(y) * std::exp(lr) * lr;
                  },
                  0.0, top, panels);
  } else {
    // p / (f x f) is radial; the angular factor is a periodic trapezoid rule
    // over a quarter turn.
    const int n_phi = 128;
    auto ring = [&](double s) {
      double a = 0.0;
      for (int q = 0; q < n_phi; ++q) {
        const double phi = 0.5 * std::numbers::pi * q / n_phi;
        a += f.evaluate(s * std::cos(phi)) * f.evaluate(s * std::sin(phi));
      }
      return 2.0 * std::numbers::pi * a / n_phi * s;
    };
    mass = panel_integral(
      [&](double s) {
        const double lr = log_radial_ratio(cp, 2, s * s);
        return lr == kNegInf ? 0.0 : std::exp(lr) * ring(s);
      },
      0.0, top, panels);
    acc = panel_integral(
      [&](double s) {
        const double lr = log_radial_ratio(cp, 2, s * s);
        return lr == kNegInf ? 0.0 : std::exp(lr) * lr * ring(s);
      },
      0.0, top, panels);
  }
  if (!(mass > 0.0))
    throw NumericalError("conditioned marginal has no mass");
  return { acc / mass - std::log(mass), mass };
}

double marginal_entropy_gap(const GaussianMixture& f, int n_particles, int k)
{
  return marginal_entropy_gap(ConditionedProduct(f, n_particles), k).entropy;
}

double entropy_per_particle_exact(const ConditionedProduct& cp)
{
  const auto& f = cp.base();
  const double top = std::sqrt(static_cast<double>(cp.size()));
  double mass = 0.0, acc = 0.0;
  const int panels = 1024;
  mass = panel_integral(
    [&](double y) {
      const double lr = log_radial_ratio(cp, 1, y * y);
      return lr == kNegInf ? 0.0 : f.evaluate(y) * std::exp(lr);
    },
    0.0, top, panels);
  acc = panel_integral(
    [&](double y) {
      const double lr = log_radial_ratio(cp, 1, y * y);
      return lr == kNegInf ? 0.0 : f.evaluate(y) * std::exp(lr) * f.log_ratio_to_gaussian(y);
    },
    0.0, top, panels);
  return acc / mass - cp.log_normalization() / cp.size();
}

double gamma_ratio_check(const ConditionedProduct& cp, double v1, double v2)
{
  const double s2 = v1 * v1 + v2 * v2;
  const int n = cp.size();
  if (!(s2 < n))
    throw std::out_of_range("v1^2 + v2^2 must be below N");
  const double exact = cp.table(2).log_Z_at(n - s2) - cp.table(0).log_Z_at(n);
  if (!std::isfinite(exact))
    throw NumericalError("Z ratio is outside the reliable table support");
  const double target = std::log(2.0 * std::numbers::pi) + 0.5 * s2;
  return std::exp(target - exact);
}

// ---------------------------------------------------------------------------
// Sampling

MetropolisSampler::MetropolisSampler(const ConditionedProduct& cp,
                                     std::int64_t burn_in,
                                     std::int64_t thinning,
                                     Rng rng)
  : cp_(&cp)
  , burn_in_(burn_in)
  , thinning_(thinning)
  , rng_(std::move(rng))
  , state_(walk::sample_uniform_sphere(cp.size(), rng_))
{
  if (burn_in < 0 || thinning < 1)
    throw std::invalid_argument("burn_in must be >= 0 and thinning >= 1");
  refresh();
}

void MetropolisSampler::refresh()
{
  const auto v = state_.velocities();
  log_ratio_.resize(v.size());
  for (std::size_t j = 0; j < v.size(); ++j)
    log_ratio_[j] = cp_->base().log_ratio_to_gaussian(v[j]);
}

bool MetropolisSampler::propose()
{
  const auto rot = walk::draw_rotation(state_.size(), rng_);
  auto v = state_.mutable_velocities();
  const auto i = static_cast<std::size_t>(rot.i);
  const auto j = static_cast<std::size_t>(rot.j);
  const double c = std::cos(rot.theta);
  const double s = std::sin(rot.theta);
  const double vi = c * v[i] - s * v[j];
  const double vj = s * v[i] + c * v[j];
  const double li = cp_->base().log_ratio_to_gaussian(vi);
  const double lj = cp_->base().log_ratio_to_gaussian(vj);
  const double delta = (li + lj) - (log_ratio_[i] + log_ratio_[j]);
  ++proposals_;
  bool accept = delta >= 0.0;
  if (!accept && std::isfinite(delta))
    accept = uniform01(rng_) < std::exp(delta);
  if (accept) {
    v[i] = vi;
    v[j] = vj;
    log_ratio_[i] = li;
    log_ratio_[j] = lj;
    ++accepted_;
  }
  if (proposals_ % 10000 == 0) {
    state_.renormalize();
    refresh();
  }
  return accept;
}

const walk::SphereState& MetropolisSampler::next()
{
  if (!burned_) {
    for (std::int64_t k = 0; k < burn_in_; ++k)
      propose();
    burned_ = true;
  }
  for (std::int64_t k = 0; k < thinning_; ++k)
    propose();
  return state_;
}

void SamplerConfig::validate() const
{
  if (workers < 1)
    throw std::invalid_argument("worker count must be >= 1");
  if (rotations_per_sample < 1)
    throw std::invalid_argument("rotations_per_sample must be >= 1");
}

namespace {

template <class Stat>
EstimateReport run_chains(const ConditionedProduct& cp,
                          std::int64_t n_samples,
                          const SamplerConfig& config,
                          Stat&& stat)
{
  config.validate();
  if (n_samples < 2)
    throw std::invalid_argument("need at least 2 samples");
  const std::int64_t n = cp.size();
  const std::int64_t burn = config.burn_in < 0 ? 50 * n : config.burn_in;
  const std::int64_t thin = config.thinning < 0 ? n : config.thinning;
  std::vector<EstimateReport> parts(static_cast<std::size_t>(config.workers));
  run_workers(config.workers, [&](int w) {
    const auto [lo, hi] = chunk_range(n_samples, config.workers, w);
    if (hi <= lo)
      return;
    MetropolisSampler chain(cp, burn, thin, make_stream(config.seed, static_cast<std::uint64_t>(w)));
    BatchMeans acc(std::max<std::int64_t>(1, (hi - lo) / 64));
    for (std::int64_t s = lo; s < hi; ++s) {
      chain.next();
      acc.add(stat(chain));
    }
    parts[static_cast<std::size_t>(w)] = acc.report();
  });
  return merge_estimates(parts);
}

} // namespace

EstimateReport entropy_per_particle(const ConditionedProduct& cp, std::int64_t n_samples, const SamplerConfig& config)
{
  const double n = cp.size();
  auto rep = run_chains(cp, n_samples, config, [&](const MetropolisSampler& chain) {
    double acc = 0.0;
    for (double l : chain.log_ratios())
      acc += l;
    return acc / n;
  });
  rep.value -= cp.log_normalization() / n;
  return rep;
}

EstimateReport entropy_production_per_particle(const ConditionedProduct& cp,
                                               std::int64_t n_samples,
                                               const SamplerConfig& config)
{
  const auto& f = cp.base();
  const int r = config.rotations_per_sample;
  return run_chains(cp, n_samples, config, [&](MetropolisSampler& chain) {
    const auto v = chain.state().velocities();
    const auto l = chain.log_ratios();
    double acc = 0.0;
    for (int q = 0; q < r; ++q) {
      const auto rot = walk::draw_rotation(cp.size(), chain.rng());
      const auto i = static_cast<std::size_t>(rot.i);
      const auto j = static_cast<std::size_t>(rot.j);
      const double c = std::cos(rot.theta);
      const double s = std::sin(rot.theta);
      const double vi = c * v[i] - s * v[j];
      const double vj = s * v[i] + c * v[j];
      // The Gaussian factors cancel because v_i^2 + v_j^2 is preserved.
      acc += (l[i] + l[j]) - (f.log_ratio_to_gaussian(vi) + f.log_ratio_to_gaussian(vj));
    }
    return acc / r;
  });
}

} // namespace kaclab::conditioned
