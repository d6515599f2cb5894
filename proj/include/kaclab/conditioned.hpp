#pragma once

#include "kaclab/common.hpp"
#include "kaclab/density.hpp"
#include "kaclab/kac_walk.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace kaclab::conditioned {

using density::GaussianMixture;
using density::GridDensity1D;

/// log |S^{n-1}| = log 2 + (n/2) log pi - lgamma(n/2).
double log_sphere_area(int n);

/// Law of V^2 for V ~ f, stored as lattice masses on u_k = k du,
/// k = 0..n_cells. Cell masses are exact integrals of f over
/// [sqrt(u_k), sqrt(u_{k+1})] (Gauss-Legendre in w = sqrt(u)); each cell is
/// split between its two end nodes so that mass and mean are preserved.
class RadialDensity
{
public:
  RadialDensity(double du, std::vector<double> masses);

  double du() const { return du_; }
  double u_max() const { return du_ * static_cast<double>(masses_.size() - 1); }
  int n_cells() const { return static_cast<int>(masses_.size()) - 1; }
  std::span<const double> masses() const { return masses_; }
  double node(int k) const { return du_ * k; }
  /// Density estimate mass_k / du at node k.
  double density(int k) const { return masses_[static_cast<std::size_t>(k)] / du_; }

  double mass() const;
  double mean() const;
  double variance() const;

private:
  double du_;
  std::vector<double> masses_;
};

/// u_max = N E + 12 sqrt(N) Sigma and max(2^16, ...) cells.
struct RadialGrid
{
  double u_max = 0.0;
  int n_cells = 1 << 16;

  static RadialGrid for_size(int n_particles, double energy, double sigma);
};

RadialDensity squared_pushforward(const GaussianMixture& f, const RadialGrid& grid);
RadialDensity squared_pushforward(const GridDensity1D& f, const RadialGrid& grid);

/// Lattice law of S_N = V_1^2 + ... + V_N^2 on the grid of `h`, for each
/// requested N, from a single forward transform. Throws NumericalError if
/// more than 1e-4 of the mass falls beyond u_max.
std::vector<std::vector<double>> convolve_powers(const RadialDensity& h, std::span<const int> powers);
std::vector<double> convolve_power(const RadialDensity& h, int n_particles);

/// log Z_N(f, sqrt(u)) and log Z'_N(f, sqrt(u)) on the lattice.
class ZTable
{
public:
  int n_particles = 0;
  double energy = 1.0;
  double sigma = 0.0;
  double du = 0.0;
  std::vector<double> u;
  std::vector<double> log_Z;
  std::vector<double> log_Z_prime;

  /// Linear interpolation of log Z'; -inf outside the reliable support.
  double log_Z_prime_at(double u_value) const;
  double log_Z_at(double u_value) const;

  void write_csv(std::ostream& out) const;
  static ZTable read_csv(std::istream& in);
};

/// log Z_N(gamma, sqrt(u)) = -(N/2) log(2 pi) - u/2.
double log_Z_gaussian(int n_particles, double u);

/// Tables are built from s_N; entries where s_N < 1e-12 max s_N are -inf.
ZTable build_ztable(const GaussianMixture& f, int n_particles);
ZTable build_ztable(const GridDensity1D& f, int n_particles);
/// Tables for several N on one common grid (sized for the largest N).
std::vector<ZTable> build_ztables(const GaussianMixture& f, std::span<const int> sizes);

/// Log of the main term
///   (sqrt2/Sigma) gamma^(N)(r) alpha_N(N)/alpha_N(r^2) exp(-(r^2-NE)^2/(2 N Sigma^2))
/// with alpha_N(u) = u^{N/2-1} e^{-u/2}.
double asymptotic_log_Z(const GaussianMixture& f, int n_particles, double r);
double asymptotic_log_Z(double energy, double sigma, int n_particles, double r);

/// k-marginal of the uniform measure on S^{N-1}(sqrt N), k = y.size().
double marginal_sigma(int n_particles, std::span<const double> y);
double log_marginal_sigma(int n_particles, std::span<const double> y);

/// [f^{(x)N}] restricted to S^{N-1}(sqrt N), with the tables needed for
/// its one- and two-particle marginals.
class ConditionedProduct
{
public:
  ConditionedProduct(const GaussianMixture& f, int n_particles);

  const GaussianMixture& base() const { return f_; }
  int size() const { return n_; }
  /// log Z'_N(f, sqrt N).
  double log_normalization() const { return log_norm_; }
  /// Table for N - drop, drop in {0, 1, 2}.
  const ZTable& table(int drop) const { return tables_.at(static_cast<std::size_t>(drop)); }

  /// log F^N(V) relative to sigma^N.
  double log_density(const walk::SphereState& state) const;

private:
  GaussianMixture f_;
  int n_;
  std::vector<ZTable> tables_;
  double log_norm_;
};

/// k = y.size() in {1, 2}; 0 for |y|^2 >= N.
double marginal_conditioned(const ConditionedProduct& cp, std::span<const double> y);
double marginal_conditioned(const GaussianMixture& f, int n_particles, std::span<const double> y);

struct MarginalGap
{
  double entropy = 0.0;
  double mass = 0.0;
};

/// H(P_k mu^N | f^{(x)k}) by quadrature, computed for the normalized
/// marginal; `mass` is the unnormalized quadrature mass.
MarginalGap marginal_entropy_gap(const ConditionedProduct& cp, int k);
double marginal_entropy_gap(const GaussianMixture& f, int n_particles, int k);

/// Metropolis chain on S^{N-1}(sqrt N) targeting F^N sigma^N with Kac
/// rotation proposals.
class MetropolisSampler
{
public:
  MetropolisSampler(const ConditionedProduct& cp, std::int64_t burn_in, std::int64_t thinning, Rng rng);

  /// Advances `thinning` proposals (burn-in on the first call).
  const walk::SphereState& next();
  /// One proposal; returns true if accepted.
  bool propose();

  const walk::SphereState& state() const { return state_; }
  /// Cached log(f/gamma)(v_j).
  std::span<const double> log_ratios() const { return log_ratio_; }
  std::int64_t proposals() const { return proposals_; }
  std::int64_t accepted() const { return accepted_; }
  Rng& rng() { return rng_; }

private:
  void refresh();

  const ConditionedProduct* cp_;
  std::int64_t burn_in_;
  std::int64_t thinning_;
  Rng rng_;
  walk::SphereState state_;
  std::vector<double> log_ratio_;
  bool burned_ = false;
  std::int64_t proposals_ = 0;
  std::int64_t accepted_ = 0;
};

struct SamplerConfig
{
  std::uint64_t seed = 1;
  int workers = 1;
  /// Negative values select the defaults 50 N and N.
  std::int64_t burn_in = -1;
  std::int64_t thinning = -1;
  /// Rotations drawn per retained sample by the production estimator.
  int rotations_per_sample = 16;

  void validate() const;
};

/// H(F^N sigma^N | sigma^N) / N = E[mean_j log(f/gamma)(v_j)] - log Z'_N / N.
EstimateReport entropy_per_particle(const ConditionedProduct& cp, std::int64_t n_samples, const SamplerConfig& config);

/// (1/N) D_N(F^N) = E[log f(v_i) + log f(v_j) - log f(v_i') - log f(v_j')].
EstimateReport entropy_production_per_particle(const ConditionedProduct& cp,
                                               std::int64_t n_samples,
                                               const SamplerConfig& config);

/// Exact per-particle entropy from the one-particle marginal:
///   int P_1 mu^N log(f/gamma) - log Z'_N / N.
double entropy_per_particle_exact(const ConditionedProduct& cp);

/// 2 pi e^{s^2/2} divided by Z_{N-2}(f, sqrt(N - s^2)) / Z_N(f, sqrt N).
double gamma_ratio_check(const ConditionedProduct& cp, double v1, double v2);

} // namespace kaclab::conditioned
