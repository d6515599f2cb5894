#pragma once

#include "kaclab/common.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace kaclab::walk {

/// A point V = (v_1, ..., v_N) on the energy sphere S^{N-1}(sqrt(N)).
class SphereState
{
public:
  static constexpr double kDefaultTolerance = 1e-10;

  /// Validates sum v_j^2 = N to relative tolerance `rel_tol`.
  static SphereState from_velocities(std::vector<double> velocities,
                                     double rel_tol = kDefaultTolerance);

  /// Rescales an arbitrary nonzero vector onto the sphere.
  static SphereState project(std::vector<double> velocities);

  /// All energy in the first particle: (sqrt(N), 0, ..., 0).
  static SphereState concentrated(int n_particles);

  int size() const { return static_cast<int>(v_.size()); }
  std::span<const double> velocities() const { return v_; }
  double operator[](int j) const { return v_[static_cast<std::size_t>(j)]; }

  /// Sum of squared velocities.
  double energy() const;

  /// Rescales to radius sqrt(N) exactly (up to rounding).
  void renormalize();

  /// Raw mutable access for samplers. Callers restore the sphere constraint.
  std::span<double> mutable_velocities() { return v_; }

private:
  explicit SphereState(std::vector<double> v)
    : v_(std::move(v))
  {
  }
  std::vector<double> v_;
};

struct PairRotation
{
  int i = 0;
  int j = 1;
  double theta = 0.0;

  /// Checked constructor: i != j and theta in [0, 2 pi).
  static PairRotation make(int i, int j, double theta);
};

enum class TimeMode
{
  DiscreteSteps,
  PoissonContinuous
};

struct WalkConfig
{
  std::uint64_t seed = 1;
  TimeMode time_mode = TimeMode::PoissonContinuous;
  std::int64_t renorm_interval = 10000;

  void validate() const;
};

/// Rotates (v_i, v_j) by theta in place.
void rotate_pair(SphereState& state, const PairRotation& rot);

/// Value-returning form of rotate_pair.
SphereState rotated(SphereState state, const PairRotation& rot);

/// Unordered pair uniform over the N(N-1)/2 pairs and theta uniform on [0, 2 pi).
PairRotation draw_rotation(int n_particles, Rng& rng);

/// One Kac walk step.
void step(SphereState& state, Rng& rng);

/// Applies a Poisson(N * duration) number of steps, drawn as exponential
/// waits of rate N. Returns the number of steps applied.
std::int64_t simulate_continuous(SphereState& state, double duration, Rng& rng);

/// Point distributed according to the uniform measure sigma^N.
SphereState sample_uniform_sphere(int n_particles, Rng& rng);

/// Kac walk driver that owns its random stream and renormalizes every
/// `renorm_interval` steps.
class KacWalk
{
public:
  KacWalk(SphereState initial, const WalkConfig& config, std::uint64_t worker = 0);

  void advance(std::int64_t steps);

  /// Advances by `duration` units of time; discrete mode applies floor(N t)
  /// steps. Returns the number of steps applied.
  std::int64_t advance_time(double duration);

  const SphereState& state() const { return state_; }
  std::int64_t steps_taken() const { return steps_; }
  Rng& rng() { return rng_; }

private:
  void count_step();

  SphereState state_;
  WalkConfig config_;
  Rng rng_;
  std::int64_t steps_ = 0;
  std::int64_t since_renorm_ = 0;
};

/// Average of v_j^4 under sigma^N: 3N/(N+2).
double sphere_fourth_moment(int n_particles);

/// Trial function sum_j (v_j^4 - 3N/(N+2)) for the spectral gap.
double phi_gap(const SphereState& state);

using StateFunctional = std::function<double(std::span<const double>)>;

/// Monte Carlo estimate of -<phi, L_N phi> / Var(phi) via the symmetric
/// Dirichlet form. Throws std::invalid_argument if phi is constant on the
/// sphere.
EstimateReport rayleigh_quotient(const StateFunctional& phi,
                                 int n_particles,
                                 std::int64_t n_samples,
                                 std::uint64_t seed,
                                 int workers = 1);

/// (N+2) / (2(N-1)).
double spectral_gap_exact(int n_particles);

} // namespace kaclab::walk
