#include "kaclab/kac_walk.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kaclab::walk {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_particles(int n)
{
  if (n < 2)
    throw std::invalid_argument("need at least 2 particles, got " + std::to_string(n));
}

} // namespace

SphereState SphereState::from_velocities(std::vector<double> velocities, double rel_tol)
{
  const int n = static_cast<int>(velocities.size());
  require_particles(n);
  double e = 0.0;
  for (double x : velocities)
    e += x * x;
  if (!(std::abs(e - n) <= rel_tol * n))
    throw std::invalid_argument("velocities are not on the sphere of radius sqrt(N): energy " +
                                std::to_string(e) + " vs " + std::to_string(n));
  return SphereState(std::move(velocities));
}

SphereState SphereState::project(std::vector<double> velocities)
{
  require_particles(static_cast<int>(velocities.size()));
  SphereState s(std::move(velocities));
  if (!(s.energy() > 0.0))
    throw std::invalid_argument("cannot project the zero vector onto the sphere");
  s.renormalize();
  return s;
}

SphereState SphereState::concentrated(int n_particles)
{
  require_particles(n_particles);
  std::vector<double> v(static_cast<std::size_t>(n_particles), 0.0);
  v[0] = std::sqrt(static_cast<double>(n_particles));
  return SphereState(std::move(v));
}

double SphereState::energy() const
{
  double e = 0.0;
  for (double x : v_)
    e += x * x;
  return e;
}

void SphereState::renormalize()
{
  const double scale = std::sqrt(static_cast<double>(v_.size()) / energy());
  for (double& x : v_)
    x *= scale;
}

PairRotation PairRotation::make(int i, int j, double theta)
{
  if (i == j)
    throw std::invalid_argument("pair rotation needs distinct indices");
  if (i < 0 || j < 0)
    throw std::out_of_range("negative particle index");
  if (!(theta >= 0.0 && theta < kTwoPi))
    throw std::invalid_argument("rotation angle must lie in [0, 2pi)");
  return { i, j, theta };
}

void WalkConfig::validate() const
{
  if (renorm_interval < 1)
    throw std::invalid_argument("renorm_interval must be >= 1");
}

void rotate_pair(SphereState& state, const PairRotation& rot)
{
  const int n = state.size();
  if (rot.i < 0 || rot.j < 0 || rot.i >= n || rot.j >= n)
    throw std::out_of_range("pair index out of range for state of size " + std::to_string(n));
  auto v = state.mutable_velocities();
  const double c = std::cos(rot.theta);
  const double s = std::sin(rot.theta);
  const double vi = v[static_cast<std::size_t>(rot.i)];
  const double vj = v[static_cast<std::size_t>(rot.j)];
  v[static_cast<std::size_t>(rot.i)] = c * vi - s * vj;
  v[static_cast<std::size_t>(rot.j)] = s * vi + c * vj;
}

SphereState rotated(SphereState state, const PairRotation& rot)
{
  rotate_pair(state, rot);
  return state;
}

PairRotation draw_rotation(int n_particles, Rng& rng)
{
  const auto n = static_cast<std::uint64_t>(n_particles);
  const auto i = static_cast<int>(uniform_index(rng, n));
  int j;
  do {
    j = static_cast<int>(uniform_index(rng, n));
  } while (j == i);
  return { i, j, kTwoPi * uniform01(rng) };
}

void step(SphereState& state, Rng& rng)
{
  rotate_pair(state, draw_rotation(state.size(), rng));
}

std::int64_t simulate_continuous(SphereState& state, double duration, Rng& rng)
{
  if (!(duration >= 0.0))
    throw std::invalid_argument("duration must be non-negative");
  const double rate = static_cast<double>(state.size());
  std::int64_t steps = 0;
  double t = 0.0;
  for (;;) {
    t += -std::log1p(-uniform01(rng)) / rate;
    if (t > duration)
      break;
    step(state, rng);
    ++steps;
  }
  return steps;
}

SphereState sample_uniform_sphere(int n_particles, Rng& rng)
{
  require_particles(n_particles);
  std::normal_distribution<double> normal;
  std::vector<double> v(static_cast<std::size_t>(n_particles));
  for (double& x : v)
    x = normal(rng);
  return SphereState::project(std::move(v));
}

KacWalk::KacWalk(SphereState initial, const WalkConfig& config, std::uint64_t worker)
  : state_(std::move(initial))
  , config_(config)
  , rng_(make_stream(config.seed, worker))
{
  config_.validate();
}

void KacWalk::count_step()
{
  ++steps_;
  if (++since_renorm_ >= config_.renorm_interval) {
    state_.renormalize();
    since_renorm_ = 0;
  }
}

void KacWalk::advance(std::int64_t steps)
{
  for (std::int64_t s = 0; s < steps; ++s) {
    step(state_, rng_);
    count_step();
  }
}

std::int64_t KacWalk::advance_time(double duration)
{
  if (!(duration >= 0.0))
    throw std::invalid_argument("duration must be non-negative");
  const double rate = static_cast<double>(state_.size());
  if (config_.time_mode == TimeMode::DiscreteSteps) {
    const auto steps = static_cast<std::int64_t>(std::floor(rate * duration));
    advance(steps);
    return steps;
  }
  std::int64_t steps = 0;
  double t = 0.0;
  for (;;) {
    t += -std::log1p(-uniform01(rng_)) / rate;
    if (t > duration)
      break;
    step(state_, rng_);
    count_step();
    ++steps;
  }
  return steps;
}

double sphere_fourth_moment(int n_particles)
{
  require_particles(n_particles);
  const double n = n_particles;
  return 3.0 * n / (n + 2.0);
}

double phi_gap(const SphereState& state)
{
  const double m4 = sphere_fourth_moment(state.size());
  double acc = 0.0;
  for (double x : state.velocities()) {
    const double x2 = x * x;
    acc += x2 * x2 - m4;
  }
  return acc;
}

namespace {

// Raw moment sums for the ratio estimator; merged across workers in order.
struct RayleighSums
{
  double n = 0, a = 0, a2 = 0, a3 = 0, a4 = 0, x = 0, x2 = 0, xa = 0, xa2 = 0;

  void add(double av, double xv)
  {
    const double av2 = av * av;
    n += 1;
    a += av;
    a2 += av2;
    a3 += av2 * av;
    a4 += av2 * av2;
    x += xv;
    x2 += xv * xv;
    xa += xv * av;
    xa2 += xv * av2;
  }
  void merge(const RayleighSums& o)
  {
    n += o.n;
    a += o.a;
    a2 += o.a2;
    a3 += o.a3;
    a4 += o.a4;
    x += o.x;
    x2 += o.x2;
    xa += o.xa;
    xa2 += o.xa2;
  }
};

} // namespace

EstimateReport rayleigh_quotient(const StateFunctional& phi,
                                 int n_particles,
                                 std::int64_t n_samples,
                                 std::uint64_t seed,
                                 int workers)
{
  require_particles(n_particles);
  if (n_samples < 1)
    throw std::invalid_argument("rayleigh_quotient needs at least one sample");
  workers = std::max(1, workers);

  // Pilot shift keeps the centered second moment well conditioned.
  double shift = 0.0;
  {
    Rng pilot = make_stream(seed, ~std::uint64_t{ 0 });
    constexpr int kPilot = 64;
    for (int s = 0; s < kPilot; ++s)
      shift += phi(sample_uniform_sphere(n_particles, pilot).velocities());
    shift /= kPilot;
  }

  const double half_n = 0.5 * n_particles;
  std::vector<RayleighSums> parts(static_cast<std::size_t>(workers));
  run_workers(workers, [&](int w) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(w));
    const auto [begin, end] = chunk_range(n_samples, workers, w);
    RayleighSums& acc = parts[static_cast<std::size_t>(w)];
    for (std::int64_t s = begin; s < end; ++s) {
      SphereState state = sample_uniform_sphere(n_particles, rng);
      const double before = phi(state.velocities());
      const PairRotation rot = draw_rotation(n_particles, rng);
      const double vi = state[rot.i];
      const double vj = state[rot.j];
      rotate_pair(state, rot);
      const double after = phi(state.velocities());
      auto v = state.mutable_velocities();
      v[static_cast<std::size_t>(rot.i)] = vi;
      v[static_cast<std::size_t>(rot.j)] = vj;
      const double diff = before - after;
      acc.add(before - shift, half_n * diff * diff);
    }
  });

  RayleighSums t;
  for (const auto& p : parts)
    t.merge(p);

  const double n = t.n;
  const double ma = t.a / n;
  const double var_a = t.a2 / n - ma * ma;
  const double scale = std::max(1.0, std::abs(shift) + std::sqrt(std::max(0.0, t.a2 / n)));
  if (!(var_a > 1e-20 * scale * scale))
    throw std::invalid_argument("trial function is constant on the sphere");

  const double mx = t.x / n;
  const double ratio = mx / var_a;

  // Delta method for x_bar / y_bar with y = (a - a_bar)^2.
  const double var_x = t.x2 / n - mx * mx;
  const double cov_xa = t.xa / n - mx * ma;
  const double cov_xa2 = t.xa2 / n - mx * (t.a2 / n);
  const double cov_xy = cov_xa2 - 2.0 * ma * cov_xa;
  const double var_a2 = t.a4 / n - (t.a2 / n) * (t.a2 / n);
  const double cov_a2a = t.a3 / n - (t.a2 / n) * ma;
  const double var_y = var_a2 - 4.0 * ma * cov_a2a + 4.0 * ma * ma * var_a;
  const double var_ratio =
    std::max(0.0, var_x - 2.0 * ratio * cov_xy + ratio * ratio * var_y) / (var_a * var_a) / n;

  return { ratio, std::sqrt(var_ratio), static_cast<std::int64_t>(n) };
}

double spectral_gap_exact(int n_particles)
{
  require_particles(n_particles);
  const double n = n_particles;
  return (n + 2.0) / (2.0 * (n - 1.0));
}

} // namespace kaclab::walk
