#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kaclab {

inline constexpr const char* kVersion = "1.0.0";

/// Raised when a computation is well posed but fails numerically (support
/// leakage, solver instability, aliasing). Validation problems use the
/// standard `std::invalid_argument` / `std::out_of_range` family instead.
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

/// Independent stream for worker `worker` of a run seeded with `seed`.
Rng make_stream(std::uint64_t seed, std::uint64_t worker);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Monte Carlo point estimate with its standard error.
struct EstimateReport
{
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
};

/// Sample-count weighted combination of independent estimates.
EstimateReport merge_estimates(std::span<const EstimateReport> parts);

/// Streaming mean/variance with non-overlapping batch means, so that
/// correlated Markov chain output still gets an honest standard error.
class BatchMeans
{
public:
  explicit BatchMeans(std::int64_t batch_size = 1);

  void add(double x);
  std::int64_t count() const { return count_; }
  double mean() const;
  /// Standard error of the mean; falls back to the iid formula when fewer
  /// than two complete batches exist.
  double std_error() const;
  EstimateReport report() const;

private:
  std::int64_t batch_size_;
  std::int64_t count_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  double batch_acc_ = 0.0;
  std::int64_t batch_fill_ = 0;
  std::vector<double> batch_means_;
};

/// Runs `body(worker)` for worker = 0..workers-1 on separate threads and
/// rethrows the first exception. Results must be written to per-worker
/// slots so the merge order does not depend on scheduling.
void run_workers(int workers, const std::function<void(int)>& body);

/// Number of hardware threads, at least 1.
int default_worker_count();

/// Splits `total` items into `parts` contiguous chunks; returns the
/// [begin, end) range for chunk `index`.
std::pair<std::int64_t, std::int64_t> chunk_range(std::int64_t total, int parts, int index);

} // namespace kaclab
