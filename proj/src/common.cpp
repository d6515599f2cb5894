#include "kaclab/common.hpp"

#include <limits>
#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace kaclab {

Rng make_stream(std::uint64_t seed, std::uint64_t worker)
{
  std::seed_seq seq{ static_cast<std::uint32_t>(seed),
                     static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(worker),
                     static_cast<std::uint32_t>(worker >> 32),
                     0x6b61636bu };
  return Rng(seq);
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n)
{
  // Lemire-style rejection keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

EstimateReport merge_estimates(std::span<const EstimateReport> parts)
{
  EstimateReport out;
  double var = 0.0;
  for (const auto& p : parts)
    out.n_samples += p.n_samples;
  if (out.n_samples == 0)
    return out;
  for (const auto& p : parts) {
    const double w = static_cast<double>(p.n_samples) / static_cast<double>(out.n_samples);
    out.value += w * p.value;
    var += w * w * p.std_error * p.std_error;
  }
  out.std_error = std::sqrt(var);
  return out;
}

BatchMeans::BatchMeans(std::int64_t batch_size)
  : batch_size_(std::max<std::int64_t>(1, batch_size))
{
}

void BatchMeans::add(double x)
{
  ++count_;
  sum_ += x;
  sum_sq_ += x * x;
  batch_acc_ += x;
  if (++batch_fill_ == batch_size_) {
    batch_means_.push_back(batch_acc_ / static_cast<double>(batch_size_));
    batch_acc_ = 0.0;
    batch_fill_ = 0;
  }
}

double BatchMeans::mean() const
{
  return count_ > 0 ? sum_ / static_cast<double>(count_) : 0.0;
}

double BatchMeans::std_error() const
{
  const auto nb = static_cast<double>(batch_means_.size());
  if (batch_means_.size() >= 2) {
    double m = 0.0;
    for (double b : batch_means_)
      m += b;
    m /= nb;
    double ss = 0.0;
    for (double b : batch_means_)
      ss += (b - m) * (b - m);
    return std::sqrt(ss / (nb - 1.0) / nb);
  }
  if (count_ < 2)
    return 0.0;
  const double n = static_cast<double>(count_);
  const double var = std::max(0.0, (sum_sq_ - sum_ * sum_ / n) / (n - 1.0));
  return std::sqrt(var / n);
}

EstimateReport BatchMeans::report() const
{
  return { mean(), std_error(), count_ };
}

void run_workers(int workers, const std::function<void(int)>& body)
{
  if (workers <= 1) {
    body(0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        body(w);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool)
    t.join();
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

int default_worker_count()
{
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::pair<std::int64_t, std::int64_t> chunk_range(std::int64_t total, int parts, int index)
{
  const std::int64_t base = total / parts;
  const std::int64_t extra = total % parts;
  const std::int64_t begin = index * base + std::min<std::int64_t>(index, extra);
  const std::int64_t len = base + (index < extra ? 1 : 0);
  return { begin, begin + len };
}

} // namespace kaclab
