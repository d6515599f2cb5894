#include "doctest.h"
#include "support.hpp"

#include "kaclab/common.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

using namespace kaclab;

TEST_CASE("streams are deterministic and distinct per worker")
{
  Rng a = make_stream(7, 0), b = make_stream(7, 0), c = make_stream(7, 1), d = make_stream(8, 0);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

TEST_CASE("uniform01 stays in [0,1) with mean 1/2")
{
  Rng rng = make_stream(3, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("uniform_index is uniform")
{
  Rng rng = make_stream(11, 0);
  const int bins = 7, n = 70000;
  std::vector<double> obs(bins, 0.0), expect(bins, double(n) / bins);
  for (int i = 0; i < n; ++i) {
    const auto k = uniform_index(rng, bins);
    REQUIRE(k < bins);
    obs[k] += 1.0;
  }
  CHECK(testing::chi_square_pvalue(obs, expect) > 1e-3);
}

TEST_CASE("merge_estimates weights by sample count")
{
  std::vector<EstimateReport> parts{ { 1.0, 0.1, 100 }, { 3.0, 0.2, 300 } };
  const auto m = merge_estimates(parts);
  CHECK(m.n_samples == 400);
  CHECK(m.value == doctest::Approx(2.5));
  CHECK(m.std_error > 0.0);
}

TEST_CASE("BatchMeans mean and iid fallback")
{
  BatchMeans bm(1000);
  for (int i = 0; i < 10; ++i)
    bm.add(i);
  CHECK(bm.mean() == doctest::Approx(4.5));
  // sample sd of 0..9 is sqrt(55/6)
  CHECK(bm.std_error() == doctest::Approx(std::sqrt(55.0 / 6.0 / 10.0)));
}

TEST_CASE("BatchMeans on iid data agrees with the iid error")
{
  Rng rng = make_stream(5, 0);
  BatchMeans bm(100);
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    bm.add(uniform01(rng));
  const double iid = std::sqrt(1.0 / 12.0 / n);
  CHECK(bm.std_error() == doctest::Approx(iid).epsilon(0.25));
}

TEST_CASE("chunk_range partitions the total")
{
  for (int parts : { 1, 3, 8 }) {
    std::int64_t next = 0;
    for (int i = 0; i < parts; ++i) {
      const auto [b, e] = chunk_range(1001, parts, i);
      CHECK(b == next);
      CHECK(e >= b);
      next = e;
    }
    CHECK(next == 1001);
  }
}

TEST_CASE("run_workers runs every worker and propagates exceptions")
{
  std::atomic<int> mask{ 0 };
  run_workers(4, [&](int w) { mask |= 1 << w; });
  CHECK(mask.load() == 15);
  CHECK_THROWS_AS(run_workers(3, [](int w) { if (w == 2) throw std::runtime_error("x"); }),
                  std::runtime_error);
  CHECK(default_worker_count() >= 1);
}
