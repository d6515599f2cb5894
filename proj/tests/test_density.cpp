#include "doctest.h"

#include "kaclab/common.hpp"
#include "kaclab/density.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace kaclab;
using namespace kaclab::density;

TEST_CASE("mixture construction is validated")
{
  CHECK_THROWS_AS(GaussianMixture::make({ { 0.5, 1.0 } }), std::invalid_argument);
  CHECK_THROWS_AS(GaussianMixture::make({ { 1.0, -1.0 } }), std::invalid_argument);
  CHECK_THROWS_AS(maxwellian(0.0), std::invalid_argument);
  CHECK_THROWS(bc_mixture(0.0));
  CHECK_THROWS(bc_mixture(1.0));
}

TEST_CASE("bc mixture has unit energy split evenly")
{
  for (double d : { 0.3, 0.1, 1e-3 }) {
    const auto f = bc_mixture(d);
    const auto c = f.components();
    REQUIRE(c.size() == 2);
    CHECK(c[0].weight * c[0].variance == doctest::Approx(0.5));
    CHECK(c[1].weight * c[1].variance == doctest::Approx(0.5));
    const auto m = moments(f);
    CHECK(m.mass == doctest::Approx(1.0));
    CHECK(m.energy == doctest::Approx(1.0));
    CHECK(m.mean == doctest::Approx(0.0));
  }
}

TEST_CASE("bc mixture energy over the whole range")
{
  for (int i = 1; i <= 99; ++i)
    CHECK(std::abs(moments(bc_mixture(0.01 * i)).energy - 1.0) < 1e-10);
  const double want = 0.9 / std::sqrt(2 * std::numbers::pi * 5.0 / 9.0) + 0.1 / std::sqrt(10 * std::numbers::pi);
  CHECK(bc_mixture(0.1).evaluate(0.0) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("Maxwellian values and moments")
{
  const auto g = maxwellian(2.0);
  CHECK(g.evaluate(0.0) == doctest::Approx(1.0 / std::sqrt(4.0 * std::numbers::pi)));
  CHECK(maxwellian(1.0).log_ratio_to_gaussian(3.7) == 0.0);
  const auto m = moments(maxwellian(1.0));
  CHECK(m.sigma == doctest::Approx(std::sqrt(2.0)));
  CHECK(m.fourth_moment == doctest::Approx(3.0));
}

TEST_CASE("relative entropy of a Maxwellian")
{
  for (double c : { 0.25, 0.5, 1.0, 2.0, 5.0 }) {
    const double want = 0.5 * (c - 1.0 - std::log(c));
    CHECK(std::abs(relative_entropy_to_gaussian(maxwellian(c)) - want) < 1e-10);
    const auto grid = to_grid(maxwellian(c), { -25.0, 25.0, 8001 });
    CHECK(std::abs(relative_entropy_to_gaussian(grid) - want) < 1e-6);
  }
}

TEST_CASE("entropy of the bc mixture tends to ln2 / 2")
{
  CHECK(relative_entropy_to_gaussian(bc_mixture(1e-4)) == doctest::Approx(0.5 * std::log(2.0)).epsilon(0.02));
  double prev = 0.0;
  for (double d : { 0.3, 0.1, 0.01, 1e-3 }) {
    const double h = relative_entropy_to_gaussian(bc_mixture(d));
    CHECK(h > prev);
    prev = h;
  }
}

TEST_CASE("tail energy")
{
  // erfc(1/sqrt2) + 2 phi(1) for the standard Gaussian at r = 1
  const double want = std::erfc(1.0 / std::sqrt(2.0)) + 2.0 * std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi);
  CHECK(tail_energy(maxwellian(1.0), 1.0) == doctest::Approx(want).epsilon(1e-9));
  const auto grid = to_grid(maxwellian(1.0), { -12.0, 12.0, 24001 });
  CHECK(tail_energy(grid, 1.0) == doctest::Approx(want).epsilon(1e-3));
  CHECK(tail_energy(maxwellian(1.0), 1e-3) < 1e-100);
  CHECK(tail_energy(bc_mixture(0.3), 1e6) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("grid support checks and normalization")
{
  CHECK_THROWS_AS(to_grid(maxwellian(4.0), { -5.0, 5.0, 101 }), std::invalid_argument);
  CHECK_THROWS(GridDensity1D({ -1.0, 1.0, 3 }, { 1.0, -1.0, 1.0 }));
  CHECK_THROWS(GridDensity1D({ -1.0, 1.0, 3 }, { 1.0, 1.0 }));
  const auto f = GridDensity1D::normalized({ -1.0, 1.0, 3 }, { 1.0, 2.0, 1.0 });
  CHECK(f.mass() == doctest::Approx(1.0));
  CHECK(f.evaluate(0.5) == doctest::Approx(0.75 * 2.0 / 3.0 + 0.0).epsilon(0.5));
  CHECK(f.evaluate(2.0) == 0.0);
}

TEST_CASE("grid round trip is exact")
{
  const auto f = to_grid(bc_mixture(0.3), { -12.0, 12.0, 513 });
  std::stringstream ss;
  write_grid(ss, f);
  const auto g = read_grid(ss);
  CHECK(g.spec() == f.spec());
  for (int k = 0; k < f.size(); ++k)
    CHECK(g.values()[k] == f.values()[k]);
}

TEST_CASE("standardize and mollify produce unit moments")
{
  std::vector<double> vals(2001);
  const GridSpec spec{ -20.0, 20.0, 2001 };
  for (int k = 0; k < 2001; ++k) {
    const double x = spec.v_min + k * spec.step();
    vals[k] = std::exp(-0.5 * (x - 1.0) * (x - 1.0) / 2.25) + 0.5 * std::exp(-0.5 * (x + 2.0) * (x + 2.0));
  }
  const auto f = GridDensity1D::normalized(spec, vals);
  for (const auto& g : { standardize(f), mollify_standardize(f, 0.05) }) {
    const auto m = moments(g);
    CHECK(m.mass == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(m.mean) < 1e-9);
    CHECK(m.energy == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("distances on a common grid")
{
  const GridSpec spec{ -15.0, 15.0, 3001 };
  const auto f = to_grid(maxwellian(1.0), spec);
  const auto g = to_grid(maxwellian(2.0), spec);
  CHECK(relative_entropy(f, f) == doctest::Approx(0.0));
  const double tv = tv_distance(f, g);
  CHECK(tv > 0.0);
  CHECK(tv <= 2.0);
  CHECK(relative_entropy(g, f) == doctest::Approx(0.5 * (2.0 - 1.0 - std::log(2.0))).epsilon(1e-5));
  const auto h = to_grid(maxwellian(1.0), { -14.0, 14.0, 3001 });
  CHECK_THROWS(relative_entropy(f, h));
}

TEST_CASE("entropy inequality between mixtures and transport inequality")
{
  Rng rng = make_stream(42, 0);
  const GridSpec spec{ -30.0, 30.0, 6001 };
  for (int trial = 0; trial < 20; ++trial) {
    auto draw = [&] {
      const double w = 0.1 + 0.8 * uniform01(rng);
      const double a = 0.2 + 3.0 * uniform01(rng);
      const double b = 0.2 + 3.0 * uniform01(rng);
      return to_grid(GaussianMixture::make({ { w, a }, { 1.0 - w, b } }), spec);
    };
    const auto f = draw(), g = draw();
    const double h = relative_entropy(f, g);
    const double tv = tv_distance(f, g);
    CHECK(h >= 0.0);
    CHECK(h >= 0.5 * tv * tv);
  }
}
