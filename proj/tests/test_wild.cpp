#include "doctest.h"

#include "kaclab/density.hpp"
#include "kaclab/wild.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace kaclab;
using namespace kaclab::wild;
using density::bc_mixture;
using density::maxwellian;
using density::to_grid;

namespace {
const density::GridSpec kSpec{ -12.0, 12.0, 2048 };
}

TEST_CASE("angle rule")
{
  const auto q = ThetaQuadrature::uniform(32);
  CHECK(q.size() == 32);
  double s = 0.0;
  for (double w : q.weights)
    s += w;
  CHECK(s == doctest::Approx(1.0));
  CHECK_THROWS(ThetaQuadrature::uniform(8));
}

TEST_CASE("mixture Wild convolution")
{
  const auto gg = wild_convolution(maxwellian(1.0), maxwellian(1.0));
  REQUIRE(gg.components().size() == 1);
  CHECK(gg.components()[0].variance == doctest::Approx(1.0));

  const auto f = bc_mixture(0.3), g = maxwellian(0.5);
  const auto m = density::moments(wild_convolution(f, g));
  CHECK(m.mass == doctest::Approx(1.0));
  CHECK(m.energy == doctest::Approx(0.5 * (1.0 + 0.5)));
}

TEST_CASE("grid path agrees with the mixture path")
{
  const auto f = bc_mixture(0.3);
  const auto exact = wild_convolution(f, f, ThetaQuadrature::uniform(64));
  const auto grid = wild_convolution(to_grid(f, kSpec), to_grid(f, kSpec), ThetaQuadrature::uniform(64));
  double worst = 0.0;
  for (int k = 0; k < grid.size(); ++k)
    worst = std::max(worst, std::abs(grid.values()[k] - exact.evaluate(grid.node(k))));
  CHECK(worst < 1e-8);
  CHECK(grid.mass() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("Gaussian is a fixed point with zero production")
{
  const auto g = to_grid(maxwellian(1.0), kSpec);
  const auto gg = wild_convolution(g, g);
  for (int k = 0; k < g.size(); k += 64)
    CHECK(std::abs(gg.values()[k] - g.values()[k]) < 1e-12);
  CHECK(std::abs(entropy_production_D(maxwellian(1.0))) < 1e-12);
  CHECK(std::abs(entropy_production_D(g)) < 1e-10);
}

TEST_CASE("production is positive and grid matches mixture")
{
  for (double d : { 0.3, 0.2 }) {
    const auto f = bc_mixture(d);
    const double dm = entropy_production_D(f);
    CHECK(dm > 0.0);
    CHECK(entropy_production_D(to_grid(f, { -20.0, 20.0, 4096 }), ThetaQuadrature::uniform(128)) == doctest::Approx(dm).epsilon(1e-4));
  }
  const auto f = density::GaussianMixture::make({ { 0.5, 0.6 }, { 0.5, 1.4 } });
  CHECK(entropy_production_D(f) > 0.0);
}

TEST_CASE("small-delta report")
{
  // reference values from an independent double quadrature
  const auto r = dsmall_report(0.1);
  CHECK(r.production == doctest::Approx(0.02458).epsilon(1e-3));
  CHECK(r.entropy == doctest::Approx(0.08623).epsilon(1e-3));
  CHECK(r.ratio == doctest::Approx(r.production / r.entropy));
  double prev = 1e9;
  for (double d : { 0.1, 0.01, 1e-3 }) {
    const auto rep = dsmall_report(d);
    CHECK(rep.ratio > 0.0);
    CHECK(rep.ratio < prev);
    prev = rep.ratio;
    CHECK(rep.production <= rep.corrected_upper_bound);
    CHECK(rep.production <= rep.paper_upper_bound);
  }
  CHECK_THROWS(dsmall_report(0.6));
  CHECK(dsmall_stated_bound(0.01) == doctest::Approx(-0.01 * (std::log(0.01) - std::log(std::numbers::pi)) + 2e-4));
}

TEST_CASE("evolution dissipates entropy and conserves moments")
{
  const auto f0 = to_grid(bc_mixture(0.3), kSpec);
  const auto ev = evolve(f0, 0.5, 0.05, ThetaQuadrature::uniform(64), 1);
  const auto& tr = ev.trace;
  REQUIRE(tr.size() == 11);
  for (std::size_t i = 1; i < tr.size(); ++i) {
    CHECK(tr.entropy[i] < tr.entropy[i - 1]);
    CHECK(std::abs(tr.mass[i] - 1.0) < 1e-8);
    CHECK(std::abs(tr.energy[i] - 1.0) < 1e-6);
    CHECK(tr.production[i] >= 0.0);
  }
  std::ostringstream out;
  tr.write_csv(out);
  CHECK(out.str().rfind("t,H,D,mass,energy\n", 0) == 0);
  CHECK_THROWS_AS(evolve(f0, 1.0, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(evolve(f0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("Gaussian is stationary under evolution")
{
  const auto g = to_grid(maxwellian(1.0), kSpec);
  const auto ev = evolve(g, 0.2, 0.05);
  for (double h : ev.trace.entropy)
    CHECK(std::abs(h) < 1e-10);
}

TEST_CASE("long-run evolution approaches the Gaussian")
{
  const density::GridSpec spec{ -12.0, 12.0, 1024 };
  const auto ev = evolve(to_grid(bc_mixture(0.3), spec), 10.0, 0.1, ThetaQuadrature::uniform(32), 10);
  CHECK(density::tv_distance(ev.final_density, to_grid(maxwellian(1.0), spec)) < 0.05);
  CHECK(ev.trace.entropy.back() < 2e-2 * ev.trace.entropy.front());
}
