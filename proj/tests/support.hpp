#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <span>

namespace kaclab::testing {

/// Upper-tail p-value of Pearson's statistic for observed counts against
/// expected counts; bins with expectation below 5 are pooled.
inline double chi_square_pvalue(std::span<const double> observed, std::span<const double> expected)
{
  double stat = 0.0, pool_o = 0.0, pool_e = 0.0;
  int dof = -1;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    pool_o += observed[i];
    pool_e += expected[i];
    if (pool_e >= 5.0) {
      stat += (pool_o - pool_e) * (pool_o - pool_e) / pool_e;
      pool_o = pool_e = 0.0;
      ++dof;
    }
  }
  if (pool_e > 0.0) {
    stat += (pool_o - pool_e) * (pool_o - pool_e) / pool_e;
    ++dof;
  }
  if (dof < 1)
    return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

inline double gaussian_pdf(double x)
{
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

} // namespace kaclab::testing
