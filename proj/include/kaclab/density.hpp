#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace kaclab::density {

/// One centered Maxwellian M_a with mixture weight.
struct MaxwellianComponent
{
  double weight = 1.0;
  double variance = 1.0;
};

/// Finite mixture of centered Maxwellians; all quantities are analytic or
/// computed by adaptive quadrature, never on a grid.
class GaussianMixture
{
public:
  /// Weights must be positive and sum to 1 within 1e-12; variances positive.
  static GaussianMixture make(std::vector<MaxwellianComponent> components);

  std::span<const MaxwellianComponent> components() const { return components_; }
  double max_variance() const;
  double min_variance() const;

  double evaluate(double v) const;
  double log_evaluate(double v) const;
  /// log(f/gamma)(v), computed as a log-sum-exp so that it is exactly 0
  /// for the standard Gaussian.
  double log_ratio_to_gaussian(double v) const;

private:
  explicit GaussianMixture(std::vector<MaxwellianComponent> c)
    : components_(std::move(c))
  {
  }
  std::vector<MaxwellianComponent> components_;
};

/// Uniform grid on [v_min, v_max] with n_points nodes.
struct GridSpec
{
  double v_min = -12.0;
  double v_max = 12.0;
  int n_points = 4096;

  double step() const { return (v_max - v_min) / (n_points - 1); }
  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

/// Density sampled on a uniform grid; evaluated by linear interpolation
/// and integrated with the trapezoid rule.
class GridDensity1D
{
public:
  /// Validates the grid and non-negativity; does not normalize.
  GridDensity1D(GridSpec spec, std::vector<double> values);

  /// Same, then rescales to unit trapezoid mass.
  static GridDensity1D normalized(GridSpec spec, std::vector<double> values);

  const GridSpec& spec() const { return spec_; }
  int size() const { return spec_.n_points; }
  double step() const { return spec_.step(); }
  double node(int k) const { return spec_.v_min + k * spec_.step(); }
  std::span<const double> values() const { return values_; }

  double evaluate(double v) const;
  double mass() const;

private:
  GridSpec spec_;
  std::vector<double> values_;
};

struct MomentReport
{
  double mass = 0.0;
  double mean = 0.0;
  double energy = 0.0;
  double sigma = 0.0;
  double fourth_moment = 0.0;
};

GaussianMixture maxwellian(double variance);

/// (1 - delta) M_a + delta M_b with a = 1/(2(1-delta)), b = 1/(2 delta):
/// unit energy, each component carrying half of it.
GaussianMixture bc_mixture(double delta);

double evaluate(const GaussianMixture& f, double v);
double evaluate(const GridDensity1D& f, double v);

MomentReport moments(const GaussianMixture& f);
/// Trapezoid moments; throws std::invalid_argument if |mass - 1| > 1e-6.
MomentReport moments(const GridDensity1D& f);

/// chi(r) = integral over |v| >= 1/r of v^2 f(v).
double tail_energy(const GaussianMixture& f, double r);
/// Grid version sums trapezoid contributions of nodes with |v| >= 1/r.
double tail_energy(const GridDensity1D& f, double r);

/// H(f | gamma). Mixture path: adaptive quadrature of f log(f/gamma).
double relative_entropy_to_gaussian(const GaussianMixture& f);
/// Grid path: trapezoid rule, with 0 log 0 = 0.
double relative_entropy_to_gaussian(const GridDensity1D& f);

/// Integral of f log(f/g) over a common grid. Returns +infinity if f has
/// mass where g vanishes. Throws on incompatible grids.
double relative_entropy(const GridDensity1D& f, const GridDensity1D& g);

/// Integral of |f - g| (so values lie in [0, 2]).
double tv_distance(const GridDensity1D& f, const GridDensity1D& g);

/// Boltzmann entropy integral of f log f.
double entropy_integral(const GridDensity1D& f);

/// Truncate to [-1/delta, 1/delta], apply the heat semigroup for time
/// delta (Gaussian kernel of variance 2 delta), renormalize, then affinely
/// standardize to mean 0 and unit second moment.
GridDensity1D mollify_standardize(const GridDensity1D& f, double delta);

/// Affine change of variable to mean 0, variance 1, resampled on the same
/// grid (iterated until the discrete moments are exact to 1e-12).
GridDensity1D standardize(const GridDensity1D& f);

/// Samples the mixture on `spec` and renormalizes. The grid must cover at
/// least 8 standard deviations of the widest component on each side.
GridDensity1D to_grid(const GaussianMixture& m, const GridSpec& spec = {});

/// Text format: "# grid v_min v_max n_points" then one value per line,
/// 17 significant digits.
void write_grid(std::ostream& out, const GridDensity1D& f);
GridDensity1D read_grid(std::istream& in);

} // namespace kaclab::density
