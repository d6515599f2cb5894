#pragma once

#include "kaclab/density.hpp"
#include "kaclab/fourier.hpp"

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace kaclab::wild {

using density::GaussianMixture;
using density::GridDensity1D;
using density::GridSpec;

/// Quadrature for the collision-angle average (1/2pi) int_0^{2pi} d theta.
struct ThetaQuadrature
{
  std::vector<double> nodes;
  std::vector<double> weights;

  /// Periodic trapezoid rule: theta_k = 2 pi k / n, weights 1/n. n >= 16.
  static ThetaQuadrature uniform(int n = 64);
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Mixture path: every component pair (a, b) and angle node theta yields
/// a Maxwellian of variance a cos^2 theta + b sin^2 theta. Components with
/// identical variance are merged.
GaussianMixture wild_convolution(const GaussianMixture& f,
                                 const GaussianMixture& g,
                                 const ThetaQuadrature& quad = ThetaQuadrature::uniform());

/// Grid-path Wild convolution operator for a fixed grid and angle rule.
///
/// The double integral over (theta, v_*) is evaluated in the Fourier
/// domain: the transform of f o g is the angle average of
/// f^(cos(theta) xi) g^(sin(theta) xi). Scaled transforms use the chirp-z
/// algorithm on a zero-padded copy of the grid, so no interpolation in
/// frequency is involved.
class WildOperator
{
public:
  WildOperator(const GridSpec& spec, const ThetaQuadrature& quad = ThetaQuadrature::uniform());
  ~WildOperator();
  WildOperator(const WildOperator&) = delete;
  WildOperator& operator=(const WildOperator&) = delete;

  const GridSpec& spec() const { return spec_; }

  /// Raw values of f o g on the grid; may carry rounding-level negatives.
  std::vector<double> apply(std::span<const double> f, std::span<const double> g);
  std::vector<double> apply_self(std::span<const double> f);

private:
  void transform_all(std::span<const double> values, std::vector<std::vector<fourier::cplx>>& out);

  GridSpec spec_;
  ThetaQuadrature quad_;
  int padded_ = 0;
  int pad_left_ = 0;
  std::vector<double> scales_;
  // For each angle node: index into scales_ of |cos|, |sin| and their signs.
  struct Node
  {
    int cos_idx, sin_idx;
    bool cos_neg, sin_neg;
    double weight;
  };
  std::vector<Node> nodes_;
  std::vector<std::unique_ptr<fourier::GridTransform>> transforms_;
  std::unique_ptr<fourier::GridInverse> inverse_;
  std::vector<std::vector<fourier::cplx>> f_hat_, g_hat_;
};

/// Grid path, with negative rounding noise in [-1e-12, 0) clamped to 0.
/// Both densities must share a grid.
GridDensity1D wild_convolution(const GridDensity1D& f,
                               const GridDensity1D& g,
                               const ThetaQuadrature& quad = ThetaQuadrature::uniform());

/// D(f) = int (-ln f)[f o f - f] dv, mixture path. Uses the pairwise form
///   sum_{i<j} w_i w_j int (-ln f)[2 M_i o M_j - M_i - M_j]
/// with adaptive quadrature in both theta and v, so no angle rule is needed.
double entropy_production_D(const GaussianMixture& f);

/// Grid path; throws NumericalError where f vanishes but f o f does not.
double entropy_production_D(const GridDensity1D& f, const ThetaQuadrature& quad = ThetaQuadrature::uniform());

/// Same, reusing an operator and a precomputed f o f.
double entropy_production_D(const GridDensity1D& f, std::span<const double> f_wild_f);

/// -delta (ln delta - ln pi) + 2 delta^2.
double dsmall_stated_bound(double delta);

/// -3 delta ln delta + delta ln pi + delta^2 (a + b), the bound obtained
/// from -ln f <= -ln(delta M_b) = -(3/2) ln delta + (1/2) ln pi + delta v^2
/// and int v^2 M_a o M_b = (a + b)/2.
double dsmall_corrected_bound(double delta);

struct DsmallReport
{
  double delta = 0.0;
  double entropy = 0.0;
  double production = 0.0;
  double ratio = 0.0;
  double paper_upper_bound = 0.0;
  double corrected_upper_bound = 0.0;
};

/// Entropy, production and bounds for bc_mixture(delta), 0 < delta < 1/2.
DsmallReport dsmall_report(double delta);

struct EvolutionTrace
{
  std::vector<double> times;
  std::vector<double> entropy;
  std::vector<double> production;
  std::vector<double> mass;
  std::vector<double> energy;

  std::size_t size() const { return times.size(); }
  /// Columns t,H,D,mass,energy with 17 significant digits.
  void write_csv(std::ostream& out) const;
};

struct Evolution
{
  EvolutionTrace trace;
  GridDensity1D final_density;
};

/// Explicit Euler for df/dt = f o f - f on the grid path with mass
/// renormalization each step. Records every `record_every` steps (and the
/// initial and final states). Throws NumericalError on instability.
Evolution evolve(const GridDensity1D& f0,
                 double duration,
                 double dt,
                 const ThetaQuadrature& quad = ThetaQuadrature::uniform(),
                 int record_every = 1);

} // namespace kaclab::wild
