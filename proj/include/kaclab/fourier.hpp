#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace kaclab::fourier {

using cplx = std::complex<double>;

/// Owning wrapper around an in-place complex FFTW plan. Plans are created
/// with FFTW_ESTIMATE so results are bit-reproducible across runs.
class ComplexFft
{
public:
  enum class Direction
  {
    Forward,  // sum_k x_k exp(-2 pi i k m / n)
    Backward  // sum_k x_k exp(+2 pi i k m / n), unnormalized
  };

  ComplexFft(int n, Direction dir);
  ~ComplexFft();
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;
  ComplexFft(ComplexFft&&) noexcept;
  ComplexFft& operator=(ComplexFft&&) noexcept;

  int size() const { return n_; }
  std::span<cplx> data();
  void execute();

private:
  int n_ = 0;
  cplx* buf_ = nullptr;
  void* plan_ = nullptr;
};

/// Real-to-complex / complex-to-real pair of length n (n even).
class RealFft
{
public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  std::span<double> real();
  /// n/2 + 1 nonnegative-frequency coefficients.
  std::span<cplx> spectrum();
  void forward();
  /// Unnormalized inverse: multiplies the signal by n.
  void backward();

private:
  int n_ = 0;
  double* real_ = nullptr;
  cplx* spec_ = nullptr;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

/// Scaled DFT via Bluestein's chirp-z algorithm:
///   S(m) = sum_{k<n} a_k exp(-2 pi i alpha k (m - n/2) / n),  m = 0..n-1,
/// for an arbitrary real scale alpha. With alpha = 1 this is the centred DFT.
class ScaledDft
{
public:
  ScaledDft(int n, double alpha);

  int size() const { return n_; }
  double alpha() const { return alpha_; }

  /// Writes S into `out` (size n). Not thread-safe: uses internal buffers.
  void apply(std::span<const cplx> in, std::span<cplx> out);
  void apply(std::span<const double> in, std::span<cplx> out);

private:
  int n_;
  double alpha_;
  std::vector<cplx> pre_;
  std::vector<cplx> post_;
  std::vector<cplx> chirp_hat_;
  std::unique_ptr<ComplexFft> fwd_;
  std::unique_ptr<ComplexFft> bwd_;
};

/// Continuous-transform helper for functions sampled on x_k = x0 + k dx,
/// k < n:  F(alpha xi_m) = dx sum_k f_k exp(-2 pi i x_k alpha xi_m) with
/// xi_m = (m - n/2) / (n dx).
class GridTransform
{
public:
  GridTransform(int n, double x0, double dx, double alpha);

  double frequency(int m) const { return alpha_ * (m - n_ / 2) / (n_ * dx_); }
  void apply(std::span<const double> samples, std::span<cplx> out);

private:
  int n_;
  double x0_, dx_, alpha_;
  ScaledDft dft_;
  std::vector<cplx> shift_;
};

/// Inverse of the unscaled GridTransform: given values H(xi_m) on the
/// centred DFT frequencies, returns samples at x_k (real part).
class GridInverse
{
public:
  GridInverse(int n, double x0, double dx);

  void apply(std::span<const cplx> spectrum, std::span<double> out);

private:
  int n_;
  double x0_, dx_;
  ComplexFft bwd_;
  std::vector<cplx> shift_;
};

/// Smallest power of two >= n.
int next_pow2(int n);

} // namespace kaclab::fourier
