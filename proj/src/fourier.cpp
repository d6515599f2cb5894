#include "kaclab/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace kaclab::fourier {

namespace {

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex()
{
  static std::mutex mu;
  return mu;
}

cplx unit_phase(long double turns)
{
  // exp(2 pi i turns), with the argument reduced in extended precision.
  const long double frac = turns - std::floor(turns);
  const long double ang = 2.0L * std::numbers::pi_v<long double> * frac;
  return { static_cast<double>(std::cos(ang)), static_cast<double>(std::sin(ang)) };
}

} // namespace

int next_pow2(int n)
{
  int p = 1;
  while (p < n)
    p <<= 1;
  return p;
}

// ---------------------------------------------------------------------------

ComplexFft::ComplexFft(int n, Direction dir)
  : n_(n)
{
  if (n < 1)
    throw std::invalid_argument("FFT length must be positive");
  std::lock_guard lock(planner_mutex());
  buf_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n)));
  if (!buf_)
    throw std::bad_alloc();
  auto* b = reinterpret_cast<fftw_complex*>(buf_);
  plan_ = fftw_plan_dft_1d(n, b, b, dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
}

ComplexFft::~ComplexFft()
{
  if (plan_ || buf_) {
    std::lock_guard lock(planner_mutex());
    if (plan_)
      fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    if (buf_)
      fftw_free(buf_);
  }
}

ComplexFft::ComplexFft(ComplexFft&& o) noexcept
  : n_(o.n_)
  , buf_(o.buf_)
  , plan_(o.plan_)
{
  o.buf_ = nullptr;
  o.plan_ = nullptr;
}

ComplexFft& ComplexFft::operator=(ComplexFft&& o) noexcept
{
  std::swap(n_, o.n_);
  std::swap(buf_, o.buf_);
  std::swap(plan_, o.plan_);
  return *this;
}

std::span<cplx> ComplexFft::data()
{
  return { buf_, static_cast<std::size_t>(n_) };
}

void ComplexFft::execute()
{
  fftw_execute(static_cast<fftw_plan>(plan_));
}

// ---------------------------------------------------------------------------

RealFft::RealFft(int n)
  : n_(n)
{
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("real FFT length must be even");
  std::lock_guard lock(planner_mutex());
  real_ = static_cast<double*>(fftw_malloc(sizeof(double) * static_cast<std::size_t>(n)));
  spec_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n / 2 + 1)));
  if (!real_ || !spec_)
    throw std::bad_alloc();
  auto* s = reinterpret_cast<fftw_complex*>(spec_);
  fwd_ = fftw_plan_dft_r2c_1d(n, real_, s, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft_c2r_1d(n, s, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft()
{
  std::lock_guard lock(planner_mutex());
  if (fwd_)
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (bwd_)
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  fftw_free(real_);
  fftw_free(spec_);
}

std::span<double> RealFft::real()
{
  return { real_, static_cast<std::size_t>(n_) };
}

std::span<cplx> RealFft::spectrum()
{
  return { spec_, static_cast<std::size_t>(n_ / 2 + 1) };
}

void RealFft::forward()
{
  fftw_execute(static_cast<fftw_plan>(fwd_));
}

void RealFft::backward()
{
  fftw_execute(static_cast<fftw_plan>(bwd_));
}

// ---------------------------------------------------------------------------

ScaledDft::ScaledDft(int n, double alpha)
  : n_(n)
  , alpha_(alpha)
{
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("scaled DFT length must be even");
  const int len = next_pow2(2 * n);
  fwd_ = std::make_unique<ComplexFft>(len, ComplexFft::Direction::Forward);
  bwd_ = std::make_unique<ComplexFft>(len, ComplexFft::Direction::Backward);

  // beta = alpha / n; exponents are tracked in turns (multiples of 2 pi).
  const long double beta = static_cast<long double>(alpha) / n;
  pre_.resize(static_cast<std::size_t>(n));
  post_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const long double kk = k;
    // exp(pi i beta k n) exp(-pi i beta k^2)
    pre_[static_cast<std::size_t>(k)] = unit_phase(0.5L * beta * kk * n - 0.5L * beta * kk * kk);
    post_[static_cast<std::size_t>(k)] = unit_phase(-0.5L * beta * kk * kk);
  }
  auto c = fwd_->data();
  std::fill(c.begin(), c.end(), cplx{});
  for (int j = 0; j < n; ++j) {
    const long double jj = j;
    const cplx v = unit_phase(0.5L * beta * jj * jj);
    c[static_cast<std::size_t>(j)] = v;
    if (j > 0)
      c[static_cast<std::size_t>(len - j)] = v;
  }
  fwd_->execute();
  chirp_hat_.assign(c.begin(), c.end());
}

void ScaledDft::apply(std::span<const cplx> in, std::span<cplx> out)
{
  const auto len = static_cast<std::size_t>(fwd_->size());
  auto b = fwd_->data();
  for (std::size_t k = 0; k < static_cast<std::size_t>(n_); ++k)
    b[k] = in[k] * pre_[k];
  std::fill(b.begin() + n_, b.end(), cplx{});
  fwd_->execute();
  auto y = bwd_->data();
  for (std::size_t k = 0; k < len; ++k)
    y[k] = b[k] * chirp_hat_[k];
  bwd_->execute();
  const double inv = 1.0 / static_cast<double>(len);
  for (std::size_t m = 0; m < static_cast<std::size_t>(n_); ++m)
    out[m] = y[m] * post_[m] * inv;
}

void ScaledDft::apply(std::span<const double> in, std::span<cplx> out)
{
  std::vector<cplx> tmp(in.begin(), in.end());
  apply(std::span<const cplx>(tmp), out);
}

// ---------------------------------------------------------------------------

GridTransform::GridTransform(int n, double x0, double dx, double alpha)
  : n_(n)
  , x0_(x0)
  , dx_(dx)
  , alpha_(alpha)
  , dft_(n, alpha)
{
  shift_.resize(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    const long double xi = static_cast<long double>(alpha) * (m - n / 2) / (static_cast<long double>(n) * dx);
    shift_[static_cast<std::size_t>(m)] = dx * unit_phase(-static_cast<long double>(x0) * xi);
  }
}

void GridTransform::apply(std::span<const double> samples, std::span<cplx> out)
{
  dft_.apply(samples, out);
  for (std::size_t m = 0; m < static_cast<std::size_t>(n_); ++m)
    out[m] *= shift_[m];
}

GridInverse::GridInverse(int n, double x0, double dx)
  : n_(n)
  , x0_(x0)
  , dx_(dx)
  , bwd_(n, ComplexFft::Direction::Backward)
{
  shift_.resize(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    const long double xi = static_cast<long double>(m - n / 2) / (static_cast<long double>(n) * dx);
    shift_[static_cast<std::size_t>(m)] = unit_phase(static_cast<long double>(x0) * xi) / (n * dx);
  }
}

void GridInverse::apply(std::span<const cplx> spectrum, std::span<double> out)
{
  auto buf = bwd_.data();
  for (std::size_t m = 0; m < static_cast<std::size_t>(n_); ++m)
    buf[m] = spectrum[m] * shift_[m];
  bwd_.execute();
  // exp(2 pi i k (m - n/2) / n) = (-1)^k exp(2 pi i k m / n)
  for (std::size_t k = 0; k < static_cast<std::size_t>(n_); ++k)
    out[k] = (k % 2 == 0 ? 1.0 : -1.0) * buf[k].real();
}

} // namespace kaclab::fourier
