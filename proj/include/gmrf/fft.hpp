#pragma once

#include <complex>
#include <memory>
#include <span>
#include <string>

#include "gmrf/grid.hpp"

namespace gmrf {

/// Unnormalized 2D DFT on a p x p torus (FFTW backend).
///
/// forward:  X[u,v] = sum_{k,l} x[k,l] exp(-2 pi i (uk + vl) / p)
/// backward: x[k,l] = sum_{u,v} X[u,v] exp(+2 pi i (uk + vl) / p)   (no 1/p^2)
///
/// Instances own their buffers and are not shared across threads; use
/// `thread_fft(p)` for a per-thread cached plan.
class Fft2d {
 public:
  explicit Fft2d(int side);
  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;
  Fft2d(Fft2d&&) noexcept;
  Fft2d& operator=(Fft2d&&) noexcept;

  int side() const;

  void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
  void backward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

  /// forward transform of a real grid
  void forward(const Grid& in, std::span<std::complex<double>> out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Fft2d& thread_fft(int side);

/// Version string of the linked FFTW library.
std::string fftw_library_version();

/// Real part of the forward DFT of a real s-symmetric grid, i.e. its cosine
/// transform sum_{k,l} g[k,l] cos(2 pi (ik + jl) / p). Throws if the
/// imaginary residue exceeds `imag_tol * (1 + sum |g|)`.
Grid cosine_transform(const Grid& g, double imag_tol = 1e-12);

/// (1 / p^2) * real part of the backward DFT: recovers g from its cosine transform.
Grid inverse_cosine_transform(const Grid& spectrum, double imag_tol = 1e-12);

}  // namespace gmrf
