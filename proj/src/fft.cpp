#include "gmrf/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "gmrf/error.hpp"

namespace gmrf {

namespace {
// FFTW planning is not thread-safe; execution with new-array execute is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Fft2d::Impl {
  int side = 0;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  explicit Impl(int p) : side(p) {
    const std::size_t n = static_cast<std::size_t>(p) * p;
    std::lock_guard lock(planner_mutex());
    in = fftw_alloc_complex(n);
    out = fftw_alloc_complex(n);
    fwd = fftw_plan_dft_2d(p, p, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_2d(p, p, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(in);
    fftw_free(out);
  }

  void run(fftw_plan plan, std::span<const std::complex<double>> src, std::span<std::complex<double>> dst) {
    const std::size_t n = static_cast<std::size_t>(side) * side;
    if (src.size() != n || dst.size() != n) throw PreconditionError("fft buffer size mismatch");
    auto* buf_in = reinterpret_cast<std::complex<double>*>(in);
    std::copy(src.begin(), src.end(), buf_in);
    fftw_execute_dft(plan, in, out);
    auto* buf_out = reinterpret_cast<std::complex<double>*>(out);
    std::copy(buf_out, buf_out + n, dst.begin());
  }
};

Fft2d::Fft2d(int side) : impl_(std::make_unique<Impl>(side)) {
  if (side < 1) throw PreconditionError("fft side must be positive");
}
Fft2d::~Fft2d() = default;
Fft2d::Fft2d(Fft2d&&) noexcept = default;
Fft2d& Fft2d::operator=(Fft2d&&) noexcept = default;

int Fft2d::side() const { return impl_->side; }

void Fft2d::forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  impl_->run(impl_->fwd, in, out);
}

void Fft2d::backward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  impl_->run(impl_->bwd, in, out);
}

void Fft2d::forward(const Grid& in, std::span<std::complex<double>> out) {
  std::vector<std::complex<double>> tmp(in.values().begin(), in.values().end());
  forward(tmp, out);
}

Fft2d& thread_fft(int side) {
  thread_local std::map<int, Fft2d> cache;
  auto it = cache.find(side);
  if (it == cache.end()) it = cache.emplace(side, Fft2d(side)).first;
  return it->second;
}

namespace {

Grid real_part_checked(int p, const std::vector<std::complex<double>>& z, double scale, double limit) {
  Grid out(p);
  auto dst = out.values();
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (std::abs(z[k].imag()) * scale > limit)
      throw PreconditionError("spectral transform has non-negligible imaginary part; input is not s-symmetric");
    dst[k] = z[k].real() * scale;
  }
  return out;
}

double abs_sum(const Grid& g) {
  double s = 0.0;
  for (double v : g.values()) s += std::abs(v);
  return s;
}

}  // namespace

Grid cosine_transform(const Grid& g, double imag_tol) {
  const int p = g.side();
  std::vector<std::complex<double>> out(g.size());
  thread_fft(p).forward(g, out);
  return real_part_checked(p, out, 1.0, imag_tol * (1.0 + abs_sum(g)));
}

Grid inverse_cosine_transform(const Grid& spectrum, double imag_tol) {
  const int p = spectrum.side();
  std::vector<std::complex<double>> in(spectrum.values().begin(), spectrum.values().end());
  std::vector<std::complex<double>> out(spectrum.size());
  thread_fft(p).backward(in, out);
  const double scale = 1.0 / (static_cast<double>(p) * p);
  return real_part_checked(p, out, scale, imag_tol * (1.0 + abs_sum(spectrum) * scale));
}

std::string fftw_library_version() { return fftw_version; }

}  // namespace gmrf
