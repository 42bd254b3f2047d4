#include <bit>
#include <cmath>
#include <complex>
#include <cstring>

#include "gmrf/error.hpp"
#include "gmrf/fft.hpp"
#include "gmrf/field.hpp"
#include "gmrf/io.hpp"
#include "gmrf/parallel.hpp"
#include "gmrf/rng.hpp"

namespace gmrf {

SampleBatch sample(const GmrfParams& params, int n, std::uint64_t seed, int threads) {
  if (n < 1) throw PreconditionError("sample size n must be >= 1");
  const int p = params.side();
  const std::size_t np2 = static_cast<std::size_t>(p) * p;
  Grid root = cov_spectrum(params).dsig.lam;
  for (double& v : root.values()) v = std::sqrt(v);

  SampleBatch batch;
  batch.p = p;
  batch.n = n;
  batch.seed = seed;
  batch.params_digest = params_digest(params);
  batch.fields.assign(static_cast<std::size_t>(n), Grid(p));

  const double scale = 1.0 / static_cast<double>(np2);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t k) {
    RandomStream rng(seed, "sample", k);
    std::vector<std::complex<double>> buf(np2), spec(np2);
    for (auto& z : buf) z = rng.gaussian();
    Fft2d& fft = thread_fft(p);
    fft.forward(buf, spec);
    for (std::size_t q = 0; q < np2; ++q) spec[q] *= root.values()[q];
    fft.backward(spec, buf);
    Grid& out = batch.fields[k];
    for (std::size_t q = 0; q < np2; ++q) {
      if (std::abs(buf[q].imag()) * scale > 1e-10) throw PreconditionError("sampled field has imaginary residue");
      out.values()[q] = buf[q].real() * scale;
    }
  });
  return batch;
}

std::string params_digest(const GmrfParams& params) {
  return digest_hex(theta_to_json(params.theta()) + "sigma2=" + format_double(params.sigma_sq()));
}

namespace {

constexpr char kMagic[4] = {'G', 'M', 'R', 'F'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | in[at + static_cast<std::size_t>(b)];
  return v;
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 3; b >= 0; --b) v = (v << 8) | in[at + static_cast<std::size_t>(b)];
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_batch(const SampleBatch& batch) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(batch.p));
  put_u32(out, static_cast<std::uint32_t>(batch.n));
  for (const auto& g : batch.fields)
    for (double v : g.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  put_u64(out, batch.seed);
  return out;
}

SampleBatch decode_batch(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("batch file: bad magic");
  if (get_u32(bytes, 4) != kVersion) throw FormatError("batch file: unsupported version");
  SampleBatch b;
  b.p = static_cast<int>(get_u32(bytes, 8));
  b.n = static_cast<int>(get_u32(bytes, 12));
  if (b.p < 2 || b.n < 1) throw FormatError("batch file: invalid p or n");
  const std::size_t np2 = static_cast<std::size_t>(b.p) * b.p;
  const std::size_t expected = 16 + 8 * np2 * static_cast<std::size_t>(b.n) + 8;
  if (bytes.size() != expected) throw FormatError("batch file: size does not match header");
  b.fields.assign(static_cast<std::size_t>(b.n), Grid(b.p));
  std::size_t at = 16;
  for (auto& g : b.fields)
    for (double& v : g.values()) {
      v = std::bit_cast<double>(get_u64(bytes, at));
      at += 8;
    }
  b.seed = get_u64(bytes, at);
  return b;
}

void write_batch(const std::filesystem::path& path, const SampleBatch& batch) {
  write_bytes(path, encode_batch(batch));
}

SampleBatch read_batch(const std::filesystem::path& path) { return decode_batch(read_bytes(path)); }

}  // namespace gmrf
