#include <cstddef>
#include <cstdint>

#include "psd/kernels.hpp"

// Scalar reference kernels. These define the semantics; the SIMD variants are
// tested for bit-identical output against them. Complex arithmetic is spelled
// out on raw doubles so the rounding sequence is explicit.

namespace psd::kernels {
namespace {

inline unsigned pattern4(const std::uint8_t* b) {
  return static_cast<unsigned>(b[0] << 3 | b[1] << 2 | b[2] << 1 | b[3]);
}

void qam16_modulate_scalar(const std::uint8_t* bits, std::size_t nsym,
                           const cplx* lut, cplx* out) {
  for (std::size_t i = 0; i < nsym; ++i) out[i] = lut[pattern4(bits + 4 * i)];
}

// Gray codes along one axis: 00, 01, 11, 10 for the four amplitude levels
// -3s, -1s, +1s, +3s. Boundary ownership follows the smaller code.
inline unsigned axis_code16(double x, double two_scale) {
  if (x <= -two_scale) return 0u;
  if (x <= 0.0) return 1u;
  if (x < two_scale) return 3u;
  return 2u;
}

void qam16_demodulate_scalar(const cplx* in, std::size_t nsym, double scale,
                             std::uint8_t* out_bits) {
  const double two_scale = 2.0 * scale;
  const double* d = reinterpret_cast<const double*>(in);
  for (std::size_t i = 0; i < nsym; ++i) {
    const unsigned ci = axis_code16(d[2 * i], two_scale);
    const unsigned cq = axis_code16(d[2 * i + 1], two_scale);
    out_bits[4 * i] = static_cast<std::uint8_t>(ci >> 1);
    out_bits[4 * i + 1] = static_cast<std::uint8_t>(ci & 1u);
    out_bits[4 * i + 2] = static_cast<std::uint8_t>(cq >> 1);
    out_bits[4 * i + 3] = static_cast<std::uint8_t>(cq & 1u);
  }
}

std::size_t bit_mismatch_scalar(const std::uint8_t* a, const std::uint8_t* b,
                                std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += (a[i] != b[i]);
  return count;
}

void convolve_scalar(const cplx* taps, std::size_t nh, const cplx* u,
                     std::size_t nu, cplx* z) {
  const double* ud = reinterpret_cast<const double*>(u);
  double* zd = reinterpret_cast<double*>(z);
  for (std::size_t k = 0; k < nh; ++k) {
    const double hr = taps[k].real();
    const double hi = taps[k].imag();
    for (std::size_t p = 0; p < nu; ++p) {
      const double ur = ud[2 * p];
      const double ui = ud[2 * p + 1];
      zd[2 * (p + k)] += ur * hr - ui * hi;
      zd[2 * (p + k) + 1] += ui * hr + ur * hi;
    }
  }
}

void matvec_scalar(const cplx* w, std::size_t rows, std::size_t cols,
                   const cplx* x, cplx* y) {
  double* yd = reinterpret_cast<double*>(y);
  for (std::size_t r = 0; r < 2 * rows; ++r) yd[r] = 0.0;
  const double* wd = reinterpret_cast<const double*>(w);
  for (std::size_t c = 0; c < cols; ++c) {
    const double xr = x[c].real();
    const double xi = x[c].imag();
    const double* col = wd + 2 * c * rows;
    for (std::size_t r = 0; r < rows; ++r) {
      const double wr = col[2 * r];
      const double wi = col[2 * r + 1];
      yd[2 * r] += wr * xr - wi * xi;
      yd[2 * r + 1] += wi * xr + wr * xi;
    }
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table{
      "scalar",          qam16_modulate_scalar, qam16_demodulate_scalar,
      bit_mismatch_scalar, convolve_scalar,     matvec_scalar,
  };
  return table;
}

}  // namespace psd::kernels
