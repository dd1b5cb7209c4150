#include "psd/kernels.hpp"

// AVX2 kernel lane. Vectorization always fans out across independent outputs
// (symbols, convolution output samples, matvec rows); every per-output value
// goes through the same mul/mul/addsub rounding sequence as the scalar
// reference, so results are bit-identical. Built only with -mavx2 (no FMA).

#if defined(PSD_HAVE_AVX2)

#include <immintrin.h>

#include <cstddef>
#include <cstdint>

namespace psd::kernels {
namespace {

inline long long pattern4(const std::uint8_t* b) {
  return static_cast<long long>(b[0] << 3 | b[1] << 2 | b[2] << 1 | b[3]);
}

void qam16_modulate_avx2(const std::uint8_t* bits, std::size_t nsym,
                         const cplx* lut, cplx* out) {
  const double* flat = reinterpret_cast<const double*>(lut);
  std::size_t i = 0;
  for (; i + 2 <= nsym; i += 2) {
    const long long i0 = 2 * pattern4(bits + 4 * i);
    const long long i1 = 2 * pattern4(bits + 4 * (i + 1));
    const __m256i idx = _mm256_set_epi64x(i1 + 1, i1, i0 + 1, i0);
    _mm256_storeu_pd(reinterpret_cast<double*>(out + i),
                     _mm256_i64gather_pd(flat, idx, 8));
  }
  for (; i < nsym; ++i) out[i] = lut[pattern4(bits + 4 * i)];
}

inline unsigned axis_code16(double x, double two_scale) {
  if (x <= -two_scale) return 0u;
  if (x <= 0.0) return 1u;
  if (x < two_scale) return 3u;
  return 2u;
}

inline void emit_bits(unsigned ci, unsigned cq, std::uint8_t* out) {
  out[0] = static_cast<std::uint8_t>(ci >> 1);
  out[1] = static_cast<std::uint8_t>(ci & 1u);
  out[2] = static_cast<std::uint8_t>(cq >> 1);
  out[3] = static_cast<std::uint8_t>(cq & 1u);
}

void qam16_demodulate_avx2(const cplx* in, std::size_t nsym, double scale,
                           std::uint8_t* out_bits) {
  const double two_scale = 2.0 * scale;
  const __m256d neg_ts = _mm256_set1_pd(-two_scale);
  const __m256d pos_ts = _mm256_set1_pd(two_scale);
  const __m256d zero = _mm256_setzero_pd();
  const double* d = reinterpret_cast<const double*>(in);
  std::size_t i = 0;
  for (; i + 2 <= nsym; i += 2) {
    // lanes: [re0, im0, re1, im1]
    const __m256d x = _mm256_loadu_pd(d + 2 * i);
    const int k0 = _mm256_movemask_pd(_mm256_cmp_pd(x, neg_ts, _CMP_LE_OQ));
    const int k1 = _mm256_movemask_pd(_mm256_cmp_pd(x, zero, _CMP_LE_OQ));
    const int k2 = _mm256_movemask_pd(_mm256_cmp_pd(x, pos_ts, _CMP_LT_OQ));
    unsigned code[4];
    for (int lane = 0; lane < 4; ++lane) {
      const int bit = 1 << lane;
      code[lane] = (k0 & bit) ? 0u : (k1 & bit) ? 1u : (k2 & bit) ? 3u : 2u;
    }
    emit_bits(code[0], code[1], out_bits + 4 * i);
    emit_bits(code[2], code[3], out_bits + 4 * (i + 1));
  }
  for (; i < nsym; ++i) {
    emit_bits(axis_code16(d[2 * i], two_scale),
              axis_code16(d[2 * i + 1], two_scale), out_bits + 4 * i);
  }
}

std::size_t bit_mismatch_avx2(const std::uint8_t* a, const std::uint8_t* b,
                              std::size_t n) {
  const __m256i zero = _mm256_setzero_si256();
  __m256i acc = zero;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    // inputs are canonical 0/1 bytes, so xor is exactly "differs"
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(_mm256_xor_si256(va, vb), zero));
  }
  alignas(32) std::uint64_t parts[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(parts), acc);
  std::size_t count = parts[0] + parts[1] + parts[2] + parts[3];
  for (; i < n; ++i) count += (a[i] != b[i]);
  return count;
}

// c += a * s for packed complex lanes; same rounding order as scalar:
// two multiplies, then one add/sub, then the accumulate add.
inline __m256d cmul(__m256d a, __m256d sr, __m256d si) {
  const __m256d t1 = _mm256_mul_pd(a, sr);
  const __m256d t2 = _mm256_mul_pd(_mm256_permute_pd(a, 0x5), si);
  return _mm256_addsub_pd(t1, t2);
}

void convolve_avx2(const cplx* taps, std::size_t nh, const cplx* u,
                   std::size_t nu, cplx* z) {
  const double* ud = reinterpret_cast<const double*>(u);
  double* zd = reinterpret_cast<double*>(z);
  for (std::size_t k = 0; k < nh; ++k) {
    const double hr = taps[k].real();
    const double hi = taps[k].imag();
    const __m256d hrv = _mm256_set1_pd(hr);
    const __m256d hiv = _mm256_set1_pd(hi);
    std::size_t p = 0;
    for (; p + 2 <= nu; p += 2) {
      double* zp = zd + 2 * (p + k);
      const __m256d uv = _mm256_loadu_pd(ud + 2 * p);
      const __m256d zv = _mm256_loadu_pd(zp);
      _mm256_storeu_pd(zp, _mm256_add_pd(zv, cmul(uv, hrv, hiv)));
    }
    for (; p < nu; ++p) {
      const double ur = ud[2 * p];
      const double ui = ud[2 * p + 1];
      zd[2 * (p + k)] += ur * hr - ui * hi;
      zd[2 * (p + k) + 1] += ui * hr + ur * hi;
    }
  }
}

void matvec_avx2(const cplx* w, std::size_t rows, std::size_t cols,
                 const cplx* x, cplx* y) {
  double* yd = reinterpret_cast<double*>(y);
  for (std::size_t r = 0; r < 2 * rows; ++r) yd[r] = 0.0;
  const double* wd = reinterpret_cast<const double*>(w);
  for (std::size_t c = 0; c < cols; ++c) {
    const double xr = x[c].real();
    const double xi = x[c].imag();
    const __m256d xrv = _mm256_set1_pd(xr);
    const __m256d xiv = _mm256_set1_pd(xi);
    const double* col = wd + 2 * c * rows;
    std::size_t r = 0;
    for (; r + 2 <= rows; r += 2) {
      const __m256d wv = _mm256_loadu_pd(col + 2 * r);
      const __m256d yv = _mm256_loadu_pd(yd + 2 * r);
      _mm256_storeu_pd(yd + 2 * r, _mm256_add_pd(yv, cmul(wv, xrv, xiv)));
    }
    for (; r < rows; ++r) {
      const double wr = col[2 * r];
      const double wi = col[2 * r + 1];
      yd[2 * r] += wr * xr - wi * xi;
      yd[2 * r + 1] += wi * xr + wr * xi;
    }
  }
}

}  // namespace

const Ops* avx2_ops_impl() {
  static const Ops table{
      "avx2",           qam16_modulate_avx2, qam16_demodulate_avx2,
      bit_mismatch_avx2, convolve_avx2,      matvec_avx2,
  };
  return &table;
}

}  // namespace psd::kernels

#else  // !PSD_HAVE_AVX2

namespace psd::kernels {
const Ops* avx2_ops_impl() { return nullptr; }
}  // namespace psd::kernels

#endif
