#pragma once

// Shared test oracles. Everything here is independent of the library's
// implementation path: direct convolution, exhaustive nearest-neighbor
// search, and the closed-form Gray-QAM error rate.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "psd/rng.hpp"
#include "psd/types.hpp"

namespace testsupport {

inline double qfunc(double x) {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

// Exact BER of Gray-labeled 16-QAM over AWGN. Per axis the levels sit at
// ±scale and ±3·scale with Gray codes 00, 01, 11, 10, giving
//   BER = 3/4·Q(a) + 1/2·Q(3a) - 1/4·Q(5a),  a = scale/sigma.
inline double qam16_awgn_ber(double noise_variance_per_dim) {
  const double scale = 1.0 / std::sqrt(10.0);
  const double a = scale / std::sqrt(noise_variance_per_dim);
  return 0.75 * qfunc(a) + 0.5 * qfunc(3.0 * a) - 0.25 * qfunc(5.0 * a);
}

inline std::vector<psd::cplx> conv_oracle(const std::vector<psd::cplx>& h,
                                          const std::vector<psd::cplx>& u) {
  std::vector<psd::cplx> z(h.size() + u.size() - 1, psd::cplx{});
  for (std::size_t k = 0; k < h.size(); ++k)
    for (std::size_t p = 0; p < u.size(); ++p) z[p + k] += h[k] * u[p];
  return z;
}

// Minimum-distance index with lowest-index tie-break.
inline std::size_t nearest_index(psd::cplx x,
                                 const std::vector<psd::cplx>& points) {
  std::size_t best = 0;
  double best_d = std::norm(x - points[0]);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double d = std::norm(x - points[i]);
    if (d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

inline psd::BitVec random_bits(std::size_t n, psd::Rng& rng) {
  psd::BitVec bits(n);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform_int(2));
  return bits;
}

inline psd::BitVec bits_of_pattern(unsigned pattern, unsigned nbits) {
  psd::BitVec bits(nbits);
  for (unsigned i = 0; i < nbits; ++i)
    bits[i] = static_cast<std::uint8_t>((pattern >> (nbits - 1 - i)) & 1u);
  return bits;
}

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

inline Moments moments(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

}  // namespace testsupport
