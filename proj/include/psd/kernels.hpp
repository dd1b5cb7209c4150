#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "psd/types.hpp"

namespace psd::kernels {

// Data-parallel inner loops of the transmission chain, as a function table so
// a SIMD backend can be swapped in at runtime. Every backend is required to
// produce bit-identical output to the scalar reference: vector variants fan
// out across independent outputs and keep the scalar per-output operation
// order (mul, mul, add/sub — no FMA contraction).
struct Ops {
  const char* name;

  // 16-QAM bit-pattern lookup. bits holds 4 entries per symbol (one bit per
  // byte, MSB first); lut is the 16-point constellation indexed by pattern.
  void (*qam16_modulate)(const std::uint8_t* bits, std::size_t nsym,
                         const cplx* lut, cplx* out);

  // 16-QAM hard decision, per-axis thresholds at 0 and ±2·scale. Exact
  // threshold hits resolve toward the smaller Gray code, which makes the
  // decision equal to minimum-distance with lowest-pattern tie-break.
  void (*qam16_demodulate)(const cplx* in, std::size_t nsym, double scale,
                           std::uint8_t* out_bits);

  // Hamming distance between two bit arrays (entries must be 0/1).
  std::size_t (*bit_mismatch)(const std::uint8_t* a, const std::uint8_t* b,
                              std::size_t n);

  // z += taps ⊛ u (full linear convolution); z has nu + nh - 1 entries and
  // must be zero-initialized by the caller.
  void (*convolve)(const cplx* taps, std::size_t nh, const cplx* u,
                   std::size_t nu, cplx* z);

  // y = W·x with W column-major (rows × cols); y has rows entries.
  void (*matvec)(const cplx* w_colmajor, std::size_t rows, std::size_t cols,
                 const cplx* x, cplx* y);
};

enum class Backend { Scalar, Avx2 };

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when not compiled in or not supported
bool avx2_available();

// Active backend: AVX2 when the CPU supports it, scalar otherwise.
const Ops& ops();
Backend active_backend();
void set_backend(Backend b);                 // throws ConfigError if unsupported
void select_backend(std::string_view name);  // "auto" | "scalar" | "avx2"

}  // namespace psd::kernels
