#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "psd/rng.hpp"
#include "psd/types.hpp"

namespace psd::phy {

// Square M-QAM with per-axis binary-reflected Gray labeling and unit average
// symbol energy. A symbol's bit pattern is read MSB first: the high half
// selects the in-phase level, the low half the quadrature level, with the
// 2-bit axis order 00 → -3, 01 → -1, 11 → +1, 10 → +3 (before scaling).
// The constellation index of a point is its bit pattern as an integer.
class Modulation {
 public:
  static Modulation qam(unsigned order);  // order ∈ {4, 16, 64, 256}

  unsigned order() const { return order_; }
  unsigned bits_per_symbol() const { return bits_per_symbol_; }
  unsigned levels_per_axis() const { return levels_; }
  double scale() const { return scale_; }
  const std::vector<cplx>& constellation() const { return points_; }

  cplx map_symbol(const std::uint8_t* bits) const;
  // Minimum-distance decision; a point equidistant between two levels takes
  // the smaller Gray code, i.e. the lowest constellation index overall.
  void demap_symbol(cplx x, std::uint8_t* bits) const;

 private:
  Modulation() = default;
  unsigned axis_position(double v) const;

  unsigned order_ = 0;
  unsigned bits_per_symbol_ = 0;
  unsigned levels_ = 0;
  unsigned axis_bits_ = 0;
  double scale_ = 0.0;
  std::vector<cplx> points_;
  std::vector<unsigned> pos_to_code_;
  std::vector<unsigned> code_to_pos_;
  std::vector<double> code_to_level_;
  std::vector<double> boundaries_;          // levels_ - 1 axis thresholds
  std::vector<std::uint8_t> boundary_left_; // exact hit goes left when set
};

std::vector<cplx> modulate(const BitVec& bits, const Modulation& mod);
BitVec demodulate(std::span<const cplx> symbols, const Modulation& mod);

// Hamming distance over equal-length bit vectors, normalized to [0, 1].
double ber(const BitVec& a, const BitVec& b);

// Zero-padded single-carrier block channel: N_b symbols in, P = N_b + L_c
// samples out through an (L_c + 1)-tap FIR plus circularly-symmetric AWGN.
struct ChannelModel {
  std::vector<cplx> taps;      // length channel_order + 1
  int block_size = 0;          // N_b
  double noise_variance = 0.0; // per real dimension

  int channel_order() const { return static_cast<int>(taps.size()) - 1; }
  int conv_length() const { return block_size + channel_order(); }
  void validate() const;
};

// Minimal column-major complex matrix.
struct CMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<cplx> data;

  CMatrix() = default;
  CMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
  cplx& at(std::size_t r, std::size_t c) { return data[c * rows + r]; }
  const cplx& at(std::size_t r, std::size_t c) const {
    return data[c * rows + r];
  }
};

// Tall P × N_b convolution matrix: entry (p, n) = taps[p - n].
CMatrix build_toeplitz(const ChannelModel& ch);

// z = H·u + ζ with per-dimension noise variance taken from the channel.
std::vector<cplx> transmit_block(std::span<const cplx> u,
                                 const ChannelModel& ch, Rng& rng);

// Zero-forcing equalizer: precomputed pseudo-inverse of the tall Toeplitz
// matrix. Exact recovery in the noiseless case (full column rank under ZP).
class Equalizer {
 public:
  explicit Equalizer(const ChannelModel& ch);
  std::vector<cplx> apply(std::span<const cplx> z) const;
  const CMatrix& weights() const { return w_; }

 private:
  CMatrix w_;  // N_b × P
};

std::vector<cplx> equalize(std::span<const cplx> z, const ChannelModel& ch);

// Whole-frame receive chain: blockwise channel + ZF + hard demodulation.
// The frame length must be a multiple of the channel block size.
BitVec receive_frame(std::span<const cplx> symbols, const Modulation& mod,
                     const ChannelModel& ch, const Equalizer& eq, Rng& rng);

// modulate → receive_frame, for end-to-end BER measurements.
BitVec send_over_link(const BitVec& bits, const Modulation& mod,
                      const ChannelModel& ch, const Equalizer& eq, Rng& rng);

}  // namespace psd::phy
