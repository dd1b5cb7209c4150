#include "psd/phy.hpp"

#include <cmath>
#include <string>

#include "psd/errors.hpp"
#include "psd/kernels.hpp"

namespace psd::phy {

namespace {

bool is_power_of_four(unsigned n) {
  if (n == 0 || (n & (n - 1)) != 0) return false;
  unsigned bits = 0;
  while (n > 1) {
    n >>= 1;
    ++bits;
  }
  return bits % 2 == 0;
}

unsigned read_code(const std::uint8_t* bits, unsigned nbits) {
  unsigned c = 0;
  for (unsigned i = 0; i < nbits; ++i) c = (c << 1) | (bits[i] & 1u);
  return c;
}

void write_code(unsigned c, std::uint8_t* bits, unsigned nbits) {
  for (unsigned i = 0; i < nbits; ++i)
    bits[i] = static_cast<std::uint8_t>((c >> (nbits - 1 - i)) & 1u);
}

}  // namespace

Modulation Modulation::qam(unsigned order) {
  if (!is_power_of_four(order) || order < 4 || order > 256)
    throw ConfigError("modulation order must be 4, 16, 64 or 256, got " +
                      std::to_string(order));
  Modulation m;
  m.order_ = order;
  m.levels_ = 1;
  while (m.levels_ * m.levels_ < order) ++m.levels_;
  m.axis_bits_ = 0;
  while ((1u << m.axis_bits_) < m.levels_) ++m.axis_bits_;
  m.bits_per_symbol_ = 2 * m.axis_bits_;
  // unit average symbol energy: E = 2(M - 1)/3 at unit level spacing
  m.scale_ = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);

  m.pos_to_code_.resize(m.levels_);
  m.code_to_pos_.resize(m.levels_);
  for (unsigned j = 0; j < m.levels_; ++j) {
    const unsigned code = j ^ (j >> 1);  // binary-reflected Gray
    m.pos_to_code_[j] = code;
    m.code_to_pos_[code] = j;
  }
  m.code_to_level_.resize(m.levels_);
  for (unsigned c = 0; c < m.levels_; ++c) {
    const unsigned j = m.code_to_pos_[c];
    m.code_to_level_[c] =
        (2.0 * j - static_cast<double>(m.levels_ - 1)) * m.scale_;
  }
  m.boundaries_.resize(m.levels_ - 1);
  m.boundary_left_.resize(m.levels_ - 1);
  for (unsigned j = 0; j + 1 < m.levels_; ++j) {
    m.boundaries_[j] =
        (2.0 * j + 1.0 - static_cast<double>(m.levels_ - 1)) * m.scale_;
    m.boundary_left_[j] = m.pos_to_code_[j] < m.pos_to_code_[j + 1];
  }
  m.points_.resize(order);
  for (unsigned i = 0; i < order; ++i) {
    const unsigned ci = i >> m.axis_bits_;
    const unsigned cq = i & (m.levels_ - 1);
    m.points_[i] = cplx(m.code_to_level_[ci], m.code_to_level_[cq]);
  }
  return m;
}

cplx Modulation::map_symbol(const std::uint8_t* bits) const {
  const unsigned ci = read_code(bits, axis_bits_);
  const unsigned cq = read_code(bits + axis_bits_, axis_bits_);
  return {code_to_level_[ci], code_to_level_[cq]};
}

unsigned Modulation::axis_position(double v) const {
  for (unsigned j = 0; j + 1 < levels_; ++j) {
    if (boundary_left_[j] ? v <= boundaries_[j] : v < boundaries_[j]) return j;
  }
  return levels_ - 1;
}

void Modulation::demap_symbol(cplx x, std::uint8_t* bits) const {
  const unsigned ci = pos_to_code_[axis_position(x.real())];
  const unsigned cq = pos_to_code_[axis_position(x.imag())];
  write_code(ci, bits, axis_bits_);
  write_code(cq, bits + axis_bits_, axis_bits_);
}

std::vector<cplx> modulate(const BitVec& bits, const Modulation& mod) {
  const unsigned bps = mod.bits_per_symbol();
  if (bits.empty() || bits.size() % bps != 0)
    throw FramingError("bit count " + std::to_string(bits.size()) +
                       " is not a positive multiple of " + std::to_string(bps));
  const std::size_t nsym = bits.size() / bps;
  std::vector<cplx> out(nsym);
  if (mod.order() == 16) {
    kernels::ops().qam16_modulate(bits.data(), nsym,
                                  mod.constellation().data(), out.data());
  } else {
    for (std::size_t i = 0; i < nsym; ++i)
      out[i] = mod.map_symbol(bits.data() + i * bps);
  }
  return out;
}

BitVec demodulate(std::span<const cplx> symbols, const Modulation& mod) {
  const unsigned bps = mod.bits_per_symbol();
  BitVec out(symbols.size() * bps);
  if (mod.order() == 16) {
    kernels::ops().qam16_demodulate(symbols.data(), symbols.size(),
                                    mod.scale(), out.data());
  } else {
    for (std::size_t i = 0; i < symbols.size(); ++i)
      mod.demap_symbol(symbols[i], out.data() + i * bps);
  }
  return out;
}

double ber(const BitVec& a, const BitVec& b) {
  if (a.empty() || a.size() != b.size())
    throw ComparisonError("ber needs equal non-empty bit vectors, got " +
                          std::to_string(a.size()) + " and " +
                          std::to_string(b.size()));
  const std::size_t d = kernels::ops().bit_mismatch(a.data(), b.data(),
                                                    a.size());
  return static_cast<double>(d) / static_cast<double>(a.size());
}

void ChannelModel::validate() const {
  if (taps.empty()) throw ChannelError("channel has no taps");
  if (block_size < 1) throw ConfigError("block_size must be >= 1");
  if (noise_variance < 0.0) throw ConfigError("noise_variance must be >= 0");
  double peak = 0.0;
  for (const cplx& t : taps) peak = std::max(peak, std::abs(t));
  if (peak < 1e-12) throw ChannelError("all channel taps are numerically zero");
}

CMatrix build_toeplitz(const ChannelModel& ch) {
  ch.validate();
  const std::size_t p = static_cast<std::size_t>(ch.conv_length());
  const std::size_t n = static_cast<std::size_t>(ch.block_size);
  CMatrix h(p, n);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t row = 0; row < p; ++row) {
      const std::ptrdiff_t k =
          static_cast<std::ptrdiff_t>(row) - static_cast<std::ptrdiff_t>(col);
      if (k >= 0 && k < static_cast<std::ptrdiff_t>(ch.taps.size()))
        h.at(row, col) = ch.taps[static_cast<std::size_t>(k)];
    }
  }
  return h;
}

std::vector<cplx> transmit_block(std::span<const cplx> u,
                                 const ChannelModel& ch, Rng& rng) {
  ch.validate();
  if (u.size() != static_cast<std::size_t>(ch.block_size))
    throw FramingError("transmit block length " + std::to_string(u.size()) +
                       " != block_size " + std::to_string(ch.block_size));
  std::vector<cplx> z(static_cast<std::size_t>(ch.conv_length()), cplx{});
  kernels::ops().convolve(ch.taps.data(), ch.taps.size(), u.data(), u.size(),
                          z.data());
  if (ch.noise_variance > 0.0) {
    const double sigma = std::sqrt(ch.noise_variance);
    for (cplx& s : z) {
      const double re = sigma * rng.gaussian();
      const double im = sigma * rng.gaussian();
      s += cplx(re, im);
    }
  }
  return z;
}

Equalizer::Equalizer(const ChannelModel& ch) {
  ch.validate();
  const CMatrix h = build_toeplitz(ch);
  const std::size_t n = h.cols;
  const std::size_t p = h.rows;

  // Normal equations: W = (HᴴH)⁻¹Hᴴ via complex Cholesky. The Gram matrix of
  // a zero-padded channel is well conditioned at these sizes.
  CMatrix gram(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cplx acc{};
      for (std::size_t r = 0; r < p; ++r)
        acc += std::conj(h.at(r, i)) * h.at(r, j);
      gram.at(i, j) = acc;
    }
  }

  CMatrix chol(n, n);  // lower triangular, gram = L·Lᴴ
  for (std::size_t j = 0; j < n; ++j) {
    cplx diag = gram.at(j, j);
    for (std::size_t k = 0; k < j; ++k)
      diag -= chol.at(j, k) * std::conj(chol.at(j, k));
    const double dj = diag.real();
    if (!(dj > 1e-300))
      throw ChannelError("channel matrix is numerically rank deficient");
    const double root = std::sqrt(dj);
    chol.at(j, j) = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx acc = gram.at(i, j);
      for (std::size_t k = 0; k < j; ++k)
        acc -= chol.at(i, k) * std::conj(chol.at(j, k));
      chol.at(i, j) = acc / root;
    }
  }

  w_ = CMatrix(n, p);
  std::vector<cplx> y(n);
  for (std::size_t c = 0; c < p; ++c) {
    // column c of Hᴴ
    for (std::size_t i = 0; i < n; ++i) y[i] = std::conj(h.at(c, i));
    // forward solve L v = y (in place)
    for (std::size_t i = 0; i < n; ++i) {
      cplx acc = y[i];
      for (std::size_t k = 0; k < i; ++k) acc -= chol.at(i, k) * y[k];
      y[i] = acc / chol.at(i, i);
    }
    // backward solve Lᴴ w = v
    for (std::size_t ii = n; ii-- > 0;) {
      cplx acc = y[ii];
      for (std::size_t k = ii + 1; k < n; ++k)
        acc -= std::conj(chol.at(k, ii)) * y[k];
      y[ii] = acc / chol.at(ii, ii);
    }
    for (std::size_t i = 0; i < n; ++i) w_.at(i, c) = y[i];
  }
}

std::vector<cplx> Equalizer::apply(std::span<const cplx> z) const {
  if (z.size() != w_.cols)
    throw FramingError("observed block length " + std::to_string(z.size()) +
                       " != P " + std::to_string(w_.cols));
  std::vector<cplx> u(w_.rows);
  kernels::ops().matvec(w_.data.data(), w_.rows, w_.cols, z.data(), u.data());
  return u;
}

std::vector<cplx> equalize(std::span<const cplx> z, const ChannelModel& ch) {
  return Equalizer(ch).apply(z);
}

BitVec receive_frame(std::span<const cplx> symbols, const Modulation& mod,
                     const ChannelModel& ch, const Equalizer& eq, Rng& rng) {
  const std::size_t nb = static_cast<std::size_t>(ch.block_size);
  if (symbols.empty() || symbols.size() % nb != 0)
    throw FramingError("frame of " + std::to_string(symbols.size()) +
                       " symbols does not fill blocks of " +
                       std::to_string(nb));
  std::vector<cplx> recovered;
  recovered.reserve(symbols.size());
  for (std::size_t off = 0; off < symbols.size(); off += nb) {
    const auto z = transmit_block(symbols.subspan(off, nb), ch, rng);
    const auto u = eq.apply(z);
    recovered.insert(recovered.end(), u.begin(), u.end());
  }
  return demodulate(recovered, mod);
}

BitVec send_over_link(const BitVec& bits, const Modulation& mod,
                      const ChannelModel& ch, const Equalizer& eq, Rng& rng) {
  return receive_frame(modulate(bits, mod), mod, ch, eq, rng);
}

}  // namespace psd::phy
