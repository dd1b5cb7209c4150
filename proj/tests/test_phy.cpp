#include <doctest.h>

#include <bit>
#include <cmath>
#include <complex>
#include <vector>

#include "psd/errors.hpp"
#include "psd/phy.hpp"
#include "psd/rng.hpp"
#include "support.hpp"

using namespace psd;
using testsupport::bits_of_pattern;
using testsupport::conv_oracle;
using testsupport::random_bits;

namespace {

std::vector<cplx> random_taps(int order, Rng& rng, double min_lead = 0.3) {
  std::vector<cplx> taps(static_cast<std::size_t>(order) + 1);
  taps[0] = cplx(min_lead + rng.uniform(), rng.uniform() - 0.5);
  for (int k = 1; k <= order; ++k)
    taps[static_cast<std::size_t>(k)] =
        cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);
  return taps;
}

}  // namespace

TEST_CASE("16-QAM maps 0000 to the corner point") {
  const auto mod = phy::Modulation::qam(16);
  const auto syms = phy::modulate(bits_of_pattern(0, 4), mod);
  const double amp = 3.0 / std::sqrt(10.0);
  REQUIRE(syms.size() == 1);
  CHECK(syms[0].real() == doctest::Approx(-amp).epsilon(1e-12));
  CHECK(syms[0].imag() == doctest::Approx(-amp).epsilon(1e-12));
}

TEST_CASE("modulation is deterministic per pattern") {
  const auto mod = phy::Modulation::qam(16);
  const auto syms = phy::modulate(BitVec(8, 0), mod);
  REQUIRE(syms.size() == 2);
  CHECK(syms[0] == syms[1]);
}

TEST_CASE("roundtrip is exact for every pattern") {
  for (unsigned order : {4u, 16u, 64u}) {
    const auto mod = phy::Modulation::qam(order);
    for (unsigned p = 0; p < order; ++p) {
      const BitVec bits = bits_of_pattern(p, mod.bits_per_symbol());
      const auto syms = phy::modulate(bits, mod);
      CHECK(phy::demodulate(syms, mod) == bits);
    }
  }
}

TEST_CASE("bit counts must fill whole symbols") {
  const auto mod = phy::Modulation::qam(16);
  CHECK_THROWS_AS(phy::modulate(BitVec(5, 0), mod), FramingError);
  CHECK_THROWS_AS(phy::modulate(BitVec{}, mod), FramingError);
}

TEST_CASE("only square power-of-four constellations are accepted") {
  CHECK_THROWS_AS(phy::Modulation::qam(8), ConfigError);
  CHECK_THROWS_AS(phy::Modulation::qam(32), ConfigError);
  CHECK_THROWS_AS(phy::Modulation::qam(0), ConfigError);
  CHECK_NOTHROW(phy::Modulation::qam(256));
}

TEST_CASE("constellation has unit average energy") {
  for (unsigned order : {4u, 16u, 64u, 256u}) {
    const auto mod = phy::Modulation::qam(order);
    double e = 0.0;
    for (const cplx& p : mod.constellation()) e += std::norm(p);
    CHECK(std::abs(e / order - 1.0) < 1e-12);
  }
}

TEST_CASE("axis-adjacent constellation points differ in exactly one bit") {
  for (unsigned order : {16u, 64u}) {
    const auto mod = phy::Modulation::qam(order);
    const auto& pts = mod.constellation();
    const double step = 2.0 * mod.scale();
    int checked = 0;
    for (unsigned i = 0; i < order; ++i) {
      for (unsigned j = 0; j < order; ++j) {
        const cplx d = pts[i] - pts[j];
        const bool adjacent =
            (std::abs(std::abs(d.real()) - step) < 1e-12 &&
             std::abs(d.imag()) < 1e-12) ||
            (std::abs(std::abs(d.imag()) - step) < 1e-12 &&
             std::abs(d.real()) < 1e-12);
        if (!adjacent) continue;
        ++checked;
        CHECK(std::popcount(i ^ j) == 1);
      }
    }
    CHECK(checked > 0);
  }
}

TEST_CASE("demodulation matches the nearest-neighbor oracle") {
  const auto mod = phy::Modulation::qam(16);
  const auto& pts = mod.constellation();
  Rng rng(201);

  SUBCASE("exact points and small perturbations") {
    for (unsigned p = 0; p < 16; ++p) {
      // nudge toward the origin by 0.01, clearly inside the decision region
      const cplx x = pts[p] - 0.01 * pts[p] / std::abs(pts[p]);
      BitVec got = phy::demodulate(std::vector<cplx>{x}, mod);
      CHECK(got == bits_of_pattern(p, 4));
    }
  }
  SUBCASE("random points across the plane") {
    for (int i = 0; i < 2000; ++i) {
      const cplx x(3.0 * (rng.uniform() - 0.5), 3.0 * (rng.uniform() - 0.5));
      const auto got = phy::demodulate(std::vector<cplx>{x}, mod);
      const auto expect =
          bits_of_pattern(static_cast<unsigned>(testsupport::nearest_index(x, pts)), 4);
      CHECK(got == expect);
    }
  }
  SUBCASE("equidistant point takes the lowest constellation index") {
    const auto got = phy::demodulate(std::vector<cplx>{cplx{0.0, 0.0}}, mod);
    CHECK(got == bits_of_pattern(5, 4));  // index 5 = (-1 - 1i)/sqrt(10)
  }
}

TEST_CASE("toeplitz matrix realizes zero-padded convolution") {
  SUBCASE("identity channel") {
    phy::ChannelModel ch{{1.0, 0.0, 0.0}, 4, 0.0};
    const auto h = phy::build_toeplitz(ch);
    REQUIRE(h.rows == 6);
    REQUIRE(h.cols == 4);
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t c = 0; c < 4; ++c)
        CHECK(h.at(r, c) == (r == c ? cplx{1.0} : cplx{0.0}));
  }
  SUBCASE("two-tap impulse") {
    phy::ChannelModel ch{{1.0, 1.0, 0.0}, 4, 0.0};
    const auto h = phy::build_toeplitz(ch);
    const std::vector<cplx> u{1.0, 0.0, 0.0, 0.0};
    std::vector<cplx> z(6, cplx{});
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t c = 0; c < 4; ++c) z[r] += h.at(r, c) * u[c];
    const std::vector<cplx> expect{1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < 6; ++i)
      CHECK(std::abs(z[i] - expect[i]) < 1e-15);
  }
  SUBCASE("random channels match direct convolution") {
    Rng rng(202);
    for (int rep = 0; rep < 100; ++rep) {
      const int order = static_cast<int>(rng.uniform_int(3)) + 1;
      const int nb = static_cast<int>(rng.uniform_int(6)) + 2;
      phy::ChannelModel ch{random_taps(order, rng, 0.0), nb, 0.0};
      std::vector<cplx> u(static_cast<std::size_t>(nb));
      for (auto& s : u) s = cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);
      const auto h = phy::build_toeplitz(ch);
      const auto expect = conv_oracle(ch.taps, u);
      double max_err = 0.0;
      for (std::size_t r = 0; r < h.rows; ++r) {
        cplx acc{};
        for (std::size_t c = 0; c < h.cols; ++c) acc += h.at(r, c) * u[c];
        max_err = std::max(max_err, std::abs(acc - expect[r]));
      }
      CHECK(max_err < 1e-10);
    }
  }
  SUBCASE("degenerate taps are rejected") {
    phy::ChannelModel none{{}, 4, 0.0};
    CHECK_THROWS_AS(phy::build_toeplitz(none), ChannelError);
    phy::ChannelModel zeros{{0.0, 0.0}, 4, 0.0};
    CHECK_THROWS_AS(phy::build_toeplitz(zeros), ChannelError);
  }
}

TEST_CASE("transmit_block applies the channel and noise") {
  Rng rng(203);
  SUBCASE("noiseless identity appends the zero pad") {
    phy::ChannelModel ch{{1.0, 0.0, 0.0}, 4, 0.0};
    const std::vector<cplx> u{cplx{1, 1}, cplx{-1, 2}, cplx{0.5, 0}, cplx{0, -3}};
    const auto z = phy::transmit_block(u, ch, rng);
    REQUIRE(z.size() == 6);
    for (int i = 0; i < 4; ++i) CHECK(z[static_cast<std::size_t>(i)] == u[static_cast<std::size_t>(i)]);
    CHECK(z[4] == cplx{});
    CHECK(z[5] == cplx{});
  }
  SUBCASE("noiseless convolution matches the oracle") {
    phy::ChannelModel ch{{1.0, 1.0, 0.0}, 4, 0.0};
    const std::vector<cplx> u{1.0, 0.0, 0.0, 0.0};
    const auto z = phy::transmit_block(u, ch, rng);
    const std::vector<cplx> expect{1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(z[i] - expect[i]) < 1e-15);
  }
  SUBCASE("wrong block length is a framing error") {
    phy::ChannelModel ch{{1.0, 0.0, 0.0}, 4, 0.0};
    CHECK_THROWS_AS(phy::transmit_block(std::vector<cplx>(3), ch, rng),
                    FramingError);
  }
  SUBCASE("noise power is 2x the per-dimension variance") {
    const double nv = 0.03;
    phy::ChannelModel ch{{1.0, 0.0, 0.0}, 4, nv};
    const std::vector<cplx> u(4, cplx{});
    double acc = 0.0;
    long count = 0;
    for (int rep = 0; rep < 20000; ++rep) {
      const auto z = phy::transmit_block(u, ch, rng);
      for (const cplx& s : z) {
        acc += std::norm(s);
        ++count;
      }
    }
    const double measured = acc / static_cast<double>(count);
    CHECK(measured == doctest::Approx(2.0 * nv).epsilon(0.03));
  }
}

TEST_CASE("zero-forcing equalizer recovers noiseless blocks exactly") {
  Rng rng(204);
  SUBCASE("identity channel keeps the first N_b entries") {
    phy::ChannelModel ch{{1.0, 0.0, 0.0}, 4, 0.0};
    const std::vector<cplx> z{cplx{1, 2}, cplx{3, 4}, cplx{5, 6}, cplx{7, 8},
                              cplx{0, 0}, cplx{0, 0}};
    const auto u = phy::equalize(z, ch);
    REQUIRE(u.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(u[i] - z[i]) < 1e-12);
  }
  SUBCASE("real three-tap channel recovers QAM symbols") {
    const auto mod = phy::Modulation::qam(16);
    phy::ChannelModel ch{{1.0, 0.5, 0.25}, 4, 0.0};
    const auto u = phy::modulate(random_bits(16, rng), mod);
    const auto z = phy::transmit_block(u, ch, rng);
    const auto got = phy::equalize(z, ch);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(got[i] - u[i]) < 1e-9);
  }
  SUBCASE("random channels round-trip within 1e-9") {
    for (int rep = 0; rep < 100; ++rep) {
      const int order = static_cast<int>(rng.uniform_int(3));
      phy::ChannelModel ch{random_taps(order, rng), 4, 0.0};
      std::vector<cplx> u(4);
      for (auto& s : u) s = cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);
      const auto z = phy::transmit_block(u, ch, rng);
      const auto got = phy::equalize(z, ch);
      for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(got[i] - u[i]) < 1e-9);
    }
  }
  SUBCASE("pseudo-inverse left-inverts the channel matrix") {
    for (int rep = 0; rep < 100; ++rep) {
      const int order = static_cast<int>(rng.uniform_int(3));
      phy::ChannelModel ch{random_taps(order, rng), 4, 0.0};
      const phy::Equalizer eq(ch);
      const auto h = phy::build_toeplitz(ch);
      const auto& w = eq.weights();
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
          cplx acc{};
          for (std::size_t p = 0; p < h.rows; ++p)
            acc += w.at(i, p) * h.at(p, j);
          CHECK(std::abs(acc - (i == j ? cplx{1.0} : cplx{0.0})) < 1e-10);
        }
      }
    }
  }
  SUBCASE("numerically dead channels are rejected") {
    phy::ChannelModel ch{{1e-13, 1e-14}, 4, 0.0};
    CHECK_THROWS_AS(phy::Equalizer{ch}, ChannelError);
  }
  SUBCASE("wrong observation length is a framing error") {
    phy::ChannelModel ch{{1.0, 0.0, 0.0}, 4, 0.0};
    CHECK_THROWS_AS(phy::equalize(std::vector<cplx>(5), ch), FramingError);
  }
}

TEST_CASE("ber is the normalized Hamming distance") {
  CHECK(phy::ber({0, 1, 1, 0}, {0, 1, 1, 0}) == 0.0);
  CHECK(phy::ber({0, 1, 1, 0}, {1, 0, 0, 1}) == 1.0);
  CHECK(phy::ber({0, 0, 0, 0, 1, 1, 1, 1}, {0, 0, 1, 0, 1, 0, 1, 1}) == 0.25);
  CHECK_THROWS_AS(phy::ber({0, 1}, {0, 1, 1}), ComparisonError);
  CHECK_THROWS_AS(phy::ber({}, {}), ComparisonError);
}

TEST_CASE("end-to-end 16-QAM BER matches the closed form over AWGN") {
  const auto mod = phy::Modulation::qam(16);
  const long nbits = 1000000;
  Rng rng(4);  // frozen; at 1e6 bits the 12 dB point carries ~8.5% rel-sigma
  for (const double ebn0_db : {4.0, 8.0, 12.0}) {
    // Es = 1, Eb = 1/4: per-dimension variance N0/2 = 10^(-x/10)/8
    const double nv = std::pow(10.0, -ebn0_db / 10.0) / 8.0;
    phy::ChannelModel ch{{1.0, 0.0, 0.0}, 4, nv};
    const phy::Equalizer eq(ch);
    const BitVec sent = random_bits(nbits, rng);
    const BitVec got = phy::send_over_link(sent, mod, ch, eq, rng);
    const double measured = phy::ber(sent, got);
    const double expected = testsupport::qam16_awgn_ber(nv);
    CHECK(std::abs(measured - expected) / expected < 0.05);
  }
}
