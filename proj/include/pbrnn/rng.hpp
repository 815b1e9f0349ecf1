#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace pbrnn {

// Counter-based random streams built on Philox4x32-10 (Salmon et al., SC 2011).
//
// Every draw is addressed by (key, counter) where the key is the master seed and
// the counter encodes (block index, purpose, individual, iteration). A substream
// for a given (seed, purpose, individual, iteration) therefore produces the same
// values no matter which thread evaluates it or in what order streams are used.

enum class RngPurpose : std::uint32_t {
  Generic = 0,
  EsNoise = 1,
  PsoCognitive = 2,
  PsoSocial = 3,
  PopInit = 4,
  SgdInit = 5,
  SynthNoise = 6,
  SearchDraw = 7,
};

namespace detail {

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr, std::array<std::uint32_t, 2>& key) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM4x32A) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM4x32B) * ctr[2];
  const std::array<std::uint32_t, 4> out{
      static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
      static_cast<std::uint32_t>(p1),
      static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
      static_cast<std::uint32_t>(p0),
  };
  ctr = out;
  key[0] += kPhiloxW32A;
  key[1] += kPhiloxW32B;
}

inline std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> ctr,
                                                 std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    philox_round(ctr, key);
  }
  return ctr;
}

}  // namespace detail

// Derives an independent 64-bit seed from a master seed and up to three labels.
// Used to give benchmark cells and search trials their own seed roots.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(master_seed),
                                         static_cast<std::uint32_t>(master_seed >> 32)};
  const std::array<std::uint32_t, 4> ctr{
      static_cast<std::uint32_t>(a),
      static_cast<std::uint32_t>(a >> 32) ^ static_cast<std::uint32_t>(b),
      static_cast<std::uint32_t>(b >> 32) ^ static_cast<std::uint32_t>(c),
      static_cast<std::uint32_t>(c >> 32) ^ 0x5EEDC0DEu,
  };
  const auto out = detail::philox_block(ctr, key);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// One deterministic substream. Draws are generated lazily in blocks of four
// 32-bit words; the block index occupies its own counter word, so a stream can
// emit up to 2^32 blocks without touching the identity words.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, RngPurpose purpose, std::uint64_t individual = 0,
            std::uint64_t iteration = 0)
      : key_{static_cast<std::uint32_t>(master_seed),
             static_cast<std::uint32_t>(master_seed >> 32)},
        id_{0, static_cast<std::uint32_t>(purpose) ^ (static_cast<std::uint32_t>(individual >> 32) << 8),
            static_cast<std::uint32_t>(individual),
            static_cast<std::uint32_t>(iteration) ^ (static_cast<std::uint32_t>(iteration >> 32))} {}

  std::uint64_t next_u64() {
    if (word_pos_ >= 4) {
      refill();
    }
    const std::uint64_t hi = buf_[word_pos_++];
    const std::uint64_t lo = buf_[word_pos_++];
    return (hi << 32) | lo;
  }

  // Uniform draw in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; pairs are cached so consecutive draws
  // consume the underlying words at a fixed rate.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;        // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

  void fill_gaussian(std::span<double> out) {
    for (double& v : out) {
      v = gaussian();
    }
  }

  std::vector<double> gaussian_vector(std::size_t dim) {
    std::vector<double> out(dim);
    fill_gaussian(out);
    return out;
  }

 private:
  void refill() {
    auto ctr = id_;
    ctr[0] = block_++;
    buf_ = detail::philox_block(ctr, key_);
    word_pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> id_;
  std::array<std::uint32_t, 4> buf_{};
  std::uint32_t block_ = 0;
  int word_pos_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pbrnn
