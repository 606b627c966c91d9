#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace nlb {

// Philox 4x32-10: a counter-based generator. Each 128-bit counter block is
// encrypted independently under a 64-bit key, so any draw can be evaluated
// out of order. This is what makes trial partitioning across workers
// bit-reproducible.
struct Philox4x32 {
  static constexpr uint32_t kMulA = 0xD2511F53u;
  static constexpr uint32_t kMulB = 0xCD9E8D57u;
  static constexpr uint32_t kWeylA = 0x9E3779B9u;
  static constexpr uint32_t kWeylB = 0xBB67AE85u;

  static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr,
                                       std::array<uint32_t, 2> key);
};

// Addresses one randomness draw inside a protocol run. A draw's value is a
// pure function of (master seed, trial, site), never of execution order, so
// resource numbering alone decides which random values a protocol sees.
struct DrawSite {
  enum Kind : uint32_t {
    kBox = 1,     // index = box number, seq = port order (0 first, 1 second)
    kShared = 2,  // index = shared stream number, seq = word position
    kCoin = 3,    // index = coin stream number, seq = draw position
    kInput = 4,   // index = 0 Alice's input, 1 Bob's, 2 derived seeds
    kTable = 5,   // truth-table fill, index = 64-bit word position
  };

  uint32_t kind = 0;
  uint32_t index = 0;
  uint32_t seq = 0;
};

constexpr DrawSite box_site(uint32_t box_index, uint32_t port_order) {
  return DrawSite{DrawSite::kBox, box_index, port_order};
}
constexpr DrawSite shared_site(uint32_t stream, uint32_t word) {
  return DrawSite{DrawSite::kShared, stream, word};
}
constexpr DrawSite coin_site(uint32_t stream, uint32_t seq) {
  return DrawSite{DrawSite::kCoin, stream, seq};
}
constexpr DrawSite input_site(uint32_t which) {
  return DrawSite{DrawSite::kInput, which, 0};
}
constexpr DrawSite table_site(uint32_t word) {
  return DrawSite{DrawSite::kTable, word, 0};
}

// One 64-bit word for the given (seed, trial, site).
uint64_t philox_word(uint64_t seed, uint64_t trial, DrawSite site);

// Map a 64-bit word to [0, 1) with 53 significant bits.
inline double to_unit_double(uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

// Everything a protocol consumes at run time flows through this interface.
// CounterSource draws seeded pseudo-random values; the exact engine swaps in
// an enumerator that walks every assignment with its probability weight.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  // Uniform value in [0, bound), bound >= 1.
  virtual uint64_t uniform(uint64_t bound, DrawSite site) = 0;

  // Index drawn with probability weights[i] / sum(weights). Weights must be
  // non-negative with at least one positive entry; they need not sum to one,
  // which lets callers pass joint probabilities as conditional weights.
  virtual size_t weighted(std::span<const double> weights, DrawSite site) = 0;
};

// Seeded Monte Carlo source for one trial. Retargeting the trial index is
// allowed so a sampling loop can reuse one source object across trials.
//
// Every value is a pure function of (master seed, trial, site); what the
// source optimizes is how sites map onto Philox blocks, because one block
// yields 128 bits and most draws need far fewer:
//   - a box's two ports read the two 64-bit lanes of one block,
//   - coin draws read one bit each, 64 per block,
//   - shared words with power-of-two bounds read packed bit fields.
// Computed blocks are memoized (box blocks by index, the stream kinds in a
// last-block slot each) so sequential consumers pay for each block once.
class CounterSource final : public RandomSource {
 public:
  CounterSource(uint64_t master_seed, uint64_t trial)
      : seed_(master_seed), trial_(trial) {}

  void set_trial(uint64_t trial) { trial_ = trial; }

  uint64_t uniform(uint64_t bound, DrawSite site) override;
  size_t weighted(std::span<const double> weights, DrawSite site) override;

 private:
  struct CachedBlock {
    std::array<uint32_t, 4> ctr{};  // ctr[2] == 0 marks the slot unused
    std::array<uint32_t, 4> out{};
  };

  const std::array<uint32_t, 4>& block_for(uint32_t kind, uint32_t index,
                                           uint32_t seq, CachedBlock& slot);
  double unit_draw(DrawSite site);

  uint64_t seed_;
  uint64_t trial_;
  CachedBlock coin_block_;
  CachedBlock shared_block_;
  std::vector<CachedBlock> box_blocks_;
};

}  // namespace nlb
