#include "nlb/rng.hpp"

#include <bit>
#include <cassert>

namespace nlb {

namespace {

inline void mul_hi_lo(uint32_t a, uint32_t b, uint32_t& lo, uint32_t& hi) {
  const uint64_t product = static_cast<uint64_t>(a) * b;
  lo = static_cast<uint32_t>(product);
  hi = static_cast<uint32_t>(product >> 32);
}

inline void one_round(std::array<uint32_t, 4>& ctr,
                      const std::array<uint32_t, 2>& key) {
  uint32_t lo0, hi0, lo1, hi1;
  mul_hi_lo(Philox4x32::kMulA, ctr[0], lo0, hi0);
  mul_hi_lo(Philox4x32::kMulB, ctr[2], lo1, hi1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

// 64-bit lane of a block: lane 0 is words 0..1, lane 1 is words 2..3.
inline uint64_t lane(const std::array<uint32_t, 4>& out, uint32_t which) {
  return static_cast<uint64_t>(out[2 * which]) |
         (static_cast<uint64_t>(out[2 * which + 1]) << 32);
}

}  // namespace

std::array<uint32_t, 4> Philox4x32::block(std::array<uint32_t, 4> ctr,
                                          std::array<uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    one_round(ctr, key);
    if (round != 9) {
      key[0] += kWeylA;
      key[1] += kWeylB;
    }
  }
  return ctr;
}

uint64_t philox_word(uint64_t seed, uint64_t trial, DrawSite site) {
  assert(site.seq < (1u << 28));
  const std::array<uint32_t, 4> ctr = {
      static_cast<uint32_t>(trial),
      static_cast<uint32_t>(trial >> 32),
      (site.kind << 28) | (site.seq & 0x0FFFFFFFu),
      site.index,
  };
  const std::array<uint32_t, 2> key = {
      static_cast<uint32_t>(seed),
      static_cast<uint32_t>(seed >> 32),
  };
  const auto out = Philox4x32::block(ctr, key);
  return static_cast<uint64_t>(out[0]) | (static_cast<uint64_t>(out[1]) << 32);
}

const std::array<uint32_t, 4>& CounterSource::block_for(uint32_t kind,
                                                        uint32_t index,
                                                        uint32_t seq,
                                                        CachedBlock& slot) {
  const std::array<uint32_t, 4> ctr = {
      static_cast<uint32_t>(trial_),
      static_cast<uint32_t>(trial_ >> 32),
      (kind << 28) | (seq & 0x0FFFFFFFu),
      index,
  };
  if (slot.ctr != ctr) {
    slot.out = Philox4x32::block(ctr, {static_cast<uint32_t>(seed_),
                                       static_cast<uint32_t>(seed_ >> 32)});
    slot.ctr = ctr;
  }
  return slot.out;
}

double CounterSource::unit_draw(DrawSite site) {
  if (site.kind == DrawSite::kBox) {
    if (site.index >= box_blocks_.size()) box_blocks_.resize(site.index + 1);
    const auto& out = block_for(site.kind, site.index, site.seq >> 1,
                                box_blocks_[site.index]);
    return to_unit_double(lane(out, site.seq & 1));
  }
  return to_unit_double(philox_word(seed_, trial_, site));
}

uint64_t CounterSource::uniform(uint64_t bound, DrawSite site) {
  if (bound <= 1) return 0;
  if (site.kind == DrawSite::kCoin && bound == 2) {
    const auto& out =
        block_for(site.kind, site.index, site.seq >> 6, coin_block_);
    return (lane(out, 0) >> (site.seq & 63)) & 1u;
  }
  if (site.kind == DrawSite::kShared && bound <= (uint64_t{1} << 32) &&
      std::has_single_bit(bound)) {
    const auto bits = static_cast<uint32_t>(std::countr_zero(bound));
    const uint32_t per_block = 64 / bits;
    const auto& out = block_for(site.kind, site.index, site.seq / per_block,
                                shared_block_);
    return (lane(out, 0) >> ((site.seq % per_block) * bits)) & (bound - 1);
  }
  const uint64_t word = philox_word(seed_, trial_, site);
  // Fixed-point scaling: exact for power-of-two bounds, and the bounds used
  // here are all powers of two.
  return static_cast<uint64_t>(
      (static_cast<__uint128_t>(word) * static_cast<__uint128_t>(bound)) >> 64);
}

size_t CounterSource::weighted(std::span<const double> weights, DrawSite site) {
  // Two-entry weights are the box hot path; skip the generic scan.
  if (weights.size() == 2) {
    const double w0 = weights[0];
    const double w1 = weights[1];
    if (!(w1 > 0.0)) return 0;  // forced choice, no entropy
    if (!(w0 > 0.0)) return 1;
    return unit_draw(site) * (w0 + w1) < w0 ? 0 : 1;
  }

  size_t nonzero = 0;
  size_t last_nonzero = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) {
      ++nonzero;
      last_nonzero = i;
    }
  }
  if (nonzero <= 1) return last_nonzero;  // degenerate choice, no entropy

  double total = 0.0;
  for (const double w : weights) total += w;
  const double u = unit_draw(site) * total;
  double cumulative = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    cumulative += weights[i];
    if (u < cumulative) return i;
  }
  return last_nonzero;  // guard against rounding in the cumulative sum
}

}  // namespace nlb
