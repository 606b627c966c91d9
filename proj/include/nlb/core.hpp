#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlb/rng.hpp"

namespace nlb {

// ============================================================================
// Errors
// ============================================================================

class Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric or arity argument outside its allowed range.
class DomainError : public Error {
  using Error::Error;
};

// Truth-table size does not match the declared arities.
class DimensionError : public Error {
  using Error::Error;
};

// A one-shot box port was fed twice.
class BoxReuseError : public Error {
 public:
  BoxReuseError() : Error("one-shot box invoked twice") {}
};

// Communication attempted outside the reveal phase.
class PhaseError : public Error {
  using Error::Error;
};

// Randomness space too large to enumerate, or a run would exceed its
// provisioned resources.
class BudgetError : public Error {
  using Error::Error;
};

// Closed-form amplification quantities requested below their threshold.
class BelowThresholdError : public Error {
  using Error::Error;
};

// Malformed text input (circuit files, truth-table files, result files).
class ParseError : public Error {
  using Error::Error;
};

// Bad CLI configuration.
class ConfigError : public Error {
  using Error::Error;
};

// ============================================================================
// Bits and distributed bits
// ============================================================================

class Bit {
 public:
  constexpr Bit() = default;
  constexpr explicit Bit(bool v) : v_(v ? 1 : 0) {}

  constexpr uint8_t value() const { return v_; }
  constexpr bool as_bool() const { return v_ != 0; }

  friend constexpr Bit operator^(Bit a, Bit b) {
    return Bit((a.v_ ^ b.v_) != 0);
  }
  friend constexpr Bit operator&(Bit a, Bit b) {
    return Bit((a.v_ & b.v_) != 0);
  }
  constexpr Bit operator~() const { return Bit(v_ == 0); }

  friend constexpr bool operator==(Bit, Bit) = default;

 private:
  uint8_t v_ = 0;
};

// Low bit of a word.
constexpr Bit bit_of(uint64_t w) { return Bit((w & 1) != 0); }

// Packed party input; bit i of x is word_bit(x, i).
using Word = uint32_t;

constexpr Bit word_bit(Word w, int i) { return Bit(((w >> i) & 1u) != 0); }

// One logical bit split into two shares whose XOR is its value. Neither
// share alone carries the value unless constructed degenerate.
struct DistributedBit {
  Bit alice;
  Bit bob;

  friend constexpr bool operator==(DistributedBit, DistributedBit) = default;
};

constexpr Bit db_value(DistributedBit d) { return d.alice ^ d.bob; }

// Negation is free: one party (Alice here) flips her share.
constexpr DistributedBit db_not(DistributedBit d) { return {~d.alice, d.bob}; }

// XOR is free: both parties XOR their shares locally.
constexpr DistributedBit db_xor(DistributedBit u, DistributedBit v) {
  return {u.alice ^ v.alice, u.bob ^ v.bob};
}

// ============================================================================
// Boolean functions
// ============================================================================

// A total two-party Boolean function as an explicit truth table; Alice holds
// the m-bit row input, Bob the n-bit column input. Tables keep worst-case
// sweeps over all input pairs trivial.
class BooleanFunction {
 public:
  static constexpr int kMaxArity = 20;

  BooleanFunction(int alice_arity, int bob_arity,
                  const std::vector<uint8_t>& table);

  int alice_arity() const { return m_; }
  int bob_arity() const { return n_; }
  uint64_t table_size() const { return uint64_t{1} << (m_ + n_); }

  Bit eval(Word x, Word y) const {
    const uint64_t idx = (static_cast<uint64_t>(x) << n_) | y;
    return Bit(((bits_[idx >> 6] >> (idx & 63)) & 1u) != 0);
  }

  friend bool operator==(const BooleanFunction&,
                         const BooleanFunction&) = default;

 private:
  int m_ = 0;
  int n_ = 0;
  std::vector<uint64_t> bits_;
};

// Table entries are 0/1, indexed by (x << n) | y.
BooleanFunction make_function(const std::vector<uint8_t>& table, int m, int n);

BooleanFunction inner_product(int n);          // parity of x AND y, m = n
BooleanFunction equality(int n);               // [x == y], m = n
BooleanFunction and2();                        // 1-bit AND
BooleanFunction xor2();                        // 1-bit XOR
BooleanFunction random_function(int m, int n, uint64_t seed);

// ============================================================================
// Shared randomness
// ============================================================================

// A stream of uniform words both parties read identically. Words materialize
// on first read by either party and are cached, so the views always agree
// without any protocol data crossing between the parties. The first word is
// cached inline: most streams consume exactly one word, and protocol runs
// create streams by the thousand, so the common case must not touch the heap.
class SharedRandomness {
 public:
  SharedRandomness(RandomSource& src, uint32_t stream_index, uint64_t word_bound)
      : src_(&src), stream_(stream_index), bound_(word_bound) {}

  uint64_t word(size_t position);
  size_t words_consumed() const { return filled_; }
  uint64_t bound() const { return bound_; }

 private:
  RandomSource* src_;
  uint32_t stream_;
  uint64_t bound_;
  size_t filled_ = 0;
  uint64_t first_ = 0;
  std::vector<uint64_t> rest_;
};

// One party's cursor into a shared stream.
class SharedView {
 public:
  explicit SharedView(SharedRandomness& stream) : stream_(&stream) {}

  uint64_t next() { return stream_->word(cursor_++); }
  uint64_t bound() const { return stream_->bound(); }

 private:
  SharedRandomness* stream_;
  size_t cursor_ = 0;
};

// Party-private uniform bits, drawn lazily.
class CoinStream {
 public:
  CoinStream(RandomSource& src, uint32_t stream_index)
      : src_(&src), stream_(stream_index) {}

  Bit next() { return bit_of(src_->uniform(2, coin_site(stream_, seq_++))); }

 private:
  RandomSource* src_;
  uint32_t stream_;
  uint32_t seq_ = 0;
};

// ============================================================================
// Transcript
// ============================================================================

enum class Phase : uint8_t { kDistributed, kReveal };

// Audit record of a protocol run: box uses, shared words, communicated bits.
// Communication is representable only after begin_reveal(), which is how the
// zero-communication rule for distributed computation is machine-checked.
class Transcript {
 public:
  uint64_t box_invocations() const { return box_invocations_; }
  uint64_t shared_words_consumed() const { return shared_words_; }
  uint64_t bits_communicated() const { return bits_communicated_; }
  Phase phase() const { return phase_; }

  void record_box_invocation() { ++box_invocations_; }
  void record_shared_word() { ++shared_words_; }

  void begin_reveal() { phase_ = Phase::kReveal; }

  void record_communicated_bit() {
    if (phase_ != Phase::kReveal) {
      throw PhaseError("communication during a distributed computation");
    }
    ++bits_communicated_;
  }

 private:
  uint64_t box_invocations_ = 0;
  uint64_t shared_words_ = 0;
  uint64_t bits_communicated_ = 0;
  Phase phase_ = Phase::kDistributed;
};

}  // namespace nlb
