#include "nlb/core.hpp"

#include <bit>
#include <string>

namespace nlb {

namespace {

void check_arity(int arity, const char* who) {
  if (arity < 1 || arity > BooleanFunction::kMaxArity) {
    throw DomainError(std::string(who) + " arity " + std::to_string(arity) +
                      " outside [1, " +
                      std::to_string(BooleanFunction::kMaxArity) + "]");
  }
}

}  // namespace

BooleanFunction::BooleanFunction(int alice_arity, int bob_arity,
                                 const std::vector<uint8_t>& table)
    : m_(alice_arity), n_(bob_arity) {
  check_arity(m_, "alice");
  check_arity(n_, "bob");
  const uint64_t want = uint64_t{1} << (m_ + n_);
  if (table.size() != want) {
    throw DimensionError("truth table has " + std::to_string(table.size()) +
                         " entries, arities need " + std::to_string(want));
  }
  bits_.assign((want + 63) / 64, 0);
  for (uint64_t i = 0; i < want; ++i) {
    if (table[i] > 1) {
      throw DomainError("truth table entry " + std::to_string(i) +
                        " is not a bit");
    }
    if (table[i]) bits_[i >> 6] |= uint64_t{1} << (i & 63);
  }
}

BooleanFunction make_function(const std::vector<uint8_t>& table, int m, int n) {
  return BooleanFunction(m, n, table);
}

BooleanFunction inner_product(int n) {
  check_arity(n, "inner product");
  const uint64_t rows = uint64_t{1} << n;
  std::vector<uint8_t> table(rows * rows);
  for (uint64_t x = 0; x < rows; ++x) {
    for (uint64_t y = 0; y < rows; ++y) {
      table[(x << n) | y] =
          static_cast<uint8_t>(std::popcount(x & y) & 1);
    }
  }
  return BooleanFunction(n, n, table);
}

BooleanFunction equality(int n) {
  check_arity(n, "equality");
  const uint64_t rows = uint64_t{1} << n;
  std::vector<uint8_t> table(rows * rows);
  for (uint64_t x = 0; x < rows; ++x) table[(x << n) | x] = 1;
  return BooleanFunction(n, n, table);
}

BooleanFunction and2() { return BooleanFunction(1, 1, {0, 0, 0, 1}); }

BooleanFunction xor2() { return BooleanFunction(1, 1, {0, 1, 1, 0}); }

BooleanFunction random_function(int m, int n, uint64_t seed) {
  check_arity(m, "alice");
  check_arity(n, "bob");
  const uint64_t entries = uint64_t{1} << (m + n);
  std::vector<uint8_t> table(entries);
  // One word covers 64 entries; folding (m, n) into the trial field makes the
  // table a pure function of (seed, m, n).
  const uint64_t trial =
      (uint64_t{static_cast<uint32_t>(m)} << 32) | static_cast<uint32_t>(n);
  uint64_t w = 0;
  for (uint64_t i = 0; i < entries; ++i) {
    if ((i & 63) == 0) {
      w = philox_word(seed, trial, table_site(static_cast<uint32_t>(i >> 6)));
    }
    table[i] = static_cast<uint8_t>((w >> (i & 63)) & 1);
  }
  return BooleanFunction(m, n, table);
}

uint64_t SharedRandomness::word(size_t position) {
  while (filled_ <= position) {
    const auto idx = static_cast<uint32_t>(filled_);
    const uint64_t w = src_->uniform(bound_, shared_site(stream_, idx));
    if (filled_ == 0) {
      first_ = w;
    } else {
      rest_.push_back(w);
    }
    ++filled_;
  }
  return position == 0 ? first_ : rest_[position - 1];
}

}  // namespace nlb
