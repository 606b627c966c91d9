#include <doctest.h>

#include <array>
#include <vector>

#include "nlb/core.hpp"
#include "nlb/rng.hpp"

using namespace nlb;

TEST_CASE("bit algebra") {
  const Bit zero(false);
  const Bit one(true);
  CHECK((zero ^ one) == one);
  CHECK((one ^ one) == zero);
  CHECK((one & zero) == zero);
  CHECK((one & one) == one);
  CHECK(~zero == one);
  CHECK(bit_of(6) == zero);
  CHECK(bit_of(7) == one);
  CHECK(word_bit(0b1010, 1) == one);
  CHECK(word_bit(0b1010, 2) == zero);
}

TEST_CASE("distributed bits carry their value in the share XOR") {
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const DistributedBit d{Bit(a != 0), Bit(b != 0)};
      CHECK(db_value(d) == (Bit(a != 0) ^ Bit(b != 0)));
      CHECK(db_value(db_not(d)) == ~db_value(d));
      for (int c = 0; c < 2; ++c) {
        for (int e = 0; e < 2; ++e) {
          const DistributedBit f{Bit(c != 0), Bit(e != 0)};
          CHECK(db_value(db_xor(d, f)) == (db_value(d) ^ db_value(f)));
        }
      }
    }
  }
}

TEST_CASE("builtin functions match their definitions") {
  const BooleanFunction a = and2();
  const BooleanFunction x = xor2();
  for (Word i = 0; i < 2; ++i) {
    for (Word j = 0; j < 2; ++j) {
      CHECK(a.eval(i, j).value() == (i & j));
      CHECK(x.eval(i, j).value() == (i ^ j));
    }
  }

  const BooleanFunction ip = inner_product(3);
  const BooleanFunction eq = equality(3);
  for (Word i = 0; i < 8; ++i) {
    for (Word j = 0; j < 8; ++j) {
      uint32_t parity = 0;
      for (int k = 0; k < 3; ++k) parity ^= (i >> k) & (j >> k) & 1u;
      CHECK(ip.eval(i, j).value() == parity);
      CHECK(eq.eval(i, j).value() == (i == j ? 1 : 0));
    }
  }
}

TEST_CASE("table construction checks its dimensions") {
  const std::vector<uint8_t> table = {0, 1, 1, 0};
  const BooleanFunction f = make_function(table, 1, 1);
  CHECK(f.alice_arity() == 1);
  CHECK(f.bob_arity() == 1);
  CHECK(f.eval(0, 1).value() == 1);
  CHECK(f.eval(1, 1).value() == 0);

  CHECK_THROWS_AS(make_function(table, 2, 1), DimensionError);
  CHECK_THROWS_AS(make_function(table, 0, 2), DomainError);
  CHECK_THROWS_AS(inner_product(0), DomainError);
  CHECK_THROWS_AS(inner_product(BooleanFunction::kMaxArity + 1), DomainError);
  CHECK_THROWS_AS(make_function({0, 1, 2, 1}, 1, 1), DomainError);
}

TEST_CASE("random functions are seed-determined") {
  const BooleanFunction f = random_function(3, 4, 77);
  const BooleanFunction again = random_function(3, 4, 77);
  const BooleanFunction other = random_function(3, 4, 78);
  CHECK(f == again);
  CHECK(f != other);
  CHECK(f.alice_arity() == 3);
  CHECK(f.bob_arity() == 4);

  // Not constant (vanishing probability at this size and seed).
  bool saw0 = false;
  bool saw1 = false;
  for (Word x = 0; x < 8; ++x) {
    for (Word y = 0; y < 16; ++y) {
      (f.eval(x, y).value() != 0 ? saw1 : saw0) = true;
    }
  }
  CHECK(saw0);
  CHECK(saw1);
}

TEST_CASE("shared stream shows both parties the same words") {
  CounterSource src(13, 2);
  SharedRandomness stream(src, 0, 1u << 16);
  SharedView alice(stream);
  SharedView bob(stream);

  // Alice reads ahead; Bob later sees the identical prefix.
  std::array<uint64_t, 5> seen{};
  for (auto& w : seen) w = alice.next();
  for (const uint64_t w : seen) CHECK(bob.next() == w);
  CHECK(stream.words_consumed() == 5);

  for (const uint64_t w : seen) CHECK(w < (1u << 16));
  CHECK(stream.bound() == 1u << 16);
}

TEST_CASE("shared streams with distinct indices are distinct") {
  CounterSource src(13, 2);
  SharedRandomness s0(src, 0, 1u << 20);
  SharedRandomness s1(src, 1, 1u << 20);
  bool differ = false;
  for (size_t i = 0; i < 8; ++i) differ = differ || s0.word(i) != s1.word(i);
  CHECK(differ);
}

TEST_CASE("coin streams are private and reproducible") {
  CounterSource src(4, 9);
  CoinStream coins(src, 7);
  std::vector<Bit> first;
  for (int i = 0; i < 100; ++i) first.push_back(coins.next());

  CounterSource replay_src(4, 9);
  CoinStream replay(replay_src, 7);
  for (int i = 0; i < 100; ++i) CHECK(replay.next() == first[i]);

  bool nonconstant = false;
  for (const Bit b : first) nonconstant = nonconstant || b != first[0];
  CHECK(nonconstant);
}

TEST_CASE("transcript forbids communication before the reveal phase") {
  Transcript t;
  CHECK(t.phase() == Phase::kDistributed);
  CHECK_THROWS_AS(t.record_communicated_bit(), PhaseError);
  CHECK(t.bits_communicated() == 0);

  t.record_box_invocation();
  t.record_shared_word();
  t.begin_reveal();
  t.record_communicated_bit();
  CHECK(t.phase() == Phase::kReveal);
  CHECK(t.box_invocations() == 1);
  CHECK(t.shared_words_consumed() == 1);
  CHECK(t.bits_communicated() == 1);
}
