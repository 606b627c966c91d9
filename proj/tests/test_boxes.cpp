#include <doctest.h>

#include <cmath>

#include "nlb/boxes.hpp"
#include "nlb/rng.hpp"

using namespace nlb;

TEST_CASE("local rules and their names") {
  CHECK(apply_rule(LocalRule::kConst0, Bit(true)) == Bit(false));
  CHECK(apply_rule(LocalRule::kConst1, Bit(false)) == Bit(true));
  CHECK(apply_rule(LocalRule::kCopy, Bit(true)) == Bit(true));
  CHECK(apply_rule(LocalRule::kNegate, Bit(true)) == Bit(false));
  for (const LocalRule r : kAllRules) {
    CHECK(parse_rule(rule_name(r)) == r);
  }
  CHECK_THROWS_AS(parse_rule("sideways"), ParseError);
}

TEST_CASE("behavior tables are valid distributions with uniform marginals") {
  const std::vector<BoxModel> models = {
      PerfectBox{}, NoisyBox{0.8}, NoisyBox{0.5},
      LocalDeterministicBox{LocalRule::kCopy, LocalRule::kNegate},
      canonical_chsh_angles()};
  for (const BoxModel& m : models) {
    const BoxBehavior b = behavior(m);
    CHECK_NOTHROW(b.validate());
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        double row = 0.0;
        for (int a = 0; a < 2; ++a) {
          for (int bo = 0; bo < 2; ++bo) row += b.prob(x, y, a, bo);
        }
        CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  // The correlated models additionally promise uniform local outcomes.
  for (const BoxModel& m :
       {BoxModel{PerfectBox{}}, BoxModel{NoisyBox{0.8}},
        BoxModel{canonical_chsh_angles()}}) {
    const BoxBehavior b = behavior(m);
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        CHECK(b.alice_marginal(x, y, 1) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(b.bob_marginal(x, y, 1) == doctest::Approx(0.5).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("validate rejects a non-distribution") {
  BoxBehavior broken;
  broken.set_prob(0, 0, 0, 0, 0.7);  // row sums to 0.7, others to 0
  CHECK_THROWS_AS(broken.validate(), DomainError);
}

TEST_CASE("noise outside the correlated range is rejected") {
  CHECK_THROWS_AS(behavior(NoisyBox{0.3}), DomainError);
  CHECK_THROWS_AS(behavior(NoisyBox{1.2}), DomainError);
  CHECK_NOTHROW(behavior(NoisyBox{0.5}));
}

TEST_CASE("ideal box is always correct, noisy box exactly p") {
  const BoxBehavior ideal = behavior(PerfectBox{});
  const BoxBehavior noisy = behavior(NoisyBox{0.8});
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      CHECK(ideal.correct_prob(x, y) == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(noisy.correct_prob(x, y) == doctest::Approx(0.8).epsilon(1e-15));
    }
  }
  CHECK(box_success(PerfectBox{}) == doctest::Approx(1.0));
  CHECK(box_success(NoisyBox{0.8}) == doctest::Approx(0.8));
}

TEST_CASE("optimal measurement angles reach the quantum ceiling") {
  const BoxBehavior q = quantum_behavior(canonical_chsh_angles());
  const double ceiling = (2.0 + std::sqrt(2.0)) / 4.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      CHECK(q.correct_prob(x, y) == doctest::Approx(ceiling).epsilon(1e-9));
    }
  }
}

TEST_CASE("deterministic strategies cap at three quarters on average") {
  const ClassicalSearchResult r = best_local_deterministic();
  CHECK(r.scores.size() == 16);
  CHECK(r.max_average == 0.75);
  // Every deterministic pair loses some input outright, so the worst case
  // over inputs is zero even for the average-optimal strategies.
  CHECK(r.max_worst_case == 0.0);
  CHECK(r.average_maximizers.size() == 8);
  for (const StrategyScore& s : r.average_maximizers) {
    CHECK(s.average == 0.75);
    CHECK(s.worst_case == 0.0);
  }
}

TEST_CASE("average and worst-case box scores differ for biased models") {
  const BoxModel flat = LocalDeterministicBox{};  // both answer 0
  CHECK(box_game_value(flat) == doctest::Approx(0.75));
  CHECK(box_success(flat) == doctest::Approx(0.0));
  // Input-symmetric models have equal average and worst case.
  CHECK(box_game_value(NoisyBox{0.9}) == doctest::Approx(0.9));
  CHECK(box_success(NoisyBox{0.9}) == doctest::Approx(0.9));
}

TEST_CASE("no-signalling holds for every shipped model") {
  const std::vector<BoxModel> models = {
      PerfectBox{}, NoisyBox{0.7}, NoisyBox{1.0},
      LocalDeterministicBox{LocalRule::kNegate, LocalRule::kConst1},
      canonical_chsh_angles(), QuantumStrategyBox{0.3, 1.1, -0.4, 0.9}};
  for (const BoxModel& m : models) {
    const NoSignallingReport r = check_no_signalling(m, 1e-12);
    CHECK(r.pass);
    CHECK(r.max_deviation <= 1e-12);
  }
}

TEST_CASE("the signalling fixture is caught") {
  const NoSignallingReport r = check_no_signalling(signalling_behavior());
  CHECK_FALSE(r.pass);
  CHECK(r.max_deviation > 0.1);
}

TEST_CASE("box instances honor the correlation and are one-shot") {
  CounterSource src(31, 0);
  Transcript transcript;

  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      for (uint64_t trial = 0; trial < 50; ++trial) {
        src.set_trial(trial);
        const BoxBehavior ideal = behavior(PerfectBox{});
        BoxInstance box(ideal, 0, src, &transcript);
        const BoxOutcome out = invoke(box, Bit(x != 0), Bit(y != 0));
        CHECK((out.a ^ out.b) == Bit((x & y) != 0));
      }
    }
  }

  const BoxBehavior ideal = behavior(PerfectBox{});
  BoxInstance box(ideal, 1, src, &transcript);
  AlicePort alice(box);
  BobPort bob(box);
  alice.put(Bit(true));
  bob.put(Bit(true));
  CHECK_THROWS_AS(alice.put(Bit(false)), BoxReuseError);
  CHECK_THROWS_AS(bob.put(Bit(false)), BoxReuseError);
}

TEST_CASE("arrival order respects the box contract and its statistics") {
  // With an ideal box the contract is forced whichever party arrives first.
  CounterSource src(8, 0);
  const BoxBehavior ideal = behavior(PerfectBox{});
  for (uint64_t trial = 0; trial < 64; ++trial) {
    src.set_trial(trial);
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        BoxInstance first(ideal, 0, src, nullptr);
        const Bit a1 = first.put_alice(Bit(x != 0));
        const Bit b1 = first.put_bob(Bit(y != 0));
        CHECK((a1 ^ b1) == Bit((x & y) != 0));

        BoxInstance second(ideal, 1, src, nullptr);
        const Bit b2 = second.put_bob(Bit(y != 0));
        const Bit a2 = second.put_alice(Bit(x != 0));
        CHECK((a2 ^ b2) == Bit((x & y) != 0));
      }
    }
  }

  // A party that moves first cannot see the other's input: its outcome is a
  // pure function of its own input and the randomness, pointwise per trial.
  const BoxBehavior noisy = behavior(NoisyBox{0.85});
  for (uint64_t trial = 0; trial < 100; ++trial) {
    src.set_trial(trial);
    BoxInstance lhs(noisy, 0, src, nullptr);
    const Bit a_before_y0 = lhs.put_alice(Bit(true));
    lhs.put_bob(Bit(false));

    BoxInstance rhs(noisy, 0, src, nullptr);
    const Bit a_before_y1 = rhs.put_alice(Bit(true));
    rhs.put_bob(Bit(true));
    CHECK(a_before_y0 == a_before_y1);
  }

  // A noisy box errs at the same rate whichever party arrives first.
  const uint64_t trials = 20000;
  uint64_t errors_alice_first = 0;
  uint64_t errors_bob_first = 0;
  for (uint64_t trial = 0; trial < trials; ++trial) {
    src.set_trial(trial);
    BoxInstance first(noisy, 0, src, nullptr);
    const Bit a1 = first.put_alice(Bit(true));
    const Bit b1 = first.put_bob(Bit(true));
    if ((a1 ^ b1) != Bit(true)) ++errors_alice_first;

    BoxInstance second(noisy, 1, src, nullptr);
    const Bit b2 = second.put_bob(Bit(true));
    const Bit a2 = second.put_alice(Bit(true));
    if ((a2 ^ b2) != Bit(true)) ++errors_bob_first;
  }
  const double sigma = std::sqrt(0.15 * 0.85 / double(trials));
  CHECK(std::abs(double(errors_alice_first) / double(trials) - 0.15) <
        5.0 * sigma);
  CHECK(std::abs(double(errors_bob_first) / double(trials) - 0.15) <
        5.0 * sigma);
}

TEST_CASE("model names carry their parameters") {
  CHECK(model_name(PerfectBox{}) == "perfect");
  CHECK(model_name(NoisyBox{0.9}) == "noisy(p=0.9)");
  CHECK(model_name(LocalDeterministicBox{}) == "classical(const0,const0)");
  CHECK(model_name(canonical_chsh_angles()).substr(0, 8) == "quantum(");
}
