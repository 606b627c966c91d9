#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "nlb/core.hpp"
#include "nlb/rng.hpp"

namespace nlb {

// ============================================================================
// Box models
// ============================================================================

// Unary rule a party can apply to its own input bit.
enum class LocalRule : uint8_t { kConst0, kConst1, kCopy, kNegate };

Bit apply_rule(LocalRule r, Bit in);
const char* rule_name(LocalRule r);
LocalRule parse_rule(const std::string& name);

constexpr std::array<LocalRule, 4> kAllRules = {
    LocalRule::kConst0, LocalRule::kConst1, LocalRule::kCopy,
    LocalRule::kNegate};

// Ideal correlated pair: outputs satisfy a XOR b = x AND y with uniform
// marginals on both sides.
struct PerfectBox {};

// Behaves ideally with probability p, and outputs the complementary
// correlation otherwise. p = 1 recovers PerfectBox, p = 1/2 is pure noise.
struct NoisyBox {
  double p = 1.0;
};

// Both parties answer with a fixed unary rule on their own input; no
// correlation resource at all.
struct LocalDeterministicBox {
  LocalRule alice = LocalRule::kConst0;
  LocalRule bob = LocalRule::kConst0;
};

// Projective measurements on a shared maximally entangled pair. Each party
// picks a measurement angle per input bit; all angles are in radians.
struct QuantumStrategyBox {
  double alice0 = 0.0;
  double alice1 = 0.0;
  double bob0 = 0.0;
  double bob1 = 0.0;
};

// Measurement angles achieving the optimal quantum correlation value.
QuantumStrategyBox canonical_chsh_angles();

using BoxModel =
    std::variant<PerfectBox, NoisyBox, LocalDeterministicBox,
                 QuantumStrategyBox>;

std::string model_name(const BoxModel& model);

// ============================================================================
// Behavior tables
// ============================================================================

// Full conditional distribution of one box: prob(x, y, a, b) for every input
// pair and output pair. Everything downstream (sampling, exact enumeration,
// no-signalling checks) reads boxes through this table.
class BoxBehavior {
 public:
  BoxBehavior() { p_.fill(0.0); }

  double prob(int x, int y, int a, int b) const {
    return p_[static_cast<size_t>(((x << 1) | y) << 2 | (a << 1) | b)];
  }
  void set_prob(int x, int y, int a, int b, double v) {
    p_[static_cast<size_t>(((x << 1) | y) << 2 | (a << 1) | b)] = v;
  }

  // P(a XOR b = x AND y) under this behavior at the given inputs.
  double correct_prob(int x, int y) const;

  // Alice's outcome distribution given inputs; sums over b.
  double alice_marginal(int x, int y, int a) const;
  // Bob's outcome distribution given inputs; sums over a.
  double bob_marginal(int x, int y, int b) const;

  // Throws DomainError unless every conditional row is a distribution.
  void validate() const;

 private:
  std::array<double, 16> p_;
};

BoxBehavior behavior(const BoxModel& model);
BoxBehavior quantum_behavior(const QuantumStrategyBox& q);

// Deliberately broken table (Bob's outcome copies Alice's input) used to
// prove the no-signalling check can fail.
BoxBehavior signalling_behavior();

// Worst case over the four input pairs of P(a XOR b = x AND y).
double box_success(const BoxBehavior& behavior);
double box_success(const BoxModel& model);

// Same quantity averaged over uniformly random inputs.
double box_game_value(const BoxBehavior& behavior);
double box_game_value(const BoxModel& model);

struct NoSignallingReport {
  bool pass = false;
  double max_deviation = 0.0;
};

// A behavior is no-signalling when each party's outcome distribution is
// independent of the other party's input. Deviations above tol fail.
NoSignallingReport check_no_signalling(const BoxBehavior& behavior,
                                       double tol = 1e-12);
NoSignallingReport check_no_signalling(const BoxModel& model,
                                       double tol = 1e-12);

// ============================================================================
// Classical baseline search
// ============================================================================

struct StrategyScore {
  LocalRule alice;
  LocalRule bob;
  double average;     // success over uniformly random inputs
  double worst_case;  // success at the worst input pair
};

struct ClassicalSearchResult {
  std::vector<StrategyScore> scores;  // all 16 rule pairs
  double max_average = 0.0;
  double max_worst_case = 0.0;
  std::vector<StrategyScore> average_maximizers;
};

// Exhaustive sweep of every deterministic local strategy pair.
ClassicalSearchResult best_local_deterministic();

// ============================================================================
// Box instances
// ============================================================================

// A single-use box. Each port accepts exactly one input bit and returns that
// party's outcome; feeding a port twice throws BoxReuseError. The first
// arriving party is answered from its outcome marginal, the second from the
// conditional given the first outcome — which reproduces the joint table
// exactly when the behavior is no-signalling.
class BoxInstance {
 public:
  BoxInstance(const BoxBehavior& behavior, uint32_t box_index,
              RandomSource& src, Transcript* transcript)
      : behavior_(&behavior),
        index_(box_index),
        src_(&src),
        transcript_(transcript) {}

  Bit put_alice(Bit x);
  Bit put_bob(Bit y);

 private:
  const BoxBehavior* behavior_;
  uint32_t index_;
  RandomSource* src_;
  Transcript* transcript_;

  bool alice_done_ = false;
  bool bob_done_ = false;
  Bit alice_in_, bob_in_, alice_out_, bob_out_;
};

// Party-scoped handles. Strategy code receives only its own side's ports, so
// the type system rules out reading the other party's inputs or outcomes.
class AlicePort {
 public:
  explicit AlicePort(BoxInstance& box) : box_(&box) {}
  Bit put(Bit x) { return box_->put_alice(x); }

 private:
  BoxInstance* box_;
};

class BobPort {
 public:
  explicit BobPort(BoxInstance& box) : box_(&box) {}
  Bit put(Bit y) { return box_->put_bob(y); }

 private:
  BoxInstance* box_;
};

struct BoxOutcome {
  Bit a;
  Bit b;
};

// Feed both ports of a fresh box; convenience for tests and single-box runs.
BoxOutcome invoke(BoxInstance& box, Bit x, Bit y);

}  // namespace nlb
