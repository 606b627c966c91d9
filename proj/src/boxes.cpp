#include "nlb/boxes.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace nlb {

namespace {

constexpr double kRowTol = 1e-12;

}  // namespace

// ============================================================================
// Models
// ============================================================================

Bit apply_rule(LocalRule r, Bit in) {
  switch (r) {
    case LocalRule::kConst0:
      return Bit(false);
    case LocalRule::kConst1:
      return Bit(true);
    case LocalRule::kCopy:
      return in;
    case LocalRule::kNegate:
      return ~in;
  }
  throw DomainError("unknown local rule");
}

const char* rule_name(LocalRule r) {
  switch (r) {
    case LocalRule::kConst0:
      return "const0";
    case LocalRule::kConst1:
      return "const1";
    case LocalRule::kCopy:
      return "copy";
    case LocalRule::kNegate:
      return "negate";
  }
  throw DomainError("unknown local rule");
}

LocalRule parse_rule(const std::string& name) {
  for (LocalRule r : kAllRules) {
    if (name == rule_name(r)) return r;
  }
  throw ParseError("unknown local rule '" + name + "'");
}

QuantumStrategyBox canonical_chsh_angles() {
  const double pi = std::numbers::pi;
  return QuantumStrategyBox{0.0, pi / 4, pi / 8, -pi / 8};
}

std::string model_name(const BoxModel& model) {
  std::ostringstream out;
  if (std::holds_alternative<PerfectBox>(model)) {
    out << "perfect";
  } else if (const auto* nb = std::get_if<NoisyBox>(&model)) {
    out << "noisy(p=" << nb->p << ")";
  } else if (const auto* ld = std::get_if<LocalDeterministicBox>(&model)) {
    out << "classical(" << rule_name(ld->alice) << "," << rule_name(ld->bob)
        << ")";
  } else {
    const auto& q = std::get<QuantumStrategyBox>(model);
    out << "quantum(" << q.alice0 << "," << q.alice1 << "," << q.bob0 << ","
        << q.bob1 << ")";
  }
  return out.str();
}

// ============================================================================
// Behavior tables
// ============================================================================

double BoxBehavior::correct_prob(int x, int y) const {
  double total = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      if ((a ^ b) == (x & y)) total += prob(x, y, a, b);
    }
  }
  return total;
}

double BoxBehavior::alice_marginal(int x, int y, int a) const {
  return prob(x, y, a, 0) + prob(x, y, a, 1);
}

double BoxBehavior::bob_marginal(int x, int y, int b) const {
  return prob(x, y, 0, b) + prob(x, y, 1, b);
}

void BoxBehavior::validate() const {
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      double row = 0.0;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double v = prob(x, y, a, b);
          if (v < -kRowTol || v > 1.0 + kRowTol) {
            throw DomainError("behavior entry outside [0, 1]");
          }
          row += v;
        }
      }
      if (std::abs(row - 1.0) > kRowTol) {
        throw DomainError("behavior row for inputs (" + std::to_string(x) +
                          ", " + std::to_string(y) + ") sums to " +
                          std::to_string(row));
      }
    }
  }
}

BoxBehavior quantum_behavior(const QuantumStrategyBox& q) {
  // Shared state (|00> + |11>) / sqrt(2); all amplitudes stay real. Party
  // measurement vectors at angle t are (cos t, sin t) for outcome 0 and
  // (-sin t, cos t) for outcome 1.
  BoxBehavior behavior;
  const double alice_angle[2] = {q.alice0, q.alice1};
  const double bob_angle[2] = {q.bob0, q.bob1};
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double ta = alice_angle[x];
          const double tb = bob_angle[y];
          const double va0 = a == 0 ? std::cos(ta) : -std::sin(ta);
          const double va1 = a == 0 ? std::sin(ta) : std::cos(ta);
          const double vb0 = b == 0 ? std::cos(tb) : -std::sin(tb);
          const double vb1 = b == 0 ? std::sin(tb) : std::cos(tb);
          // Overlap with the two nonzero state amplitudes |00> and |11>.
          const double amp = (va0 * vb0 + va1 * vb1) * inv_sqrt2;
          behavior.set_prob(x, y, a, b, amp * amp);
        }
      }
    }
  }
  return behavior;
}

BoxBehavior behavior(const BoxModel& model) {
  BoxBehavior out;
  if (std::holds_alternative<PerfectBox>(model)) {
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        for (int a = 0; a < 2; ++a) {
          const int b = a ^ (x & y);
          out.set_prob(x, y, a, b, 0.5);
        }
      }
    }
  } else if (const auto* nb = std::get_if<NoisyBox>(&model)) {
    if (nb->p < 0.5 || nb->p > 1.0) {
      throw DomainError("noisy box correctness must lie in [1/2, 1]");
    }
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            const bool good = (a ^ b) == (x & y);
            out.set_prob(x, y, a, b, (good ? nb->p : 1.0 - nb->p) / 2.0);
          }
        }
      }
    }
  } else if (const auto* ld = std::get_if<LocalDeterministicBox>(&model)) {
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        const Bit a = apply_rule(ld->alice, Bit(x != 0));
        const Bit b = apply_rule(ld->bob, Bit(y != 0));
        out.set_prob(x, y, a.value(), b.value(), 1.0);
      }
    }
  } else {
    out = quantum_behavior(std::get<QuantumStrategyBox>(model));
  }
  out.validate();
  return out;
}

BoxBehavior signalling_behavior() {
  // Bob's outcome copies Alice's input; Alice answers a fair coin.
  BoxBehavior out;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      for (int a = 0; a < 2; ++a) {
        out.set_prob(x, y, a, x, 0.5);
      }
    }
  }
  return out;
}

double box_success(const BoxBehavior& behavior) {
  double worst = 1.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      worst = std::min(worst, behavior.correct_prob(x, y));
    }
  }
  return worst;
}

double box_success(const BoxModel& model) { return box_success(behavior(model)); }

double box_game_value(const BoxBehavior& behavior) {
  double total = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      total += behavior.correct_prob(x, y);
    }
  }
  return total / 4.0;
}

double box_game_value(const BoxModel& model) {
  return box_game_value(behavior(model));
}

NoSignallingReport check_no_signalling(const BoxBehavior& behavior,
                                       double tol) {
  double worst = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int x = 0; x < 2; ++x) {
      worst = std::max(worst, std::abs(behavior.alice_marginal(x, 0, a) -
                                       behavior.alice_marginal(x, 1, a)));
    }
  }
  for (int b = 0; b < 2; ++b) {
    for (int y = 0; y < 2; ++y) {
      worst = std::max(worst, std::abs(behavior.bob_marginal(0, y, b) -
                                       behavior.bob_marginal(1, y, b)));
    }
  }
  return NoSignallingReport{worst <= tol, worst};
}

NoSignallingReport check_no_signalling(const BoxModel& model, double tol) {
  return check_no_signalling(behavior(model), tol);
}

// ============================================================================
// Classical baseline search
// ============================================================================

ClassicalSearchResult best_local_deterministic() {
  ClassicalSearchResult result;
  for (LocalRule ra : kAllRules) {
    for (LocalRule rb : kAllRules) {
      const BoxBehavior table =
          behavior(BoxModel{LocalDeterministicBox{ra, rb}});
      const StrategyScore score{ra, rb, box_game_value(table),
                                box_success(table)};
      result.scores.push_back(score);
      result.max_average = std::max(result.max_average, score.average);
      result.max_worst_case =
          std::max(result.max_worst_case, score.worst_case);
    }
  }
  for (const StrategyScore& s : result.scores) {
    if (s.average == result.max_average) result.average_maximizers.push_back(s);
  }
  return result;
}

// ============================================================================
// Box instances
// ============================================================================

Bit BoxInstance::put_alice(Bit x) {
  if (alice_done_) throw BoxReuseError();
  alice_done_ = true;
  alice_in_ = x;
  if (!bob_done_) {
    // First arrival: draw from Alice's outcome marginal. The opposite input
    // is unknown, so the marginal is taken at y = 0; any no-signalling
    // behavior gives the same answer for y = 1.
    const double w0 = behavior_->alice_marginal(x.value(), 0, 0);
    const double w1 = behavior_->alice_marginal(x.value(), 0, 1);
    const double weights[2] = {w0, w1};
    alice_out_ = Bit(src_->weighted(weights, box_site(index_, 0)) == 1);
  } else {
    // Second arrival: condition on Bob's realized outcome.
    const double w0 =
        behavior_->prob(x.value(), bob_in_.value(), 0, bob_out_.value());
    const double w1 =
        behavior_->prob(x.value(), bob_in_.value(), 1, bob_out_.value());
    const double weights[2] = {w0, w1};
    alice_out_ = Bit(src_->weighted(weights, box_site(index_, 0)) == 1);
    if (transcript_ != nullptr) transcript_->record_box_invocation();
  }
  return alice_out_;
}

Bit BoxInstance::put_bob(Bit y) {
  if (bob_done_) throw BoxReuseError();
  bob_done_ = true;
  bob_in_ = y;
  if (!alice_done_) {
    const double w0 = behavior_->bob_marginal(0, y.value(), 0);
    const double w1 = behavior_->bob_marginal(0, y.value(), 1);
    const double weights[2] = {w0, w1};
    bob_out_ = Bit(src_->weighted(weights, box_site(index_, 1)) == 1);
  } else {
    const double w0 =
        behavior_->prob(alice_in_.value(), y.value(), alice_out_.value(), 0);
    const double w1 =
        behavior_->prob(alice_in_.value(), y.value(), alice_out_.value(), 1);
    const double weights[2] = {w0, w1};
    bob_out_ = Bit(src_->weighted(weights, box_site(index_, 1)) == 1);
    if (transcript_ != nullptr) transcript_->record_box_invocation();
  }
  return bob_out_;
}

BoxOutcome invoke(BoxInstance& box, Bit x, Bit y) {
  const Bit a = box.put_alice(x);
  const Bit b = box.put_bob(y);
  return BoxOutcome{a, b};
}

}  // namespace nlb
