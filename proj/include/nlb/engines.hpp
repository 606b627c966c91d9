#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlb/analysis.hpp"
#include "nlb/boxes.hpp"
#include "nlb/circuits.hpp"
#include "nlb/core.hpp"
#include "nlb/protocols.hpp"
#include "nlb/rng.hpp"

namespace nlb {

// ============================================================================
// Weighted enumeration
// ============================================================================

// A RandomSource that, instead of sampling, walks every randomness
// assignment of a procedure by depth-first replay: run the procedure, record
// each draw as a weighted choice, then advance the deepest choice and rerun.
// Zero-weight branches are pruned and forced choices consume no path budget,
// so the path count is the number of outcomes with nonzero probability.
class WeightedEnumerator final : public RandomSource {
 public:
  static constexpr uint64_t kDefaultMaxPaths = uint64_t{1} << 30;

  explicit WeightedEnumerator(uint64_t max_paths = kDefaultMaxPaths)
      : max_paths_(max_paths) {}

  uint64_t uniform(uint64_t bound, DrawSite site) override;
  size_t weighted(std::span<const double> weights, DrawSite site) override;

  // Runs fn once per randomness assignment and returns the total probability
  // mass of assignments where fn yields true. fn must be deterministic given
  // the values this source hands out. Throws BudgetError past max_paths.
  template <typename Fn>
  double enumerate(Fn&& fn) {
    trail_.clear();
    total_mass_ = 0.0;
    paths_ = 0;
    double success = 0.0;
    for (;;) {
      cursor_ = 0;
      mass_ = 1.0;
      const bool ok = fn();
      finish_path();
      total_mass_ += mass_;
      if (ok) success += mass_;
      if (!advance()) break;
    }
    return success;
  }

  // Mass summed over all paths of the last enumerate(); ~1 up to rounding.
  double total_mass() const { return total_mass_; }
  uint64_t paths() const { return paths_; }

 private:
  struct Choice {
    uint64_t arity = 0;
    std::vector<double> weights;  // empty for uniform choices
    double weight_sum = 0.0;
    uint64_t chosen = 0;
  };

  void finish_path();
  bool advance();

  uint64_t max_paths_;
  std::vector<Choice> trail_;
  size_t cursor_ = 0;
  double mass_ = 1.0;
  double total_mass_ = 0.0;
  uint64_t paths_ = 0;
};

// ============================================================================
// Protocol descriptions
// ============================================================================

// A protocol as the engines see it: how to run one execution against a
// context, and what the correct answer would be. The run procedure returns
// the value the parties produce (the XOR of their shares, or the revealed
// guess); the engines score it against reference.
struct Protocol {
  std::string name;
  int alice_arity = 0;
  int bob_arity = 0;
  // Bits the transcript must show after every run (1 for the revealing
  // protocol, 0 for all distributed ones); enforced on each execution.
  uint64_t communicated_bits = 0;
  std::function<Bit(Word x, Word y)> reference;
  std::function<Bit(ProtocolContext&, Word x, Word y)> run;
  // Per-input success in closed form, for protocols whose independence
  // structure admits one; empty otherwise.
  std::function<double(const BoxModel&, Word x, Word y)> compositional;
};

Protocol make_and_protocol();
Protocol make_nle_protocol();
Protocol make_nlm_protocol();
Protocol make_base_bias_protocol(const BooleanFunction& f);
Protocol make_amplify_protocol(const BooleanFunction& f, int depth);
Protocol make_trivial_protocol(const BooleanFunction& f, int depth);
Protocol make_circuit_protocol(const DistributedCircuit& circuit,
                               const std::string& name);
Protocol make_ip_circuit_protocol(int n);

// The box's correctness probability when it is the same for all four input
// pairs (true of every shipped model except local-deterministic ones);
// throws DomainError when it varies.
double constant_box_success(const BoxModel& model);

// Success of any even-error composition of two boxes (a majority gate or a
// distributed AND): correct when neither or both boxes err.
double two_box_even_error_success(const BoxModel& model);

// Runs one protocol execution and checks the communication contract.
Bit run_protocol_once(const Protocol& protocol, const BoxBehavior& behavior,
                      RandomSource& src, Word x, Word y);

// Same, against a caller-owned context (reset here), so loops can recycle
// one context's resource pools across many executions.
Bit run_protocol_once(const Protocol& protocol, ProtocolContext& ctx, Word x,
                      Word y);

// ============================================================================
// Exact engine
// ============================================================================

enum class ExactMode { kFullEnumeration, kCompositional };

struct ExactResult {
  int alice_arity = 0;
  int bob_arity = 0;
  std::vector<double> per_input;  // indexed (x << bob_arity) | y
  double worst_case = 1.0;
  double average = 0.0;
  ExactMode mode = ExactMode::kFullEnumeration;

  double at(Word x, Word y) const {
    return per_input[(static_cast<size_t>(x) << bob_arity) | y];
  }
};

// Exact per-input success. Full enumeration walks every randomness
// assignment per input pair (BudgetError if over max_paths); compositional
// mode evaluates the protocol's closed-form law (ConfigError if it has
// none). The two agree wherever both apply.
ExactResult exact_success(const Protocol& protocol, const BoxModel& model,
                          ExactMode mode,
                          uint64_t max_paths = WeightedEnumerator::kDefaultMaxPaths);

// ============================================================================
// Monte Carlo engine
// ============================================================================

struct SampleOptions {
  uint64_t trials = 100000;
  uint64_t master_seed = 0;
  unsigned workers = 0;  // 0: choose automatically
  // When absent, inputs are drawn uniformly per trial; when present, every
  // trial runs this input pair.
  std::optional<std::pair<Word, Word>> fixed_input;
};

struct SampleResult {
  uint64_t trials = 0;
  uint64_t successes = 0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  uint64_t master_seed = 0;
};

// Seeded sampling. Every trial derives its randomness from (master_seed,
// trial index) alone, so the result is bit-identical however the trials are
// partitioned across workers.
SampleResult sample_success(const Protocol& protocol, const BoxModel& model,
                            const SampleOptions& options);

// ============================================================================
// Cross-checks
// ============================================================================

struct CrossCheckRow {
  Word x = 0;
  Word y = 0;
  double exact = 0.0;
  double estimate = 0.0;
  double bound = 0.0;  // five binomial standard deviations
  bool pass = false;
};

struct CrossCheckReport {
  std::vector<CrossCheckRow> rows;
  bool pass = true;
};

// Samples each input pair and compares against the claimed exact values at
// a five-sigma binomial bound (claims of 0 or 1 must match exactly).
CrossCheckReport cross_check_against(const Protocol& protocol,
                                     const BoxModel& model,
                                     const ExactResult& claimed,
                                     uint64_t trials_per_input, uint64_t seed);

// Same, with the claim computed by full enumeration of the same model.
CrossCheckReport cross_check(const Protocol& protocol, const BoxModel& model,
                             uint64_t trials_per_input, uint64_t seed,
                             uint64_t max_paths = WeightedEnumerator::kDefaultMaxPaths);

}  // namespace nlb
