#include "nlb/engines.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <exception>
#include <thread>

namespace nlb {

// ============================================================================
// Weighted enumeration
// ============================================================================

uint64_t WeightedEnumerator::uniform(uint64_t bound, DrawSite) {
  if (bound <= 1) return 0;
  if (cursor_ < trail_.size()) {
    const Choice& c = trail_[cursor_];
    if (c.arity != bound || !c.weights.empty()) {
      throw Error("enumerated procedure is not deterministic");
    }
    ++cursor_;
    mass_ /= static_cast<double>(bound);
    return c.chosen;
  }
  trail_.push_back(Choice{bound, {}, 0.0, 0});
  ++cursor_;
  mass_ /= static_cast<double>(bound);
  return 0;
}

size_t WeightedEnumerator::weighted(std::span<const double> weights,
                                    DrawSite) {
  size_t nonzero = 0;
  size_t first_nonzero = 0;
  size_t last_nonzero = 0;
  double sum = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) {
      if (nonzero == 0) first_nonzero = i;
      ++nonzero;
      last_nonzero = i;
      sum += weights[i];
    }
  }
  if (nonzero <= 1) return last_nonzero;  // forced; no branching

  if (cursor_ < trail_.size()) {
    const Choice& c = trail_[cursor_];
    if (c.arity != weights.size() || c.weights.empty()) {
      throw Error("enumerated procedure is not deterministic");
    }
    ++cursor_;
    mass_ *= c.weights[c.chosen] / c.weight_sum;
    return c.chosen;
  }
  trail_.push_back(Choice{weights.size(),
                          std::vector<double>(weights.begin(), weights.end()),
                          sum, first_nonzero});
  ++cursor_;
  mass_ *= weights[first_nonzero] / sum;
  return first_nonzero;
}

void WeightedEnumerator::finish_path() {
  if (cursor_ != trail_.size()) {
    throw Error("enumerated procedure is not deterministic");
  }
  ++paths_;
  if (paths_ > max_paths_) {
    throw BudgetError("randomness space exceeds " +
                      std::to_string(max_paths_) + " paths");
  }
}

bool WeightedEnumerator::advance() {
  while (!trail_.empty()) {
    Choice& c = trail_.back();
    uint64_t next = c.chosen + 1;
    if (!c.weights.empty()) {
      while (next < c.arity && c.weights[next] <= 0.0) ++next;
    }
    if (next < c.arity) {
      c.chosen = next;
      return true;
    }
    trail_.pop_back();
  }
  return false;
}

// ============================================================================
// Protocol descriptions
// ============================================================================

double constant_box_success(const BoxModel& model) {
  const BoxBehavior table = behavior(model);
  const double p = table.correct_prob(0, 0);
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      if (std::abs(table.correct_prob(x, y) - p) > 1e-12) {
        throw DomainError(
            "box correctness varies across inputs under " + model_name(model) +
            "; no single success parameter exists");
      }
    }
  }
  return p;
}

double two_box_even_error_success(const BoxModel& model) {
  const double p = constant_box_success(model);
  return p * p + (1.0 - p) * (1.0 - p);
}

Bit run_protocol_once(const Protocol& protocol, const BoxBehavior& behavior,
                      RandomSource& src, Word x, Word y) {
  ProtocolContext ctx(src, behavior);
  return run_protocol_once(protocol, ctx, x, y);
}

Bit run_protocol_once(const Protocol& protocol, ProtocolContext& ctx, Word x,
                      Word y) {
  ctx.reset();
  const Bit value = protocol.run(ctx, x, y);
  const Transcript transcript = ctx.finish();
  if (transcript.bits_communicated() != protocol.communicated_bits) {
    throw Error("protocol '" + protocol.name + "' communicated " +
                std::to_string(transcript.bits_communicated()) +
                " bits, contract says " +
                std::to_string(protocol.communicated_bits));
  }
  return value;
}

Protocol make_and_protocol() {
  Protocol p;
  p.name = "distributed-and";
  p.alice_arity = 2;
  p.bob_arity = 2;
  p.reference = [](Word x, Word y) {
    return (word_bit(x, 0) ^ word_bit(y, 0)) & (word_bit(x, 1) ^ word_bit(y, 1));
  };
  p.run = [](ProtocolContext& ctx, Word x, Word y) {
    const DistributedBit u{word_bit(x, 0), word_bit(y, 0)};
    const DistributedBit v{word_bit(x, 1), word_bit(y, 1)};
    return db_value(distributed_and(ctx, u, v));
  };
  p.compositional = [](const BoxModel& model, Word, Word) {
    return two_box_even_error_success(model);
  };
  return p;
}

namespace {

std::array<Bit, 3> unpack3(Word w) {
  return {word_bit(w, 0), word_bit(w, 1), word_bit(w, 2)};
}

}  // namespace

Protocol make_nle_protocol() {
  Protocol p;
  p.name = "nonlocal-equality";
  p.alice_arity = 3;
  p.bob_arity = 3;
  p.reference = [](Word x, Word y) {
    const Word z = (x ^ y) & 7u;
    return Bit(z == 0 || z == 7);
  };
  p.run = [](ProtocolContext& ctx, Word x, Word y) {
    return db_value(nonlocal_equality(ctx, unpack3(x), unpack3(y)));
  };
  p.compositional = [](const BoxModel& model, Word, Word) {
    return two_box_even_error_success(model);
  };
  return p;
}

Protocol make_nlm_protocol() {
  Protocol p;
  p.name = "nonlocal-majority";
  p.alice_arity = 3;
  p.bob_arity = 3;
  p.reference = [](Word x, Word y) {
    const Word z = (x ^ y) & 7u;
    return Bit(std::popcount(z) >= 2);
  };
  p.run = [](ProtocolContext& ctx, Word x, Word y) {
    return db_value(nonlocal_majority(ctx, unpack3(x), unpack3(y)));
  };
  p.compositional = [](const BoxModel& model, Word, Word) {
    return two_box_even_error_success(model);
  };
  return p;
}

Protocol make_base_bias_protocol(const BooleanFunction& f) {
  Protocol p;
  p.name = "base-bias";
  p.alice_arity = f.alice_arity();
  p.bob_arity = f.bob_arity();
  p.reference = [f](Word x, Word y) { return f.eval(x, y); };
  p.run = [f](ProtocolContext& ctx, Word x, Word y) {
    return db_value(base_bias(ctx, f, x, y));
  };
  const int n = f.bob_arity();
  p.compositional = [n](const BoxModel&, Word, Word) {
    return 0.5 + std::exp2(-(n + 1));
  };
  return p;
}

namespace {

// Closed-form success of the majority tree: the baseline success pushed
// through depth layers of the even-error majority gate.
double amplified_success(const BoxModel& model, int bob_arity, int depth) {
  const double q = two_box_even_error_success(model);
  double p = 0.5 + std::exp2(-(bob_arity + 1));
  for (int i = 0; i < depth; ++i) p = amplification_step(p, q);
  return p;
}

}  // namespace

Protocol make_amplify_protocol(const BooleanFunction& f, int depth) {
  Protocol p;
  p.name = "amplify-depth-" + std::to_string(depth);
  p.alice_arity = f.alice_arity();
  p.bob_arity = f.bob_arity();
  p.reference = [f](Word x, Word y) { return f.eval(x, y); };
  p.run = [f, depth](ProtocolContext& ctx, Word x, Word y) {
    return db_value(amplify_tree(ctx, f, x, y, depth));
  };
  const int n = f.bob_arity();
  p.compositional = [n, depth](const BoxModel& model, Word, Word) {
    return amplified_success(model, n, depth);
  };
  return p;
}

Protocol make_trivial_protocol(const BooleanFunction& f, int depth) {
  Protocol p;
  p.name = "one-bit-reveal-depth-" + std::to_string(depth);
  p.alice_arity = f.alice_arity();
  p.bob_arity = f.bob_arity();
  p.communicated_bits = 1;
  p.reference = [f](Word x, Word y) { return f.eval(x, y); };
  p.run = [f, depth](ProtocolContext& ctx, Word x, Word y) {
    const DistributedBit out = amplify_tree(ctx, f, x, y, depth);
    ctx.transcript().begin_reveal();
    ctx.transcript().record_communicated_bit();
    return out.alice ^ out.bob;
  };
  const int n = f.bob_arity();
  p.compositional = [n, depth](const BoxModel& model, Word, Word) {
    return amplified_success(model, n, depth);
  };
  return p;
}

Protocol make_circuit_protocol(const DistributedCircuit& circuit,
                               const std::string& name) {
  Protocol p;
  p.name = name;
  p.alice_arity = circuit.alice_arity();
  p.bob_arity = circuit.bob_arity();
  p.reference = [circuit](Word x, Word y) { return circuit.value(x, y); };
  p.run = [circuit](ProtocolContext& ctx, Word x, Word y) {
    return db_value(eval_circuit(circuit, x, y, ctx));
  };
  return p;
}

Protocol make_ip_circuit_protocol(int n) {
  Protocol p = make_circuit_protocol(build_ip_circuit(n),
                                     "ip-circuit-" + std::to_string(n));
  // XOR of n independent AND gates: the output is wrong iff an odd number of
  // gates err, giving 1/2 + (2g-1)^n / 2 for per-gate success g.
  p.compositional = [n](const BoxModel& model, Word, Word) {
    const double g = two_box_even_error_success(model);
    return 0.5 + 0.5 * std::pow(2.0 * g - 1.0, n);
  };
  return p;
}

// ============================================================================
// Exact engine
// ============================================================================

namespace {

void finalize_stats(ExactResult& result) {
  result.worst_case = 1.0;
  result.average = 0.0;
  for (const double v : result.per_input) {
    result.worst_case = std::min(result.worst_case, v);
    result.average += v;
  }
  result.average /= static_cast<double>(result.per_input.size());
}

}  // namespace

ExactResult exact_success(const Protocol& protocol, const BoxModel& model,
                          ExactMode mode, uint64_t max_paths) {
  ExactResult result;
  result.alice_arity = protocol.alice_arity;
  result.bob_arity = protocol.bob_arity;
  result.mode = mode;
  const size_t inputs =
      size_t{1} << (protocol.alice_arity + protocol.bob_arity);
  result.per_input.resize(inputs);

  if (mode == ExactMode::kCompositional) {
    if (!protocol.compositional) {
      throw ConfigError("protocol '" + protocol.name +
                        "' declares no compositional structure");
    }
    for (size_t i = 0; i < inputs; ++i) {
      const Word x = static_cast<Word>(i >> protocol.bob_arity);
      const Word y = static_cast<Word>(i & ((size_t{1} << protocol.bob_arity) - 1));
      result.per_input[i] = protocol.compositional(model, x, y);
    }
    finalize_stats(result);
    return result;
  }

  const BoxBehavior table = behavior(model);
  WeightedEnumerator enumerator(max_paths);
  ProtocolContext ctx(enumerator, table);
  for (size_t i = 0; i < inputs; ++i) {
    const Word x = static_cast<Word>(i >> protocol.bob_arity);
    const Word y = static_cast<Word>(i & ((size_t{1} << protocol.bob_arity) - 1));
    const Bit expected = protocol.reference(x, y);
    result.per_input[i] = enumerator.enumerate([&] {
      return run_protocol_once(protocol, ctx, x, y) == expected;
    });
    if (std::abs(enumerator.total_mass() - 1.0) > 1e-9) {
      throw Error("enumeration mass " +
                  std::to_string(enumerator.total_mass()) +
                  " is not 1; distribution accounting is broken");
    }
  }
  finalize_stats(result);
  return result;
}

// ============================================================================
// Monte Carlo engine
// ============================================================================

SampleResult sample_success(const Protocol& protocol, const BoxModel& model,
                            const SampleOptions& options) {
  if (options.trials < 1) throw DomainError("trials must be >= 1");
  const BoxBehavior table = behavior(model);

  const uint64_t alice_space = uint64_t{1} << protocol.alice_arity;
  const uint64_t bob_space = uint64_t{1} << protocol.bob_arity;
  if (options.fixed_input) {
    const auto [x, y] = *options.fixed_input;
    if (x >= alice_space || y >= bob_space) {
      throw DomainError("fixed input outside the protocol's input space");
    }
  }

  unsigned workers = options.workers;
  if (workers == 0) {
    workers = std::min(std::thread::hardware_concurrency(), 8u);
    if (workers == 0) workers = 1;
  }
  if (workers > options.trials) {
    workers = static_cast<unsigned>(options.trials);
  }

  // Each worker owns a contiguous trial range; a trial's draws depend only
  // on (master_seed, trial index), so the partition cannot affect the tally.
  std::vector<uint64_t> counts(workers, 0);
  std::vector<std::exception_ptr> failures(workers);
  auto run_range = [&](unsigned w, uint64_t begin, uint64_t end) {
    try {
      uint64_t hits = 0;
      CounterSource src(options.master_seed, begin);
      ProtocolContext ctx(src, table);
      for (uint64_t t = begin; t < end; ++t) {
        src.set_trial(t);
        Word x;
        Word y;
        if (options.fixed_input) {
          x = options.fixed_input->first;
          y = options.fixed_input->second;
        } else {
          x = static_cast<Word>(src.uniform(alice_space, input_site(0)));
          y = static_cast<Word>(src.uniform(bob_space, input_site(1)));
        }
        const Bit got = run_protocol_once(protocol, ctx, x, y);
        if (got == protocol.reference(x, y)) ++hits;
      }
      counts[w] = hits;
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };

  if (workers == 1) {
    run_range(0, 0, options.trials);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const uint64_t chunk = options.trials / workers;
    const uint64_t rest = options.trials % workers;
    uint64_t begin = 0;
    for (unsigned w = 0; w < workers; ++w) {
      const uint64_t end = begin + chunk + (w < rest ? 1 : 0);
      pool.emplace_back(run_range, w, begin, end);
      begin = end;
    }
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : failures) {
    if (e) std::rethrow_exception(e);
  }

  SampleResult result;
  result.trials = options.trials;
  result.master_seed = options.master_seed;
  for (const uint64_t c : counts) result.successes += c;
  result.estimate =
      static_cast<double>(result.successes) / static_cast<double>(result.trials);
  const double sigma = std::sqrt(result.estimate * (1.0 - result.estimate) /
                                 static_cast<double>(result.trials));
  // Continuity guard: half a trial's worth of slack on top of the normal
  // approximation keeps degenerate estimates (0 or 1) honest.
  const double half = 1.96 * sigma + 0.5 / static_cast<double>(result.trials);
  result.ci_low = std::max(0.0, result.estimate - half);
  result.ci_high = std::min(1.0, result.estimate + half);
  return result;
}

// ============================================================================
// Cross-checks
// ============================================================================

CrossCheckReport cross_check_against(const Protocol& protocol,
                                     const BoxModel& model,
                                     const ExactResult& claimed,
                                     uint64_t trials_per_input,
                                     uint64_t seed) {
  CrossCheckReport report;
  const size_t inputs =
      size_t{1} << (protocol.alice_arity + protocol.bob_arity);
  for (size_t i = 0; i < inputs; ++i) {
    const Word x = static_cast<Word>(i >> protocol.bob_arity);
    const Word y = static_cast<Word>(i & ((size_t{1} << protocol.bob_arity) - 1));

    SampleOptions options;
    options.trials = trials_per_input;
    // Give every input pair its own derived master seed so the per-input
    // estimates are independent experiments.
    options.master_seed = philox_word(seed, i, input_site(2));
    options.fixed_input = std::make_pair(x, y);
    const SampleResult sample = sample_success(protocol, model, options);

    CrossCheckRow row;
    row.x = x;
    row.y = y;
    row.exact = claimed.at(x, y);
    row.estimate = sample.estimate;
    row.bound = 5.0 * std::sqrt(row.exact * (1.0 - row.exact) /
                                static_cast<double>(trials_per_input));
    row.pass = std::abs(row.estimate - row.exact) <= row.bound;
    report.rows.push_back(row);
    report.pass = report.pass && row.pass;
  }
  return report;
}

CrossCheckReport cross_check(const Protocol& protocol, const BoxModel& model,
                             uint64_t trials_per_input, uint64_t seed,
                             uint64_t max_paths) {
  const ExactResult claimed =
      exact_success(protocol, model, ExactMode::kFullEnumeration, max_paths);
  return cross_check_against(protocol, model, claimed, trials_per_input, seed);
}

}  // namespace nlb
