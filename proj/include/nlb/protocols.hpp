#pragma once

#include <array>

#include "nlb/boxes.hpp"
#include "nlb/core.hpp"
#include "nlb/pool.hpp"

namespace nlb {

// ============================================================================
// Protocol context
// ============================================================================

// Owns the resources of one protocol run: box instances, shared-randomness
// streams, private coin streams, and the transcript. Resources are numbered
// in creation order, and every draw they make is addressed by that number,
// so a run's randomness layout is a pure function of the protocol structure.
// A context is reusable: reset() recycles the resource pools for the next
// run, which keeps tight sampling loops allocation-free.
class ProtocolContext {
 public:
  ProtocolContext(RandomSource& src, const BoxBehavior& behavior)
      : src_(&src), behavior_(behavior) {}
  ProtocolContext(RandomSource& src, const BoxModel& model)
      : ProtocolContext(src, behavior(model)) {}

  // Discards this run's resources and transcript, keeping the pools' memory.
  void reset();

  BoxInstance& new_box();
  SharedRandomness& new_shared_stream(uint64_t word_bound);
  CoinStream& new_coin_stream();

  Transcript& transcript() { return transcript_; }

  // Folds the shared-word consumption counters into the transcript and
  // returns it; call once, after the run.
  Transcript finish();

 private:
  RandomSource* src_;
  BoxBehavior behavior_;
  Transcript transcript_;
  Pool<BoxInstance> boxes_;
  Pool<SharedRandomness> streams_;
  Pool<CoinStream> coins_;
  uint32_t next_box_ = 0;
  uint32_t next_stream_ = 0;
  uint32_t next_coin_ = 0;
};

// ============================================================================
// Per-party strategies
// ============================================================================
//
// Each protocol is two local procedures. Alice's sees only her input bits,
// her shared-randomness view, and her AlicePorts; Bob's is symmetric. The
// combined helpers below run Alice's pass first, then Bob's, over resources
// allocated once so both passes agree on the numbering.

// AND of two distributed bits. Alice holds shares (u, v); one box multiplies
// her u against Bob's v, the other her v against Bob's u; each party XORs its
// local AND with its box outcomes.
Bit and_alice(Bit u, Bit v, AlicePort box1, AlicePort box2);
Bit and_bob(Bit u, Bit v, BobPort box1, BobPort box2);

// Equality of three distributed bits: locally reduce to two comparison bits,
// then take their AND with the pair of boxes.
Bit nle_alice(Bit x0, Bit x1, Bit x2, AlicePort box1, AlicePort box2);
Bit nle_bob(Bit y0, Bit y1, Bit y2, BobPort box1, BobPort box2);

// Majority of three distributed bits: equality, then a local correction by
// the parity of the party's own inputs.
Bit nlm_alice(Bit x0, Bit x1, Bit x2, AlicePort box1, AlicePort box2);
Bit nlm_bob(Bit y0, Bit y1, Bit y2, BobPort box1, BobPort box2);

// Baseline biased guess at f: both parties read the same shared word z;
// Alice answers f(x, z), Bob answers 0 when his input equals z and a private
// coin otherwise. Succeeds with probability exactly 1/2 + 2^-(n+1) on every
// input, n being Bob's arity.
Bit base_bias_alice(const BooleanFunction& f, Word x, SharedView& shared);
Bit base_bias_bob(Word y, SharedView& shared, CoinStream& coins);

// ============================================================================
// Combined runs
// ============================================================================

DistributedBit distributed_and(ProtocolContext& ctx, DistributedBit u,
                               DistributedBit v);

DistributedBit nonlocal_equality(ProtocolContext& ctx,
                                 const std::array<Bit, 3>& x,
                                 const std::array<Bit, 3>& y);

DistributedBit nonlocal_majority(ProtocolContext& ctx,
                                 const std::array<Bit, 3>& x,
                                 const std::array<Bit, 3>& y);

DistributedBit base_bias(ProtocolContext& ctx, const BooleanFunction& f,
                         Word x, Word y);

// ============================================================================
// Amplification
// ============================================================================

struct AmplificationSpec {
  int depth = 0;  // levels of ternary majority above the leaves
  BoxModel box_model = PerfectBox{};
};

// Largest supported depth: 3^depth leaf runs must stay enumerable.
int max_amplification_depth();

// Complete ternary majority tree over 3^depth independent baseline runs,
// entirely within the given context (no communication).
DistributedBit amplify_tree(ProtocolContext& ctx, const BooleanFunction& f,
                            Word x, Word y, int depth);

struct ProtocolRun {
  DistributedBit output;
  Transcript transcript;
};

ProtocolRun amplify(const BooleanFunction& f, Word x, Word y,
                    const AmplificationSpec& spec, RandomSource& src);

struct RevealedRun {
  Bit guess;
  DistributedBit output;
  Transcript transcript;
};

// The one-bit protocol: amplify, then Bob reveals his share (the single
// communicated bit of the whole computation) and Alice outputs the XOR.
RevealedRun trivial_protocol(const BooleanFunction& f, Word x, Word y,
                             const AmplificationSpec& spec, RandomSource& src);

}  // namespace nlb
