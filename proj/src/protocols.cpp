#include "nlb/protocols.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nlb {

// ============================================================================
// Protocol context
// ============================================================================

void ProtocolContext::reset() {
  boxes_.clear();
  streams_.clear();
  coins_.clear();
  next_box_ = 0;
  next_stream_ = 0;
  next_coin_ = 0;
  transcript_ = Transcript{};
}

BoxInstance& ProtocolContext::new_box() {
  return boxes_.emplace(behavior_, next_box_++, *src_, &transcript_);
}

SharedRandomness& ProtocolContext::new_shared_stream(uint64_t word_bound) {
  return streams_.emplace(*src_, next_stream_++, word_bound);
}

CoinStream& ProtocolContext::new_coin_stream() {
  return coins_.emplace(*src_, next_coin_++);
}

Transcript ProtocolContext::finish() {
  streams_.for_each([this](const SharedRandomness& s) {
    for (size_t i = 0; i < s.words_consumed(); ++i) {
      transcript_.record_shared_word();
    }
  });
  return transcript_;
}

// ============================================================================
// Per-party strategies
// ============================================================================

Bit and_alice(Bit u, Bit v, AlicePort box1, AlicePort box2) {
  const Bit c1 = box1.put(u);
  const Bit c2 = box2.put(v);
  return (u & v) ^ c1 ^ c2;
}

Bit and_bob(Bit u, Bit v, BobPort box1, BobPort box2) {
  const Bit c1 = box1.put(v);
  const Bit c2 = box2.put(u);
  return (u & v) ^ c1 ^ c2;
}

Bit nle_alice(Bit x0, Bit x1, Bit x2, AlicePort box1, AlicePort box2) {
  const Bit xp = ~x0 ^ x1;   // compares distributed bits 0 and 1
  const Bit xpp = ~x1 ^ x2;  // compares distributed bits 1 and 2
  return and_alice(xp, xpp, box1, box2);
}

Bit nle_bob(Bit y0, Bit y1, Bit y2, BobPort box1, BobPort box2) {
  const Bit yp = y0 ^ y1;
  const Bit ypp = y1 ^ y2;
  return and_bob(yp, ypp, box1, box2);
}

Bit nlm_alice(Bit x0, Bit x1, Bit x2, AlicePort box1, AlicePort box2) {
  const Bit eq = nle_alice(x0, x1, x2, box1, box2);
  return ~eq ^ x0 ^ x1 ^ x2;
}

Bit nlm_bob(Bit y0, Bit y1, Bit y2, BobPort box1, BobPort box2) {
  const Bit eq = nle_bob(y0, y1, y2, box1, box2);
  return eq ^ y0 ^ y1 ^ y2;
}

Bit base_bias_alice(const BooleanFunction& f, Word x, SharedView& shared) {
  const Word z = static_cast<Word>(shared.next());
  return f.eval(x, z);
}

Bit base_bias_bob(Word y, SharedView& shared, CoinStream& coins) {
  const Word z = static_cast<Word>(shared.next());
  if (z == y) return Bit(false);
  return coins.next();
}

// ============================================================================
// Combined runs
// ============================================================================

DistributedBit distributed_and(ProtocolContext& ctx, DistributedBit u,
                               DistributedBit v) {
  BoxInstance& box1 = ctx.new_box();
  BoxInstance& box2 = ctx.new_box();
  const Bit a = and_alice(u.alice, v.alice, AlicePort(box1), AlicePort(box2));
  const Bit b = and_bob(u.bob, v.bob, BobPort(box1), BobPort(box2));
  return DistributedBit{a, b};
}

DistributedBit nonlocal_equality(ProtocolContext& ctx,
                                 const std::array<Bit, 3>& x,
                                 const std::array<Bit, 3>& y) {
  BoxInstance& box1 = ctx.new_box();
  BoxInstance& box2 = ctx.new_box();
  const Bit a =
      nle_alice(x[0], x[1], x[2], AlicePort(box1), AlicePort(box2));
  const Bit b = nle_bob(y[0], y[1], y[2], BobPort(box1), BobPort(box2));
  return DistributedBit{a, b};
}

DistributedBit nonlocal_majority(ProtocolContext& ctx,
                                 const std::array<Bit, 3>& x,
                                 const std::array<Bit, 3>& y) {
  BoxInstance& box1 = ctx.new_box();
  BoxInstance& box2 = ctx.new_box();
  const Bit a =
      nlm_alice(x[0], x[1], x[2], AlicePort(box1), AlicePort(box2));
  const Bit b = nlm_bob(y[0], y[1], y[2], BobPort(box1), BobPort(box2));
  return DistributedBit{a, b};
}

namespace {

void check_input_range(const BooleanFunction& f, Word x, Word y) {
  if ((x >> f.alice_arity()) != 0 || (y >> f.bob_arity()) != 0) {
    throw DomainError("protocol input outside the function's input space");
  }
}

}  // namespace

DistributedBit base_bias(ProtocolContext& ctx, const BooleanFunction& f,
                         Word x, Word y) {
  check_input_range(f, x, y);
  SharedRandomness& stream =
      ctx.new_shared_stream(uint64_t{1} << f.bob_arity());
  CoinStream& coins = ctx.new_coin_stream();

  SharedView alice_view(stream);
  const Bit a = base_bias_alice(f, x, alice_view);

  SharedView bob_view(stream);
  const Bit b = base_bias_bob(y, bob_view, coins);

  return DistributedBit{a, b};
}

// ============================================================================
// Amplification
// ============================================================================

int max_amplification_depth() { return 15; }  // 3^15 leaves ~ 1.4e7

namespace {

// Node boxes of the majority tree in pre-order. Alice's pass creates them
// and Bob's pass replays them by position, so both parties agree on the
// numbering without a separate allocation walk.
using NodeBoxes = std::vector<std::pair<BoxInstance*, BoxInstance*>>;

Bit tree_alice(ProtocolContext& ctx, NodeBoxes& nodes,
               const BooleanFunction& f, Word x, int depth,
               SharedView& shared) {
  if (depth == 0) return base_bias_alice(f, x, shared);
  BoxInstance& box1 = ctx.new_box();
  BoxInstance& box2 = ctx.new_box();
  nodes.emplace_back(&box1, &box2);
  const Bit u = tree_alice(ctx, nodes, f, x, depth - 1, shared);
  const Bit v = tree_alice(ctx, nodes, f, x, depth - 1, shared);
  const Bit w = tree_alice(ctx, nodes, f, x, depth - 1, shared);
  return nlm_alice(u, v, w, AlicePort(box1), AlicePort(box2));
}

Bit tree_bob(const NodeBoxes& nodes, Word y, int depth, size_t& node,
             SharedView& shared, CoinStream& coins) {
  if (depth == 0) return base_bias_bob(y, shared, coins);
  const auto [box1, box2] = nodes[node++];
  const Bit u = tree_bob(nodes, y, depth - 1, node, shared, coins);
  const Bit v = tree_bob(nodes, y, depth - 1, node, shared, coins);
  const Bit w = tree_bob(nodes, y, depth - 1, node, shared, coins);
  return nlm_bob(u, v, w, BobPort(*box1), BobPort(*box2));
}

}  // namespace

DistributedBit amplify_tree(ProtocolContext& ctx, const BooleanFunction& f,
                            Word x, Word y, int depth) {
  if (depth < 0) throw DomainError("amplification depth must be >= 0");
  if (depth > max_amplification_depth()) {
    throw BudgetError("amplification depth " + std::to_string(depth) +
                      " exceeds the supported maximum " +
                      std::to_string(max_amplification_depth()));
  }
  check_input_range(f, x, y);

  uint64_t leaves = 1;
  for (int d = 0; d < depth; ++d) leaves *= 3;

  // One shared tape and one private coin tape serve every leaf: each party
  // reads the tape left to right across its own pass, so both parties see
  // the same word at the same leaf.
  SharedRandomness& stream =
      ctx.new_shared_stream(uint64_t{1} << f.bob_arity());
  CoinStream& coins = ctx.new_coin_stream();

  NodeBoxes nodes;
  nodes.reserve((leaves - 1) / 2);

  SharedView alice_view(stream);
  const Bit a = tree_alice(ctx, nodes, f, x, depth, alice_view);

  SharedView bob_view(stream);
  size_t node = 0;
  const Bit b = tree_bob(nodes, y, depth, node, bob_view, coins);

  return DistributedBit{a, b};
}

ProtocolRun amplify(const BooleanFunction& f, Word x, Word y,
                    const AmplificationSpec& spec, RandomSource& src) {
  ProtocolContext ctx(src, spec.box_model);
  const DistributedBit out = amplify_tree(ctx, f, x, y, spec.depth);
  return ProtocolRun{out, ctx.finish()};
}

RevealedRun trivial_protocol(const BooleanFunction& f, Word x, Word y,
                             const AmplificationSpec& spec,
                             RandomSource& src) {
  ProtocolContext ctx(src, spec.box_model);
  const DistributedBit out = amplify_tree(ctx, f, x, y, spec.depth);
  // Bob sends his share; this is the protocol's only communication.
  ctx.transcript().begin_reveal();
  ctx.transcript().record_communicated_bit();
  const Bit guess = out.alice ^ out.bob;
  return RevealedRun{guess, out, ctx.finish()};
}

}  // namespace nlb
