#pragma once

#include <string>
#include <vector>

#include "nlb/boxes.hpp"
#include "nlb/core.hpp"
#include "nlb/protocols.hpp"

namespace nlb {

// ============================================================================
// Distributed circuits
// ============================================================================

// An input wire carries a distributed bit assembled from the parties' input
// words: Alice's share is her bit alice_bit (0 if absent), Bob's share is his
// bit bob_bit (0 if absent). Indices of -1 mean "no contribution".
struct InputWire {
  int alice_bit = -1;
  int bob_bit = -1;
};

enum class GateOp : uint8_t { kNot, kXor, kAnd };

struct Gate {
  GateOp op;
  int a = -1;
  int b = -1;  // unused (-1) for NOT
};

// A combinational circuit over distributed bits. NOT and XOR act on shares
// locally and exactly; AND is the box-backed noisy resource. Wires are
// numbered with the input wires first, then one wire per gate in order.
class DistributedCircuit {
 public:
  DistributedCircuit(int alice_arity, int bob_arity,
                     std::vector<InputWire> inputs, std::vector<Gate> gates,
                     int output_wire);

  int alice_arity() const { return m_; }
  int bob_arity() const { return n_; }
  const std::vector<InputWire>& inputs() const { return inputs_; }
  const std::vector<Gate>& gates() const { return gates_; }
  int output_wire() const { return output_; }
  size_t wire_count() const { return inputs_.size() + gates_.size(); }
  size_t and_count() const;

  // Exact Boolean value, ignoring boxes and noise.
  Bit value(Word x, Word y) const;

  // Line-oriented text form; from_text(to_text()) reproduces the circuit.
  // Grammar (one item per line, '#' starts a comment):
  //   circuit v1
  //   alice <m>
  //   bob <n>
  //   input w<k> [alice <i>] [bob <j>]
  //   AND w<i> w<j> -> w<k>   |   XOR w<i> w<j> -> w<k>   |   NOT w<i> -> w<k>
  //   output w<k>
  // Wires must be introduced in order w0, w1, ...; inputs come first.
  std::string to_text() const;
  static DistributedCircuit from_text(const std::string& text);

 private:
  int m_;
  int n_;
  std::vector<InputWire> inputs_;
  std::vector<Gate> gates_;
  int output_;
};

// Inner product of two n-bit words: n AND gates combined by an XOR chain.
DistributedCircuit build_ip_circuit(int n);

// Box-backed evaluation: allocates two boxes per AND gate from the context,
// runs Alice's share pass, then Bob's.
DistributedBit eval_circuit(const DistributedCircuit& c, Word x, Word y,
                            ProtocolContext& ctx);

// ============================================================================
// Inner-product decay experiment
// ============================================================================

struct IpDecayRow {
  int n = 0;
  bool exact = false;   // true: enumeration; false: sampled
  double success = 0.0;
  double ci_low = 0.0;  // equal to success for exact rows
  double ci_high = 0.0;
  double analytic = 0.0;

  friend bool operator==(const IpDecayRow&, const IpDecayRow&) = default;
};

// Success of the inner-product circuit against input length, exact up to
// exact_limit and sampled beyond, with the gate-composition curve alongside.
std::vector<IpDecayRow> ip_decay_experiment(int n_max, const BoxModel& model,
                                            uint64_t trials, uint64_t seed,
                                            int exact_limit = 3);

}  // namespace nlb
