#include "nlb/circuits.hpp"

#include <sstream>
#include <string>

namespace nlb {

// ============================================================================
// Construction and validation
// ============================================================================

DistributedCircuit::DistributedCircuit(int alice_arity, int bob_arity,
                                       std::vector<InputWire> inputs,
                                       std::vector<Gate> gates,
                                       int output_wire)
    : m_(alice_arity),
      n_(bob_arity),
      inputs_(std::move(inputs)),
      gates_(std::move(gates)),
      output_(output_wire) {
  if (m_ < 0 || m_ > BooleanFunction::kMaxArity || n_ < 0 ||
      n_ > BooleanFunction::kMaxArity) {
    throw DomainError("circuit arity outside [0, " +
                      std::to_string(BooleanFunction::kMaxArity) + "]");
  }
  for (const InputWire& w : inputs_) {
    if (w.alice_bit < -1 || w.alice_bit >= m_ || w.bob_bit < -1 ||
        w.bob_bit >= n_) {
      throw DomainError("input wire references a bit outside the arity");
    }
  }
  for (size_t g = 0; g < gates_.size(); ++g) {
    const Gate& gate = gates_[g];
    const int defined_before = static_cast<int>(inputs_.size() + g);
    const bool unary = gate.op == GateOp::kNot;
    if (gate.a < 0 || gate.a >= defined_before) {
      throw DomainError("gate reads wire w" + std::to_string(gate.a) +
                        " before its definition");
    }
    if (unary) {
      if (gate.b != -1) throw DomainError("NOT gate takes one operand");
    } else if (gate.b < 0 || gate.b >= defined_before) {
      throw DomainError("gate reads wire w" + std::to_string(gate.b) +
                        " before its definition");
    }
  }
  if (output_ < 0 || static_cast<size_t>(output_) >= wire_count()) {
    throw DomainError("output wire w" + std::to_string(output_) +
                      " is not defined");
  }
}

size_t DistributedCircuit::and_count() const {
  size_t count = 0;
  for (const Gate& g : gates_) {
    if (g.op == GateOp::kAnd) ++count;
  }
  return count;
}

Bit DistributedCircuit::value(Word x, Word y) const {
  std::vector<Bit> wire(wire_count());
  for (size_t i = 0; i < inputs_.size(); ++i) {
    const Bit ax =
        inputs_[i].alice_bit >= 0 ? word_bit(x, inputs_[i].alice_bit) : Bit();
    const Bit by =
        inputs_[i].bob_bit >= 0 ? word_bit(y, inputs_[i].bob_bit) : Bit();
    wire[i] = ax ^ by;
  }
  for (size_t g = 0; g < gates_.size(); ++g) {
    const Gate& gate = gates_[g];
    Bit out;
    switch (gate.op) {
      case GateOp::kNot:
        out = ~wire[static_cast<size_t>(gate.a)];
        break;
      case GateOp::kXor:
        out = wire[static_cast<size_t>(gate.a)] ^
              wire[static_cast<size_t>(gate.b)];
        break;
      case GateOp::kAnd:
        out = wire[static_cast<size_t>(gate.a)] &
              wire[static_cast<size_t>(gate.b)];
        break;
    }
    wire[inputs_.size() + g] = out;
  }
  return wire[static_cast<size_t>(output_)];
}

// ============================================================================
// Text form
// ============================================================================

std::string DistributedCircuit::to_text() const {
  std::ostringstream out;
  out << "circuit v1\n";
  out << "alice " << m_ << "\n";
  out << "bob " << n_ << "\n";
  for (size_t i = 0; i < inputs_.size(); ++i) {
    out << "input w" << i;
    if (inputs_[i].alice_bit >= 0) out << " alice " << inputs_[i].alice_bit;
    if (inputs_[i].bob_bit >= 0) out << " bob " << inputs_[i].bob_bit;
    out << "\n";
  }
  for (size_t g = 0; g < gates_.size(); ++g) {
    const Gate& gate = gates_[g];
    const size_t target = inputs_.size() + g;
    switch (gate.op) {
      case GateOp::kNot:
        out << "NOT w" << gate.a << " -> w" << target << "\n";
        break;
      case GateOp::kXor:
        out << "XOR w" << gate.a << " w" << gate.b << " -> w" << target
            << "\n";
        break;
      case GateOp::kAnd:
        out << "AND w" << gate.a << " w" << gate.b << " -> w" << target
            << "\n";
        break;
    }
  }
  out << "output w" << output_ << "\n";
  return out.str();
}

namespace {

[[noreturn]] void parse_fail(size_t line_no, const std::string& why) {
  throw ParseError("circuit text line " + std::to_string(line_no) + ": " +
                   why);
}

int parse_wire(const std::string& token, size_t line_no) {
  if (token.size() < 2 || token[0] != 'w') {
    parse_fail(line_no, "expected a wire id, got '" + token + "'");
  }
  try {
    size_t used = 0;
    const int id = std::stoi(token.substr(1), &used);
    if (used != token.size() - 1 || id < 0) throw std::invalid_argument("");
    return id;
  } catch (const std::exception&) {
    parse_fail(line_no, "bad wire id '" + token + "'");
  }
}

int parse_int(const std::string& token, size_t line_no) {
  try {
    size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    parse_fail(line_no, "expected an integer, got '" + token + "'");
  }
}

}  // namespace

DistributedCircuit DistributedCircuit::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;

  bool saw_header = false;
  int m = -1;
  int n = -1;
  std::vector<InputWire> inputs;
  std::vector<Gate> gates;
  int output = -1;
  bool saw_output = false;
  int next_wire = 0;

  auto expect_new_wire = [&](int id, size_t at) {
    if (id != next_wire) {
      parse_fail(at, "wires must be introduced in order; expected w" +
                         std::to_string(next_wire) + ", got w" +
                         std::to_string(id));
    }
    ++next_wire;
  };

  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string word;
    std::vector<std::string> tok;
    while (tokens >> word) tok.push_back(word);
    if (tok.empty()) continue;

    if (!saw_header) {
      if (tok.size() != 2 || tok[0] != "circuit" || tok[1] != "v1") {
        parse_fail(line_no, "expected header 'circuit v1'");
      }
      saw_header = true;
      continue;
    }
    if (saw_output) parse_fail(line_no, "content after the output line");

    if (tok[0] == "alice" || tok[0] == "bob") {
      if (tok.size() != 2) parse_fail(line_no, "expected '" + tok[0] + " <arity>'");
      int& slot = tok[0] == "alice" ? m : n;
      if (slot >= 0) parse_fail(line_no, "duplicate " + tok[0] + " arity");
      slot = parse_int(tok[1], line_no);
    } else if (tok[0] == "input") {
      if (m < 0 || n < 0) parse_fail(line_no, "arities must precede inputs");
      if (!gates.empty()) parse_fail(line_no, "inputs must precede gates");
      if (tok.size() < 2) parse_fail(line_no, "expected 'input w<k> ...'");
      expect_new_wire(parse_wire(tok[1], line_no), line_no);
      InputWire wire;
      size_t i = 2;
      while (i < tok.size()) {
        if (i + 1 >= tok.size()) {
          parse_fail(line_no, "dangling input qualifier '" + tok[i] + "'");
        }
        if (tok[i] == "alice" && wire.alice_bit < 0) {
          wire.alice_bit = parse_int(tok[i + 1], line_no);
        } else if (tok[i] == "bob" && wire.bob_bit < 0) {
          wire.bob_bit = parse_int(tok[i + 1], line_no);
        } else {
          parse_fail(line_no, "bad input qualifier '" + tok[i] + "'");
        }
        i += 2;
      }
      inputs.push_back(wire);
    } else if (tok[0] == "AND" || tok[0] == "XOR" || tok[0] == "NOT") {
      if (m < 0 || n < 0) parse_fail(line_no, "arities must precede gates");
      Gate gate;
      if (tok[0] == "NOT") {
        if (tok.size() != 4 || tok[2] != "->") {
          parse_fail(line_no, "expected 'NOT w<i> -> w<k>'");
        }
        gate.op = GateOp::kNot;
        gate.a = parse_wire(tok[1], line_no);
        expect_new_wire(parse_wire(tok[3], line_no), line_no);
      } else {
        if (tok.size() != 5 || tok[3] != "->") {
          parse_fail(line_no,
                     "expected '" + tok[0] + " w<i> w<j> -> w<k>'");
        }
        gate.op = tok[0] == "AND" ? GateOp::kAnd : GateOp::kXor;
        gate.a = parse_wire(tok[1], line_no);
        gate.b = parse_wire(tok[2], line_no);
        expect_new_wire(parse_wire(tok[4], line_no), line_no);
      }
      gates.push_back(gate);
    } else if (tok[0] == "output") {
      if (tok.size() != 2) parse_fail(line_no, "expected 'output w<k>'");
      output = parse_wire(tok[1], line_no);
      saw_output = true;
    } else {
      parse_fail(line_no, "unknown directive '" + tok[0] + "'");
    }
  }

  if (!saw_header) throw ParseError("circuit text is empty");
  if (m < 0 || n < 0) throw ParseError("circuit text is missing arities");
  if (!saw_output) throw ParseError("circuit text is missing an output line");
  try {
    return DistributedCircuit(m, n, std::move(inputs), std::move(gates),
                              output);
  } catch (const DomainError& e) {
    throw ParseError(std::string("circuit text invalid: ") + e.what());
  }
}

// ============================================================================
// Builders and evaluation
// ============================================================================

DistributedCircuit build_ip_circuit(int n) {
  if (n < 1 || n > BooleanFunction::kMaxArity) {
    throw DomainError("inner-product length outside [1, " +
                      std::to_string(BooleanFunction::kMaxArity) + "]");
  }
  std::vector<InputWire> inputs;
  inputs.reserve(static_cast<size_t>(2 * n));
  for (int i = 0; i < n; ++i) {
    inputs.push_back(InputWire{i, -1});
    inputs.push_back(InputWire{-1, i});
  }
  std::vector<Gate> gates;
  for (int i = 0; i < n; ++i) {
    gates.push_back(Gate{GateOp::kAnd, 2 * i, 2 * i + 1});
  }
  // XOR chain over the AND outputs; wires 2n .. 3n-1 are the products.
  int acc = 2 * n;
  for (int i = 1; i < n; ++i) {
    const int next = 2 * n + n + (i - 1);
    gates.push_back(Gate{GateOp::kXor, acc, 2 * n + i});
    acc = next;
  }
  return DistributedCircuit(n, n, std::move(inputs), std::move(gates), acc);
}

DistributedBit eval_circuit(const DistributedCircuit& c, Word x, Word y,
                            ProtocolContext& ctx) {
  if ((x >> c.alice_arity()) != 0 || (y >> c.bob_arity()) != 0) {
    throw DomainError("circuit input outside the declared arity");
  }
  // Two boxes per AND gate, allocated in gate order before either pass.
  std::vector<std::pair<BoxInstance*, BoxInstance*>> and_boxes;
  and_boxes.reserve(c.and_count());
  for (const Gate& g : c.gates()) {
    if (g.op == GateOp::kAnd) {
      BoxInstance* first = &ctx.new_box();
      BoxInstance* second = &ctx.new_box();
      and_boxes.emplace_back(first, second);
    }
  }

  const auto& inputs = c.inputs();
  const auto& gates = c.gates();

  std::vector<Bit> alice(c.wire_count());
  size_t and_cursor = 0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    alice[i] = inputs[i].alice_bit >= 0 ? word_bit(x, inputs[i].alice_bit)
                                        : Bit();
  }
  for (size_t g = 0; g < gates.size(); ++g) {
    const Gate& gate = gates[g];
    const size_t target = inputs.size() + g;
    switch (gate.op) {
      case GateOp::kNot:
        // Alice carries the negation; Bob leaves his share unchanged.
        alice[target] = ~alice[static_cast<size_t>(gate.a)];
        break;
      case GateOp::kXor:
        alice[target] = alice[static_cast<size_t>(gate.a)] ^
                        alice[static_cast<size_t>(gate.b)];
        break;
      case GateOp::kAnd: {
        const auto [box1, box2] = and_boxes[and_cursor++];
        alice[target] =
            and_alice(alice[static_cast<size_t>(gate.a)],
                      alice[static_cast<size_t>(gate.b)], AlicePort(*box1),
                      AlicePort(*box2));
        break;
      }
    }
  }

  std::vector<Bit> bob(c.wire_count());
  and_cursor = 0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    bob[i] = inputs[i].bob_bit >= 0 ? word_bit(y, inputs[i].bob_bit) : Bit();
  }
  for (size_t g = 0; g < gates.size(); ++g) {
    const Gate& gate = gates[g];
    const size_t target = inputs.size() + g;
    switch (gate.op) {
      case GateOp::kNot:
        bob[target] = bob[static_cast<size_t>(gate.a)];
        break;
      case GateOp::kXor:
        bob[target] = bob[static_cast<size_t>(gate.a)] ^
                      bob[static_cast<size_t>(gate.b)];
        break;
      case GateOp::kAnd: {
        const auto [box1, box2] = and_boxes[and_cursor++];
        bob[target] = and_bob(bob[static_cast<size_t>(gate.a)],
                              bob[static_cast<size_t>(gate.b)],
                              BobPort(*box1), BobPort(*box2));
        break;
      }
    }
  }

  return DistributedBit{alice[static_cast<size_t>(c.output_wire())],
                        bob[static_cast<size_t>(c.output_wire())]};
}

}  // namespace nlb
