#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nlb/boxes.hpp"
#include "nlb/circuits.hpp"
#include "nlb/core.hpp"

namespace nlb {

// ============================================================================
// Spec strings
// ============================================================================

// Box model specs:
//   perfect
//   noisy:<p>                      p in [0.5, 1]
//   classical[:<rule>,<rule>]      rules const0|const1|copy|negate
//   quantum[:<a0>,<a1>,<b0>,<b1>]  measurement angles in radians
// Omitted classical rules default to const0,const0; omitted quantum angles
// default to the canonical optimal ones. Throws ConfigError on bad specs.
BoxModel parse_model(const std::string& spec);

// Canonical spec string with explicit parameters; feeding it back through
// parse_model reproduces the model.
std::string format_model(const BoxModel& model);

// Function specs:
//   ip:<n> | eq:<n> | and2 | xor2 | random:<m>:<n>:<seed> | table:<path>
// Total arity is capped so truth tables stay desk-sized.
BooleanFunction parse_function(const std::string& spec);

// Truth-table file: '#' starts a comment; the first two tokens are the
// arities m and n, followed by 2^(m+n) 0/1 tokens indexed (x << n) | y.
BooleanFunction read_function_table(std::istream& in);
void write_function_table(std::ostream& out, const BooleanFunction& f);

// ============================================================================
// Result tables
// ============================================================================

// Schema identifiers written into every output file; readers reject files
// whose schema does not match, so format drift fails loudly.
inline constexpr const char* kSweepSchema = "nlbsim.sweep.v1";
inline constexpr const char* kIpDecaySchema = "nlbsim.ip-decay.v1";

struct SweepRow {
  double p = 0.0;
  int depth = 0;
  double analytic = 0.0;
  double sampled = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool above_threshold = false;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

// CSV: a "# schema <id>" line, a column-name line, then one row per line.
// JSON: {"schema": <id>, "rows": [...]} with one object per row. Doubles are
// written with round-trip precision in both formats, so reading an emitted
// file reproduces the rows exactly.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_sweep_json(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in);
std::vector<SweepRow> read_sweep_json(std::istream& in);

void write_ip_decay_csv(std::ostream& out, const std::vector<IpDecayRow>& rows);
void write_ip_decay_json(std::ostream& out,
                         const std::vector<IpDecayRow>& rows);
std::vector<IpDecayRow> read_ip_decay_csv(std::istream& in);
std::vector<IpDecayRow> read_ip_decay_json(std::istream& in);

// ============================================================================
// Commands
// ============================================================================

struct SweepConfig {
  double p_min = 0.86;
  double p_max = 0.96;
  double p_step = 0.01;
  std::vector<int> depths = {6};
  std::string function = "ip:2";
  uint64_t trials = 20000;
  uint64_t seed = 0;
};

// For each p on the grid and each depth: the analytic iterate of the
// amplification recurrence, the sampled success of the one-bit protocol at
// box correctness p, and whether p clears the amplification threshold. Rows
// are ordered p-major, then by depth; each row samples under a seed derived
// from (seed, row index).
std::vector<SweepRow> run_sweep(const SweepConfig& config);

struct IpDecayConfig {
  int n_max = 8;
  std::string model = "quantum";
  uint64_t trials = 20000;
  uint64_t seed = 0;
};

std::vector<IpDecayRow> run_ip_decay(const IpDecayConfig& config);

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;  // measured vs expected values
};

// The cross-module invariant suite behind `nlbsim verify`; sampled checks
// scale with trials and derive their randomness from seed.
std::vector<VerifyCheck> run_verify(uint64_t trials, uint64_t seed);

// Entry point shared by the binary and the tests. args are the command-line
// arguments without the program name. Results go to out (or the --out file),
// diagnostics to err. Returns 0 on success, 1 when a verification check
// fails, 2 on bad configuration.
int run_cli(std::vector<std::string> args, std::ostream& out,
            std::ostream& err);

}  // namespace nlb
