#include "nlb/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlb/analysis.hpp"
#include "nlb/engines.hpp"
#include "nlb/protocols.hpp"

namespace nlb {

namespace {

// Past this total arity a truth table stops being desk-sized (2^26 bits is
// 8 MiB); circuit-backed experiments are the tool for wider functions.
constexpr int kMaxTableArity = 26;

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> parts;
  std::string current;
  for (const char c : s) {
    if (c == delim) {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

double parse_spec_double(const std::string& token, const std::string& what) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(what + ": '" + token + "' is not a number");
  }
  return value;
}

int64_t parse_spec_int(const std::string& token, const std::string& what) {
  int64_t value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(what + ": '" + token + "' is not an integer");
  }
  return value;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

// ============================================================================
// Spec strings
// ============================================================================

BoxModel parse_model(const std::string& spec) {
  const size_t colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest =
      colon == std::string::npos ? std::string{} : spec.substr(colon + 1);

  if (head == "perfect") {
    if (colon != std::string::npos) {
      throw ConfigError("model 'perfect' takes no parameters");
    }
    return PerfectBox{};
  }
  if (head == "noisy") {
    if (colon == std::string::npos) {
      throw ConfigError("model 'noisy' needs a correctness, e.g. noisy:0.9");
    }
    const double p = parse_spec_double(rest, "model 'noisy'");
    if (!(p >= 0.5 && p <= 1.0)) {
      throw ConfigError("model 'noisy': correctness must lie in [0.5, 1]");
    }
    return NoisyBox{p};
  }
  if (head == "classical") {
    if (colon == std::string::npos) return LocalDeterministicBox{};
    const std::vector<std::string> rules = split(rest, ',');
    if (rules.size() != 2) {
      throw ConfigError(
          "model 'classical' takes two rules, e.g. classical:copy,negate");
    }
    try {
      return LocalDeterministicBox{parse_rule(rules[0]), parse_rule(rules[1])};
    } catch (const Error& e) {
      throw ConfigError(std::string("model 'classical': ") + e.what());
    }
  }
  if (head == "quantum") {
    if (colon == std::string::npos) return canonical_chsh_angles();
    const std::vector<std::string> angles = split(rest, ',');
    if (angles.size() != 4) {
      throw ConfigError(
          "model 'quantum' takes four angles, e.g. quantum:0,0.785,0.393,-0.393");
    }
    QuantumStrategyBox q;
    q.alice0 = parse_spec_double(angles[0], "model 'quantum'");
    q.alice1 = parse_spec_double(angles[1], "model 'quantum'");
    q.bob0 = parse_spec_double(angles[2], "model 'quantum'");
    q.bob1 = parse_spec_double(angles[3], "model 'quantum'");
    return q;
  }
  throw ConfigError("unknown box model '" + spec +
                    "' (expected perfect | noisy:<p> | classical[:rules] | "
                    "quantum[:angles])");
}

std::string format_model(const BoxModel& model) {
  if (std::holds_alternative<PerfectBox>(model)) return "perfect";
  if (const auto* noisy = std::get_if<NoisyBox>(&model)) {
    return "noisy:" + fmt_double(noisy->p);
  }
  if (const auto* local = std::get_if<LocalDeterministicBox>(&model)) {
    return std::string("classical:") + rule_name(local->alice) + "," +
           rule_name(local->bob);
  }
  const auto& q = std::get<QuantumStrategyBox>(model);
  return "quantum:" + fmt_double(q.alice0) + "," + fmt_double(q.alice1) + "," +
         fmt_double(q.bob0) + "," + fmt_double(q.bob1);
}

namespace {

int parse_arity(const std::string& token, const std::string& what) {
  const int64_t n = parse_spec_int(token, what);
  if (n < 1 || n > BooleanFunction::kMaxArity) {
    throw ConfigError(what + ": arity must lie in [1, " +
                      std::to_string(BooleanFunction::kMaxArity) + "]");
  }
  return static_cast<int>(n);
}

void check_table_arity(int m, int n, const std::string& what) {
  if (m + n > kMaxTableArity) {
    throw ConfigError(what + ": total arity " + std::to_string(m + n) +
                      " exceeds the table limit of " +
                      std::to_string(kMaxTableArity) + " bits of input");
  }
}

}  // namespace

BooleanFunction parse_function(const std::string& spec) {
  const std::vector<std::string> parts = split(spec, ':');
  const std::string& head = parts[0];

  if (head == "and2" && parts.size() == 1) return and2();
  if (head == "xor2" && parts.size() == 1) return xor2();
  if (head == "ip" && parts.size() == 2) {
    const int n = parse_arity(parts[1], "function 'ip'");
    check_table_arity(n, n, "function 'ip'");
    return inner_product(n);
  }
  if (head == "eq" && parts.size() == 2) {
    const int n = parse_arity(parts[1], "function 'eq'");
    check_table_arity(n, n, "function 'eq'");
    return equality(n);
  }
  if (head == "random" && parts.size() == 4) {
    const int m = parse_arity(parts[1], "function 'random'");
    const int n = parse_arity(parts[2], "function 'random'");
    check_table_arity(m, n, "function 'random'");
    const int64_t seed = parse_spec_int(parts[3], "function 'random'");
    return random_function(m, n, static_cast<uint64_t>(seed));
  }
  if (head == "table" && parts.size() == 2) {
    std::ifstream file(parts[1]);
    if (!file) {
      throw ConfigError("function 'table': cannot open '" + parts[1] + "'");
    }
    return read_function_table(file);
  }
  throw ConfigError("unknown function '" + spec +
                    "' (expected ip:<n> | eq:<n> | and2 | xor2 | "
                    "random:<m>:<n>:<seed> | table:<path>)");
}

namespace {

// Pulls whitespace-separated tokens, skipping '#' comments to end of line.
bool next_table_token(std::istream& in, std::string& token) {
  while (in >> token) {
    if (token[0] != '#') return true;
    std::string rest;
    std::getline(in, rest);
  }
  return false;
}

}  // namespace

BooleanFunction read_function_table(std::istream& in) {
  std::string token;
  int m = 0;
  int n = 0;
  try {
    if (!next_table_token(in, token)) {
      throw ParseError("table file: missing arities");
    }
    m = parse_arity(token, "table file");
    if (!next_table_token(in, token)) {
      throw ParseError("table file: missing second arity");
    }
    n = parse_arity(token, "table file");
    check_table_arity(m, n, "table file");
  } catch (const ConfigError& e) {
    // Inside a file these are content problems, not configuration problems.
    throw ParseError(e.what());
  }

  const uint64_t size = uint64_t{1} << (m + n);
  std::vector<uint8_t> table(size);
  for (uint64_t i = 0; i < size; ++i) {
    if (!next_table_token(in, token)) {
      throw ParseError("table file: expected " + std::to_string(size) +
                       " entries, found " + std::to_string(i));
    }
    if (token == "0") {
      table[i] = 0;
    } else if (token == "1") {
      table[i] = 1;
    } else {
      throw ParseError("table file: entry " + std::to_string(i) + " is '" +
                       token + "', expected 0 or 1");
    }
  }
  if (next_table_token(in, token)) {
    throw ParseError("table file: trailing content '" + token + "'");
  }
  return make_function(table, m, n);
}

void write_function_table(std::ostream& out, const BooleanFunction& f) {
  const int m = f.alice_arity();
  const int n = f.bob_arity();
  out << "# truth table, entries indexed (x << " << n << ") | y\n"
      << m << ' ' << n << '\n';
  for (Word x = 0; x < (Word{1} << m); ++x) {
    for (Word y = 0; y < (Word{1} << n); ++y) {
      out << (y == 0 ? "" : " ") << int(f.eval(x, y).value());
    }
    out << '\n';
  }
}

// ============================================================================
// Result tables
// ============================================================================

namespace {

constexpr const char* kSweepColumns =
    "p,depth,analytic,sampled,ci_low,ci_high,above_threshold";
constexpr const char* kIpDecayColumns =
    "n,exact,success,ci_low,ci_high,analytic";

void read_schema_line(std::istream& in, const std::string& schema) {
  std::string line;
  if (!std::getline(in, line) || line != "# schema " + schema) {
    throw ParseError("expected '# schema " + schema + "', got '" + line + "'");
  }
}

void read_header_line(std::istream& in, const std::string& columns) {
  std::string line;
  if (!std::getline(in, line) || line != columns) {
    throw ParseError("expected header '" + columns + "', got '" + line + "'");
  }
}

std::vector<std::string> csv_fields(const std::string& line, size_t expected,
                                    size_t row) {
  const std::vector<std::string> fields = split(line, ',');
  if (fields.size() != expected) {
    throw ParseError("row " + std::to_string(row) + ": expected " +
                     std::to_string(expected) + " fields, got " +
                     std::to_string(fields.size()));
  }
  return fields;
}

double csv_double(const std::string& token, size_t row) {
  try {
    return parse_spec_double(token, "row " + std::to_string(row));
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
}

int csv_int(const std::string& token, size_t row) {
  try {
    return static_cast<int>(
        parse_spec_int(token, "row " + std::to_string(row)));
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
}

bool csv_flag(const std::string& token, size_t row) {
  if (token == "0") return false;
  if (token == "1") return true;
  throw ParseError("row " + std::to_string(row) + ": flag is '" + token +
                   "', expected 0 or 1");
}

nlohmann::json parse_json(std::istream& in) {
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad JSON: ") + e.what());
  }
}

const nlohmann::json& json_rows(const nlohmann::json& doc,
                                const std::string& schema) {
  if (!doc.is_object() || !doc.contains("schema") ||
      doc.at("schema") != schema) {
    throw ParseError("expected JSON document with schema '" + schema + "'");
  }
  if (!doc.contains("rows") || !doc.at("rows").is_array()) {
    throw ParseError("JSON document has no 'rows' array");
  }
  return doc.at("rows");
}

template <typename T>
T json_field(const nlohmann::json& row, const char* name) {
  try {
    return row.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad row field '") + name + "': " + e.what());
  }
}

}  // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "# schema " << kSweepSchema << '\n' << kSweepColumns << '\n';
  for (const SweepRow& r : rows) {
    out << fmt_double(r.p) << ',' << r.depth << ',' << fmt_double(r.analytic)
        << ',' << fmt_double(r.sampled) << ',' << fmt_double(r.ci_low) << ','
        << fmt_double(r.ci_high) << ',' << (r.above_threshold ? 1 : 0) << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  read_schema_line(in, kSweepSchema);
  read_header_line(in, kSweepColumns);
  std::vector<SweepRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t idx = rows.size();
    const std::vector<std::string> f = csv_fields(line, 7, idx);
    SweepRow r;
    r.p = csv_double(f[0], idx);
    r.depth = csv_int(f[1], idx);
    r.analytic = csv_double(f[2], idx);
    r.sampled = csv_double(f[3], idx);
    r.ci_low = csv_double(f[4], idx);
    r.ci_high = csv_double(f[5], idx);
    r.above_threshold = csv_flag(f[6], idx);
    rows.push_back(r);
  }
  return rows;
}

void write_sweep_json(std::ostream& out, const std::vector<SweepRow>& rows) {
  nlohmann::json doc;
  doc["schema"] = kSweepSchema;
  doc["rows"] = nlohmann::json::array();
  for (const SweepRow& r : rows) {
    doc["rows"].push_back({{"p", r.p},
                           {"depth", r.depth},
                           {"analytic", r.analytic},
                           {"sampled", r.sampled},
                           {"ci_low", r.ci_low},
                           {"ci_high", r.ci_high},
                           {"above_threshold", r.above_threshold}});
  }
  out << doc.dump(2) << '\n';
}

std::vector<SweepRow> read_sweep_json(std::istream& in) {
  const nlohmann::json doc = parse_json(in);
  std::vector<SweepRow> rows;
  for (const nlohmann::json& row : json_rows(doc, kSweepSchema)) {
    SweepRow r;
    r.p = json_field<double>(row, "p");
    r.depth = json_field<int>(row, "depth");
    r.analytic = json_field<double>(row, "analytic");
    r.sampled = json_field<double>(row, "sampled");
    r.ci_low = json_field<double>(row, "ci_low");
    r.ci_high = json_field<double>(row, "ci_high");
    r.above_threshold = json_field<bool>(row, "above_threshold");
    rows.push_back(r);
  }
  return rows;
}

void write_ip_decay_csv(std::ostream& out,
                        const std::vector<IpDecayRow>& rows) {
  out << "# schema " << kIpDecaySchema << '\n' << kIpDecayColumns << '\n';
  for (const IpDecayRow& r : rows) {
    out << r.n << ',' << (r.exact ? 1 : 0) << ',' << fmt_double(r.success)
        << ',' << fmt_double(r.ci_low) << ',' << fmt_double(r.ci_high) << ','
        << fmt_double(r.analytic) << '\n';
  }
}

std::vector<IpDecayRow> read_ip_decay_csv(std::istream& in) {
  read_schema_line(in, kIpDecaySchema);
  read_header_line(in, kIpDecayColumns);
  std::vector<IpDecayRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t idx = rows.size();
    const std::vector<std::string> f = csv_fields(line, 6, idx);
    IpDecayRow r;
    r.n = csv_int(f[0], idx);
    r.exact = csv_flag(f[1], idx);
    r.success = csv_double(f[2], idx);
    r.ci_low = csv_double(f[3], idx);
    r.ci_high = csv_double(f[4], idx);
    r.analytic = csv_double(f[5], idx);
    rows.push_back(r);
  }
  return rows;
}

void write_ip_decay_json(std::ostream& out,
                         const std::vector<IpDecayRow>& rows) {
  nlohmann::json doc;
  doc["schema"] = kIpDecaySchema;
  doc["rows"] = nlohmann::json::array();
  for (const IpDecayRow& r : rows) {
    doc["rows"].push_back({{"n", r.n},
                           {"exact", r.exact},
                           {"success", r.success},
                           {"ci_low", r.ci_low},
                           {"ci_high", r.ci_high},
                           {"analytic", r.analytic}});
  }
  out << doc.dump(2) << '\n';
}

std::vector<IpDecayRow> read_ip_decay_json(std::istream& in) {
  const nlohmann::json doc = parse_json(in);
  std::vector<IpDecayRow> rows;
  for (const nlohmann::json& row : json_rows(doc, kIpDecaySchema)) {
    IpDecayRow r;
    r.n = json_field<int>(row, "n");
    r.exact = json_field<bool>(row, "exact");
    r.success = json_field<double>(row, "success");
    r.ci_low = json_field<double>(row, "ci_low");
    r.ci_high = json_field<double>(row, "ci_high");
    r.analytic = json_field<double>(row, "analytic");
    rows.push_back(r);
  }
  return rows;
}

// ============================================================================
// Commands
// ============================================================================

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  if (!(config.p_min >= 0.5 && config.p_min <= config.p_max &&
        config.p_max <= 1.0)) {
    throw ConfigError("sweep range must satisfy 0.5 <= p-min <= p-max <= 1");
  }
  if (!(config.p_step > 0.0)) throw ConfigError("p-step must be positive");
  if (config.depths.empty()) throw ConfigError("depth list must not be empty");
  for (const int d : config.depths) {
    if (d < 0 || d > max_amplification_depth()) {
      throw ConfigError("depth " + std::to_string(d) + " outside [0, " +
                        std::to_string(max_amplification_depth()) + "]");
    }
  }
  if (config.trials < 1) throw ConfigError("trials must be >= 1");
  const BooleanFunction f = parse_function(config.function);

  const int points = static_cast<int>(std::floor(
                         (config.p_max - config.p_min) / config.p_step +
                         1e-9)) +
                     1;
  const double threshold = amplification_threshold();

  std::vector<SweepRow> rows;
  for (int i = 0; i < points; ++i) {
    const double p = std::min(config.p_min + i * config.p_step, config.p_max);
    for (const int depth : config.depths) {
      const Protocol protocol = make_trivial_protocol(f, depth);
      const BoxModel model = NoisyBox{p};

      SampleOptions options;
      options.trials = config.trials;
      // Every row is an independent experiment under a seed derived from the
      // row index, so the table is reproducible row by row.
      options.master_seed =
          philox_word(config.seed, rows.size(), input_site(2));
      const SampleResult sample = sample_success(protocol, model, options);

      SweepRow row;
      row.p = p;
      row.depth = depth;
      row.analytic = protocol.compositional(model, 0, 0);
      row.sampled = sample.estimate;
      row.ci_low = sample.ci_low;
      row.ci_high = sample.ci_high;
      row.above_threshold = p > threshold;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<IpDecayRow> run_ip_decay(const IpDecayConfig& config) {
  if (config.n_max < 1 || config.n_max > BooleanFunction::kMaxArity) {
    throw ConfigError("n-max must lie in [1, " +
                      std::to_string(BooleanFunction::kMaxArity) + "]");
  }
  if (config.trials < 1) throw ConfigError("trials must be >= 1");
  const BoxModel model = parse_model(config.model);
  return ip_decay_experiment(config.n_max, model, config.trials, config.seed);
}

// ============================================================================
// Verification suite
// ============================================================================

namespace {

class CheckList {
 public:
  void close(const std::string& name, double measured, double expected,
             double tol) {
    const bool ok = std::abs(measured - expected) <= tol;
    push(name, ok,
         "measured=" + fmt_double(measured) +
             " expected=" + fmt_double(expected) + " tol=" + fmt_double(tol));
  }

  void truth(const std::string& name, bool ok, const std::string& detail) {
    push(name, ok, detail);
  }

  std::vector<VerifyCheck> take() { return std::move(checks_); }

 private:
  void push(const std::string& name, bool ok, const std::string& detail) {
    checks_.push_back(VerifyCheck{name, ok, detail});
  }

  std::vector<VerifyCheck> checks_;
};

// Worst deviation of the exact per-input success from a constant.
double max_per_input_deviation(const ExactResult& result, double expected) {
  double worst = 0.0;
  for (const double v : result.per_input) {
    worst = std::max(worst, std::abs(v - expected));
  }
  return worst;
}

}  // namespace

std::vector<VerifyCheck> run_verify(uint64_t trials, uint64_t seed) {
  if (trials < 16) throw ConfigError("verify needs at least 16 trials");
  CheckList checks;

  // Generator known answers: the whole reproducibility story rests on these.
  {
    const auto zero = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    const std::array<uint32_t, 4> expected = {0x6627e8d5u, 0xe169c58du,
                                              0xbc57ac4cu, 0x9b00dbd8u};
    checks.truth("rng-known-answer", zero == expected,
                 "Philox block of the zero counter and key");
  }

  // Box layer: the quantum value, the classical ceiling, no-signalling.
  {
    const BoxBehavior q = behavior(canonical_chsh_angles());
    const double tsirelson = (2.0 + std::sqrt(2.0)) / 4.0;
    double worst = q.correct_prob(0, 0);
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        const double v = q.correct_prob(x, y);
        if (std::abs(v - tsirelson) > std::abs(worst - tsirelson)) worst = v;
      }
    }
    checks.close("tsirelson", worst, tsirelson, 1e-9);
  }
  checks.close("classical-max", best_local_deterministic().max_average, 0.75,
               0.0);
  {
    const std::vector<BoxModel> shipped = {
        PerfectBox{}, NoisyBox{0.9}, NoisyBox{0.5},
        LocalDeterministicBox{LocalRule::kCopy, LocalRule::kNegate},
        canonical_chsh_angles()};
    bool all = true;
    for (const BoxModel& m : shipped) {
      all = all && check_no_signalling(m, 1e-12).pass;
    }
    checks.truth("no-signalling", all, "every shipped model at tol 1e-12");
    checks.truth("signalling-fixture",
                 !check_no_signalling(signalling_behavior(), 1e-12).pass,
                 "broken table must fail the check");
  }

  // Protocol layer, exact engine: equality, majority, baseline, one layer of
  // amplification.
  {
    const ExactResult nle = exact_success(make_nle_protocol(), PerfectBox{},
                                          ExactMode::kFullEnumeration);
    checks.close("nle-exact", nle.worst_case, 1.0, 0.0);
  }
  {
    const ExactResult nlm = exact_success(make_nlm_protocol(), NoisyBox{0.9},
                                          ExactMode::kFullEnumeration);
    checks.close("nlm-noise-law", nlm.worst_case, 0.82, 1e-12);
  }
  {
    bool ok = true;
    for (int n = 1; n <= 4; ++n) {
      const ExactResult base =
          exact_success(make_base_bias_protocol(inner_product(n)),
                        PerfectBox{}, ExactMode::kFullEnumeration);
      const double expected = 0.5 + std::exp2(-(n + 1));
      ok = ok && max_per_input_deviation(base, expected) <= 1e-12;
    }
    checks.truth("base-bias", ok, "uniform 1/2 + 2^-(n+1) for n=1..4");
  }
  {
    const Protocol amp = make_amplify_protocol(inner_product(1), 1);
    const ExactResult perfect =
        exact_success(amp, PerfectBox{}, ExactMode::kFullEnumeration);
    checks.close("amplify-law-perfect", perfect.worst_case,
                 amplification_step(0.75, 1.0), 1e-12);
    const ExactResult noisy =
        exact_success(amp, NoisyBox{0.95}, ExactMode::kFullEnumeration);
    checks.close("amplify-law-noisy", noisy.worst_case,
                 amplification_step(0.75, majority_gate_success(0.95)),
                 1e-12);
  }

  // Analysis layer: threshold identity, fixed-point consistency, sandwich.
  checks.close("threshold-identity",
               majority_gate_success(amplification_threshold()),
               kGateThreshold, 1e-12);
  checks.close("threshold-value", amplification_threshold(), 0.9082482905,
               1e-9);
  {
    bool ok = true;
    for (const double p : {0.92, 0.95, 0.99, 1.0}) {
      const double direct = achievable_success(p);
      const double via_fixed_point =
          amplification_fixed_point(majority_gate_success(p));
      ok = ok && std::abs(direct - via_fixed_point) < 1e-9;
    }
    checks.truth("fixed-point", ok,
                 "achievable success equals the recurrence fixed point");
  }
  {
    bool ok = true;
    for (const double q : {0.84, 0.9, 1.0}) {
      const double s = amplification_fixed_point(q);
      for (double p = 0.501; p < s - 1e-3; p += 0.01) {
        const double h = amplification_step(p, q);
        ok = ok && p < h && h < s;
      }
    }
    checks.truth("sandwich", ok, "p < h(p,q) < s on the grid");
  }

  // Circuit layer: text round-trip, the noisy AND gate, inner-product decay.
  {
    const DistributedCircuit c = build_ip_circuit(3);
    const DistributedCircuit back = DistributedCircuit::from_text(c.to_text());
    checks.truth("circuit-text", back.to_text() == c.to_text(),
                 "parse(print(circuit)) is identity");
  }
  {
    const ExactResult and_gate =
        exact_success(make_and_protocol(), canonical_chsh_angles(),
                      ExactMode::kFullEnumeration);
    checks.close("and-at-quantum", and_gate.worst_case, 0.75, 1e-12);
  }
  {
    bool ok = true;
    for (int n = 1; n <= 3; ++n) {
      const ExactResult ip =
          exact_success(make_ip_circuit_protocol(n), canonical_chsh_angles(),
                        ExactMode::kFullEnumeration);
      const double expected = 0.5 + std::exp2(-(n + 1));
      ok = ok && max_per_input_deviation(ip, expected) <= 1e-12;
    }
    checks.truth("ip-decay-law", ok,
                 "1/2 + (1/2)^(n+1) at the quantum box, n=1..3");
  }

  // Engine layer: the two exact modes agree; sampling agrees with exact; the
  // tally is independent of worker partitioning.
  {
    const Protocol amp = make_amplify_protocol(inner_product(1), 1);
    const ExactResult full =
        exact_success(amp, NoisyBox{0.95}, ExactMode::kFullEnumeration);
    const ExactResult comp =
        exact_success(amp, NoisyBox{0.95}, ExactMode::kCompositional);
    checks.close("modes-agree", full.average, comp.average, 1e-9);
  }
  {
    const uint64_t per_input = std::max<uint64_t>(trials / 16, 250);
    const CrossCheckReport report = cross_check(
        make_nlm_protocol(), NoisyBox{0.95}, per_input, seed);
    checks.truth("sample-cross-check", report.pass,
                 "sampled success within 5 sigma of exact on all inputs");
  }
  {
    SampleOptions options;
    options.trials = trials;
    options.master_seed = seed;
    options.workers = 1;
    const SampleResult one =
        sample_success(make_nlm_protocol(), NoisyBox{0.9}, options);
    options.workers = 8;
    const SampleResult eight =
        sample_success(make_nlm_protocol(), NoisyBox{0.9}, options);
    checks.truth("worker-determinism", one.successes == eight.successes,
                 "identical tally under 1 and 8 workers");
  }

  // CLI layer: spec strings and result files survive a round trip.
  {
    bool ok = true;
    for (const std::string spec :
         {"perfect", "noisy:0.875", "classical:copy,negate", "quantum"}) {
      ok = ok && format_model(parse_model(format_model(parse_model(spec)))) ==
                     format_model(parse_model(spec));
    }
    checks.truth("model-spec-round-trip", ok,
                 "parse then format is a fixed point");
  }
  {
    SweepConfig config;
    config.p_min = 0.88;
    config.p_max = 0.92;
    config.p_step = 0.04;
    config.depths = {0, 1};
    config.trials = std::max<uint64_t>(trials / 16, 250);
    config.seed = seed;
    const std::vector<SweepRow> rows = run_sweep(config);
    std::stringstream csv;
    write_sweep_csv(csv, rows);
    std::stringstream json;
    write_sweep_json(json, rows);
    const bool ok =
        read_sweep_csv(csv) == rows && read_sweep_json(json) == rows;
    checks.truth("table-round-trip", ok, "CSV and JSON reproduce the rows");
  }

  return checks.take();
}

// ============================================================================
// Entry point
// ============================================================================

namespace {

// Opens --out if given, else targets the provided stream.
void emit_table(const std::string& path, const std::string& format,
                std::ostream& out,
                const std::function<void(std::ostream&)>& write_csv,
                const std::function<void(std::ostream&)>& write_json) {
  std::ofstream file;
  std::ostream* sink = &out;
  if (!path.empty()) {
    file.open(path);
    if (!file) throw ConfigError("cannot open output file '" + path + "'");
    sink = &file;
  }
  if (format == "csv") {
    write_csv(*sink);
  } else {
    write_json(*sink);
  }
}

int print_verify_report(const std::vector<VerifyCheck>& checks,
                        std::ostream& out) {
  size_t failed = 0;
  for (const VerifyCheck& c : checks) {
    out << (c.pass ? "ok   " : "FAIL ") << c.name;
    for (size_t i = c.name.size(); i < 24; ++i) out << ' ';
    out << ' ' << c.detail << '\n';
    if (!c.pass) ++failed;
  }
  if (failed == 0) {
    out << "all " << checks.size() << " checks passed\n";
    return 0;
  }
  out << failed << " of " << checks.size() << " checks failed\n";
  return 1;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Nonlocal-box protocol simulator and verifier"};
  app.name("nlbsim");
  app.require_subcommand(0, 1);
  app.set_config("--config", "", "Read options from an INI file");
  bool emit_config = false;
  app.add_flag("--emit-config", emit_config,
               "Print the parsed configuration as an INI file and exit")
      ->configurable(false);

  uint64_t verify_trials = 20000;
  uint64_t verify_seed = 0;
  CLI::App* verify = app.add_subcommand("verify", "Run the invariant suite");
  verify->fallthrough();
  verify->add_option("--trials", verify_trials, "Trials for sampled checks")
      ->capture_default_str();
  verify->add_option("--seed", verify_seed, "Master seed for sampled checks")
      ->capture_default_str();

  SweepConfig sweep_config;
  std::string sweep_format = "csv";
  std::string sweep_out;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Sample the one-bit protocol across box correctness values");
  sweep->fallthrough();
  sweep->add_option("--p-min", sweep_config.p_min, "Lowest box correctness")
      ->capture_default_str();
  sweep->add_option("--p-max", sweep_config.p_max, "Highest box correctness")
      ->capture_default_str();
  sweep->add_option("--p-step", sweep_config.p_step, "Grid step")
      ->capture_default_str();
  sweep->add_option("--depth", sweep_config.depths,
                    "Amplification depths (comma-separated)")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--function", sweep_config.function,
                    "Function spec, e.g. ip:2 or table:f.txt")
      ->capture_default_str();
  sweep->add_option("--trials", sweep_config.trials, "Trials per row")
      ->capture_default_str();
  sweep->add_option("--seed", sweep_config.seed, "Master seed")
      ->capture_default_str();
  sweep->add_option("--format", sweep_format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sweep->add_option("--out", sweep_out, "Output file (default: stdout)")
      ->capture_default_str();

  IpDecayConfig decay_config;
  std::string decay_format = "csv";
  std::string decay_out;
  CLI::App* decay = app.add_subcommand(
      "ip-decay", "Inner-product circuit success against input length");
  decay->fallthrough();
  decay->add_option("--n-max", decay_config.n_max, "Largest input length")
      ->capture_default_str();
  decay->add_option("--model", decay_config.model,
                    "Box model spec, e.g. noisy:0.85")
      ->capture_default_str();
  decay->add_option("--trials", decay_config.trials, "Trials per sampled row")
      ->capture_default_str();
  decay->add_option("--seed", decay_config.seed, "Master seed")
      ->capture_default_str();
  decay->add_option("--format", decay_format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  decay->add_option("--out", decay_out, "Output file (default: stdout)")
      ->capture_default_str();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (emit_config) {
      out << app.config_to_str(true, true);
      return 0;
    }
    if (verify->parsed()) {
      return print_verify_report(run_verify(verify_trials, verify_seed), out);
    }
    if (sweep->parsed()) {
      const std::vector<SweepRow> rows = run_sweep(sweep_config);
      emit_table(
          sweep_out, sweep_format, out,
          [&](std::ostream& s) { write_sweep_csv(s, rows); },
          [&](std::ostream& s) { write_sweep_json(s, rows); });
      return 0;
    }
    if (decay->parsed()) {
      const std::vector<IpDecayRow> rows = run_ip_decay(decay_config);
      emit_table(
          decay_out, decay_format, out,
          [&](std::ostream& s) { write_ip_decay_csv(s, rows); },
          [&](std::ostream& s) { write_ip_decay_json(s, rows); });
      return 0;
    }
    err << "error: expected a subcommand (verify | sweep | ip-decay)\n";
    err << app.help();
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace nlb
