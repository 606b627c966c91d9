#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nlb/analysis.hpp"
#include "nlb/cli.hpp"

using namespace nlb;

namespace {

int run(std::vector<std::string> args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(std::move(args), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST_CASE("model specs parse and format as a fixed point") {
  CHECK(format_model(parse_model("perfect")) == "perfect");
  CHECK(format_model(parse_model("noisy:0.875")) == "noisy:0.875");
  CHECK(format_model(parse_model("classical")) == "classical:const0,const0");
  CHECK(format_model(parse_model("classical:copy,negate")) ==
        "classical:copy,negate");
  CHECK(format_model(parse_model("quantum")) ==
        format_model(canonical_chsh_angles()));

  for (const std::string spec :
       {"perfect", "noisy:0.72", "classical:negate,const1", "quantum",
        "quantum:0.1,0.2,0.3,0.4"}) {
    const std::string once = format_model(parse_model(spec));
    CHECK(format_model(parse_model(once)) == once);
  }
}

TEST_CASE("bad model specs are configuration errors") {
  for (const std::string bad :
       {"", "noisy", "noisy:0.4", "noisy:1.5", "noisy:zero", "perfect:x",
        "classical:copy", "classical:copy,negate,copy", "classical:up,down",
        "quantum:1,2", "quantum:a,b,c,d", "mystery"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_model(bad), ConfigError);
  }
}

TEST_CASE("function specs cover the builtin families") {
  CHECK(parse_function("and2").eval(1, 1).value() == 1);
  CHECK(parse_function("xor2").eval(1, 0).value() == 1);
  CHECK(parse_function("ip:3") == inner_product(3));
  CHECK(parse_function("eq:2") == equality(2));
  CHECK(parse_function("random:2:3:9") == random_function(2, 3, 9));

  for (const std::string bad :
       {"", "ip", "ip:0", "ip:abc", "ip:14", "eq:21", "random:2:3",
        "random:0:1:5", "and2:1", "table:/no/such/file", "mystery:3"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_function(bad), ConfigError);
  }
}

TEST_CASE("truth table files round trip") {
  const BooleanFunction f = random_function(2, 3, 123);
  std::stringstream file;
  write_function_table(file, f);
  CHECK(read_function_table(file) == f);
}

TEST_CASE("truth table files reject malformed content") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_function_table(in);
  };
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("1"), ParseError);
  CHECK_THROWS_AS(parse("1 1\n0 1 1"), ParseError);          // short table
  CHECK_THROWS_AS(parse("1 1\n0 1 1 2"), ParseError);        // non-bit entry
  CHECK_THROWS_AS(parse("1 1\n0 1 1 0 1"), ParseError);      // trailing token
  CHECK_THROWS_AS(parse("0 1\n0 1"), ParseError);            // bad arity
  CHECK_NOTHROW(parse("# comment\n1 1\n0 1 1 0  # tail\n"));
}

TEST_CASE("sweep tables round trip through both formats") {
  std::vector<SweepRow> rows;
  rows.push_back({0.9, 2, 0.7, 0.69, 0.68, 0.71, false});
  rows.push_back({0.95, 8, 0.83099999999999996, 0.8305, 0.828, 0.833, true});

  std::stringstream csv;
  write_sweep_csv(csv, rows);
  CHECK(read_sweep_csv(csv) == rows);

  std::stringstream json;
  write_sweep_json(json, rows);
  CHECK(read_sweep_json(json) == rows);

  // Empty tables still carry their schema.
  std::stringstream empty_csv;
  write_sweep_csv(empty_csv, {});
  CHECK(read_sweep_csv(empty_csv).empty());
}

TEST_CASE("decay tables round trip through both formats") {
  std::vector<IpDecayRow> rows;
  rows.push_back({1, true, 0.75, 0.75, 0.75, 0.75});
  rows.push_back({4, false, 0.531, 0.526, 0.536, 0.53125});

  std::stringstream csv;
  write_ip_decay_csv(csv, rows);
  CHECK(read_ip_decay_csv(csv) == rows);

  std::stringstream json;
  write_ip_decay_json(json, rows);
  CHECK(read_ip_decay_json(json) == rows);
}

TEST_CASE("result readers reject foreign or damaged tables") {
  auto sweep_csv = [](const std::string& text) {
    std::istringstream in(text);
    return read_sweep_csv(in);
  };
  // A decay table is not a sweep table.
  std::stringstream decay;
  write_ip_decay_csv(decay, {});
  CHECK_THROWS_AS(sweep_csv(decay.str()), ParseError);

  const std::string header =
      "# schema nlbsim.sweep.v1\n"
      "p,depth,analytic,sampled,ci_low,ci_high,above_threshold\n";
  CHECK_THROWS_AS(sweep_csv("p,depth\n"), ParseError);
  CHECK_THROWS_AS(sweep_csv(header + "0.9,1,0.7,0.7,0.6\n"), ParseError);
  CHECK_THROWS_AS(sweep_csv(header + "abc,1,0.7,0.7,0.6,0.8,0\n"), ParseError);
  CHECK_THROWS_AS(sweep_csv(header + "0.9,1,0.7,0.7,0.6,0.8,yes\n"),
                  ParseError);

  auto sweep_json = [](const std::string& text) {
    std::istringstream in(text);
    return read_sweep_json(in);
  };
  CHECK_THROWS_AS(sweep_json("not json"), ParseError);
  CHECK_THROWS_AS(sweep_json("{\"schema\":\"other\",\"rows\":[]}"), ParseError);
  CHECK_THROWS_AS(sweep_json("{\"schema\":\"nlbsim.sweep.v1\"}"), ParseError);
  CHECK_THROWS_AS(
      sweep_json("{\"schema\":\"nlbsim.sweep.v1\",\"rows\":[{\"p\":0.9}]}"),
      ParseError);
}

TEST_CASE("sweeps walk the grid in row-major order") {
  SweepConfig config;
  config.p_min = 0.88;
  config.p_max = 0.94;
  config.p_step = 0.03;
  config.depths = {0, 2};
  config.trials = 400;
  config.seed = 5;
  const std::vector<SweepRow> rows = run_sweep(config);
  REQUIRE(rows.size() == 6);

  CHECK(rows[0].p == doctest::Approx(0.88));
  CHECK(rows[0].depth == 0);
  CHECK(rows[1].p == doctest::Approx(0.88));
  CHECK(rows[1].depth == 2);
  CHECK(rows[4].p == doctest::Approx(0.94));

  const double threshold = amplification_threshold();
  for (const SweepRow& r : rows) {
    CHECK(r.above_threshold == (r.p > threshold));
    CHECK(r.ci_low <= r.sampled);
    CHECK(r.sampled <= r.ci_high);
    CHECK(r.analytic > 0.5);
  }
  // Depth 0 is the baseline guess: analytic exactly 1/2 + 1/8 for two bits.
  CHECK(rows[0].analytic == doctest::Approx(0.625).epsilon(1e-12));

  // The same configuration reproduces the same table.
  CHECK(run_sweep(config) == rows);
}

TEST_CASE("sweep configuration is validated") {
  SweepConfig config;

  config.p_min = 0.4;
  CHECK_THROWS_AS(run_sweep(config), ConfigError);
  config = {};
  config.p_max = 0.8;  // below p_min default 0.86
  CHECK_THROWS_AS(run_sweep(config), ConfigError);
  config = {};
  config.p_step = 0.0;
  CHECK_THROWS_AS(run_sweep(config), ConfigError);
  config = {};
  config.depths = {};
  CHECK_THROWS_AS(run_sweep(config), ConfigError);
  config = {};
  config.depths = {-1};
  CHECK_THROWS_AS(run_sweep(config), ConfigError);
  config = {};
  config.trials = 0;
  CHECK_THROWS_AS(run_sweep(config), ConfigError);
  config = {};
  config.function = "nope";
  CHECK_THROWS_AS(run_sweep(config), ConfigError);
}

TEST_CASE("decay run validates and honors its model") {
  IpDecayConfig config;
  config.n_max = 4;
  config.model = "noisy:0.95";
  config.trials = 500;
  const std::vector<IpDecayRow> rows = run_ip_decay(config);
  REQUIRE(rows.size() == 4);
  const double g = majority_gate_success(0.95);
  CHECK(rows[0].analytic == doctest::Approx(g).epsilon(1e-12));

  config.n_max = 0;
  CHECK_THROWS_AS(run_ip_decay(config), ConfigError);
  config = {};
  config.model = "martian";
  CHECK_THROWS_AS(run_ip_decay(config), ConfigError);
  config = {};
  config.trials = 0;
  CHECK_THROWS_AS(run_ip_decay(config), ConfigError);
}

TEST_CASE("the command line maps outcomes to exit codes") {
  std::string out;
  std::string err;

  CHECK(run({"--help"}, &out, &err) == 0);
  CHECK(run({"sweep", "--help"}, &out, &err) == 0);

  CHECK(run({}, &out, &err) == 2);
  CHECK(err.find("expected a subcommand") != std::string::npos);
  CHECK(run({"--no-such-flag"}, &out, &err) == 2);
  CHECK(run({"sweep", "--p-min", "0.2"}, &out, &err) == 2);
  CHECK(run({"sweep", "--format", "yaml"}, &out, &err) == 2);
  CHECK(run({"ip-decay", "--model", "martian"}, &out, &err) == 2);
}

TEST_CASE("the sweep command emits a readable table") {
  std::string out;
  CHECK(run({"sweep", "--p-min", "0.9", "--p-max", "0.9", "--depth", "0",
             "--trials", "300", "--seed", "8"},
            &out) == 0);
  std::istringstream in(out);
  const std::vector<SweepRow> rows = read_sweep_csv(in);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].depth == 0);

  std::string json_text;
  CHECK(run({"sweep", "--p-min", "0.9", "--p-max", "0.9", "--depth", "0",
             "--trials", "300", "--seed", "8", "--format", "json"},
            &json_text) == 0);
  std::istringstream jin(json_text);
  CHECK(read_sweep_json(jin) == rows);
}

TEST_CASE("the out flag writes the table to a file") {
  const std::string path = "cli_test_sweep_out.csv";
  std::string out;
  CHECK(run({"sweep", "--p-min", "0.9", "--p-max", "0.9", "--depth", "0",
             "--trials", "200", "--out", path},
            &out) == 0);
  CHECK(out.empty());
  std::ifstream file(path);
  REQUIRE(file.good());
  const std::vector<SweepRow> rows = read_sweep_csv(file);
  CHECK(rows.size() == 1);
  file.close();
  std::remove(path.c_str());
}

TEST_CASE("a config file reproduces the flag run") {
  std::string ini;
  REQUIRE(run({"sweep", "--p-min", "0.9", "--p-max", "0.9", "--depth", "0,1",
               "--trials", "250", "--seed", "3", "--emit-config"},
              &ini) == 0);
  CHECK(ini.find("p-min") != std::string::npos);

  const std::string path = "cli_test_sweep.ini";
  {
    std::ofstream file(path);
    file << ini;
  }
  std::string from_config;
  CHECK(run({"--config", path, "sweep"}, &from_config) == 0);

  std::string from_flags;
  CHECK(run({"sweep", "--p-min", "0.9", "--p-max", "0.9", "--depth", "0,1",
             "--trials", "250", "--seed", "3"},
            &from_flags) == 0);
  CHECK(from_config == from_flags);
  std::remove(path.c_str());
}

TEST_CASE("the verification suite passes and covers every module") {
  std::string out;
  const int code = run({"verify", "--trials", "2000", "--seed", "1"}, &out);
  CHECK(code == 0);
  CHECK(out.find("FAIL") == std::string::npos);
  // One named check per module boundary at least.
  for (const char* name :
       {"rng-known-answer", "tsirelson", "no-signalling", "nlm-noise-law",
        "threshold-identity", "circuit-text", "modes-agree",
        "worker-determinism", "model-spec-round-trip", "table-round-trip"}) {
    CAPTURE(name);
    CHECK(out.find(name) != std::string::npos);
  }
}

TEST_CASE("verification failures drive the exit code") {
  // Degenerate trial count is a configuration error, not a check failure.
  std::string out;
  std::string err;
  CHECK(run({"verify", "--trials", "2"}, &out, &err) == 2);
  CHECK(err.find("error:") != std::string::npos);
}
