#include "nlb/circuits.hpp"
#include "nlb/engines.hpp"

namespace nlb {

std::vector<IpDecayRow> ip_decay_experiment(int n_max, const BoxModel& model,
                                            uint64_t trials, uint64_t seed,
                                            int exact_limit) {
  if (n_max < 1 || n_max > BooleanFunction::kMaxArity) {
    throw DomainError("inner-product length outside [1, " +
                      std::to_string(BooleanFunction::kMaxArity) + "]");
  }
  if (trials < 1) throw DomainError("trials must be >= 1");

  std::vector<IpDecayRow> rows;
  rows.reserve(static_cast<size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    const Protocol protocol = make_ip_circuit_protocol(n);
    IpDecayRow row;
    row.n = n;
    row.analytic =
        protocol.compositional(model, 0, 0);  // input-independent law
    if (n <= exact_limit) {
      const ExactResult exact =
          exact_success(protocol, model, ExactMode::kFullEnumeration);
      row.exact = true;
      row.success = exact.worst_case;
      row.ci_low = exact.worst_case;
      row.ci_high = exact.worst_case;
    } else {
      SampleOptions options;
      options.trials = trials;
      // One derived seed per length keeps the rows independent experiments.
      options.master_seed =
          philox_word(seed, static_cast<uint64_t>(n), input_site(2));
      const SampleResult sample = sample_success(protocol, model, options);
      row.exact = false;
      row.success = sample.estimate;
      row.ci_low = sample.ci_low;
      row.ci_high = sample.ci_high;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nlb
