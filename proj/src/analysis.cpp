#include "nlb/analysis.hpp"

#include <cmath>
#include <string>

namespace nlb {

namespace {

void check_unit(double v, const char* who) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw DomainError(std::string(who) + " must lie in [0, 1]");
  }
}

}  // namespace

double majority_gate_success(double p) {
  if (!(p >= 0.5 && p <= 1.0)) {
    throw DomainError("box correctness must lie in [1/2, 1]");
  }
  return p * p + (1.0 - p) * (1.0 - p);
}

double amplification_step(double p, double q) {
  check_unit(p, "copy success");
  check_unit(q, "gate success");
  const double r = 1.0 - p;
  const double majority_right = p * p * p + 3.0 * p * p * r;
  const double majority_wrong = 3.0 * p * r * r + r * r * r;
  return q * majority_right + (1.0 - q) * majority_wrong;
}

double amplification_fixed_point(double q) {
  check_unit(q, "gate success");
  if (q <= kGateThreshold) {
    throw BelowThresholdError("gate success " + std::to_string(q) +
                              " does not exceed 5/6");
  }
  const double d = q - kGateThreshold;
  return 0.5 + 3.0 * std::sqrt(d) / (2.0 * std::sqrt(1.0 + 3.0 * d));
}

double amplification_threshold() { return (3.0 + std::sqrt(6.0)) / 6.0; }

double achievable_success(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw DomainError("box correctness must lie in (0, 1]");
  }
  if (p <= amplification_threshold()) {
    throw BelowThresholdError("box correctness " + std::to_string(p) +
                              " does not exceed the amplification threshold");
  }
  return 0.5 + std::sqrt(3.0 * p * p - 3.0 * p + 0.25) / (2.0 * p - 1.0);
}

std::vector<double> iterate_amplification(double p0, double q, int depth) {
  if (depth < 0) throw DomainError("iteration depth must be >= 0");
  const double s = amplification_fixed_point(q);  // validates q as well
  if (!(p0 > 0.5 && p0 <= s)) {
    throw DomainError("starting success must lie in (1/2, fixed point]");
  }
  std::vector<double> seq;
  seq.reserve(static_cast<size_t>(depth) + 1);
  seq.push_back(p0);
  for (int i = 0; i < depth; ++i) {
    seq.push_back(amplification_step(seq.back(), q));
  }
  return seq;
}

double inner_product_comm_lower_bound(double p, int n) {
  if (!(p > 0.5 && p <= 1.0)) {
    throw DomainError("success must lie in (1/2, 1]");
  }
  if (n < 1) throw DomainError("input length must be >= 1");
  const double bias = 2.0 * p - 1.0;
  const double quadratic = 0.5 * bias * bias;
  const double quartic = bias * bias * bias * bias;
  return std::max(quadratic, quartic) * n - 0.5;
}

AmplificationParams amplification_params(double p) {
  AmplificationParams out;
  out.p = p;
  out.q = majority_gate_success(p);
  if (out.q > kGateThreshold) {
    out.delta = out.q - kGateThreshold;
    out.fixed_point = amplification_fixed_point(out.q);
  }
  return out;
}

}  // namespace nlb
