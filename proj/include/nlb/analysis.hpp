#pragma once

#include <optional>
#include <vector>

#include "nlb/core.hpp"

namespace nlb {

// Closed-form counterparts of the simulated quantities. Everything here is a
// pure function of real parameters; the engines and tests cross-check these
// values against exact enumeration and sampling.

// Success probability of the box-backed majority gate when each of its two
// boxes is independently correct with probability p: p^2 + (1-p)^2 (correct
// when neither or both boxes err). Requires 1/2 <= p <= 1.
double majority_gate_success(double p);

// One amplification layer: success of a ternary majority (gate success q)
// over three independent copies each correct with probability p. Requires
// p, q in [0, 1].
double amplification_step(double p, double q);

// Gate success above which amplification gains bias at all.
constexpr double kGateThreshold = 5.0 / 6.0;

// Limit of iterated amplification for gate success q > 5/6:
//   1/2 + 3*sqrt(d) / (2*sqrt(1 + 3d))  with  d = q - 5/6.
// Throws BelowThresholdError at or below the gate threshold.
double amplification_fixed_point(double q);

// Box success above which the whole pipeline amplifies: (3 + sqrt(6)) / 6,
// the p at which majority_gate_success crosses 5/6.
double amplification_threshold();

// Final achievable success for box correctness p above the threshold:
//   1/2 + sqrt(3p^2 - 3p + 1/4) / (2p - 1),
// which equals the fixed point at gate success majority_gate_success(p).
double achievable_success(double p);

// The sequence p0, step(p0), step(step(p0)), ... with depth+1 elements.
// Requires q > 5/6 and 1/2 < p0 <= fixed point (the fixed point itself is
// allowed and yields a constant sequence).
std::vector<double> iterate_amplification(double p0, double q, int depth);

// Communication lower bound for computing the n-bit inner product with
// success at least p, entanglement allowed:
//   max((2p-1)^2 / 2, (2p-1)^4) * n - 1/2.
// Requires 1/2 < p <= 1 and n >= 1.
double inner_product_comm_lower_bound(double p, int n);

// Derived amplification parameters for box correctness p. The headroom
// (delta) and fixed point are present only above the gate threshold.
struct AmplificationParams {
  double p = 0.0;
  double q = 0.0;
  std::optional<double> delta;
  std::optional<double> fixed_point;
};

AmplificationParams amplification_params(double p);

}  // namespace nlb
