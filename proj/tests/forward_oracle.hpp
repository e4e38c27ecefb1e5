#pragma once

// Test-only reference: pushes the joint state distribution of two devices
// forward slot by slot and sums tail probabilities,
//   E min = sum_t P(both active after t slots), E max = sum_t P(any active),
//   E X_1 = sum_t E[#active] / 2.
// Shares no code with the closed forms or the backward Markov solve.

#include <cstddef>
#include <functional>
#include <vector>

namespace contend2::testing {

struct ForwardMoments {
  double avg = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// prob(k) is the transmit probability k slots after a restart; `length` is the
// number of distinct clock states (1 for a constant policy, whose clock never
// advances).
inline ForwardMoments forward_moments(const std::function<double(std::size_t)>& prob,
                                      std::size_t length, bool constant, int slots = 20000) {
  std::vector<double> both(length, 0.0), alone(length, 0.0);
  both[0] = 1.0;
  ForwardMoments out;
  for (int t = 0; t < slots; ++t) {
    double pb = 0.0, ps = 0.0;
    for (std::size_t k = 0; k < length; ++k) {
      pb += both[k];
      ps += alone[k];
    }
    if (pb + ps < 1e-300) break;
    out.min += pb;
    out.max += pb + ps;
    out.avg += (2.0 * pb + ps) / 2.0;
    std::vector<double> nb(length, 0.0), ns(length, 0.0);
    for (std::size_t k = 0; k < length; ++k) {
      const double q = prob(k);
      const std::size_t next = constant ? 0 : k + 1;
      nb[0] += both[k] * q * q;
      if (q < 1.0) {
        nb[next] += both[k] * (1 - q) * (1 - q);
        ns[next] += both[k] * 2 * q * (1 - q);
        ns[next] += alone[k] * (1 - q);
      }
    }
    both.swap(nb);
    alone.swap(ns);
  }
  return out;
}

inline ForwardMoments forward_moments(const std::vector<double>& probs) {
  return forward_moments([&](std::size_t k) { return probs[k]; }, probs.size(), false);
}

inline ForwardMoments forward_moments_constant(double q) {
  return forward_moments([q](std::size_t) { return q; }, 1, true);
}

}  // namespace contend2::testing
