#pragma once

// Expected latency of a two-device recurrent policy.
//
// Closed forms in the idle masses (sums run over k = 0..L-1):
//   E X_1          = sum m_{k-1}                    / (1 - sum (m_{k-1} - m_k)^2)
//   E min(X1, X2)  = sum m_{k-1}^2                  / (1 - sum (m_{k-1} - m_k)^2)
//   E max(X1, X2)  = (2 sum m_{k-1} - sum m_{k-1}^2) / (1 - sum (m_{k-1} - m_k)^2)
//
// markov_oracle() reaches the same numbers without these formulas, by solving
// the first-step equations of the absorbing chain directly.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contend2/core.hpp"
#include "contend2/error.hpp"

namespace contend2 {

enum class Method { ClosedForm, Oracle, MonteCarlo };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::ClosedForm: return "closed_form";
    case Method::Oracle: return "oracle";
    case Method::MonteCarlo: return "monte_carlo";
  }
  return "?";
}

struct CostReport {
  Objective objective;
  double value;
  Method method;
  std::optional<double> ci_halfwidth;
};

/// Infinite policy that transmits with the same probability every slot.
struct ConstantPolicy {
  double probability;
};

inline constexpr double kDegenerateThreshold = 1e-12;

namespace detail {

struct MassSums {
  double mass = 0.0;     // sum m_{k-1}
  double squares = 0.0;  // sum m_{k-1}^2
  double denominator = 0.0;
};

inline MassSums mass_sums(const MassSequence& m) {
  const auto v = m.values();
  MassSums s;
  double jumps = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    s.mass += v[i];
    s.squares += v[i] * v[i];
    const double d = v[i] - v[i + 1];
    jumps += d * d;
  }
  s.denominator = 1.0 - jumps;
  if (s.denominator <= kDegenerateThreshold) {
    throw DegenerateDenominator("1 - sum (m_{k-1} - m_k)^2 = " + std::to_string(s.denominator) +
                                ": the policy collides forever");
  }
  return s;
}

}  // namespace detail

inline double expected_avg(const MassSequence& m) {
  const auto s = detail::mass_sums(m);
  return s.mass / s.denominator;
}

inline double expected_min(const MassSequence& m) {
  const auto s = detail::mass_sums(m);
  return s.squares / s.denominator;
}

inline double expected_max(const MassSequence& m) {
  const auto s = detail::mass_sums(m);
  return (2.0 * s.mass - s.squares) / s.denominator;
}

inline double expected_cost(const MassSequence& m, Objective obj) {
  switch (obj) {
    case Objective::Avg: return expected_avg(m);
    case Objective::Min: return expected_min(m);
    case Objective::Max: return expected_max(m);
  }
  throw InvalidArgument("unknown objective");
}

inline CostReport closed_form_report(const MassSequence& m, Objective obj) {
  return {obj, expected_cost(m, obj), Method::ClosedForm, std::nullopt};
}

namespace detail {

// Gaussian elimination with partial pivoting; a vanishing pivot means the
// chain has no absorbing exit.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-13) {
      throw NonAbsorbing("markov oracle: absorption probability is zero (policy always collides)");
    }
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

// Remaining latency credited when exactly one device succeeds and the other
// is left alone with `alone_remaining` expected slots to go.
inline double split_reward(Objective obj, double alone_remaining) {
  switch (obj) {
    case Objective::Min: return 0.0;
    case Objective::Max: return alone_remaining;
    case Objective::Avg: return 0.5 * alone_remaining;
  }
  return 0.0;
}

}  // namespace detail

/// Exact expected cost from the absorbing chain over (slots since restart,
/// active set). With both devices active at clock k:
///   both transmit    p_k^2          -> collision, restart at clock 0
///   exactly one      2 p_k (1-p_k)  -> one device done, the other alone at k+1
///   neither          (1-p_k)^2      -> both active at clock k+1
/// A lone device at clock j needs S_j = 1 + (1-p_j) S_{j+1} more slots.
inline double markov_oracle(const ProbSequence& p, Objective obj) {
  const std::size_t n = p.size();
  std::vector<double> alone(n + 1, 0.0);
  alone[n - 1] = 1.0;
  for (std::size_t j = n - 1; j-- > 0;) alone[j] = 1.0 + (1.0 - p[j]) * alone[j + 1];

  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double q = p[k];
    const double both = q * q;
    const double one = 2.0 * q * (1.0 - q);
    const double none = (1.0 - q) * (1.0 - q);
    a[k][k] += 1.0;
    a[k][0] -= both;
    if (none > 0.0) a[k][k + 1] -= none;
    b[k] = 1.0 + (one > 0.0 ? one * detail::split_reward(obj, alone[k + 1]) : 0.0);
  }
  return detail::solve_dense(std::move(a), std::move(b))[0];
}

/// Same chain for a constant policy: a single recurrent state, so the renewal
/// equation V = 1 + q^2 V + (1-q)^2 V + 2q(1-q) r with a geometric lone tail 1/q.
inline double markov_oracle(ConstantPolicy policy, Objective obj) {
  const double q = policy.probability;
  if (!(q > 0.0 && q <= 1.0)) throw InvalidArgument("constant probability must be in (0,1]");
  const double exit = 1.0 - q * q - (1.0 - q) * (1.0 - q);
  if (exit <= kDegenerateThreshold) {
    throw NonAbsorbing("markov oracle: constant policy never separates the devices");
  }
  const double reward = 2.0 * q * (1.0 - q) * detail::split_reward(obj, 1.0 / q);
  return (1.0 + reward) / exit;
}

template <class Policy>
CostReport oracle_report(const Policy& p, Objective obj) {
  return {obj, markov_oracle(p, obj), Method::Oracle, std::nullopt};
}

}  // namespace contend2
