#pragma once

// Optimal two-device protocols and the parametric families they come from.
//
// AVG: optimal masses are a quadratic m_k = a0 + a1 k + a2 k^2 on -1..N with
//      m_{-1} = 1 and m_N = 0; the best choice is N = 2.
// MIN: constant probability 1/2.
// MAX: optimal masses solve m_{v+1} = (2 - g) m_v - m_{v-1} + g with g = 1/E max,
//      so m_k - 1 = C1 x1^k + C2 x2^k where x1, x2 are the unit-modulus roots of
//      x^2 - (2 - g) x + 1. Only N = 0 and N = 1 are possible; N = 1 wins.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "contend2/analytic.hpp"
#include "contend2/core.hpp"
#include "contend2/error.hpp"
#include "contend2/roots.hpp"

namespace contend2 {

// 3x^3 - 12x^2 + 10x - 2 on [1/4, 1/3]: gamma = 1 / (optimal E max).
inline constexpr CubicSpec kGammaCubic{{3.0, -12.0, 10.0, -2.0}, 0.25, 1.0 / 3.0};
// x^3 + 7x^2 - 21x + 9 on [0, 1]: first MAX transmit probability.
inline constexpr CubicSpec kAlphaCubic{{1.0, 7.0, -21.0, 9.0}, 0.0, 1.0};
// 4x^3 - 8x^2 + 3 on [0, 1]: second MAX transmit probability.
inline constexpr CubicSpec kBetaCubic{{4.0, -8.0, 0.0, 3.0}, 0.0, 1.0};

// ---------------------------------------------------------------------------
// AVG family

/// Quadratic idle-mass profile with m_{-1} = 1 and m_N = 0; a2 is the free
/// parameter and a0, a1 follow from the two boundary conditions.
struct AvgFamilyPoint {
  int N;
  double a2;

  AvgFamilyPoint(int n, double a2_) : N(n), a2(a2_) {
    if (N < 1) throw InvalidArgument("AVG family needs N >= 1");
  }

  double a0() const { return (N - a2 * (N * N + N)) / (N + 1.0); }
  double a1() const { return (-a2 * (N * N - 1.0) - 1.0) / (N + 1.0); }
  double mass(double k) const { return a0() + a1() * k + a2 * k * k; }

  /// a2 must lie in [-1/(N+N^2), 1/(N+N^2)] for the masses to be non-increasing.
  double a2_bound() const { return 1.0 / (N + static_cast<double>(N) * N); }
};

namespace detail {

inline void check_a2_constraint(const AvgFamilyPoint& pt) {
  const double bound = pt.a2_bound();
  const double slack = 1e-14 * bound;
  if (!(pt.a2 >= -bound - slack && pt.a2 <= bound + slack)) {
    throw NonMonotone("AVG family: a2 = " + std::to_string(pt.a2) + " outside [-" +
                      std::to_string(bound) + ", " + std::to_string(bound) + "] for N = " +
                      std::to_string(pt.N));
  }
}

}  // namespace detail

/// (m_{-1}, ..., m_N). At the upper endpoint a2 = 1/(N+N^2) the quadratic already
/// hits zero at N-1; the duplicate trailing zero is dropped.
inline MassSequence avg_family_masses(const AvgFamilyPoint& pt) {
  detail::check_a2_constraint(pt);
  std::vector<double> m;
  m.reserve(static_cast<std::size_t>(pt.N) + 2);
  m.push_back(1.0);
  for (int k = 0; k < pt.N; ++k) {
    const double v = pt.mass(k);
    if (std::abs(v) <= 1e-12) break;
    m.push_back(v);
  }
  m.push_back(0.0);
  try {
    return MassSequence(std::move(m));
  } catch (const InvalidArgument& e) {
    throw NonMonotone(std::string("AVG family: ") + e.what());
  }
}

/// E X_1 = (N+1)(N+2)(a2 N(N+1) - 3) / (2N (a2^2 (N+1)^2 (N+2) - 3)).
inline double avg_family_cost(int N, double a2) {
  const AvgFamilyPoint pt(N, a2);
  detail::check_a2_constraint(pt);
  const double n = N;
  const double den = a2 * a2 * (n + 1) * (n + 1) * (n + 2) - 3.0;
  // N = 1 at the upper endpoint collapses to p = (1)
  if (std::abs(den) <= kDegenerateThreshold) {
    throw DegenerateDenominator("AVG family: N = 1, a2 = 1/2 collides forever");
  }
  return (n + 1) * (n + 2) * (a2 * n * (n + 1) - 3.0) / (2.0 * n * den);
}

struct AvgTableRow {
  int N;
  double a2;
  double cost;
  bool at_endpoint;  // a2 pinned to 1/(N+N^2)
};

/// Best a2 for each N in 1..n_max. Candidates are the real roots of
/// dE/da2 inside the constraint interval plus the upper endpoint; the lower
/// endpoint makes p_0 = 0 and is not a valid protocol.
inline std::vector<AvgTableRow> avg_table(int n_max) {
  if (n_max < 1) throw InvalidArgument("avg_table: n_max must be >= 1");
  std::vector<AvgTableRow> rows;
  for (int N = 1; N <= n_max; ++N) {
    const double n = N;
    const double bound = 1.0 / (n + n * n);
    AvgTableRow best{N, bound, std::numeric_limits<double>::infinity(), true};
    try {
      best.cost = avg_family_cost(N, bound);
    } catch (const DegenerateDenominator&) {
    }
    const double disc = -std::pow(n, 5) - std::pow(n, 4) + 13 * std::pow(n, 3) + 37 * n * n + 36 * n + 12;
    if (disc >= 0.0) {
      const double num = 3 * n * n + 9 * n + 6;
      const double den = std::pow(n, 4) + 4 * std::pow(n, 3) + 5 * n * n + 2 * n;
      for (double sign : {-1.0, 1.0}) {
        const double a2 = (num + sign * std::sqrt(3.0) * std::sqrt(disc)) / den;
        if (!(a2 > -bound && a2 < bound)) continue;
        const double c = avg_family_cost(N, a2);
        if (c < best.cost) best = {N, a2, c, false};
      }
    }
    rows.push_back(best);
  }
  return rows;
}

struct AvgProtocol {
  ProbSequence probs;
  MassSequence masses;
  double cost;
};

inline AvgProtocol optimal_avg_protocol() {
  const AvgFamilyPoint pt(2, 0.5 - 1.0 / std::sqrt(6.0));
  MassSequence m = avg_family_masses(pt);
  ProbSequence p = masses_to_probs(m);
  const double cost = expected_avg(m);
  return {std::move(p), std::move(m), cost};
}

struct MinProtocol {
  double probability;
  double cost;
};

inline MinProtocol optimal_min_protocol() {
  constexpr double q = 0.5;
  return {q, markov_oracle(ConstantPolicy{q}, Objective::Min)};
}

// ---------------------------------------------------------------------------
// MAX family

/// Member (N, gamma) of the MAX family together with its characteristic
/// roots x1, x2 and the coefficients C1, C2 fixed by m_{-1} = 1, m_{N+1} = 0.
class MaxFamilyPoint {
 public:
  using Complex = std::complex<double>;

  MaxFamilyPoint(int n, double gamma) : N_(n), gamma_(gamma) {
    if (N_ < 0) throw InvalidArgument("MAX family needs N >= 0");
    if (!(gamma > 0.25 && gamma <= 1.0 / 3.0)) {
      throw InvalidArgument("MAX family needs gamma in (1/4, 1/3], got " + std::to_string(gamma));
    }
    // Roots of x^2 - (2-g)x + 1; the negative-imaginary one is x1.
    const double re = 0.5 * (2.0 - gamma);
    const double im = 0.5 * std::sqrt(4.0 * gamma - gamma * gamma);
    x1_ = {re, -im};
    x2_ = std::conj(x1_);
    // [1/x1 1/x2; x1^{N+1} x2^{N+1}] [C1 C2]^T = [0 -1]^T
    const Complex a = 1.0 / x1_, b = 1.0 / x2_;
    const Complex c = std::pow(x1_, N_ + 1), d = std::pow(x2_, N_ + 1);
    const Complex det = a * d - b * c;
    c1_ = b / det;   // (0*d - b*(-1)) / det
    c2_ = -a / det;  // (a*(-1) - c*0) / det
    if (boundary_residual() > 1e-10) {
      throw Error("MAX family: boundary conditions not met (residual " +
                  std::to_string(boundary_residual()) + ")");
    }
  }

  int N() const { return N_; }
  double gamma() const { return gamma_; }
  Complex x1() const { return x1_; }
  Complex x2() const { return x2_; }
  Complex c1() const { return c1_; }
  Complex c2() const { return c2_; }

  /// C1 x1^k + C2 x2^k + 1, before dropping the (vanishing) imaginary part.
  Complex raw_mass(int k) const {
    return c1_ * std::pow(x1_, k) + c2_ * std::pow(x2_, k) + 1.0;
  }

  /// max of |C1/x1 + C2/x2| and |C1 x1^{N+1} + C2 x2^{N+1} + 1|.
  double boundary_residual() const {
    const double r0 = std::abs(c1_ / x1_ + c2_ / x2_);
    const double r1 = std::abs(c1_ * std::pow(x1_, N_ + 1) + c2_ * std::pow(x2_, N_ + 1) + 1.0);
    return std::max(r0, r1);
  }

 private:
  int N_;
  double gamma_;
  Complex x1_, x2_, c1_, c2_;
};

/// (1, m_0, ..., m_N, 0).
inline MassSequence max_family_masses(const MaxFamilyPoint& pt) {
  std::vector<double> m;
  m.reserve(static_cast<std::size_t>(pt.N()) + 3);
  m.push_back(1.0);
  for (int k = 0; k <= pt.N(); ++k) {
    const auto z = pt.raw_mass(k);
    if (std::abs(z.imag()) > 1e-10) {
      throw Error("MAX family: imaginary part " + std::to_string(z.imag()) + " did not cancel");
    }
    m.push_back(z.real());
  }
  m.push_back(0.0);
  try {
    return MassSequence(std::move(m));
  } catch (const InvalidArgument& e) {
    throw NonMonotone(std::string("MAX family: ") + e.what());
  }
}

/// gamma (N+2) + m_N - 1; zero exactly when gamma = 1 / E max of the member.
inline double max_consistency_residual(int N, double gamma) {
  const MaxFamilyPoint pt(N, gamma);
  const MassSequence m = max_family_masses(pt);
  return gamma * (N + 2) + m.mass(N) - 1.0;
}

/// Root of the consistency residual for a given N, found by bisection
/// without reference to the gamma cubic.
inline double solve_max_gamma(int N) {
  return bisect_root([N](double g) { return max_consistency_residual(N, g); }, 0.25 + 1e-9,
                     1.0 / 3.0);
}

struct MaxProtocol {
  ProbSequence probs;
  MassSequence masses;
  double gamma;
  double cost;                 // 1 / gamma
  double n0_alternative_cost;  // best N = 0 member, 2 + sqrt 2
};

inline MaxProtocol optimal_max_protocol() {
  const double gamma = solve_cubic_in_bracket(kGammaCubic);
  const double gamma_check = solve_max_gamma(1);
  if (std::abs(gamma - gamma_check) > 1e-9) {
    throw Error("MAX protocol: gamma cubic and consistency residual disagree");
  }
  MassSequence m = max_family_masses(MaxFamilyPoint(1, gamma));
  ProbSequence p = masses_to_probs(m);
  const double n0_cost = expected_max(max_family_masses(MaxFamilyPoint(0, solve_max_gamma(0))));
  if (!(n0_cost > 1.0 / gamma)) throw Error("MAX protocol: N = 0 member is not worse than N = 1");
  return {std::move(p), std::move(m), gamma, 1.0 / gamma, n0_cost};
}

/// 76x^6 - 532x^5 + 664x^4 + 3288x^3 + 4680x^2 + 2268x + 729, whose roots
/// include the conjugate pair C1, C2 of the optimal N = 1 member.
inline constexpr std::array<double, 7> kCSextic{76, -532, 664, 3288, 4680, 2268, 729};

inline double sextic_relative_residual(std::complex<double> z) {
  std::complex<double> acc = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < kCSextic.size(); ++i) {
    acc = acc * z + kCSextic[i];
    scale += std::abs(kCSextic[i]) * std::pow(std::abs(z), static_cast<double>(kCSextic.size() - 1 - i));
  }
  return std::abs(acc) / scale;
}

inline bool c_polynomial_check(const MaxFamilyPoint& pt, double tol = 1e-6) {
  return sextic_relative_residual(pt.c1()) <= tol && sextic_relative_residual(pt.c2()) <= tol;
}

}  // namespace contend2
