#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "contend2/optimizer.hpp"
#include "contend2/protocols.hpp"
#include "forward_oracle.hpp"

using namespace contend2;

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt6 = std::sqrt(6.0);
const double kGamma = 0.2997231891050845;  // numpy.roots on 3x^3-12x^2+10x-2

TEST(SolveCubic, ProtocolConstants) {
  const double g = solve_cubic_in_bracket(kGammaCubic);
  EXPECT_NEAR(g, kGamma, 1e-14);
  EXPECT_NEAR(g, 0.299723, 1e-6);
  EXPECT_NEAR(solve_cubic_in_bracket(kAlphaCubic), 0.528837, 1e-6);
  EXPECT_NEAR(solve_cubic_in_bracket(kBetaCubic), 0.785997, 1e-6);
}

TEST(SolveCubic, CertifiedInsideBracket) {
  for (const auto& spec : {kGammaCubic, kAlphaCubic, kBetaCubic,
                           CubicSpec{{1.0, 0.0, -2.0, 0.0}, 1.0, 2.0},
                           CubicSpec{{-2.0, 1.0, 5.0, -1.0}, 0.0, 1.0}}) {
    const double r = solve_cubic_in_bracket(spec);
    EXPECT_GT(r, spec.lo);
    EXPECT_LT(r, spec.hi);
    EXPECT_LE(std::abs(spec(r)), 1e-10 * spec.scale());
  }
  EXPECT_NEAR(solve_cubic_in_bracket(CubicSpec{{1.0, 0.0, -2.0, 0.0}, 1.0, 2.0}), kSqrt2, 1e-15);
}

TEST(SolveCubic, NoSignChange) {
  EXPECT_THROW(solve_cubic_in_bracket(CubicSpec{{1.0, 0.0, 0.0, 1.0}, 0.0, 1.0}), NoSignChange);
  EXPECT_THROW(solve_cubic_in_bracket(kGammaCubic, 0.0), InvalidArgument);
}

TEST(AvgFamily, Masses) {
  const auto m = avg_family_masses(AvgFamilyPoint(2, 0.5 - 1.0 / kSqrt6));
  ASSERT_EQ(m.length(), 3u);
  EXPECT_NEAR(m.mass(0), (kSqrt6 - 1.0) / 3.0, 1e-15);
  EXPECT_NEAR(m.mass(1), (kSqrt6 - 2.0) / 3.0, 1e-15);

  const auto h = avg_family_masses(AvgFamilyPoint(1, 0.0));
  EXPECT_NEAR(h.mass(0), 0.5, 1e-15);
  const auto p = masses_to_probs(h);
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_EQ(p[1], 1.0);

  EXPECT_THROW(avg_family_masses(AvgFamilyPoint(2, 1.0)), NonMonotone);
  EXPECT_THROW(avg_family_masses(AvgFamilyPoint(2, -1.0 / 6.0)), NonMonotone);
  EXPECT_THROW(AvgFamilyPoint(0, 0.0), InvalidArgument);
}

TEST(AvgFamily, QuadraticInterpolation) {
  const AvgFamilyPoint pt(4, 0.01);
  const auto m = avg_family_masses(pt);
  EXPECT_NEAR(pt.mass(-1), 1.0, 1e-15);
  EXPECT_NEAR(pt.mass(4), 0.0, 1e-15);
  for (long k = 0; k < 4; ++k) EXPECT_NEAR(m.mass(k), pt.a0() + pt.a1() * k + pt.a2 * k * k, 1e-15);
}

TEST(AvgFamily, UpperEndpointCollapsesTrailingZero) {
  const auto m = avg_family_masses(AvgFamilyPoint(3, 1.0 / 12.0));
  ASSERT_EQ(m.length(), 3u);
  EXPECT_NEAR(m.mass(0), 0.5, 1e-15);
  EXPECT_NEAR(m.mass(1), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(expected_avg(m), 30.0 / 11.0, 1e-12);
}

TEST(AvgFamily, Cost) {
  EXPECT_NEAR(avg_family_cost(2, 0.5 - 1.0 / kSqrt6), (3.0 + kSqrt6) / 2.0, 1e-12);
  EXPECT_NEAR(avg_family_cost(3, 1.0 / 12.0), 30.0 / 11.0, 1e-12);
  EXPECT_NEAR(avg_family_cost(5, 1.0 / 30.0), 105.0 / 34.0, 1e-12);
  EXPECT_THROW(avg_family_cost(2, 1.0), NonMonotone);
}

TEST(AvgFamily, CostMatchesEvaluatorOnGrid) {
  for (int N = 1; N <= 6; ++N) {
    const double bound = 1.0 / (N + N * N);
    for (int i = 1; i <= 50; ++i) {
      const double a2 = -bound + 2.0 * bound * i / 50.0;  // last point is the upper endpoint
      if (N == 1 && i == 50) {
        EXPECT_THROW(avg_family_cost(N, a2), DegenerateDenominator);
        EXPECT_THROW(expected_avg(avg_family_masses(AvgFamilyPoint(N, a2))), DegenerateDenominator);
        continue;
      }
      const double formula = avg_family_cost(N, a2);
      const double direct = expected_avg(avg_family_masses(AvgFamilyPoint(N, a2)));
      ASSERT_NEAR(formula, direct, 1e-9) << "N=" << N << " a2=" << a2;
    }
  }
}

TEST(AvgTable, ReproducesSolutions) {
  const auto rows = avg_table(8);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_NEAR(rows[0].a2, 1.5 - kSqrt2, 1e-12);
  EXPECT_NEAR(rows[0].cost, kSqrt2 + 1.5, 1e-12);
  EXPECT_NEAR(rows[1].a2, 0.5 - 1.0 / kSqrt6, 1e-12);
  EXPECT_NEAR(rows[1].cost, (kSqrt6 + 3.0) / 2.0, 1e-12);
  EXPECT_NEAR(rows[2].a2, 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(rows[2].cost, 30.0 / 11.0, 1e-12);
  EXPECT_NEAR(rows[3].a2, 1.0 / 20.0, 1e-15);
  EXPECT_NEAR(rows[3].cost, 20.0 / 7.0, 1e-12);
  EXPECT_NEAR(rows[4].cost, 105.0 / 34.0, 1e-12);
  EXPECT_FALSE(rows[0].at_endpoint);
  EXPECT_TRUE(rows[2].at_endpoint);
  for (std::size_t i = 4; i < rows.size(); ++i) {
    const double n = rows[i].N;
    EXPECT_TRUE(rows[i].at_endpoint);
    EXPECT_NEAR(rows[i].cost, n * (n + 1) * (n + 2) / (3 * n * n - n - 2), 1e-12);
    if (i > 4) {
      EXPECT_GT(rows[i].cost, rows[i - 1].cost);
    }
  }
  EXPECT_THROW(avg_table(0), InvalidArgument);
}

TEST(OptimalAvg, Protocol) {
  const auto pr = optimal_avg_protocol();
  ASSERT_EQ(pr.probs.size(), 3u);
  EXPECT_NEAR(pr.probs[0], (4.0 - kSqrt6) / 3.0, 1e-14);
  EXPECT_NEAR(pr.probs[1], (1.0 + kSqrt6) / 5.0, 1e-14);
  EXPECT_EQ(pr.probs[2], 1.0);
  EXPECT_NEAR(pr.cost, (3.0 + kSqrt6) / 2.0, 1e-12);
  EXPECT_NEAR(pr.cost, expected_avg(probs_to_masses(pr.probs)), 1e-12);
}

TEST(OptimalAvg, Stationarity) {
  const auto pr = optimal_avg_protocol();
  const double c = -1.0 / (2.0 * pr.cost);
  EXPECT_NEAR(2 * pr.masses.mass(0) - 1.0 - pr.masses.mass(1), c, 1e-12);
  EXPECT_NEAR(c, -0.183504, 1e-6);
  for (double r : stationarity_residuals(pr.masses, Objective::Avg)) EXPECT_LT(std::abs(r), 1e-9);
}

TEST(OptimalMin, Protocol) {
  const auto pr = optimal_min_protocol();
  EXPECT_EQ(pr.probability, 0.5);
  EXPECT_NEAR(pr.cost, 2.0, 1e-15);
  EXPECT_EQ(pr.cost, markov_oracle(ConstantPolicy{pr.probability}, Objective::Min));
}

TEST(MaxFamily, PointIdentities) {
  for (int N : {0, 1, 2}) {
    for (double g : {0.26, 0.29, kGamma, 1.0 / 3.0}) {
      const MaxFamilyPoint pt(N, g);
      EXPECT_NEAR(std::abs(pt.x1() + pt.x2() - (2.0 - g)), 0.0, 1e-14);
      EXPECT_NEAR(std::abs(pt.x1() * pt.x2() - 1.0), 0.0, 1e-14);
      EXPECT_NEAR(std::abs(pt.x1()), 1.0, 1e-14);
      EXPECT_LT(pt.boundary_residual(), 1e-10);
      EXPECT_NEAR(std::abs(pt.c1() - std::conj(pt.c2())), 0.0, 1e-12);
    }
  }
  EXPECT_THROW(MaxFamilyPoint(1, 0.25), InvalidArgument);
  EXPECT_THROW(MaxFamilyPoint(1, 0.34), InvalidArgument);
  EXPECT_THROW(MaxFamilyPoint(-1, 0.3), InvalidArgument);
}

TEST(MaxFamily, OptimalMember) {
  const MaxFamilyPoint pt(1, kGamma);
  EXPECT_NEAR(pt.c1().real(), -0.264419, 1e-6);
  EXPECT_NEAR(pt.c1().imag(), -0.426908, 1e-6);
  const auto m = max_family_masses(pt);
  ASSERT_EQ(m.length(), 3u);
  EXPECT_NEAR(m.mass(0), 0.471163, 1e-6);
  EXPECT_NEAR(m.mass(1), 0.100830, 1e-6);
  const auto p = masses_to_probs(m);
  EXPECT_NEAR(p[0], 0.528837, 1e-6);
  EXPECT_NEAR(p[1], 0.785997, 1e-6);
  EXPECT_NEAR(expected_max(m), 1.0 / kGamma, 1e-12);
}

TEST(MaxFamily, NZeroMember) {
  const double g0 = (2.0 - kSqrt2) / 2.0;
  const MaxFamilyPoint pt(0, g0);
  EXPECT_LT(pt.boundary_residual(), 1e-10);
  const auto m = max_family_masses(pt);
  ASSERT_EQ(m.length(), 2u);
  EXPECT_NEAR(m.mass(0), kSqrt2 - 1.0, 1e-14);
  EXPECT_NEAR(expected_max(m), 2.0 + kSqrt2, 1e-12);
  const auto fwd = contend2::testing::forward_moments({2.0 - kSqrt2, 1.0});
  EXPECT_NEAR(fwd.max, 2.0 + kSqrt2, 1e-12);
}

TEST(MaxConsistency, Residual) {
  EXPECT_NEAR(max_consistency_residual(1, kGamma), 0.0, 1e-9);
  EXPECT_NEAR(max_consistency_residual(0, (2.0 - kSqrt2) / 2.0), 0.0, 1e-9);
  const double hi = max_consistency_residual(1, 0.32);
  const double lo = max_consistency_residual(1, 0.28);
  EXPECT_GT(std::abs(hi), 1e-3);
  EXPECT_LT(hi * lo, 0.0);
  EXPECT_GT(std::abs(max_consistency_residual(1, 0.26)), 1e-3);
}

TEST(MaxConsistency, TwoRoutesToGammaAgree) {
  EXPECT_NEAR(solve_max_gamma(1), solve_cubic_in_bracket(kGammaCubic), 1e-12);
  EXPECT_NEAR(solve_max_gamma(0), (2.0 - kSqrt2) / 2.0, 1e-12);
}

TEST(OptimalMax, Protocol) {
  const auto pr = optimal_max_protocol();
  ASSERT_EQ(pr.probs.size(), 3u);
  const double a = pr.probs[0], b = pr.probs[1];
  EXPECT_NEAR(a, 0.528837, 1e-6);
  EXPECT_NEAR(b, 0.785997, 1e-6);
  EXPECT_EQ(pr.probs[2], 1.0);
  EXPECT_LT(std::abs(a * a * a + 7 * a * a - 21 * a + 9), 1e-9);
  EXPECT_LT(std::abs(4 * b * b * b - 8 * b * b + 3), 1e-9);
  EXPECT_NEAR(a, solve_cubic_in_bracket(kAlphaCubic), 1e-12);
  EXPECT_NEAR(b, solve_cubic_in_bracket(kBetaCubic), 1e-12);
  EXPECT_NEAR(pr.cost, 1.0 / kGamma, 1e-12);
  EXPECT_NEAR(pr.cost, 3.33641, 5e-6);
  EXPECT_NEAR(pr.cost, expected_max(probs_to_masses(pr.probs)), 1e-9);
  EXPECT_NEAR(pr.n0_alternative_cost, 2.0 + kSqrt2, 1e-9);
  EXPECT_GT(pr.n0_alternative_cost, pr.cost);
  EXPECT_LT(pr.cost, 4.0);
  EXPECT_GE(pr.cost, 3.0);
}

TEST(OptimalMax, Stationarity) {
  const auto pr = optimal_max_protocol();
  const auto& m = pr.masses;
  for (long v = 0; v < 2; ++v) {
    EXPECT_NEAR(m.mass(v + 1), (2.0 - pr.gamma) * m.mass(v) - m.mass(v - 1) + pr.gamma, 1e-12);
  }
  for (double r : stationarity_residuals(m, Objective::Max)) EXPECT_LT(std::abs(r), 1e-9);
}

TEST(CPolynomial, Check) {
  EXPECT_TRUE(c_polynomial_check(MaxFamilyPoint(1, kGamma)));
  EXPECT_FALSE(c_polynomial_check(MaxFamilyPoint(0, (2.0 - kSqrt2) / 2.0)));
  EXPECT_FALSE(c_polynomial_check(MaxFamilyPoint(1, kGamma + 1e-3)));
}

}  // namespace
