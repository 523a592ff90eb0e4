#include "vexherz/exponent.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>

using namespace vexherz;

namespace {

// Dense enumeration of the decay quantity |q(x) - q(y)| ln(e + |x|), |y| >= |x|,
// over a 1D radial grid; q depends only on |x| here.
double dense_decay_oracle(const ExponentFunction& q, double R, int n)
{
  double best = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double rx = R * double(i) / n;
    for (int j = i; j <= n; ++j) {
      const double ry = R * double(j) / n;
      best = std::max(best, std::abs(q({rx, 0}) - q({ry, 0})) * std::log(std::numbers::e + rx));
    }
  }
  return best;
}

} // namespace

TEST(Exponent, ConstantBounds)
{
  const auto q = make_exponent(ExponentDescriptor::constant(2.0));
  EXPECT_DOUBLE_EQ(q.q_minus(), 2.0);
  EXPECT_DOUBLE_EQ(q.q_plus(), 2.0);
  EXPECT_TRUE(q.is_constant());
  EXPECT_EQ(q.describe(), "const:2");
}

TEST(Exponent, DecayBoundsOnBox)
{
  const auto q = make_exponent(ExponentDescriptor::decay(2.0, 1.0, 1, 8.0));
  EXPECT_NEAR(q.q_plus(), 3.0, 1e-12);
  EXPECT_NEAR(q.q_minus(), 2.0 + 1.0 / std::log(std::numbers::e + 8.0), 1e-12);
  EXPECT_NEAR(q({0.0, 0.0}), 3.0, 1e-15);
}

TEST(Exponent, PiecewiseBounds)
{
  const auto q = make_exponent(ExponentDescriptor::piecewise(2.0, 3.0));
  EXPECT_DOUBLE_EQ(q.q_minus(), 2.0);
  EXPECT_DOUBLE_EQ(q.q_plus(), 3.0);
  EXPECT_DOUBLE_EQ(q({-0.5, 0}), 2.0);
  EXPECT_DOUBLE_EQ(q({0.0, 0}), 3.0);
}

TEST(Exponent, RejectsExponentNotAboveOne)
{
  for (double q0 : {0.9, 1.0}) {
    try {
      make_exponent(ExponentDescriptor::constant(q0));
      FAIL() << "accepted q = " << q0;
    } catch (const PreconditionError& e) {
      EXPECT_NE(std::string(e.what()).find("1< essinf"), std::string::npos);
    }
  }
  EXPECT_THROW(make_exponent(ExponentDescriptor::piecewise(1.0, 3.0)), PreconditionError);
  EXPECT_THROW(make_exponent(ExponentDescriptor::smooth(2.0, 1.0, 0.0)), PreconditionError);
}

TEST(Exponent, ConjugateValues)
{
  EXPECT_DOUBLE_EQ(conjugate_exponent(make_exponent(ExponentDescriptor::constant(2.0)))({0, 0}), 2.0);
  EXPECT_NEAR(conjugate_exponent(make_exponent(ExponentDescriptor::constant(4.0)))({0, 0}), 4.0 / 3.0, 1e-15);
  const auto qp = conjugate_exponent(make_exponent(ExponentDescriptor::piecewise(2.0, 3.0)));
  EXPECT_NEAR(qp.q_minus(), 1.5, 1e-15);
  EXPECT_NEAR(qp.q_plus(), 2.0, 1e-15);
  EXPECT_EQ(qp.describe(), "piecewise:2:3:0'");
}

TEST(Exponent, ConjugateIsInvolution)
{
  const auto q = make_exponent(ExponentDescriptor::decay(2.0, 1.0, 2));
  const auto qq = q.conjugate().conjugate();
  for (double x = -8.0; x <= 8.0; x += 0.37)
    for (double y = -8.0; y <= 8.0; y += 1.13) {
      EXPECT_NEAR(qq({x, y}), q({x, y}), 1e-12);
      const double a = q({x, y});
      const double b = q.conjugate()({x, y});
      EXPECT_NEAR(1.0 / a + 1.0 / b, 1.0, 1e-14);
    }
}

TEST(Exponent, ConjugateBoundsBracketSamples)
{
  const auto q = make_exponent(ExponentDescriptor::smooth(2.0, 1.5, 2.0)).conjugate();
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    EXPECT_GE(q({x, 0}), q.q_minus() - 1e-12);
    EXPECT_LE(q({x, 0}), q.q_plus() + 1e-12);
  }
}

TEST(Exponent, SobolevShift)
{
  const auto q1 = make_exponent(ExponentDescriptor::constant(2.0));
  const auto q2 = q1.sobolev_shift(0.25);
  EXPECT_NEAR(q2({1, 0}), 4.0, 1e-12);
  EXPECT_NEAR(q2.q_plus(), 4.0, 1e-12);
  EXPECT_THROW(q1.sobolev_shift(0.5), PreconditionError);
  EXPECT_EQ(q1.sobolev_shift(0.0).describe(), q1.describe());
}

TEST(Exponent, DomainRadiusRecertifies)
{
  const auto q = make_exponent(ExponentDescriptor::decay()).conjugate();
  const auto big = q.with_domain_radius(32.0);
  EXPECT_DOUBLE_EQ(big.domain_radius(), 32.0);
  EXPECT_EQ(big.describe(), q.describe());
  EXPECT_GT(big.q_plus(), q.q_plus());
}

TEST(Exponent, HolderConstant)
{
  EXPECT_DOUBLE_EQ(holder_constant(make_exponent(ExponentDescriptor::constant(3.0))), 1.0);
  EXPECT_NEAR(holder_constant(make_exponent(ExponentDescriptor::piecewise(2.0, 3.0))), 7.0 / 6.0, 1e-15);
}

TEST(LogHolder, ConstantIsZero)
{
  const auto rep = check_log_holder(make_exponent(ExponentDescriptor::constant(2.5)));
  EXPECT_EQ(rep.c_local, 0.0);
  EXPECT_EQ(rep.c_decay, 0.0);
  EXPECT_TRUE(rep.local_satisfied);
  EXPECT_TRUE(rep.decay_satisfied);
}

TEST(LogHolder, DecayMatchesDenseOracle)
{
  const auto q = make_exponent(ExponentDescriptor::decay());
  const double oracle = dense_decay_oracle(q, 8.0, 2000);
  // closed form of the supremum at x = 0, |y| = R
  EXPECT_NEAR(oracle, 1.0 - 1.0 / std::log(std::numbers::e + 8.0), 1e-12);
  const auto rep = check_log_holder(q, 20000);
  EXPECT_LE(rep.c_decay, oracle * (1.0 + 1e-9));
  EXPECT_GE(rep.c_decay, 0.9 * oracle);
  EXPECT_TRUE(rep.local_satisfied);
  EXPECT_TRUE(rep.decay_satisfied);
}

TEST(LogHolder, StableUnderBudgetDoubling)
{
  const auto q = make_exponent(ExponentDescriptor::decay(2.0, 1.0, 2));
  const auto a = check_log_holder(q, 4000);
  const auto b = check_log_holder(q, 8000);
  EXPECT_LT(std::abs(b.c_decay - a.c_decay) / a.c_decay, 0.10);
  EXPECT_LT(std::abs(b.c_local - a.c_local) / a.c_local, 0.10);
}

TEST(LogHolder, LinearProfileDecayGrowsWithBox)
{
  double prev = 0.0;
  for (double R : {4.0, 8.0, 16.0, 32.0}) {
    const auto q = make_exponent(ExponentDescriptor::smooth(2.0, 1.0, 4.0, SmoothShape::linear, 1, R));
    const double c = check_log_holder(q, 8000).c_decay;
    EXPECT_GT(c, prev);
    prev = c;
  }
  EXPECT_GT(prev, 5.0);
}

TEST(LogHolder, JumpGrowsWithFinerDistances)
{
  const auto rep = check_log_holder(make_exponent(ExponentDescriptor::piecewise(2.0, 3.0)), 20000);
  ASSERT_GE(rep.local_by_decade.size(), 4u);
  // a unit jump gives -ln|x-y| at every scale: per-decade maxima increase
  for (std::size_t d = 1; d < rep.local_by_decade.size(); ++d)
    EXPECT_GT(rep.local_by_decade[d], rep.local_by_decade[d - 1]);
  EXPECT_GT(rep.local_by_decade.back(), 25.0);
}

TEST(LogHolder, RejectsSmallBudget)
{
  EXPECT_THROW(check_log_holder(make_exponent(ExponentDescriptor::constant(2.0)), 999), PreconditionError);
}

TEST(LogHolder, DeterministicForSeed)
{
  const auto q = make_exponent(ExponentDescriptor::smooth(2.0, 1.0, 1.0));
  const auto a = check_log_holder(q);
  const auto b = check_log_holder(q);
  EXPECT_EQ(a.c_local, b.c_local);
  EXPECT_EQ(a.c_decay, b.c_decay);
}
