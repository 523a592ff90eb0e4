#include "vexherz/norms.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace vexherz;

namespace {

std::pair<std::size_t, std::size_t> span(std::uniform_int_distribution<std::size_t>& cell, std::mt19937_64& rng)
{
  const std::size_t a = cell(rng);
  const std::size_t b = cell(rng);
  return {std::min(a, b), std::max(a, b)};
}

const Grid& grid1()
{
  static const Grid g = Grid::make_default(1);
  return g;
}

ExponentFunction q_const(double q0)
{
  return make_exponent(ExponentDescriptor::constant(q0));
}

// Step function on random cell-aligned intervals with values in [-2, 2].
SampledFunction random_step(const Grid& g, std::mt19937_64& rng)
{
  std::uniform_int_distribution<std::size_t> cell(0, g.points_per_axis() - 1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  SampledFunction f(g);
  while (f.is_zero())
    for (int k = 0; k < 4; ++k) {
      auto [a, b] = span(cell, rng);
      const double c = u(rng);
      for (std::size_t i = a; i <= b; ++i)
        f.mutable_values()[i] += c;
    }
  return f;
}

// Root of rho(eta) = 1 by a dense scan, independent of the bisection.
double eta_scan(const std::function<double(double)>& rho, double lo, double hi, int n)
{
  double prev = lo;
  for (int i = 1; i <= n; ++i) {
    const double eta = lo + (hi - lo) * double(i) / n;
    if (rho(eta) <= 1.0)
      return 0.5 * (prev + eta);
    prev = eta;
  }
  return hi;
}

// sup over every integer cutoff k0 in a wide window, from annulus norms
// indexed by k in [k_lo, k_hi] (zero outside).
double herz_morrey_by_enumeration(const std::vector<double>& norms, int k_lo, double alpha, double lambda, double p)
{
  double best = 0.0;
  for (int k0 = k_lo - 20; k0 <= k_lo + int(norms.size()) + 20; ++k0) {
    double s = 0.0;
    for (std::size_t j = 0; j < norms.size(); ++j) {
      const int k = k_lo + int(j);
      if (k <= k0)
        s += std::pow(std::exp2(k * alpha) * norms[j], p);
    }
    best = std::max(best, std::exp2(-k0 * lambda) * std::pow(s, 1.0 / p));
  }
  return best;
}

} // namespace

TEST(Modular, IndicatorExamples)
{
  const auto f = box_indicator(grid1(), -1.0, 1.0);
  EXPECT_DOUBLE_EQ(modular(f, q_const(2.0), 1.0), 2.0);
  EXPECT_DOUBLE_EQ(modular(f, q_const(2.0), 2.0), 0.5);
  EXPECT_DOUBLE_EQ(modular(f, make_exponent(ExponentDescriptor::piecewise(2.0, 3.0)), 1.0), 2.0);
  EXPECT_THROW(modular(f, q_const(2.0), 0.0), PreconditionError);
}

TEST(Luxemburg, IndicatorExamples)
{
  const auto f = box_indicator(grid1(), -1.0, 1.0);
  EXPECT_NEAR(luxemburg_norm(f, q_const(2.0)), std::sqrt(2.0), 1e-9);
  EXPECT_EQ(luxemburg_norm(SampledFunction(grid1()), q_const(2.0)), 0.0);
}

TEST(Luxemburg, PiecewiseMatchesEtaScan)
{
  // half the mass sees q = 2 and half q = 3: rho(eta) = eta^-2 + eta^-3
  const double oracle = eta_scan([](double e) { return std::pow(e, -2.0) + std::pow(e, -3.0); }, 1.3, 1.35, 500000);
  EXPECT_NEAR(oracle, 1.3247179572, 1e-7);
  ModularCurve curve;
  const auto f = box_indicator(grid1(), -1.0, 1.0);
  const double v = luxemburg_norm(f, make_exponent(ExponentDescriptor::piecewise(2.0, 3.0)), &curve);
  EXPECT_NEAR(v, oracle, 2e-7);
  EXPECT_FALSE(curve.evaluations.empty());
  EXPECT_LE(curve.eta_lo, v);
  EXPECT_EQ(curve.eta_hi, v);
}

TEST(Luxemburg, ConstantExponentClosedForm)
{
  std::mt19937_64 rng(3);
  for (double q0 : {1.5, 2.0, 3.0, 4.0})
    for (int t = 0; t < 10; ++t) {
      const auto f = random_step(grid1(), rng);
      double s = 0.0;
      for (double v : f.values())
        s += std::pow(std::abs(v), q0);
      const double closed = std::pow(s * grid1().cell_volume(), 1.0 / q0);
      EXPECT_NEAR(luxemburg_norm(f, q_const(q0)) / closed, 1.0, 1e-9);
    }
}

TEST(Luxemburg, UnitModularAndHomogeneity)
{
  std::mt19937_64 rng(5);
  const auto q = make_exponent(ExponentDescriptor::decay());
  for (int t = 0; t < 10; ++t) {
    const auto f = random_step(grid1(), rng);
    const double n = luxemburg_norm(f, q);
    const double rho = modular(f, q, n);
    EXPECT_LE(rho, 1.0 + 1e-6);
    EXPECT_GE(rho, 1.0 - 1e-6);
    EXPECT_NEAR(luxemburg_norm(-3.5 * f, q), 3.5 * n, 1e-8 * n);
  }
}

TEST(Luxemburg, TriangleInequality)
{
  std::mt19937_64 rng(9);
  const auto q = make_exponent(ExponentDescriptor::piecewise(1.5, 3.0, 0.3));
  for (int t = 0; t < 20; ++t) {
    const auto f = random_step(grid1(), rng);
    const auto g = random_step(grid1(), rng);
    EXPECT_LE(luxemburg_norm(f + g, q), (luxemburg_norm(f, q) + luxemburg_norm(g, q)) * (1.0 + 1e-9));
  }
}

TEST(Luxemburg, AnnulusNorm)
{
  const ExponentSamples qs(q_const(2.0), grid1());
  EXPECT_NEAR(annulus_norm(ball_indicator(grid1(), 2), qs, 1), std::sqrt(2.0), 1e-9);
  EXPECT_EQ(annulus_norm(ball_indicator(grid1(), 0), qs, 2), 0.0);
}

TEST(L1, Examples)
{
  EXPECT_DOUBLE_EQ(l1_norm(box_indicator(grid1(), -1.0, 1.0)), 2.0);
  EXPECT_DOUBLE_EQ(l1_norm(annulus_indicator(grid1(), 0)), 1.0);
  EXPECT_DOUBLE_EQ(l1_norm(3.0 * box_indicator(grid1(), -1.0, 0.0)), 3.0);
}

TEST(HerzMorrey, SingleAnnulusExamples)
{
  const auto f = annulus_indicator(grid1(), 1);
  const auto q = q_const(2.0);
  EXPECT_NEAR(herz_morrey_norm(f, HerzMorreyParams::on(grid1(), 1.0, 0.5, 2.0, q)), 2.0, 1e-9);
  EXPECT_NEAR(herz_norm(f, 1.0, 2.0, q), 2.0 * std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(herz_norm(annulus_indicator(grid1(), 0), 0.0, 1.0, q), 1.0, 1e-9);
}

TEST(HerzMorrey, TwoAnnuliAgainstEnumeration)
{
  const auto q = q_const(2.0);
  const auto f = annulus_indicator(grid1(), 0) + annulus_indicator(grid1(), 1);
  // ||chi_A0||_2 = 1, ||chi_A1||_2 = sqrt 2
  const std::vector<double> norms{1.0, std::sqrt(2.0)};
  const double expect = herz_morrey_by_enumeration(norms, 0, 0.0, 0.25, 1.0);
  EXPECT_NEAR(expect, std::exp2(-0.25) * (1.0 + std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(herz_morrey_norm(f, HerzMorreyParams::on(grid1(), 0.0, 0.25, 1.0, q)), expect, 1e-9);
  EXPECT_NEAR(herz_norm(f, 0.0, 1.0, q), 1.0 + std::sqrt(2.0), 1e-9);
}

TEST(HerzMorrey, RandomAgainstEnumeration)
{
  std::mt19937_64 rng(11);
  const auto q = make_exponent(ExponentDescriptor::decay());
  const ExponentSamples qs(q, grid1());
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const auto f = random_step(grid1(), rng);
    const double alpha = u(rng), lambda = 0.5 * (1.0 + u(rng)), p = 1.5 + u(rng);
    auto params = HerzMorreyParams::on(grid1(), alpha, lambda, p, q);
    std::vector<double> norms;
    for (int k = params.k_min; k <= params.k_max; ++k)
      norms.push_back(annulus_norm(f, qs, k));
    // every cutoff beyond k_max is dominated by k_max for lambda >= 0
    EXPECT_NEAR(herz_morrey_detailed(f, params).value,
                herz_morrey_by_enumeration(norms, params.k_min, alpha, lambda, p),
                1e-9 * herz_morrey_by_enumeration(norms, params.k_min, alpha, lambda, p));
  }
}

TEST(HerzMorrey, ZeroLambdaIsHerzBitwise)
{
  std::mt19937_64 rng(13);
  const auto q = make_exponent(ExponentDescriptor::smooth(2.0, 1.0, 2.0));
  for (int t = 0; t < 10; ++t) {
    const auto f = random_step(grid1(), rng);
    EXPECT_EQ(herz_morrey_norm(f, HerzMorreyParams::on(grid1(), 0.3, 0.0, 2.0, q)), herz_norm(f, 0.3, 2.0, q));
  }
}

TEST(HerzMorrey, ConstantExponentHerzClosedForm)
{
  // lambda = 0, q = p: Herz norm is the weighted L^p norm sum_k 2^(k alpha p) int_{A_k}|f|^p
  std::mt19937_64 rng(17);
  const auto q = q_const(3.0);
  for (int t = 0; t < 5; ++t) {
    const auto f = random_step(grid1(), rng);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const int k = grid1().shell(i);
      if (k != Grid::no_annulus)
        s += std::exp2(k * 0.5 * 3.0) * std::pow(std::abs(f[i]), 3.0) * grid1().cell_volume();
    }
    EXPECT_NEAR(herz_norm(f, 0.5, 3.0, q), std::cbrt(s), 1e-9 * std::cbrt(s));
  }
}

TEST(HerzMorrey, MonotoneInLambda)
{
  const auto q = q_const(2.0);
  const auto f = annulus_indicator(grid1(), 1) + 0.5 * annulus_indicator(grid1(), 2);
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    const double v = herz_morrey_norm(f, HerzMorreyParams::on(grid1(), 0.5, lambda, 2.0, q));
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(HerzMorrey, WarningsAndErrors)
{
  const auto q = q_const(2.0);
  const auto params = HerzMorreyParams::on(grid1(), 0.0, 0.5, 1.0, q);
  const auto res = herz_morrey_detailed(ball_indicator(grid1(), 0), params);
  EXPECT_TRUE(res.origin_support);
  EXPECT_TRUE(res.tail_warning);
  EXPECT_FALSE(res.warnings.empty());

  const auto clean = herz_morrey_detailed(annulus_indicator(grid1(), 1), params);
  EXPECT_FALSE(clean.origin_support);
  EXPECT_FALSE(clean.tail_warning);

  auto bad = params;
  bad.p = 0.0;
  EXPECT_THROW(herz_morrey_norm(ball_indicator(grid1(), 0), bad), PreconditionError);
  bad = params;
  bad.lambda = -1.0;
  EXPECT_THROW(herz_morrey_norm(ball_indicator(grid1(), 0), bad), PreconditionError);
  bad = params;
  bad.k_max = 5;
  EXPECT_THROW(herz_morrey_norm(ball_indicator(grid1(), 0), bad), PreconditionError);
}

TEST(Subadditivity, RandomSequences)
{
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_real_distribution<double> th(1e-3, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(1 + t % 7);
    for (double& x : a)
      x = u(rng);
    const auto [lhs, rhs] = power_subadditivity(a, th(rng));
    EXPECT_LE(lhs, rhs * (1.0 + 1e-12));
  }
  const std::vector<double> one{3.7};
  const auto [l1, r1] = power_subadditivity(one, 0.4);
  EXPECT_NEAR(l1, r1, 1e-12);
  EXPECT_THROW(power_subadditivity(one, 0.0), PreconditionError);
  EXPECT_THROW(power_subadditivity(one, 1.5), PreconditionError);
}
