#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pell/integral.hpp"
#include "pell/lame.hpp"
#include "pell/oracle.hpp"

namespace {

using pell::CoefficientTensor;
using pell::TensorField;
using pell::TestFamily;

TensorField identity_field(int n, int m) { return TensorField(CoefficientTensor::identity(n, m)); }

TensorField lame_field() { return TensorField(pell::lame_tensor(1.0, 1.0, 0.5, 2)); }

pell::PowerSample random_sample(int n, int m, std::mt19937_64& rng, bool complex_values) {
  std::normal_distribution<double> normal;
  auto draw = [&] {
    const double re = normal(rng);
    const double im = complex_values ? normal(rng) : 0.0;
    return pell::cplx{re, im};
  };
  pell::PowerSample s{std::vector<pell::cplx>(static_cast<std::size_t>(m)), pell::GradientState(n, m)};
  for (auto& z : s.u) z = draw();
  for (auto& z : s.grad.data()) z = draw();
  return s;
}

}  // namespace

TEST(TestFunctionGrid, VanishesOnBoundaryAndIsSeeded) {
  for (auto family : {TestFamily::sine_sum, TestFamily::oscillation}) {
    const auto v = pell::random_test_function(2, 2, 17, 42, true, family);
    ASSERT_EQ(v.values.size(), v.points() * 2u);
    bool interior_nonzero = false;
    for (std::size_t i = 0; i < v.points(); ++i) {
      for (int a = 0; a < 2; ++a) {
        if (v.on_boundary(i)) EXPECT_EQ(v.at(i, a), pell::cplx{});
        else interior_nonzero = interior_nonzero || v.at(i, a) != pell::cplx{};
      }
    }
    EXPECT_TRUE(interior_nonzero);
    EXPECT_EQ(v.values, pell::random_test_function(2, 2, 17, 42, true, family).values);
    EXPECT_NE(v.values, pell::random_test_function(2, 2, 17, 43, true, family).values);
  }
}

TEST(TestFunctionGrid, RealFieldDrawsRealValues) {
  const auto v = pell::random_test_function(3, 1, 9, 1, false);
  for (const auto& z : v.values) EXPECT_EQ(z.imag(), 0.0);
}

TEST(TestFunctionGrid, DeskLimits) {
  EXPECT_THROW(pell::random_test_function(4, 1, 9, 0, true), pell::InputError);
  EXPECT_THROW(pell::random_test_function(2, 5, 9, 0, true), pell::InputError);
  EXPECT_THROW(pell::random_test_function(2, 1, 7, 0, true), pell::InputError);
  EXPECT_THROW(pell::random_test_function(2, 1, 66, 0, true), pell::InputError);
}

TEST(DiscreteQuotient, TZeroIsRayleighQuotientAboveLegendreConstant) {
  const auto a = pell::oracle::random_elliptic_tensor(2, 2, pell::oracle::TensorStyle::legendre_perturbed, 3);
  const double c = pell::oracle::legendre_constant(a, true);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto v = pell::random_test_function(2, 2, 17, s, true);
    EXPECT_GE(pell::discrete_quotient(TensorField(a), 2.0, v), c - 1e-12);
  }
}

TEST(DiscreteQuotient, IdentityBounds) {
  for (double p : {1.3, 2.0, 3.0, 10.0}) {
    const double t = 1.0 - 2.0 / p;
    for (std::uint64_t s = 0; s < 6; ++s) {
      const auto v = pell::random_test_function(2, 3, 17, s, true, s % 2 ? TestFamily::oscillation : TestFamily::sine_sum);
      const double q = pell::discrete_quotient(identity_field(2, 3), p, v);
      EXPECT_GE(q, 1.0 - t * t - 1e-12);
      EXPECT_LE(q, 1.0 + 1e-12);
    }
  }
}

TEST(DiscreteQuotient, RealScalarFactorsThroughOneMinusTSquared) {
  const auto a = pell::oracle::random_elliptic_tensor(2, 1, pell::oracle::TensorStyle::real_symmetric, 5);
  const TensorField f(a);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto v = pell::random_test_function(2, 1, 17, s, false);
    const double q2 = pell::discrete_quotient(f, 2.0, v);
    for (double p : {1.5, 3.0, 7.0}) {
      const double t = 1.0 - 2.0 / p;
      EXPECT_NEAR(pell::discrete_quotient(f, p, v), (1.0 - t * t) * q2, 1e-12);
    }
  }
}

TEST(DiscreteQuotient, GridRefinementIsStable) {
  const TensorField f(pell::lame_tensor(1.0, 1.0, 0.5, 2));
  for (std::uint64_t s = 0; s < 3; ++s) {
    const double coarse = pell::discrete_quotient(f, 3.0, pell::random_test_function(2, 2, 33, s, false));
    const double fine = pell::discrete_quotient(f, 3.0, pell::random_test_function(2, 2, 65, s, false));
    EXPECT_LT(std::abs(fine - coarse), 0.05 * std::abs(fine)) << "seed " << s;
  }
}

TEST(DiscreteQuotient, RejectsZeroAndMismatchedInput) {
  auto v = pell::random_test_function(2, 1, 9, 0, true);
  EXPECT_THROW(pell::discrete_quotient(identity_field(2, 2), 3.0, v), pell::InputError);
  EXPECT_THROW(pell::discrete_quotient(identity_field(2, 1), 1.0, v), pell::InputError);
  for (auto& z : v.values) z = 0.0;
  EXPECT_THROW(pell::discrete_quotient(identity_field(2, 1), 3.0, v), pell::InputError);
  v.values[0] = 1.0;  // boundary point
  EXPECT_THROW(pell::discrete_quotient(identity_field(2, 1), 3.0, v), pell::InputError);
}

TEST(Falsify, IdentityHasNoCounterexample) {
  for (double p : {1.2, 3.0, 50.0}) EXPECT_FALSE(pell::falsify_integral(identity_field(2, 2), p, 500, 1));
}

TEST(Falsify, LameBeyondTheNecessaryBoundIsRefuted) {
  const double t = std::sqrt(0.75 + 0.15);  // t^2 = 0.9
  const double p = 2.0 / (1.0 - t);
  const auto hit = pell::falsify_integral(lame_field(), p, 500, 0);
  ASSERT_TRUE(hit.has_value());
  EXPECT_LE(hit->quotient, 0.0);
  EXPECT_EQ(hit->trial_seed, pell::substream_seed(0, hit->trial));
  EXPECT_NEAR(pell::discrete_quotient(lame_field(), p, hit->v), hit->quotient, 1e-14);
}

TEST(Falsify, LegendreTensorAtPTwoHasNoCounterexample) {
  const auto a = pell::oracle::random_elliptic_tensor(2, 2, pell::oracle::TensorStyle::legendre_perturbed, 8);
  EXPECT_FALSE(pell::falsify_integral(TensorField(a), 2.0, 300, 4));
}

TEST(Falsify, ReturnsLowestIndexHitDeterministically) {
  const double p = 2.0 / (1.0 - std::sqrt(0.95));
  const auto a = pell::falsify_integral(lame_field(), p, 400, 3);
  const auto b = pell::falsify_integral(lame_field(), p, 400, 3);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->trial, b->trial);
  for (std::size_t i = 0; i < a->trial; ++i) {
    const auto fam = i % 2 == 0 ? TestFamily::sine_sum : TestFamily::oscillation;
    const auto v = pell::random_test_function(2, 2, 33, pell::substream_seed(3, i), false, fam);
    EXPECT_GT(pell::discrete_quotient(lame_field(), p, v), 0.0) << "trial " << i;
  }
}

TEST(Falsify, RejectsBadArguments) {
  EXPECT_THROW(pell::falsify_integral(identity_field(2, 1), 3.0, 0, 0), pell::InputError);
  EXPECT_THROW(pell::falsify_integral(identity_field(1, 1), 3.0, 10, 0), pell::InputError);
}

TEST(PowerIdentity, PEqualsTwoIsExact) {
  std::mt19937_64 rng(1);
  std::vector<pell::PowerSample> s;
  for (int i = 0; i < 100; ++i) s.push_back(random_sample(3, 2, rng, true));
  const auto r = pell::power_identity_residual(s, 2.0);
  EXPECT_LE(r.residual, 1e-12);
  EXPECT_TRUE(r.bounds_hold);
}

TEST(PowerIdentity, RealPositiveScalarChainRule) {
  std::mt19937_64 rng(2);
  std::vector<pell::PowerSample> s;
  for (int i = 0; i < 100; ++i) {
    auto smp = random_sample(2, 1, rng, false);
    smp.u[0] = std::abs(smp.u[0].real()) + 0.1;
    s.push_back(smp);
  }
  const double p = 5.0;
  const auto r = pell::power_identity_residual(s, p);
  EXPECT_LE(r.residual, 1e-10);
  for (const auto& smp : s) {
    const double u = smp.u[0].real();
    const double lhs = 0.25 * p * p * std::pow(u, p - 2) * smp.grad.norm_squared();
    pell::PowerSample one = smp;
    EXPECT_LE(pell::power_identity_residual({one}, p).residual, 1e-10 * std::max(1.0, lhs));
  }
}

TEST(PowerIdentity, RandomComplexSamples) {
  std::mt19937_64 rng(3);
  std::vector<pell::PowerSample> s;
  for (int i = 0; i < 1000; ++i) s.push_back(random_sample(3, 3, rng, true));
  const auto r = pell::power_identity_residual(s, 3.7);
  EXPECT_LT(r.residual, 1e-10);
  EXPECT_TRUE(r.bounds_hold);
  EXPECT_EQ(r.skipped, 0u);
}

TEST(PowerIdentity, ZeroSamplesAreSkipped) {
  std::mt19937_64 rng(4);
  auto smp = random_sample(2, 2, rng, true);
  smp.u.assign(2, pell::cplx{});
  EXPECT_EQ(pell::power_identity_residual({smp}, 3.0).skipped, 1u);
}

TEST(LambdaP, IdentityAtPTwoIsOne) {
  EXPECT_NEAR(pell::lambda_p_estimate(identity_field(2, 2), 2.0, 20, 1), 1.0, 1e-12);
}

TEST(LambdaP, IdentityEstimateWithinPowerIdentityBounds) {
  // Re<grad u, grad u + (p-2) zeta> lies between |grad u|^2 and (p-1)|grad u|^2 for p >= 2.
  for (double p : {2.5, 4.0, 9.0}) {
    const double est = pell::lambda_p_estimate(identity_field(2, 2), p, 40, 2);
    EXPECT_GE(est, 1.0 - 1e-12);
    EXPECT_LE(est, p - 1.0 + 1e-12);
  }
}

TEST(LambdaP, PositiveForLameInsideRange) {
  EXPECT_GT(pell::lambda_p_estimate(lame_field(), 8.0, 200, 3), 0.0);
  EXPECT_GT(pell::lambda_p_estimate(lame_field(), 1.2, 200, 3), 0.0);
}
