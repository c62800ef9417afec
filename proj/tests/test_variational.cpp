#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rkhs_dpp/errors.hpp"
#include "rkhs_dpp/oracle.hpp"
#include "rkhs_dpp/variational.hpp"
#include "test_support.hpp"

using namespace rdpp;
using rdpp::testing::random_kernel;
using rdpp::testing::random_split;
using rdpp::testing::rel_err;

namespace {

const OperatorSpec kTridiag = OperatorSpec::toeplitz({2.0, 1.0}, 1);
const OperatorSpec kDiagonal = OperatorSpec::diagonal(DiagonalRule::power(2.0));

KernelMatrix tri3() { return materialize(kTridiag, Window({0, 1, 2})); }

}  // namespace

TEST(FiniteA, Examples) {
  const KernelMatrix c(Window({0, 1}), Eigen::Matrix2d{{2, 1}, {1, 2}});
  const VariationalResult r = finite_a(c, 0, Window({1}));
  EXPECT_DOUBLE_EQ(r.value, 1.5);
  EXPECT_DOUBLE_EQ(r.minimizer(0), 0.5);
  EXPECT_NEAR(quadratic_form_at(c, 0, r), 1.5, 1e-15);

  const KernelMatrix id(Window::interval(0, 3), Eigen::MatrixXd::Identity(4, 4));
  const VariationalResult ri = finite_a(id, 2, Window({0, 3}));
  EXPECT_DOUBLE_EQ(ri.value, 1.0);
  EXPECT_EQ(ri.minimizer.cwiseAbs().maxCoeff(), 0.0);

  const VariationalResult re = finite_a(c, 1, Window());
  EXPECT_DOUBLE_EQ(re.value, 2.0);
  EXPECT_EQ(re.minimizer.size(), 0);
}

TEST(FiniteA, Errors) {
  const KernelMatrix c = tri3();
  try {
    finite_a(c, 0, Window({0, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OverlappingSets);
  }
  try {
    finite_a(c, 0, Window({7}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SiteNotInWindow);
  }
  EXPECT_THROW(finite_a(c, 9, Window()), Error);
}

TEST(FiniteB, Examples) {
  const KernelMatrix c(Window({0, 1}), Eigen::Matrix2d{{2, 1}, {1, 2}});
  EXPECT_NEAR(finite_b(c, 0, Window()).value, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(finite_b(tri3(), 1, Window({2})).value, 2.0 / 3.0, 1e-15);
  const KernelMatrix id(Window::interval(0, 2), Eigen::MatrixXd::Identity(3, 3));
  EXPECT_DOUBLE_EQ(finite_b(id, 0, Window({1, 2})).value, 1.0);
}

TEST(VerifyAb, Examples) {
  EXPECT_NEAR(verify_ab(tri3(), TriplePartition{1, Window({0}), Window({2})}), 0.0, 1e-15);
  const KernelMatrix id(Window::interval(0, 2), Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(verify_ab(id, TriplePartition{0, Window({2}), Window({1})}), 0.0);
  EXPECT_THROW(verify_ab(tri3(), TriplePartition{1, Window({0}), Window()}), Error);
  EXPECT_THROW(verify_ab(tri3(), TriplePartition{1, Window({0, 2}), Window({2})}), Error);
}

TEST(Property, AbIsOneAndMatchesNormalEquations) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 11;
    const KernelMatrix c = random_kernel(rng, n);
    const SiteIndex x0 = static_cast<SiteIndex>(rng() % static_cast<std::uint64_t>(n));
    const auto [r1, r2] = random_split(rng, c.window(), x0);
    EXPECT_LE(verify_ab(c, TriplePartition{x0, r1, r2}), 1e-10);
    const VariationalResult main = finite_a(c, x0, r1);
    const VariationalResult ref = oracle::oracle_minimize(c, x0, r1);
    EXPECT_LE(rel_err(main.value, ref.value), 1e-10);
    EXPECT_LE(rel_err(quadratic_form_at(c, x0, main), main.value), 1e-10);
    EXPECT_LE(a_forms(c, x0, r1).max_pairwise_relative_difference(), 1e-10);
    EXPECT_LE(b_forms(c, x0, r2).max_pairwise_relative_difference(), 1e-10);
    EXPECT_GT(main.value, 0.0);
    EXPECT_LE(main.value, c.at(x0, x0) * (1.0 + 1e-12));
  }
}

TEST(Property, MinimizerIsFirstOrderOptimal) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + trial % 8;
    const KernelMatrix c = random_kernel(rng, n);
    const auto [r1, r2] = random_split(rng, c.window(), 0);
    const VariationalResult best = finite_a(c, 0, r1);
    for (Eigen::Index i = 0; i < best.minimizer.size(); ++i) {
      for (double h : {1e-4, -1e-4}) {
        VariationalResult moved = best;
        moved.minimizer(i) += h;
        EXPECT_GE(quadratic_form_at(c, 0, moved), best.value - 1e-14);
      }
    }
  }
}

TEST(AlphaTrace, DiagonalIsConstant) {
  const ConvergenceTrace t = alpha_trace(kDiagonal, 2, SiteRule::odd().predicate(),
                                         symmetric_schedule(2, 64));
  for (const TracePoint& p : t.points()) EXPECT_EQ(p.value, 1.0 / 9.0);
}

TEST(AlphaTrace, IdentityIsOne) {
  const ConvergenceTrace t =
      alpha_trace(OperatorSpec::identity(), 0, SiteRule::odd().predicate(), symmetric_schedule(0, 16));
  for (const TracePoint& p : t.points()) EXPECT_EQ(p.value, 1.0);
}

TEST(AlphaTrace, TridiagonalFrozenValues) {
  // R1 = every site but 0 on {-n..n}: exact values 2 / (n + 1), computed independently
  // in rational arithmetic for n = 0..6.
  const SitePredicate r1 = [](SiteIndex s) { return s != 0; };
  const ConvergenceTrace t = alpha_trace(kTridiag, 0, r1, symmetric_schedule(0, 6, Growth::Linear));
  const double frozen[] = {2.0, 1.0, 2.0 / 3.0, 0.5, 0.4, 1.0 / 3.0, 2.0 / 7.0};
  ASSERT_EQ(t.size(), 7u);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_NEAR(t.value(i), frozen[i], 1e-14);
    const Window w = Window::symmetric(static_cast<SiteIndex>(i));
    EXPECT_LE(rel_err(t.value(i), oracle::oracle_minimize(materialize(kTridiag, w), 0, w.without(0)).value),
              1e-12);
  }
  EXPECT_EQ(t.direction(), Monotone::Decreasing);
}

TEST(AlphaTrace, OverlapRejected) {
  EXPECT_THROW(alpha_trace(kTridiag, 0, SiteRule::even().predicate(), symmetric_schedule(0, 4)), Error);
}

TEST(BetaTrace, DiagonalAndIdentity) {
  const ConvergenceTrace t =
      beta_trace(kDiagonal, 1, SiteRule::even().predicate(), symmetric_schedule(1, 32), 4);
  for (const TracePoint& p : t.points()) EXPECT_NEAR(p.value, 4.0, 1e-13);
  const ConvergenceTrace id =
      beta_trace(OperatorSpec::identity(), 0, SiteRule::odd().predicate(), symmetric_schedule(0, 8), 2);
  for (const TracePoint& p : id.points()) EXPECT_NEAR(p.value, 1.0, 1e-14);
}

TEST(BetaTrace, MatchedTruncationIsReciprocalOfAlpha) {
  const OperatorSpec s = OperatorSpec::conjugated_power();
  for (SiteIndex n : {1, 3, 6}) {
    const Window w = Window::symmetric(n);
    const SitePredicate r2 = [](SiteIndex x) { return x != 0; };
    const ConvergenceTrace b = beta_trace(s, 0, r2, {w}, 1);
    const double a = finite_a(materialize(s, w), 0, Window()).value;
    EXPECT_LE(rel_err(b.value(0), 1.0 / a), 1e-12);
  }
}

TEST(Property, TracesNonincreasingOnRandomBandedSpecs) {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int trial = 0; trial < 30; ++trial) {
    const OperatorSpec s = OperatorSpec::toeplitz({2.0, u(rng), u(rng), u(rng)}, 3);
    const auto schedule = symmetric_schedule(1, 32);
    const SitePredicate r1 = SiteRule::odd().predicate();
    const SitePredicate r2 = SiteRule::stride(2, 0).predicate();
    const SitePredicate r2_no_x0 = [&](SiteIndex x) { return x != 0 && r2(x); };
    const ConvergenceTrace a = alpha_trace(s, 0, r1, schedule);
    const ConvergenceTrace b = beta_trace(s, 0, r2_no_x0, schedule, 4, AmbientMode::Fixed);
    EXPECT_TRUE(a.is_monotone(Monotone::Decreasing, 1e-12 * std::abs(a.value(0))));
    EXPECT_TRUE(b.is_monotone(Monotone::Decreasing, 1e-12 * std::abs(b.value(0))));
  }
}

TEST(LimitCheck, DiagonalExact) {
  const LimitCheck lc = alpha_beta_limit_check(kDiagonal, 3, SiteRule::even().predicate(),
                                               symmetric_schedule(4, 64), 4);
  EXPECT_LE(lc.residual, 1e-15);
  EXPECT_EQ(lc.alpha.final_value(), 1.0 / 16.0);
}

TEST(LimitCheck, ConjugatedFamilyWithinBudget) {
  const LimitCheck lc = alpha_beta_limit_check(OperatorSpec::conjugated_power(), 0,
                                               SiteRule::odd().predicate(), symmetric_schedule(8, 64), 4);
  EXPECT_LE(lc.residual, 1e-3);
  EXPECT_TRUE(lc.alpha.converged());
  EXPECT_TRUE(lc.beta.converged());
}

TEST(A2Leak, ZeroForDiagonalSmallForConjugated) {
  EXPECT_EQ(a2_support_leak(kDiagonal, 0, SiteRule::odd().predicate(), Window::symmetric(8), 4), 0.0);
  const double leak = a2_support_leak(OperatorSpec::conjugated_power(), 0,
                                      SiteRule::odd().predicate(), Window::symmetric(16), 4);
  EXPECT_GE(leak, 0.0);
  EXPECT_LT(leak, 1e-3);
}
