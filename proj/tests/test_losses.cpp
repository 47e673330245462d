#include <gtest/gtest.h>

#include "doco/losses.hpp"
#include "oracles.hpp"

using doco::ConvexityProfile;
using doco::FeasibleBall;
using doco::LossFunction;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace {
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v1(double a) { return Vec::Constant(1, a); }

Vec central_difference(const LossFunction<double>& f, const Vec& x) {
  const double h = 1e-5 * (1.0 + x.norm());
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (doco::value(f, a) - doco::value(f, b)) / (2 * h);
  }
  return g;
}
}  // namespace

TEST(ConvexityProfile, FillsAlphaFromEllOverGSquared) {
  ConvexityProfile<double> p(2.0, 3.0, 4.0);
  EXPECT_DOUBLE_EQ(p.alpha(), 2.0 / 16.0);
  ConvexityProfile<double> q(2.0, 3.0, 4.0, 0.7);
  EXPECT_DOUBLE_EQ(q.alpha(), 0.7);
  EXPECT_DOUBLE_EQ(q.condition_number(), 1.5);
}

TEST(ConvexityProfile, RejectsInconsistentConstants) {
  EXPECT_THROW(ConvexityProfile<double>(2.0, 1.0, 1.0), doco::ContractViolation);
  EXPECT_THROW(ConvexityProfile<double>(1.0, 0.0, 1.0), doco::ContractViolation);
  EXPECT_THROW(ConvexityProfile<double>(1.0, 1.0, 0.0), doco::ContractViolation);
  EXPECT_THROW(ConvexityProfile<double>(-1.0, 1.0, 1.0), doco::ContractViolation);
  EXPECT_THROW(ConvexityProfile<double>(1.0, 1.0, 1.0, -0.1), doco::ContractViolation);
}

TEST(Losses, ValueExamples) {
  FeasibleBall<double> B(1.0, 2);
  const auto f = LossFunction<double>::tracking_quadratic(v2(1, 0), B);
  EXPECT_DOUBLE_EQ(doco::value(f, v2(1, 0)), 0.0);
  EXPECT_DOUBLE_EQ(doco::value(f, v2(0, 0)), 0.5);
  FeasibleBall<double> B1(1.0, 1);
  const auto s = LossFunction<double>::scalar_adversarial(0.2, 0.1, B1);
  EXPECT_NEAR(doco::value(s, v1(0.5)), 0.09, 1e-15);
}

TEST(Losses, GradientExamples) {
  FeasibleBall<double> B(2.0, 2);
  const auto f = LossFunction<double>::tracking_quadratic(v2(1, 0), B);
  EXPECT_TRUE(doco::gradient(f, v2(1, 0)).isZero());
  EXPECT_TRUE(doco::gradient(f, v2(0, 0)).isApprox(v2(-1, 0)));
  const auto g = LossFunction<double>::general_least_squares(Mat::Identity(2, 2), v2(2, 0), B, 1, 1);
  EXPECT_TRUE(doco::gradient(g, v2(0, 0)).isApprox(v2(-2, 0)));
}

TEST(Losses, HessianExamples) {
  FeasibleBall<double> B(1.0, 2);
  const auto f = LossFunction<double>::tracking_quadratic(v2(0.1, 0.2), B);
  EXPECT_TRUE(doco::hessian(f, v2(0.5, -0.3)).matrix().isApprox(Mat::Identity(2, 2)));
  Mat A = Mat::Zero(2, 2);
  A.diagonal() << 2, 1;
  const auto g = LossFunction<double>::general_least_squares(A, v2(0.5, 0), B, 1, 4);
  Mat H = Mat::Zero(2, 2);
  H.diagonal() << 4, 1;
  EXPECT_TRUE(doco::hessian(g, v2(0.3, 0.3)).matrix().isApprox(H));
  FeasibleBall<double> B1(1.0, 1);
  const auto s = LossFunction<double>::scalar_adversarial(-0.2, 0.1, B1);
  EXPECT_DOUBLE_EQ(doco::hessian(s, v1(0.4)).matrix()(0, 0), 2.0);
}

TEST(Losses, DeclaredGradientBounds) {
  FeasibleBall<double> B(3.0, 2);
  EXPECT_DOUBLE_EQ(LossFunction<double>::tracking_quadratic(v2(0, 0), B).profile().G(), 6.0);
  FeasibleBall<double> B1(2.0, 1);
  const auto s = LossFunction<double>::scalar_adversarial(0.2, 0.1, B1);
  EXPECT_DOUBLE_EQ(s.profile().G(), 2 * (2.0 + 0.2));
  EXPECT_DOUBLE_EQ(s.profile().ell(), 2.0);
  // ell=1, u=4: sqrt(u)(u/ell+1)D dominates sqrt(u)(sqrt(u)+1)D
  EXPECT_DOUBLE_EQ(LossFunction<double>::gls_gradient_bound(1.0, 4.0, 1.0), 2.0 * 5.0);
  // ell=u=4: sqrt(u)(sqrt(u)+1)D = 6 beats sqrt(u)(u/ell+1)D = 4
  EXPECT_DOUBLE_EQ(LossFunction<double>::gls_gradient_bound(4.0, 4.0, 1.0), 6.0);
}

TEST(Losses, GradientBoundHoldsOverBall) {
  doco::Rng rng(8);
  FeasibleBall<double> B(1.0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const double ell = rng.uniform(0.5, 3.0);
    const double u = ell * rng.uniform(1.0, 4.0);
    const Mat A = oracle::design(rng, 5, 3, ell, u);
    const Vec y = rng.in_ball(5, 1.0);
    const auto f = LossFunction<double>::general_least_squares(A, y, B, ell, u);
    for (int k = 0; k < 50; ++k) {
      const Vec x = rng.in_ball(3, 1.0);
      EXPECT_LE(doco::gradient(f, x).norm(), f.profile().G() * (1 + 1e-12));
    }
  }
}

TEST(Losses, FactoryPreconditions) {
  FeasibleBall<double> B(1.0, 2);
  EXPECT_THROW(LossFunction<double>::tracking_quadratic(v2(2, 0), B), doco::ContractViolation);
  EXPECT_THROW(LossFunction<double>::tracking_quadratic(v1(0), B), doco::ContractViolation);
  Mat A = Mat::Zero(2, 2);
  A.diagonal() << 3, 1;
  EXPECT_THROW(LossFunction<double>::general_least_squares(A, v2(0, 0), B, 1, 4),
               doco::ContractViolation);  // A'A has eigenvalue 9 > u
  EXPECT_THROW(LossFunction<double>::general_least_squares(Mat::Identity(2, 2), v2(2, 0), B, 1, 1),
               doco::ContractViolation);  // ||y|| > D
  FeasibleBall<double> B1(1.0, 1);
  EXPECT_THROW(LossFunction<double>::scalar_adversarial(0.5, 0.1, B1), doco::ContractViolation);
  EXPECT_THROW(LossFunction<double>::scalar_adversarial(0.1, 0.1, B), doco::ContractViolation);
}

TEST(Losses, EvaluationDimensionMismatchThrows) {
  FeasibleBall<double> B(1.0, 2);
  const auto f = LossFunction<double>::tracking_quadratic(v2(0, 0), B);
  EXPECT_THROW(doco::value(f, v1(0)), doco::ContractViolation);
  EXPECT_THROW(doco::gradient(f, v1(0)), doco::ContractViolation);
  EXPECT_THROW(doco::hessian(f, v1(0)), doco::ContractViolation);
}

TEST(Losses, GradientsMatchFiniteDifferences) {
  doco::Rng rng(1234);
  FeasibleBall<double> B(2.0, 4);
  FeasibleBall<double> B1(2.0, 1);
  const Mat A = oracle::design(rng, 6, 4, 0.5, 3.0);
  const std::vector<LossFunction<double>> fs = {
      LossFunction<double>::tracking_quadratic(rng.in_ball(4, 2.0), B),
      LossFunction<double>::general_least_squares(A, rng.in_ball(6, 2.0), B, 0.5, 3.0),
  };
  for (const auto& f : fs) {
    for (int k = 0; k < 100; ++k) {
      const Vec x = rng.in_ball(4, 2.0);
      const Vec g = doco::gradient(f, x);
      const Vec fd = central_difference(f, x);
      EXPECT_LE((g - fd).norm(), 1e-6 * std::max(1.0, g.norm()));
    }
  }
  const auto s = LossFunction<double>::scalar_adversarial(0.3, 0.2, B1);
  for (int k = 0; k < 100; ++k) {
    const Vec x = rng.in_ball(1, 2.0);
    const Vec g = doco::gradient(s, x);
    EXPECT_LE((g - central_difference(s, x)).norm(), 1e-6 * std::max(1.0, g.norm()));
  }
}

TEST(Losses, ConvexAlongSegments) {
  doco::Rng rng(77);
  FeasibleBall<double> B(1.0, 3);
  const auto f = LossFunction<double>::general_least_squares(oracle::design(rng, 4, 3, 1, 2),
                                                             rng.in_ball(4, 1.0), B, 1, 2);
  for (int k = 0; k < 1000; ++k) {
    const Vec x = rng.in_ball(3, 1.0);
    const Vec y = rng.in_ball(3, 1.0);
    EXPECT_LE(doco::value(f, Vec((x + y) / 2)),
              0.5 * doco::value(f, x) + 0.5 * doco::value(f, y) + 1e-12);
  }
}

TEST(ClassInequalities, TrackingQuadraticCertified) {
  FeasibleBall<double> B(1.0, 2);
  const auto f = LossFunction<double>::tracking_quadratic(v2(0.3, -0.5), B);
  const auto r = doco::check_class_inequalities(f, f.profile(), B, 2000, 1);
  EXPECT_TRUE(r.certified());
  ASSERT_TRUE(r.strongly_convex && r.quadratic_bound && r.smooth && r.exp_concave_first_order);
  // quadratics meet the strong convexity and Hessian-weighted bounds with equality
  EXPECT_LE(std::abs(*r.quadratic_bound), 1e-12);
  EXPECT_LE(std::abs(*r.strongly_convex), 1e-12);
  EXPECT_LE(std::abs(*r.smooth), 1e-12);
}

TEST(ClassInequalities, LeastSquaresHessianBoundIsExact) {
  doco::Rng rng(5);
  FeasibleBall<double> B(1.0, 3);
  const auto f = LossFunction<double>::general_least_squares(oracle::design(rng, 5, 3, 0.5, 2),
                                                             rng.in_ball(5, 1.0), B, 0.5, 2);
  const auto r = doco::check_class_inequalities(f, f.profile(), B, 2000, 2);
  EXPECT_TRUE(r.certified());
  EXPECT_LE(std::abs(*r.quadratic_bound), 1e-12);
}

TEST(ClassInequalities, AdversaryMidpointExpConcave) {
  const double sigma = 0.3;
  FeasibleBall<double> B(1.0, 1);
  const auto f = LossFunction<double>::scalar_adversarial(2 * sigma, sigma, B);
  EXPECT_NEAR(f.profile().G(), 2 * 1.0 + 4 * sigma, 1e-15);
  EXPECT_NEAR(f.profile().alpha(), 2.0 / (f.profile().G() * f.profile().G()), 1e-15);
  const auto r = doco::check_class_inequalities(f, f.profile(), B, 5000, 3);
  ASSERT_TRUE(r.exp_concave_midpoint.has_value());
  EXPECT_LE(*r.exp_concave_midpoint, 1e-12);
  EXPECT_TRUE(r.certified());
}

TEST(ClassInequalities, DetectsOverstatedCurvature) {
  FeasibleBall<double> B(1.0, 2);
  const auto f = LossFunction<double>::tracking_quadratic(v2(0, 0), B);
  // claims ell = 3 and a huge alpha; a unit quadratic satisfies neither
  ConvexityProfile<double> wrong(3.0, 3.0, 2.0, 50.0);
  const auto r = doco::check_class_inequalities(f, wrong, B, 500, 4);
  EXPECT_FALSE(r.certified());
  EXPECT_GT(*r.strongly_convex, 1e-3);
  EXPECT_GT(*r.exp_concave_midpoint, 1e-3);
}

TEST(ClassInequalities, RejectsBadSampleCount) {
  FeasibleBall<double> B(1.0, 2);
  const auto f = LossFunction<double>::tracking_quadratic(v2(0, 0), B);
  EXPECT_THROW(doco::check_class_inequalities(f, f.profile(), B, 0, 1), doco::ContractViolation);
}
