#include "agess/shrinkage.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "support/two_arc.hpp"
#include "test_util.hpp"

using namespace agess;

namespace {

EllipseProposal make_proposal() {
  Eigen::VectorXd x(2), z(2), mu(2);
  x << 2.0, -1.0;
  z << 0.5, 3.0;
  mu << 1.0, 1.0;
  return EllipseProposal{x, z, mu};
}

}  // namespace

TEST(PointOnEllipse, EndpointsAndReflection) {
  const EllipseProposal prop = make_proposal();
  EXPECT_TRUE(point_on_ellipse(prop, 0.0) == prop.x);
  EXPECT_TRUE(point_on_ellipse(prop, 0.5 * std::numbers::pi)
                  .isApprox(prop.z, 1e-15));
  EXPECT_TRUE(point_on_ellipse(prop, std::numbers::pi)
                  .isApprox(2.0 * prop.center - prop.x, 1e-14));
}

TEST(Shrink, WholeCircleAcceptsFirstAngle) {
  const EllipseProposal prop = make_proposal();
  Rng rng = make_rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto result =
        shrink(prop, [](const Eigen::VectorXd&) { return true; }, rng);
    EXPECT_EQ(result.loop_count, 1);
    EXPECT_EQ(result.evals, 1);
    EXPECT_GE(result.theta, 0.0);
    EXPECT_LT(result.theta, 2.0 * std::numbers::pi);
  }
}

TEST(Shrink, TriangleInequalityBoundAlwaysAcceptsOnCenteredEllipse) {
  Eigen::VectorXd x(2), z(2);
  x << 2.0, -1.0;
  z << 0.5, 3.0;
  const EllipseProposal prop{x, z, Eigen::VectorXd::Zero(2)};
  const double bound = x.norm() + z.norm();
  Rng rng = make_rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto result = shrink(
        prop, [&](const Eigen::VectorXd& v) { return v.norm() <= bound; }, rng);
    EXPECT_EQ(result.loop_count, 1);
  }
}

TEST(Shrink, UpperHalfPlanePredicateAlwaysSatisfiedAtExit) {
  // x = (0, 1), z = (1, 0), centered at the origin; the slice is the set of
  // points with positive second coordinate.
  Eigen::VectorXd x(2), z(2);
  x << 0.0, 1.0;
  z << 1.0, 0.0;
  const EllipseProposal prop{x, z, Eigen::VectorXd::Zero(2)};
  Rng rng = make_rng(3);
  long long total_loops = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto result = shrink(
        prop, [](const Eigen::VectorXd& v) { return v[1] > 0.0; }, rng);
    ASSERT_GT(result.point[1], 0.0);
    ASSERT_GT(result.theta, -2.0 * std::numbers::pi);
    ASSERT_LT(result.theta, 2.0 * std::numbers::pi);
    total_loops += result.loop_count;
  }
  // Half the circle is in the slice; the shrinking bracket needs a little
  // under two proposals per transition on average.
  const double mean_loops = static_cast<double>(total_loops) / 100000.0;
  EXPECT_GT(mean_loops, 1.5);
  EXPECT_LT(mean_loops, 2.5);
}

TEST(Shrink, MaxIterExceededThrowsWithStatistics) {
  const EllipseProposal prop = make_proposal();
  Rng rng = make_rng(4);
  try {
    shrink(prop, [](const Eigen::VectorXd&) { return false; }, rng, 50);
    FAIL() << "expected ShrinkError";
  } catch (const ShrinkError& err) {
    EXPECT_EQ(err.loop_count, 50);
    EXPECT_LE(err.theta_min, 0.0);
    EXPECT_GE(err.theta_max, 0.0);
  }
}

TEST(Shrink, ScalarVariantMatchesVectorVariantWordForWord) {
  // Same predicate geometry in one dimension through both code paths.
  Rng rng_a = make_rng(5);
  Rng rng_b = make_rng(5);
  const auto accept_1d = [](double v) { return v > 0.25; };
  Eigen::VectorXd x1(1), z1(1), c1(1);
  x1 << 0.9;
  z1 << -0.4;
  c1 << 0.1;
  const EllipseProposal prop{x1, z1, c1};
  for (int i = 0; i < 200; ++i) {
    const auto vec = shrink(
        prop, [&](const Eigen::VectorXd& v) { return accept_1d(v[0]); }, rng_a);
    const auto sca = shrink_1d(0.9, -0.4, 0.1, accept_1d, rng_b);
    EXPECT_DOUBLE_EQ(vec.theta, sca.theta);
    EXPECT_DOUBLE_EQ(vec.point[0], sca.point[0]);
    EXPECT_EQ(vec.loop_count, sca.loop_count);
  }
}

TEST(Shrink, DetailedBalanceOnTwoArcSlice) {
  // Desk-size version of the reversibility check: binned transition flows
  // between two disjoint arcs must be symmetric.
  twoarc::Arcs arcs;
  Rng rng = make_rng(6);
  const Eigen::MatrixXd flow = twoarc::flow_matrix(arcs, 12, 200000, rng);
  const double p = testutil::flow_symmetry_pvalue(flow);
  EXPECT_GT(p, 1e-3);
}
