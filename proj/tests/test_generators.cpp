#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hodd/generators.hpp"
#include "hodd/published.hpp"
#include "oracles.hpp"

using hodd::PauliString;

namespace {

const auto kGroup = hodd::DecouplingGroup::single_qubit_universal();
const auto kAxes = hodd::weight_one_axes(1);

std::vector<PauliString> xz() { return {PauliString::parse("X"), PauliString::parse("Z")}; }

}  // namespace

TEST(Traversal, XzWalkVisitsEveryElement) {
  const auto g = xz();
  const auto labels = hodd::traversal_pattern(kGroup, g, 7);
  ASSERT_EQ(labels.size(), 7u);
  const char* expected[] = {"I", "X", "Y", "Z", "I", "X", "Y"};
  for (std::size_t i = 0; i < labels.size(); ++i) EXPECT_EQ(kGroup.element(labels[i]).str(), expected[i]);
  const std::vector<PauliString> xx{PauliString::parse("X")};
  EXPECT_THROW(hodd::traversal_pattern(kGroup, xx, 4), hodd::PauliError);
}

TEST(Softmax, IsPositiveAndNormalizedForExtremeInputs) {
  const std::vector<double> theta{800.0, -800.0, 0.0, 1.0};
  const auto d = hodd::softmax_map(theta);
  double sum = 0.0;
  for (double v : d) {
    EXPECT_GE(v, 0.0);
    sum += v;
  }
  EXPECT_NEAR(sum, 1.0, 1e-15);
  EXPECT_NEAR(d[0], 1.0, 1e-15);
}

TEST(Residuals, MatchScaledMoments) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = oracle::random_schedule(rng, 3 * (1 + trial % 5) + 1);
    const int order = 1 + trial % 5;
    const auto d = s.intervals();
    const auto r = hodd::residual_vector(d, s.labels(), kGroup, kAxes, order);
    for (std::size_t a = 0; a < kAxes.size(); ++a) {
      for (int m = 0; m < order; ++m) {
        EXPECT_NEAR(r[a * order + m], (m + 1) * oracle::moment_by_quadrature(s, kAxes[a], m), 1e-12);
      }
    }
  }
}

TEST(Residuals, AnalyticJacobianMatchesCentralDifferences) {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> normal;
  for (int k = 1; k <= 6; ++k) {
    const std::size_t n = 3 * k + 1;
    const auto labels = hodd::traversal_pattern(kGroup, xz(), n);
    std::vector<double> theta(n);
    for (auto& t : theta) t = normal(rng);
    const auto jac = hodd::residual_jacobian(theta, labels, kGroup, kAxes, k);
    const double h = 1e-6;
    for (std::size_t j = 0; j < n; ++j) {
      auto tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      const auto rp = hodd::residual_vector(hodd::softmax_map(tp), labels, kGroup, kAxes, k);
      const auto rm = hodd::residual_vector(hodd::softmax_map(tm), labels, kGroup, kAxes, k);
      for (std::size_t i = 0; i < rp.size(); ++i) {
        EXPECT_NEAR(jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), (rp[i] - rm[i]) / (2 * h), 1e-8)
            << "K = " << k << " row " << i << " col " << j;
      }
    }
  }
}

TEST(Optimizer, RecoversEqualSpacingAtFirstOrder) {
  hodd::OptimizerConfig config;
  config.order = 1;
  config.restarts = 1;
  const auto g = hodd::optimize_schedule(config);
  ASSERT_EQ(g.result.intervals.size(), 4u);
  for (double d : g.result.intervals) EXPECT_NEAR(d, 0.25, 1e-10);
  EXPECT_LE(g.result.cost, 1e-20);
  EXPECT_TRUE(g.result.verification.pass);
}

TEST(Optimizer, SecondOrderMatchesPublishedUpToMirror) {
  hodd::OptimizerConfig config;
  config.order = 2;
  const auto g = hodd::optimize_schedule(config);
  ASSERT_TRUE(g.result.converged);
  const auto& pub = hodd::published_intervals(2);
  ASSERT_EQ(g.result.intervals.size(), pub.size());
  double direct = 0.0, mirrored = 0.0;
  for (std::size_t i = 0; i < pub.size(); ++i) {
    direct = std::max(direct, std::abs(g.result.intervals[i] - pub[i]));
    mirrored = std::max(mirrored, std::abs(g.result.intervals[pub.size() - 1 - i] - pub[i]));
  }
  EXPECT_LT(std::min(direct, mirrored), 1e-6);
}

TEST(Optimizer, ForwardDifferenceJacobianAlsoConverges) {
  hodd::OptimizerConfig config;
  config.order = 3;
  config.jacobian = hodd::JacobianMode::forward_difference;
  const auto g = hodd::optimize_schedule(config);
  EXPECT_TRUE(g.result.verification.pass);
  EXPECT_LE(g.result.cost, 1e-20);
}

TEST(Optimizer, ResultDoesNotDependOnWorkerCount) {
  hodd::OptimizerConfig config;
  config.order = 4;
  config.restarts = 6;
  config.seed = 99;
  const auto serial = hodd::optimize_schedule(config);
  config.jobs = 3;
  const auto parallel = hodd::optimize_schedule(config);
  EXPECT_EQ(serial.result.intervals, parallel.result.intervals);
  EXPECT_EQ(serial.result.restart, parallel.result.restart);
  EXPECT_EQ(serial.schedule, parallel.schedule);
}

TEST(Optimizer, ReportsBudgetExhaustion) {
  hodd::OptimizerConfig config;
  config.order = 6;
  config.restarts = 1;
  config.max_evaluations = 3;
  const auto g = hodd::optimize_schedule(config);
  EXPECT_FALSE(g.result.converged);
  EXPECT_EQ(g.result.stop_reason, hodd::StopReason::budget);
  EXPECT_LE(g.result.evaluations, 3);
}

TEST(Optimizer, RejectsInvalidConfigs) {
  hodd::OptimizerConfig config;
  config.order = 0;
  EXPECT_ANY_THROW(hodd::optimize_schedule(config));
  config.order = 2;
  config.restarts = 0;
  EXPECT_ANY_THROW(hodd::optimize_schedule(config));
}

TEST(Uhrig, TimingsAndSingleAxisOrder) {
  const std::vector<PauliString> yz{PauliString::parse("Y"), PauliString::parse("Z")};
  for (int n = 1; n <= 8; ++n) {
    const auto s = hodd::udd_schedule(n, PauliString::parse("X"));
    ASSERT_EQ(s.interior_pulse_count(), static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) {
      const double expect = std::pow(std::sin(j * M_PI / (2.0 * n + 2.0)), 2);
      EXPECT_NEAR(s.cut_times()[static_cast<std::size_t>(j - 1)], expect, 1e-15);
    }
    EXPECT_EQ(s.pulse_count(), static_cast<std::size_t>(n % 2 == 1 ? n + 1 : n));
    EXPECT_TRUE(hodd::verify_order(s, yz, n).pass) << "UDD" << n;
    EXPECT_FALSE(hodd::verify_order(s, yz, n + 1, 1e-6).pass) << "UDD" << n;
  }
}

TEST(Quadratic, PulseCountsAndOrders) {
  const std::size_t expected_pulses[] = {4, 8, 16, 24, 36};
  for (int k = 1; k <= 5; ++k) {
    const auto s = hodd::qdd_schedule(k);
    EXPECT_EQ(s.pulse_count(), expected_pulses[k - 1]) << "QDD" << k;
    EXPECT_LE(s.pulse_count(), static_cast<std::size_t>((k + 1) * (k + 1)));
    EXPECT_TRUE(hodd::verify_order(s, kAxes, k).pass) << "QDD" << k;
    EXPECT_FALSE(hodd::verify_order(s, kAxes, k + 1, 1e-6).pass) << "QDD" << k;
  }
}

TEST(Periodic, Xy4IsFirstOrderWithFourPulses) {
  const auto s = hodd::periodic_schedule(4);
  EXPECT_EQ(s.pulse_count(), 4u);
  EXPECT_TRUE(hodd::verify_order(s, kAxes, 1).pass);
  EXPECT_FALSE(hodd::verify_order(s, kAxes, 2, 1e-6).pass);
}
