#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hodd/analysis.hpp"
#include "hodd/generators.hpp"
#include "hodd/published.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace {

std::vector<double> map_values(const std::vector<double>& t, double (*f)(double)) {
  std::vector<double> v;
  for (double x : t) v.push_back(f(x));
  return v;
}

}  // namespace

TEST(LogGrid, EndpointsAndSpacing) {
  const auto g = hodd::log_grid(1e-4, 1.0, 41);
  ASSERT_EQ(g.size(), 41u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-4);
  EXPECT_DOUBLE_EQ(g.back(), 1.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(std::log10(g[i] / g[i - 1]), 0.1, 1e-12);
  EXPECT_THROW(hodd::log_grid(0.0, 1.0, 10), hodd::AnalysisError);
  EXPECT_THROW(hodd::log_grid(1.0, 0.1, 10), hodd::AnalysisError);
}

TEST(FitLine, ExactPowerLaw) {
  const auto t = hodd::log_grid(1e-3, 1.0, 31);
  const auto v = map_values(t, [](double x) { return 5.0 * x * x * x; });
  const auto fit = hodd::fit_line(t, v, 0, t.size() - 1);
  EXPECT_NEAR(fit.slope, 3.0, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log10(5.0), 1e-12);
  EXPECT_LT(fit.slope_stderr, 1e-10);
  EXPECT_EQ(fit.points(), 31u);
  EXPECT_THROW(hodd::fit_window(t, v, 0.5, 0.6, 6), hodd::AnalysisError);
}

TEST(FitSlopes, TwoTermCurveGivesBothSlopesAndCrossover) {
  // e = 1e-5 T^2 + T^4 crosses over at T = 10^{-2.5}.
  const auto t = hodd::log_grid(1e-5, 1.0, 151);
  const auto v = map_values(t, [](double x) { return 1e-5 * x * x + x * x * x * x; });
  const auto fit = hodd::fit_slopes(t, v);
  EXPECT_NEAR(fit.small_t.slope, 2.0, 0.01);
  EXPECT_NEAR(fit.large_t.slope, 4.0, 0.01);
  ASSERT_TRUE(fit.crossover.has_value());
  EXPECT_NEAR(std::log10(*fit.crossover), -2.5, 0.05);
}

TEST(FitSlopes, SinglePowerLawHasNoCrossover) {
  const auto t = hodd::log_grid(1e-4, 1.0, 81);
  const auto v = map_values(t, [](double x) { return 1e-3 * x * x * x; });
  const auto fit = hodd::fit_slopes(t, v);
  EXPECT_NEAR(fit.small_t.slope, 3.0, 1e-9);
  EXPECT_NEAR(fit.large_t.slope, 3.0, 1e-9);
  EXPECT_FALSE(fit.crossover.has_value());
}

TEST(FitSlopes, DropsFloorAndSaturation) {
  const auto t = hodd::log_grid(1e-6, 10.0, 141);
  std::vector<double> v;
  for (double x : t) v.push_back(std::min(2.0, std::max(1e-18, 1e-2 * x * x)));
  const auto fit = hodd::fit_slopes(t, v);
  EXPECT_NEAR(fit.small_t.slope, 2.0, 1e-9);
  EXPECT_NEAR(fit.large_t.slope, 2.0, 1e-9);
  EXPECT_GE(fit.small_t.t_min, 1e-7 * (1 - 1e-9));
  EXPECT_LT(fit.large_t.t_max, 10.0);
  const std::vector<double> flat(t.size(), 1e-18);
  EXPECT_THROW(hodd::fit_slopes(t, flat), hodd::AnalysisError);
}

TEST(Truncation, KeepsLeadingDigits) {
  EXPECT_DOUBLE_EQ(hodd::truncate_decimal(0.171535165408627, 3), 0.171);
  EXPECT_DOUBLE_EQ(hodd::truncate_decimal(0.078464834591373, 5), 0.07846);
  EXPECT_DOUBLE_EQ(hodd::truncate_decimal(0.125, 2), 0.12);
  EXPECT_DOUBLE_EQ(hodd::truncate_decimal(0.25, 6), 0.25);
  const auto& d = hodd::published_intervals(2);
  const auto cuts = hodd::truncate_intervals(d, 3);
  ASSERT_EQ(cuts.size(), d.size() - 1);
  EXPECT_DOUBLE_EQ(cuts[0], 0.078);
  EXPECT_NEAR(cuts[1], 0.078 + 0.124, 1e-15);  // printed as 0.124999999999999
  EXPECT_NEAR(cuts[3], 0.078 + 0.124 + 0.171 + 0.250, 1e-15);
  EXPECT_THROW(hodd::truncate_intervals(std::vector<double>{0.0004, 0.9996}, 3), hodd::ScheduleError);
  EXPECT_THROW(hodd::truncate_cut_times(std::vector<double>{0.1001, 0.1002}, 3), hodd::ScheduleError);
}

TEST(Divergence, InterpolatesCrossingOfRatioBand) {
  const auto t = hodd::log_grid(1e-4, 1.0, 41);
  std::vector<double> ref, pert;
  for (double x : t) {
    ref.push_back(x * x * x);
    pert.push_back(x * x * x + 1e-6 * x);  // ratio 2 where x^2 = 1e-6
  }
  bool everywhere = true;
  const auto tc = hodd::divergence_time(t, ref, pert, 2.0, &everywhere);
  ASSERT_TRUE(tc.has_value());
  EXPECT_FALSE(everywhere);
  EXPECT_NEAR(std::log10(*tc), -3.0, 0.1);
  EXPECT_FALSE(hodd::divergence_time(t, ref, ref, 2.0).has_value());
}

TEST(Jitter, ExactTimingsNeverDiverge) {
  const auto model = hodd::sample_model(1, 1e-6);
  const auto t = hodd::log_grid(1e-3, 1.0, 13);
  const auto xy4 = hodd::periodic_schedule(4);
  const auto study = hodd::jitter_study(xy4, 3, model, t);
  EXPECT_FALSE(study.divergence_time.has_value());
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(study.full[i], study.truncated[i]);
}

TEST(Jitter, TimingOffsetOnXy4GivesLinearFloor) {
  // Shifting one XY4 cut by delta leaves |M_0| = 2 delta on two axes, so the
  // perturbed error approaches 2 delta J T once the T^2 term falls below it.
  const auto model = hodd::sample_model(1, 1e-6);
  const auto xy4 = hodd::periodic_schedule(4);
  auto cuts = xy4.cut_times();
  const double delta = 1e-3;
  cuts[0] += delta;
  const auto shifted = xy4.with_cut_times(cuts);
  const double t = 1e-4;
  const double err = hodd::evolve(shifted, model, t).error;
  EXPECT_LE(err, 2 * delta * 1e-6 * t * 1.01);
  EXPECT_GE(err, 0.2 * delta * 1e-6 * t);
}

TEST(Certificate, TelescopesToOneAndBoundsMoments) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int order = 1 + static_cast<int>(rng() % 6);
    const int r = static_cast<int>(rng() % static_cast<std::uint64_t>(order));
    std::vector<double> flips;
    while (static_cast<int>(flips.size()) < r) flips.push_back(u(rng));
    std::sort(flips.begin(), flips.end());
    if (std::adjacent_find(flips.begin(), flips.end()) != flips.end()) continue;
    const int sign = (rng() & 1) ? 1 : -1;
    const auto c = hodd::certify_lower_bound(flips, order, sign);
    EXPECT_NEAR(c.value, 1.0, 1e-12);
    // sum_m c_m M_m = 1 is the same identity written against the moments.
    double dot = 0.0, worst = 0.0;
    for (std::size_t m = 0; m < c.derivative_coefficients.size(); ++m) {
      dot += c.derivative_coefficients[m] * c.moments[m];
    }
    for (double mm : c.moments) worst = std::max(worst, std::abs(mm));
    EXPECT_NEAR(dot, 1.0, 1e-8);
    EXPECT_GE(worst, c.moment_bound * (1 - 1e-12));
  }
  EXPECT_THROW(hodd::certify_lower_bound(std::vector<double>{0.3, 0.6}, 2), hodd::AnalysisError);
  EXPECT_THROW(hodd::certify_lower_bound(std::vector<double>{0.6, 0.3}, 3), hodd::AnalysisError);
}

TEST(Certificate, MomentsMatchQuadrature) {
  const auto group = hodd::DecouplingGroup::from_elements({hodd::PauliString::parse("I"), hodd::PauliString::parse("X")});
  const std::vector<double> flips{0.2, 0.55, 0.9};
  // Frames I, X, I, X: y_Z = +1, -1, +1, -1, so the last sign is -1.
  const auto s = hodd::PulseSchedule(group, flips, {0, 1, 0, 1}, false);
  const auto c = hodd::certify_lower_bound(flips, 5, -1);
  for (int m = 0; m < 5; ++m) {
    EXPECT_NEAR(c.moments[static_cast<std::size_t>(m)], oracle::moment_by_quadrature(s, hodd::PauliString::parse("Z"), m),
                1e-13);
  }
}

TEST(GridSearch, SecondOrderMatchesBruteForce) {
  const int grid = 200;
  double best = 1e9;
  for (int i = 1; i < grid; ++i) {
    const double t = static_cast<double>(i) / grid;
    // y = -1 on [0, t), +1 after; M_0 = 1 - 2t, M_1 = (1 - 2 t^2) / 2.
    best = std::min(best, std::max(std::abs(1 - 2 * t), std::abs(1 - 2 * t * t) / 2));
  }
  const auto g = hodd::grid_search_lower_bound(2, grid);
  EXPECT_NEAR(g.min_max_moment, best, 1e-14);
  EXPECT_EQ(g.placements, static_cast<std::size_t>(grid - 1));
  EXPECT_EQ(hodd::grid_search_lower_bound(3, 40, 1).min_max_moment,
            hodd::grid_search_lower_bound(3, 40, 3).min_max_moment);
}

TEST(Sweep, DeterministicAcrossWorkerCounts) {
  hodd::SweepSpec spec;
  spec.sequences = {{"table-s1:1", 1, hodd::published_schedule(1)}, {"qdd:2", 2, hodd::qdd_schedule(2)}};
  spec.couplings = {1e-3};
  spec.times = hodd::log_grid(1e-2, 1.0, 9);
  spec.model_seeds = {1, 2};
  spec.metric = hodd::ErrorMetric::mean_trace_distance;
  spec.state_samples = 5;
  const auto a = hodd::scaling_sweep(spec);
  spec.jobs = 3;
  const auto b = hodd::scaling_sweep(spec);
  EXPECT_EQ(hodd::sweep_csv(a.records), hodd::sweep_csv(b.records));
  EXPECT_EQ(a.records.size(), 2u * 9u * 2u);
  const auto csv = hodd::sweep_csv(a.records);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sequence_id,K,J,T,seed,metric,value");
  const auto summary = nlohmann::json::parse(hodd::sweep_summary_json(a));
  EXPECT_EQ(summary["curves"].size(), 2u);
  spec.times = {0.1, 0.05};
  EXPECT_THROW(hodd::scaling_sweep(spec), hodd::AnalysisError);
}

TEST(Compare, SummariesCountWins) {
  hodd::ComparisonSpec spec{{"a", 3, hodd::published_schedule(3)},
                            {"b", 1, hodd::periodic_schedule(4)},
                            {1e-4},
                            hodd::log_grid(0.1, 1.0, 5),
                            {1},
                            10,
                            0,
                            1};
  const auto r = hodd::compare_sequences(spec);
  ASSERT_EQ(r.rows.size(), 5u);
  EXPECT_EQ(r.ours_pulses, 10u);
  EXPECT_EQ(r.theirs_pulses, 4u);
  const auto s = hodd::summarize(r, 1e-4, 0.1, 1.0);
  EXPECT_EQ(s.points, 5u);
  EXPECT_EQ(s.wins + s.losses + s.ties, 5u);
  EXPECT_EQ(s.wins, 5u);  // third order beats XY4 at weak coupling
  EXPECT_EQ(hodd::summarize(r, 1e-4, 2.0, 3.0).points, 0u);
}
