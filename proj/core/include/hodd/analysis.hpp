#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hodd/dynamics.hpp"
#include "hodd/schedule.hpp"

namespace hodd {

class AnalysisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// `count` points from `min` to `max` inclusive, evenly spaced in log T.
std::vector<double> log_grid(double min, double max, std::size_t count);

enum class ErrorMetric { operator_norm, mean_trace_distance };
std::string to_string(ErrorMetric metric);
ErrorMetric parse_metric(const std::string& name);

struct NamedSchedule {
  std::string id;
  int order = 0;  // nominal K carried into the CSV
  PulseSchedule schedule;
};

struct SweepSpec {
  std::vector<NamedSchedule> sequences;
  std::vector<double> couplings;
  std::vector<double> times;  // positive, strictly increasing
  std::vector<std::uint64_t> model_seeds{1};
  std::size_t state_samples = 100;  // used by mean_trace_distance
  std::uint64_t master_seed = 0;
  ErrorMetric metric = ErrorMetric::operator_norm;
  int jobs = 1;

  /// Throws AnalysisError on empty or non-increasing grids.
  void validate() const;
};

/// One CSV row: a single (sequence, J, T, model seed) evaluation.
struct SweepRecord {
  std::string sequence_id;
  int order = 0;
  double coupling = 0.0;
  double time = 0.0;
  std::uint64_t seed = 0;
  ErrorMetric metric = ErrorMetric::operator_norm;
  double value = 0.0;  // NaN when the point failed
  std::string failure;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;  // log10 error at log10 T = 0
  double slope_stderr = 0.0;
  std::size_t first = 0;  // inclusive indices into the fitted curve
  std::size_t last = 0;
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t points() const { return last - first + 1; }
};

struct SlopeFitOptions {
  std::size_t min_points = 6;
  /// Width of the lowest and highest windows, in decades of T.
  double window_decades = 1.0;
  /// Values at or below this are treated as numerical floor and dropped.
  double floor = 1e-16;
  /// The curve is cut before the first value at or above this.
  double saturation = 1.0;
  /// Slopes closer than this are treated as a single power law (no crossover).
  double min_slope_gap = 0.1;
};

struct SlopeFit {
  LineFit small_t;
  LineFit large_t;
  /// Intersection of the two fitted lines, when the slopes differ and it falls
  /// inside the usable T range.
  std::optional<double> crossover;
};

/// Least-squares line through (log10 T, log10 value) on indices [first, last].
LineFit fit_line(std::span<const double> times, std::span<const double> values, std::size_t first, std::size_t last);

/// Line fit over every point with t_lo <= T <= t_hi; throws AnalysisError
/// when fewer than `min_points` points qualify or any of them is non-positive.
LineFit fit_window(std::span<const double> times, std::span<const double> values, double t_lo, double t_hi,
                   std::size_t min_points = 6);

/// Fits the lowest-decade and highest pre-saturation decade of the usable
/// part of the curve. Throws AnalysisError if either window is too short.
SlopeFit fit_slopes(std::span<const double> times, std::span<const double> values, const SlopeFitOptions& options = {});

struct ErrorCurve {
  std::string sequence_id;
  int order = 0;
  double coupling = 0.0;
  ErrorMetric metric = ErrorMetric::operator_norm;
  std::vector<double> times;
  std::vector<double> values;  // mean over model seeds; NaN where any seed failed
  std::size_t failures = 0;
  std::optional<SlopeFit> fit;
  std::string fit_note;  // why `fit` is empty
};

struct SweepResult {
  std::vector<ErrorCurve> curves;     // sequence-major, then coupling
  std::vector<SweepRecord> records;   // sequence, coupling, seed, time order
};

/// Evaluates every grid point; the output does not depend on spec.jobs.
/// Simulation failures are recorded per point and do not abort the sweep.
SweepResult scaling_sweep(const SweepSpec& spec, const SlopeFitOptions& fit_options = {});

/// Columns sequence_id,K,J,T,seed,metric,value with 17 significant digits.
std::string sweep_csv(std::span<const SweepRecord> records);
std::string sweep_summary_json(const SweepResult& result);

struct ComparisonSpec {
  NamedSchedule ours;
  NamedSchedule theirs;
  std::vector<double> couplings;
  std::vector<double> times;
  std::vector<std::uint64_t> model_seeds{1};
  std::size_t state_samples = 100;
  std::uint64_t master_seed = 0;
  int jobs = 1;
};

struct ComparisonRow {
  double coupling = 0.0;
  double time = 0.0;
  double ours = 0.0;    // mean trace distance over seeds and states
  double theirs = 0.0;
  /// +1 ours lower, -1 theirs lower, 0 tie (relative difference <= 1e-14).
  int outcome = 0;
};

struct ComparisonSummary {
  double coupling = 0.0;
  std::size_t points = 0;
  std::size_t wins = 0;
  std::size_t losses = 0;
  std::size_t ties = 0;
  double win_fraction() const { return points == 0 ? 0.0 : static_cast<double>(wins) / static_cast<double>(points); }
};

struct ComparisonResult {
  std::string ours_id;
  std::string theirs_id;
  int ours_order = 0;
  int theirs_order = 0;
  std::size_t ours_pulses = 0;  // including closure
  std::size_t theirs_pulses = 0;
  std::size_t ours_interior_pulses = 0;
  std::size_t theirs_interior_pulses = 0;
  std::vector<ComparisonRow> rows;
  std::vector<ComparisonSummary> summaries;  // one per coupling
};

/// Both sequences see the same sampled models and the same initial states.
ComparisonResult compare_sequences(const ComparisonSpec& spec);

/// Win counts over rows with the given coupling and t_lo <= T <= t_hi.
ComparisonSummary summarize(const ComparisonResult& result, double coupling, double t_lo, double t_hi);

std::string comparison_csv(const ComparisonResult& result);
std::string comparison_summary_json(const ComparisonResult& result);

/// Keeps `digits` decimal digits of a non-negative value (truncation, not
/// rounding) taken from its shortest round-trip decimal form.
double truncate_decimal(double value, int digits);

/// Truncates every cut time. Throws ScheduleError if the result is no longer
/// strictly increasing inside (0, 1).
std::vector<double> truncate_cut_times(std::span<const double> cut_times, int digits);

/// Truncates every interval except the last and accumulates them into cut
/// times; the final segment absorbs the remainder so the total stays 1.
/// Throws ScheduleError if a truncated interval vanishes.
std::vector<double> truncate_intervals(std::span<const double> intervals, int digits);

enum class TruncationTarget { intervals, cut_times };

struct JitterOptions {
  TruncationTarget target = TruncationTarget::intervals;
  double ratio = 2.0;
  int jobs = 1;
  /// Nominal interval lengths to truncate, e.g. a published table. When empty
  /// they are recomputed from the cut times, which can turn 0.125 into
  /// 0.12499999999999999 and change what truncation keeps.
  std::vector<double> nominal_intervals;
};

struct JitterStudy {
  int digits = 0;
  TruncationTarget target = TruncationTarget::intervals;
  std::vector<double> truncated_cut_times;
  std::vector<double> times;
  std::vector<double> full;
  std::vector<double> truncated;
  /// Scanning down from the largest T, the first point where truncated/full
  /// leaves [1/ratio, ratio], log-interpolated against the previous point.
  std::optional<double> divergence_time;
  /// True when even the largest T already deviates.
  bool diverged_everywhere = false;
};

/// Operator-norm error of the full and truncated schedules on a shared model.
JitterStudy jitter_study(const PulseSchedule& schedule, int digits, const QuantumNoiseModel& model,
                         std::span<const double> times, const JitterOptions& options = {});

/// Locates the divergence point of two curves as described on JitterStudy.
std::optional<double> divergence_time(std::span<const double> times, std::span<const double> reference,
                                      std::span<const double> perturbed, double ratio, bool* everywhere = nullptr);

struct LowerBoundCertificate {
  int order = 0;
  std::vector<double> flips;
  int last_sign = 1;
  /// P(tau) = a tau prod_j (tau - tau_j) with a = s_r / prod_j (1 - tau_j).
  double leading = 0.0;
  /// Coefficients of P' in ascending powers, c_0 .. c_r.
  std::vector<double> derivative_coefficients;
  /// sum_k s_k (P(tau_{k+1}) - P(tau_k)) with P evaluated from its expansion.
  double value = 0.0;
  /// Moments M_m = int y tau^m for m < order of the switching function.
  std::vector<double> moments;
  /// 1 / sum_m |c_m|: no y with these flips has max_m |M_m| below this.
  double moment_bound = 0.0;
};

/// Requires 0 < tau_1 < ... < tau_r < 1 and r < order. Signs alternate at each
/// flip and the last segment carries `last_sign`.
LowerBoundCertificate certify_lower_bound(std::span<const double> flips, int order, int last_sign = 1);

struct GridSearchResult {
  int order = 0;
  int grid = 0;
  std::size_t placements = 0;
  double min_max_moment = 0.0;
  std::vector<double> argmin;
};

/// Exhaustive search over every placement of order-1 flips on the points
/// i / grid, i = 1..grid-1, minimizing max_{m<order} |M_m|.
GridSearchResult grid_search_lower_bound(int order, int grid = 200, int jobs = 1);

}  // namespace hodd
