#include "hodd/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "hodd/seeding.hpp"
#include "json.hpp"

namespace hodd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kStateStream = 0x5354415445ULL;

// Runs body(i) for i in [0, n) on up to `jobs` threads. The first exception
// (lowest index) is rethrown after all workers finish.
template <class Body>
void parallel_for(std::size_t n, int jobs, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex guard;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(guard);
            if (i < failed_index) {
              failed_index = i;
              failure = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::string format17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_grid(std::span<const double> values, const char* what, bool allow_zero) {
  if (values.empty()) throw AnalysisError(std::string(what) + " grid is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0)) {
      throw AnalysisError(std::string(what) + " grid has an invalid entry");
    }
    if (i > 0 && !(v > values[i - 1])) throw AnalysisError(std::string(what) + " grid must increase strictly");
  }
}

std::vector<ProductState> states_for_seed(std::uint64_t master, std::uint64_t seed, std::size_t count) {
  return haar_product_states(count, derive_seed(master, {kStateStream, seed}));
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

nlohmann::json fit_json(const LineFit& f) {
  return {{"slope", f.slope},   {"slope_stderr", f.slope_stderr}, {"intercept", f.intercept},
          {"t_min", f.t_min},   {"t_max", f.t_max},               {"points", f.points()}};
}

}  // namespace

std::vector<double> log_grid(double min, double max, std::size_t count) {
  if (!(min > 0.0) || !(max > min) || !std::isfinite(max)) throw AnalysisError("log grid needs 0 < min < max");
  if (count < 2) throw AnalysisError("log grid needs at least two points");
  std::vector<double> out(count);
  const double lo = std::log10(min);
  const double hi = std::log10(max);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = min;
  out.back() = max;
  return out;
}

std::string to_string(ErrorMetric metric) {
  return metric == ErrorMetric::operator_norm ? "operator_norm" : "mean_trace_distance";
}

ErrorMetric parse_metric(const std::string& name) {
  if (name == "operator_norm") return ErrorMetric::operator_norm;
  if (name == "mean_trace_distance") return ErrorMetric::mean_trace_distance;
  throw AnalysisError("unknown metric '" + name + "'");
}

void SweepSpec::validate() const {
  if (sequences.empty()) throw AnalysisError("sweep has no sequences");
  check_grid(couplings, "coupling", true);
  check_grid(times, "time", false);
  if (model_seeds.empty()) throw AnalysisError("sweep has no model seeds");
  if (metric == ErrorMetric::mean_trace_distance && state_samples == 0) {
    throw AnalysisError("trace-distance sweeps need at least one state sample");
  }
}

LineFit fit_line(std::span<const double> times, std::span<const double> values, std::size_t first, std::size_t last) {
  if (times.size() != values.size()) throw AnalysisError("times and values differ in length");
  if (last >= times.size() || first >= last) throw AnalysisError("fit range is empty");
  const std::size_t n = last - first + 1;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = times[first + i];
    const double v = values[first + i];
    if (!(t > 0.0) || !(v > 0.0) || !std::isfinite(v)) throw AnalysisError("log-log fit needs positive values");
    x[i] = std::log10(t);
    y[i] = std::log10(v);
  }
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw AnalysisError("fit window has no spread in T");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
  }
  fit.slope_stderr = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  fit.first = first;
  fit.last = last;
  fit.t_min = times[first];
  fit.t_max = times[last];
  return fit;
}

LineFit fit_window(std::span<const double> times, std::span<const double> values, double t_lo, double t_hi,
                   std::size_t min_points) {
  std::size_t first = times.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= t_lo && times[i] <= t_hi) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first == times.size() || last - first + 1 < std::max<std::size_t>(min_points, 2)) {
    throw AnalysisError("fit window holds too few points");
  }
  return fit_line(times, values, first, last);
}

SlopeFit fit_slopes(std::span<const double> times, std::span<const double> values, const SlopeFitOptions& options) {
  if (times.size() != values.size()) throw AnalysisError("times and values differ in length");
  check_grid(times, "time", false);
  const std::size_t min_points = std::max<std::size_t>(options.min_points, 3);

  std::size_t cut = times.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= options.saturation) {
      cut = i;
      break;
    }
  }
  std::size_t begin = cut;
  while (begin > 0 && std::isfinite(values[begin - 1]) && values[begin - 1] > options.floor) --begin;
  if (cut - begin < min_points) {
    throw AnalysisError("only " + std::to_string(cut - begin) + " usable points between the numerical floor and saturation");
  }

  const double span = std::pow(10.0, options.window_decades);
  std::size_t small_last = begin;
  while (small_last + 1 < cut && times[small_last + 1] <= times[begin] * span) ++small_last;
  std::size_t large_first = cut - 1;
  while (large_first > begin && times[large_first - 1] >= times[cut - 1] / span) --large_first;
  if (small_last - begin + 1 < min_points || cut - large_first < min_points) {
    throw AnalysisError("fit windows hold fewer than " + std::to_string(min_points) + " points");
  }

  SlopeFit fit;
  fit.small_t = fit_line(times, values, begin, small_last);
  fit.large_t = fit_line(times, values, large_first, cut - 1);
  const double gap = fit.small_t.slope - fit.large_t.slope;
  if (std::abs(gap) >= options.min_slope_gap) {
    const double log_t = (fit.large_t.intercept - fit.small_t.intercept) / gap;
    const double t = std::pow(10.0, log_t);
    if (t >= times[begin] && t <= times[cut - 1]) fit.crossover = t;
  }
  return fit;
}

SweepResult scaling_sweep(const SweepSpec& spec, const SlopeFitOptions& fit_options) {
  spec.validate();
  const std::size_t ns = spec.sequences.size();
  const std::size_t nj = spec.couplings.size();
  const std::size_t nseed = spec.model_seeds.size();
  const std::size_t nt = spec.times.size();

  std::vector<std::vector<ProductState>> states(nseed);
  if (spec.metric == ErrorMetric::mean_trace_distance) {
    for (std::size_t k = 0; k < nseed; ++k) states[k] = states_for_seed(spec.master_seed, spec.model_seeds[k], spec.state_samples);
  }

  SweepResult result;
  result.records.resize(ns * nj * nseed * nt);
  parallel_for(result.records.size(), spec.jobs, [&](std::size_t idx) {
    const std::size_t t = idx % nt;
    const std::size_t k = (idx / nt) % nseed;
    const std::size_t j = (idx / (nt * nseed)) % nj;
    const std::size_t s = idx / (nt * nseed * nj);
    const auto& seq = spec.sequences[s];
    SweepRecord& rec = result.records[idx];
    rec.sequence_id = seq.id;
    rec.order = seq.order;
    rec.coupling = spec.couplings[j];
    rec.time = spec.times[t];
    rec.seed = spec.model_seeds[k];
    rec.metric = spec.metric;
    try {
      const auto model = sample_model(rec.seed, rec.coupling);
      const auto evolution = evolve(seq.schedule, model, rec.time);
      if (spec.metric == ErrorMetric::operator_norm) {
        rec.value = evolution.error;
      } else {
        const auto d = reduced_error(evolution, model, states[k]);
        rec.value = mean(d);
      }
    } catch (const std::exception& e) {
      rec.value = kNaN;
      rec.failure = e.what();
    }
  });

  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t j = 0; j < nj; ++j) {
      ErrorCurve curve;
      curve.sequence_id = spec.sequences[s].id;
      curve.order = spec.sequences[s].order;
      curve.coupling = spec.couplings[j];
      curve.metric = spec.metric;
      curve.times = spec.times;
      curve.values.assign(nt, 0.0);
      for (std::size_t t = 0; t < nt; ++t) {
        double sum = 0.0;
        bool ok = true;
        for (std::size_t k = 0; k < nseed; ++k) {
          const auto& rec = result.records[((s * nj + j) * nseed + k) * nt + t];
          if (!rec.failure.empty()) ok = false;
          sum += rec.value;
        }
        curve.values[t] = ok ? sum / static_cast<double>(nseed) : kNaN;
        if (!ok) ++curve.failures;
      }
      try {
        curve.fit = fit_slopes(curve.times, curve.values, fit_options);
      } catch (const AnalysisError& e) {
        curve.fit_note = e.what();
      }
      result.curves.push_back(std::move(curve));
    }
  }
  return result;
}

std::string sweep_csv(std::span<const SweepRecord> records) {
  std::string out = "sequence_id,K,J,T,seed,metric,value\n";
  for (const auto& r : records) {
    out += r.sequence_id + ',' + std::to_string(r.order) + ',' + format17(r.coupling) + ',' + format17(r.time) + ',' +
           std::to_string(r.seed) + ',' + to_string(r.metric) + ',' + format17(r.value) + '\n';
  }
  return out;
}

std::string sweep_summary_json(const SweepResult& result) {
  nlohmann::json curves = nlohmann::json::array();
  for (const auto& c : result.curves) {
    nlohmann::json entry = {{"sequence_id", c.sequence_id}, {"K", c.order},
                            {"J", c.coupling},              {"metric", to_string(c.metric)},
                            {"points", c.times.size()},     {"failures", c.failures}};
    if (c.fit) {
      entry["small_t"] = fit_json(c.fit->small_t);
      entry["large_t"] = fit_json(c.fit->large_t);
      entry["small_t_offset_from_K_plus_1"] = c.fit->small_t.slope - (c.order + 1);
      entry["large_t_offset_from_K_plus_1"] = c.fit->large_t.slope - (c.order + 1);
      entry["crossover"] = c.fit->crossover ? nlohmann::json(*c.fit->crossover) : nlohmann::json(nullptr);
    } else {
      entry["fit_note"] = c.fit_note;
    }
    curves.push_back(std::move(entry));
  }
  std::size_t failed = 0;
  for (const auto& r : result.records) failed += r.failure.empty() ? 0 : 1;
  return nlohmann::json{{"curves", curves}, {"failed_points", failed}}.dump(2) + "\n";
}

ComparisonResult compare_sequences(const ComparisonSpec& spec) {
  check_grid(spec.couplings, "coupling", true);
  check_grid(spec.times, "time", false);
  if (spec.model_seeds.empty()) throw AnalysisError("comparison has no model seeds");
  if (spec.state_samples == 0) throw AnalysisError("comparison needs at least one state sample");
  const std::size_t nj = spec.couplings.size();
  const std::size_t nt = spec.times.size();
  const std::size_t nseed = spec.model_seeds.size();

  std::vector<std::vector<ProductState>> states(nseed);
  for (std::size_t k = 0; k < nseed; ++k) states[k] = states_for_seed(spec.master_seed, spec.model_seeds[k], spec.state_samples);

  ComparisonResult result;
  result.ours_id = spec.ours.id;
  result.theirs_id = spec.theirs.id;
  result.ours_order = spec.ours.order;
  result.theirs_order = spec.theirs.order;
  result.ours_pulses = spec.ours.schedule.pulse_count();
  result.theirs_pulses = spec.theirs.schedule.pulse_count();
  result.ours_interior_pulses = spec.ours.schedule.interior_pulse_count();
  result.theirs_interior_pulses = spec.theirs.schedule.interior_pulse_count();
  result.rows.resize(nj * nt);

  parallel_for(result.rows.size(), spec.jobs, [&](std::size_t idx) {
    const std::size_t j = idx / nt;
    const std::size_t t = idx % nt;
    ComparisonRow& row = result.rows[idx];
    row.coupling = spec.couplings[j];
    row.time = spec.times[t];
    double ours = 0.0, theirs = 0.0;
    for (std::size_t k = 0; k < nseed; ++k) {
      const auto model = sample_model(spec.model_seeds[k], row.coupling);
      ours += mean(reduced_error(spec.ours.schedule, model, row.time, states[k]));
      theirs += mean(reduced_error(spec.theirs.schedule, model, row.time, states[k]));
    }
    row.ours = ours / static_cast<double>(nseed);
    row.theirs = theirs / static_cast<double>(nseed);
    const double scale = std::max(std::abs(row.ours), std::abs(row.theirs));
    if (std::abs(row.ours - row.theirs) <= 1e-14 * scale) {
      row.outcome = 0;
    } else {
      row.outcome = row.ours < row.theirs ? 1 : -1;
    }
  });

  for (double J : spec.couplings) {
    result.summaries.push_back(summarize(result, J, spec.times.front(), spec.times.back()));
  }
  return result;
}

ComparisonSummary summarize(const ComparisonResult& result, double coupling, double t_lo, double t_hi) {
  ComparisonSummary s;
  s.coupling = coupling;
  for (const auto& row : result.rows) {
    if (row.coupling != coupling || row.time < t_lo || row.time > t_hi) continue;
    ++s.points;
    if (row.outcome > 0) ++s.wins;
    else if (row.outcome < 0) ++s.losses;
    else ++s.ties;
  }
  return s;
}

std::string comparison_csv(const ComparisonResult& result) {
  std::string out = "sequence_id,K,J,T,seed,metric,value\n";
  const auto row_line = [&](const std::string& id, int order, const ComparisonRow& r, double v) {
    return id + ',' + std::to_string(order) + ',' + format17(r.coupling) + ',' + format17(r.time) +
           ",mean,mean_trace_distance," + format17(v) + '\n';
  };
  for (const auto& r : result.rows) {
    out += row_line(result.ours_id, result.ours_order, r, r.ours);
    out += row_line(result.theirs_id, result.theirs_order, r, r.theirs);
  }
  return out;
}

std::string comparison_summary_json(const ComparisonResult& result) {
  nlohmann::json summaries = nlohmann::json::array();
  for (const auto& s : result.summaries) {
    summaries.push_back({{"J", s.coupling},
                         {"points", s.points},
                         {"wins", s.wins},
                         {"losses", s.losses},
                         {"ties", s.ties},
                         {"win_fraction", s.win_fraction()}});
  }
  return nlohmann::json{{"ours", {{"id", result.ours_id},
                                  {"pulses", result.ours_pulses},
                                  {"interior_pulses", result.ours_interior_pulses}}},
                        {"theirs", {{"id", result.theirs_id},
                                    {"pulses", result.theirs_pulses},
                                    {"interior_pulses", result.theirs_interior_pulses}}},
                        {"summaries", summaries}}
             .dump(2) +
         "\n";
}

double truncate_decimal(double value, int digits) {
  if (digits < 1) throw AnalysisError("kept digits must be >= 1");
  if (!std::isfinite(value) || value < 0.0) throw ScheduleError("only finite non-negative values can be truncated");
  char buf[512];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
  std::string text(buf, res.ptr);
  const auto dot = text.find('.');
  if (dot != std::string::npos && text.size() > dot + 1 + static_cast<std::size_t>(digits)) {
    text.resize(dot + 1 + static_cast<std::size_t>(digits));
  }
  double out = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return out;
}

std::vector<double> truncate_cut_times(std::span<const double> cut_times, int digits) {
  std::vector<double> out;
  out.reserve(cut_times.size());
  for (double t : cut_times) out.push_back(truncate_decimal(t, digits));
  double prev = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > prev) || !(out[i] < 1.0)) {
      throw ScheduleError("truncating to " + std::to_string(digits) + " digits breaks strict ordering at cut " +
                          std::to_string(i));
    }
    prev = out[i];
  }
  return out;
}

std::vector<double> truncate_intervals(std::span<const double> intervals, int digits) {
  if (intervals.empty()) throw ScheduleError("no intervals to truncate");
  std::vector<double> cuts;
  cuts.reserve(intervals.size() - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < intervals.size(); ++i) {
    const double d = truncate_decimal(intervals[i], digits);
    if (!(d > 0.0)) {
      throw ScheduleError("truncating to " + std::to_string(digits) + " digits empties interval " + std::to_string(i));
    }
    acc += d;
    if (!(acc < 1.0)) throw ScheduleError("truncated intervals leave no room for the last segment");
    cuts.push_back(acc);
  }
  return cuts;
}

std::optional<double> divergence_time(std::span<const double> times, std::span<const double> reference,
                                      std::span<const double> perturbed, double ratio, bool* everywhere) {
  if (times.size() != reference.size() || times.size() != perturbed.size() || times.empty()) {
    throw AnalysisError("divergence curves differ in length");
  }
  if (!(ratio > 1.0)) throw AnalysisError("divergence ratio must exceed 1");
  if (everywhere) *everywhere = false;
  const double limit = std::log(ratio);
  // Positive when outside [1/ratio, ratio].
  const auto excess = [&](std::size_t i) {
    if (!(reference[i] > 0.0) || !(perturbed[i] > 0.0)) return std::numeric_limits<double>::infinity();
    return std::abs(std::log(perturbed[i] / reference[i])) - limit;
  };
  const std::size_t n = times.size();
  if (excess(n - 1) > 0.0) {
    if (everywhere) *everywhere = true;
    return std::nullopt;
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    const double e = excess(i);
    if (e <= 0.0) continue;
    const double e_in = excess(i + 1);
    const double x0 = std::log(times[i]);
    const double x1 = std::log(times[i + 1]);
    if (!std::isfinite(e)) return times[i];
    const double frac = e / (e - e_in);
    return std::exp(x0 + frac * (x1 - x0));
  }
  return std::nullopt;
}

JitterStudy jitter_study(const PulseSchedule& schedule, int digits, const QuantumNoiseModel& model,
                         std::span<const double> times, const JitterOptions& options) {
  check_grid(times, "time", false);
  JitterStudy study;
  study.digits = digits;
  study.target = options.target;
  if (options.target == TruncationTarget::intervals) {
    const auto& nominal = options.nominal_intervals;
    if (!nominal.empty() && nominal.size() != schedule.num_segments()) {
      throw AnalysisError("nominal intervals do not match the schedule's segment count");
    }
    study.truncated_cut_times = truncate_intervals(nominal.empty() ? schedule.intervals() : nominal, digits);
  } else {
    study.truncated_cut_times = truncate_cut_times(schedule.cut_times(), digits);
  }
  const PulseSchedule truncated = schedule.with_cut_times(study.truncated_cut_times);
  study.times.assign(times.begin(), times.end());
  study.full.resize(times.size());
  study.truncated.resize(times.size());
  parallel_for(times.size(), options.jobs, [&](std::size_t i) {
    study.full[i] = evolve(schedule, model, times[i]).error;
    study.truncated[i] = evolve(truncated, model, times[i]).error;
  });
  study.divergence_time =
      divergence_time(study.times, study.full, study.truncated, options.ratio, &study.diverged_everywhere);
  return study;
}

LowerBoundCertificate certify_lower_bound(std::span<const double> flips, int order, int last_sign) {
  if (order < 1) throw AnalysisError("order must be >= 1");
  if (last_sign != 1 && last_sign != -1) throw AnalysisError("last sign must be +1 or -1");
  const std::size_t r = flips.size();
  if (r >= static_cast<std::size_t>(order)) {
    throw AnalysisError("certificate needs fewer than K flips (got r = " + std::to_string(r) +
                        ", K = " + std::to_string(order) + ")");
  }
  double prev = 0.0;
  for (double f : flips) {
    if (!std::isfinite(f) || !(f > prev) || !(f < 1.0)) throw AnalysisError("flips must satisfy 0 < t_1 < ... < t_r < 1");
    prev = f;
  }

  LowerBoundCertificate cert;
  cert.order = order;
  cert.flips.assign(flips.begin(), flips.end());
  cert.last_sign = last_sign;

  // Flips near 1 make the leading coefficient large and the expanded form
  // cancels heavily, so it is built and evaluated with 50 significant digits.
  using Wide = boost::multiprecision::cpp_bin_float_50;
  Wide denom = 1;
  for (double f : flips) denom *= 1 - Wide(f);
  const Wide leading = last_sign / denom;
  cert.leading = static_cast<double>(leading);

  // P(tau) in ascending powers, p[0] = 0.
  std::vector<Wide> p{Wide(0), Wide(1)};
  for (double f : flips) {
    std::vector<Wide> next(p.size() + 1, Wide(0));
    for (std::size_t i = 0; i < p.size(); ++i) {
      next[i + 1] += p[i];
      next[i] -= Wide(f) * p[i];
    }
    p = std::move(next);
  }
  for (Wide& c : p) c *= leading;
  cert.derivative_coefficients.resize(p.size() - 1);
  for (std::size_t m = 0; m + 1 < p.size(); ++m) {
    cert.derivative_coefficients[m] = static_cast<double>(Wide(m + 1) * p[m + 1]);
  }

  const auto eval = [&](double tau) {
    Wide acc = 0;
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * tau + p[i];
    return acc;
  };
  std::vector<double> bounds{0.0};
  bounds.insert(bounds.end(), flips.begin(), flips.end());
  bounds.push_back(1.0);
  std::vector<int> signs(r + 1);
  for (std::size_t k = 0; k <= r; ++k) signs[k] = ((r - k) % 2 == 0) ? last_sign : -last_sign;

  Wide value = 0;
  for (std::size_t k = 0; k <= r; ++k) value += signs[k] * (eval(bounds[k + 1]) - eval(bounds[k]));
  cert.value = static_cast<double>(value);

  cert.moments.assign(static_cast<std::size_t>(order), 0.0);
  for (int m = 0; m < order; ++m) {
    double acc = 0.0;
    for (std::size_t k = 0; k <= r; ++k) acc += signs[k] * (std::pow(bounds[k + 1], m + 1) - std::pow(bounds[k], m + 1));
    cert.moments[static_cast<std::size_t>(m)] = acc / (m + 1);
  }
  double l1 = 0.0;
  for (double c : cert.derivative_coefficients) l1 += std::abs(c);
  cert.moment_bound = 1.0 / l1;
  return cert;
}

GridSearchResult grid_search_lower_bound(int order, int grid, int jobs) {
  if (order < 1) throw AnalysisError("order must be >= 1");
  if (grid < 2) throw AnalysisError("grid must have at least two cells");
  const std::size_t r = static_cast<std::size_t>(order - 1);
  const std::size_t slots = static_cast<std::size_t>(grid - 1);
  if (r > slots) throw AnalysisError("grid too coarse for the requested flip count");

  GridSearchResult result;
  result.order = order;
  result.grid = grid;

  // pow_table[i][m] = (i / grid)^(m+1).
  std::vector<std::vector<double>> pow_table(static_cast<std::size_t>(grid) + 1, std::vector<double>(order));
  for (int i = 0; i <= grid; ++i) {
    const double tau = static_cast<double>(i) / grid;
    double p = tau;
    for (int m = 0; m < order; ++m) {
      pow_table[i][m] = p;
      p *= tau;
    }
  }
  const auto max_moment = [&](const std::vector<int>& idx) {
    double worst = 0.0;
    for (int m = 0; m < order; ++m) {
      double acc = 0.0;
      int sign = 1;
      int lo = 0;
      for (std::size_t k = 0; k <= idx.size(); ++k) {
        const int hi = k < idx.size() ? idx[k] : grid;
        acc += sign * (pow_table[hi][m] - pow_table[lo][m]);
        sign = -sign;
        lo = hi;
      }
      worst = std::max(worst, std::abs(acc) / (m + 1));
    }
    return worst;
  };

  struct Best {
    double value = std::numeric_limits<double>::infinity();
    std::vector<int> idx;
    std::size_t count = 0;
  };

  if (r == 0) {
    result.placements = 1;
    result.min_max_moment = max_moment({});
    return result;
  }

  // Partition by the first flip index; each task walks the remaining indices
  // in lexicographic order so ties resolve to the earliest placement.
  std::vector<Best> partial(slots);
  parallel_for(slots, jobs, [&](std::size_t first) {
    Best& best = partial[first];
    std::vector<int> idx(r);
    idx[0] = static_cast<int>(first) + 1;
    if (static_cast<std::size_t>(idx[0]) + r - 1 > slots) return;
    for (std::size_t k = 1; k < r; ++k) idx[k] = idx[k - 1] + 1;
    for (;;) {
      const double v = max_moment(idx);
      ++best.count;
      if (v < best.value) {
        best.value = v;
        best.idx = idx;
      }
      std::size_t k = r;
      while (k > 1 && idx[k - 1] == static_cast<int>(slots - (r - k))) --k;
      if (k == 1) break;
      ++idx[k - 1];
      for (std::size_t q = k; q < r; ++q) idx[q] = idx[q - 1] + 1;
    }
  });

  Best overall;
  for (const auto& b : partial) {
    result.placements += b.count;
    if (b.value < overall.value) overall = b;
  }
  result.min_max_moment = overall.value;
  for (int i : overall.idx) result.argmin.push_back(static_cast<double>(i) / grid);
  return result;
}

}  // namespace hodd
