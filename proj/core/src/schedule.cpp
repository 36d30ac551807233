#include "hodd/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hodd {

namespace {

void validate_cut_times(const std::vector<double>& cuts) {
  double prev = 0.0;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const double t = cuts[i];
    if (!std::isfinite(t) || t <= prev || t >= 1.0) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "cut times must satisfy 0 < t_1 < ... < t_L < 1; entry " << i << " = " << t;
      if (i > 0) msg << " follows " << prev;
      throw ScheduleError(msg.str());
    }
    prev = t;
  }
}

// t^(m+1) for m = 0..order-1, by repeated multiplication.
void fill_powers(double t, int order, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(order));
  double p = t;
  for (int m = 0; m < order; ++m) {
    out[m] = p;
    p *= t;
  }
}

}  // namespace

PulseSchedule::PulseSchedule(DecouplingGroup group, std::vector<double> cut_times, std::vector<std::size_t> labels,
                             bool cyclic_closure, int order)
    : group_(std::move(group)),
      cut_times_(std::move(cut_times)),
      labels_(std::move(labels)),
      cyclic_closure_(cyclic_closure),
      order_(order) {
  validate_cut_times(cut_times_);
  if (labels_.size() != cut_times_.size() + 1) {
    throw ScheduleError("expected " + std::to_string(cut_times_.size() + 1) + " segment labels, got " +
                        std::to_string(labels_.size()));
  }
  if (labels_.front() != 0) throw ScheduleError("first segment must be in the identity frame (label 0)");
  for (std::size_t l = 0; l < labels_.size(); ++l) {
    if (labels_[l] >= group_.order()) {
      throw ScheduleError("label " + std::to_string(labels_[l]) + " out of range for group of order " +
                          std::to_string(group_.order()));
    }
    if (l > 0 && labels_[l] == labels_[l - 1]) {
      throw ScheduleError("segments " + std::to_string(l - 1) + " and " + std::to_string(l) +
                          " share a frame; the pulse between them would be the identity");
    }
  }
  if (order_ < 0) throw ScheduleError("declared order must be non-negative");
}

PulseSchedule PulseSchedule::from_intervals(DecouplingGroup group, std::span<const double> intervals,
                                            std::vector<std::size_t> labels, bool cyclic_closure, int order) {
  if (intervals.empty()) throw ScheduleError("no intervals");
  double total = 0.0;
  for (double d : intervals) {
    if (!std::isfinite(d) || d <= 0.0) throw ScheduleError("intervals must be positive and finite");
    total += d;
  }
  std::vector<double> cuts;
  cuts.reserve(intervals.size() - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < intervals.size(); ++i) {
    acc += intervals[i];
    cuts.push_back(acc / total);
  }
  return PulseSchedule(std::move(group), std::move(cuts), std::move(labels), cyclic_closure, order);
}

std::vector<double> PulseSchedule::boundaries() const {
  std::vector<double> b;
  b.reserve(cut_times_.size() + 2);
  b.push_back(0.0);
  b.insert(b.end(), cut_times_.begin(), cut_times_.end());
  b.push_back(1.0);
  return b;
}

std::vector<double> PulseSchedule::intervals() const {
  const auto b = boundaries();
  std::vector<double> d(b.size() - 1);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = b[i + 1] - b[i];
  return d;
}

PulseSchedule PulseSchedule::with_cut_times(std::vector<double> cut_times) const {
  return PulseSchedule(group_, std::move(cut_times), labels_, cyclic_closure_, order_);
}

std::vector<Pulse> compile_pulses(const PulseSchedule& schedule) {
  std::vector<Pulse> pulses;
  pulses.reserve(schedule.pulse_count());
  const auto& cuts = schedule.cut_times();
  for (std::size_t l = 1; l < schedule.num_segments(); ++l) {
    pulses.push_back({cuts[l - 1], schedule.frame(l) * schedule.frame(l - 1)});
  }
  if (schedule.needs_closure_pulse()) {
    pulses.push_back({1.0, schedule.frame(schedule.num_segments() - 1)});
  }
  return pulses;
}

SwitchingProfile::SwitchingProfile(std::vector<double> boundaries, std::vector<PauliString> axes,
                                   std::vector<std::int8_t> signs)
    : boundaries_(std::move(boundaries)), axes_(std::move(axes)), signs_(std::move(signs)) {
  if (boundaries_.size() < 2 || boundaries_.front() != 0.0 || boundaries_.back() != 1.0) {
    throw ScheduleError("profile boundaries must run from 0 to 1");
  }
  for (std::size_t i = 1; i < boundaries_.size(); ++i) {
    if (!(boundaries_[i] > boundaries_[i - 1])) throw ScheduleError("profile boundaries must increase strictly");
  }
  if (signs_.size() != axes_.size() * num_segments()) throw ScheduleError("profile sign table has wrong size");
  for (auto s : signs_) {
    if (s != 1 && s != -1) throw ScheduleError("switching signs must be +1 or -1");
  }
}

int SwitchingProfile::value(std::size_t axis, double tau) const {
  if (tau < 0.0 || tau > 1.0) throw ScheduleError("tau outside [0, 1]");
  auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), tau);
  std::size_t seg = static_cast<std::size_t>(it - boundaries_.begin()) - 1;
  seg = std::min(seg, num_segments() - 1);
  return sign(axis, seg);
}

SwitchingProfile switching_profile(const PulseSchedule& schedule, std::span<const PauliString> axes,
                                   ProfileCheck check) {
  if (check == ProfileCheck::require_averaging) (void)character_table(schedule.group(), axes);
  std::vector<std::int8_t> signs;
  signs.reserve(axes.size() * schedule.num_segments());
  for (const auto& axis : axes) {
    for (std::size_t l = 0; l < schedule.num_segments(); ++l) {
      signs.push_back(static_cast<std::int8_t>(sign_character(axis, schedule.frame(l))));
    }
  }
  return SwitchingProfile(schedule.boundaries(), std::vector<PauliString>(axes.begin(), axes.end()),
                          std::move(signs));
}

MomentVector::MomentVector(std::size_t num_axes, int order, std::vector<double> values)
    : num_axes_(num_axes), order_(order), values_(std::move(values)) {
  if (order_ < 1) throw ScheduleError("moment order must be at least 1");
  if (values_.size() != num_axes_ * static_cast<std::size_t>(order_)) throw ScheduleError("moment vector size mismatch");
}

double MomentVector::max_abs() const {
  double worst = 0.0;
  for (double v : values_) worst = std::max(worst, std::abs(v));
  return worst;
}

std::vector<double> unscaled_moments(const SwitchingProfile& profile, int order) {
  if (order < 1) throw ScheduleError("moment order must be at least 1");
  const std::size_t K = static_cast<std::size_t>(order);
  const auto& b = profile.boundaries();
  std::vector<double> out(profile.num_axes() * K, 0.0);
  std::vector<double> lo, hi;
  fill_powers(b[0], order, lo);
  for (std::size_t l = 0; l < profile.num_segments(); ++l) {
    fill_powers(b[l + 1], order, hi);
    for (std::size_t a = 0; a < profile.num_axes(); ++a) {
      const double s = profile.sign(a, l);
      for (std::size_t m = 0; m < K; ++m) out[a * K + m] += s * (hi[m] - lo[m]);
    }
    std::swap(lo, hi);
  }
  return out;
}

MomentVector moments(const SwitchingProfile& profile, int order) {
  auto values = unscaled_moments(profile, order);
  const std::size_t K = static_cast<std::size_t>(order);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] /= static_cast<double>(i % K + 1);
  return MomentVector(profile.num_axes(), order, std::move(values));
}

OrderCheck verify_order(const PulseSchedule& schedule, std::span<const PauliString> axes, int order,
                        double tolerance) {
  const auto mv = moments(switching_profile(schedule, axes, ProfileCheck::none), order);
  OrderCheck check;
  for (std::size_t a = 0; a < mv.num_axes(); ++a) {
    for (int m = 0; m < order; ++m) {
      const double r = std::abs(mv.at(a, m));
      if (r > check.worst_residual || (a == 0 && m == 0)) {
        check.worst_residual = r;
        check.worst_axis = a;
        check.worst_power = m;
      }
    }
  }
  check.pass = check.worst_residual <= tolerance;
  return check;
}

PulseSchedule assemble_from_bins(std::vector<LabeledBin> bins, const DecouplingGroup& group, bool cyclic_closure,
                                 int order) {
  if (bins.empty()) throw ScheduleError("no bins to assemble");
  std::sort(bins.begin(), bins.end(), [](const LabeledBin& a, const LabeledBin& b) { return a.begin < b.begin; });
  if (bins.front().begin != 0.0) throw ScheduleError("bins leave a gap at tau = 0");
  if (bins.back().end != 1.0) throw ScheduleError("bins leave a gap at tau = 1");
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (!(bins[i].end > bins[i].begin)) throw ScheduleError("bin " + std::to_string(i) + " is empty or reversed");
    if (bins[i].label >= group.order()) throw ScheduleError("bin label out of range");
    if (i > 0 && bins[i].begin != bins[i - 1].end) {
      throw ScheduleError(bins[i].begin > bins[i - 1].end ? "bins leave a gap" : "bins overlap");
    }
  }

  const std::size_t reference = bins.front().label;
  std::vector<double> cuts;
  std::vector<std::size_t> labels{group.product_index(reference, bins.front().label)};
  for (std::size_t i = 1; i < bins.size(); ++i) {
    const std::size_t label = group.product_index(reference, bins[i].label);
    if (label == labels.back()) continue;
    cuts.push_back(bins[i].begin);
    labels.push_back(label);
  }
  return PulseSchedule(group, std::move(cuts), std::move(labels), cyclic_closure, order);
}

}  // namespace hodd
