#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "hodd/pauli.hpp"

namespace hodd {

class ScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Instantaneous Pauli pulses on normalized time [0, 1].
///
/// Segment l (0-based) spans [boundary l, boundary l+1) and is spent in the
/// control frame `group().element(labels()[l])`. The first frame is always the
/// identity; adjacent frames must differ because an identity pulse would be
/// counted without doing anything.
class PulseSchedule {
 public:
  PulseSchedule(DecouplingGroup group, std::vector<double> cut_times, std::vector<std::size_t> labels,
                bool cyclic_closure = true, int order = 0);

  /// Builds cut times from positive segment lengths. The lengths are
  /// renormalized to sum to one before accumulating.
  static PulseSchedule from_intervals(DecouplingGroup group, std::span<const double> intervals,
                                      std::vector<std::size_t> labels, bool cyclic_closure = true,
                                      int order = 0);

  const DecouplingGroup& group() const { return group_; }
  const std::vector<double>& cut_times() const { return cut_times_; }
  const std::vector<std::size_t>& labels() const { return labels_; }
  bool cyclic_closure() const { return cyclic_closure_; }
  /// Declared cancellation order (0 if unspecified).
  int order() const { return order_; }
  std::size_t num_qubits() const { return group_.num_qubits(); }

  std::size_t num_segments() const { return labels_.size(); }
  const PauliString& frame(std::size_t segment) const { return group_.element(labels_.at(segment)); }
  /// 0, cut times..., 1.
  std::vector<double> boundaries() const;
  std::vector<double> intervals() const;

  /// Pulses strictly inside (0, 1).
  std::size_t interior_pulse_count() const { return cut_times_.size(); }
  bool needs_closure_pulse() const { return cyclic_closure_ && labels_.back() != 0; }
  /// Interior pulses plus the closure pulse at tau = 1 when one is needed.
  std::size_t pulse_count() const { return interior_pulse_count() + (needs_closure_pulse() ? 1 : 0); }

  /// Same labels and group with new cut times (validated).
  PulseSchedule with_cut_times(std::vector<double> cut_times) const;

  friend bool operator==(const PulseSchedule&, const PulseSchedule&) = default;

 private:
  DecouplingGroup group_;
  std::vector<double> cut_times_;
  std::vector<std::size_t> labels_;
  bool cyclic_closure_;
  int order_;
};

struct Pulse {
  double time = 0.0;
  PauliString op;
};

/// Physical pulses P_l = g_l g_{l-1} (projective) at each cut time, plus the
/// pulse at tau = 1 that returns the frame to identity when closure is set.
std::vector<Pulse> compile_pulses(const PulseSchedule& schedule);

/// Piecewise-constant switching functions y_alpha(tau) on a common partition.
class SwitchingProfile {
 public:
  /// `signs` is axis-major: signs[a * num_segments + l].
  SwitchingProfile(std::vector<double> boundaries, std::vector<PauliString> axes, std::vector<std::int8_t> signs);

  std::size_t num_segments() const { return boundaries_.size() - 1; }
  std::size_t num_axes() const { return axes_.size(); }
  const std::vector<double>& boundaries() const { return boundaries_; }
  const std::vector<PauliString>& axes() const { return axes_; }
  int sign(std::size_t axis, std::size_t segment) const { return signs_[axis * num_segments() + segment]; }
  /// y_alpha(tau); right-continuous, with tau = 1 belonging to the last segment.
  int value(std::size_t axis, double tau) const;

 private:
  std::vector<double> boundaries_;
  std::vector<PauliString> axes_;
  std::vector<std::int8_t> signs_;
};

enum class ProfileCheck {
  /// Throw unless the group averages every axis to zero.
  require_averaging,
  none,
};

SwitchingProfile switching_profile(const PulseSchedule& schedule, std::span<const PauliString> axes,
                                   ProfileCheck check = ProfileCheck::require_averaging);

/// M_{alpha,m} = int_0^1 y_alpha(tau) tau^m dtau for m < order.
class MomentVector {
 public:
  MomentVector(std::size_t num_axes, int order, std::vector<double> values);

  std::size_t num_axes() const { return num_axes_; }
  int order() const { return order_; }
  double at(std::size_t axis, int m) const { return values_[axis * static_cast<std::size_t>(order_) + m]; }
  const std::vector<double>& values() const { return values_; }
  double max_abs() const;

 private:
  std::size_t num_axes_;
  int order_;
  std::vector<double> values_;
};

/// Closed-form evaluation (1/(m+1)) sum_l s_l (t_l^{m+1} - t_{l-1}^{m+1}).
MomentVector moments(const SwitchingProfile& profile, int order);

/// The same sums without the 1/(m+1) factor, axis-major, length num_axes * order.
std::vector<double> unscaled_moments(const SwitchingProfile& profile, int order);

struct OrderCheck {
  bool pass = false;
  double worst_residual = 0.0;
  std::size_t worst_axis = 0;
  int worst_power = 0;
};

inline constexpr double kPublishedTolerance = 1e-9;
inline constexpr double kOptimizedTolerance = 1e-12;

/// Passes iff max over (alpha, m < order) of |M_{alpha,m}| <= tolerance.
/// Axes the group does not average are allowed; they simply fail.
OrderCheck verify_order(const PulseSchedule& schedule, std::span<const PauliString> axes, int order,
                        double tolerance = kOptimizedTolerance);

struct LabeledBin {
  double begin = 0.0;
  double end = 0.0;
  std::size_t label = 0;
};

/// Turns a labeled tiling of [0, 1] into a schedule, merging neighbours that
/// share a label. If the first bin is not the identity every label is
/// left-multiplied by it so the schedule starts in the identity frame; this
/// flips y_alpha globally by chi_alpha(first label) and leaves vanishing
/// moments vanishing. Throws ScheduleError on gaps, overlaps, or empty bins.
PulseSchedule assemble_from_bins(std::vector<LabeledBin> bins, const DecouplingGroup& group,
                                 bool cyclic_closure = true, int order = 0);

}  // namespace hodd
