#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hodd/pauli.hpp"
#include "hodd/schedule.hpp"

namespace hodd {

/// Frame labels produced by applying `generators` cyclically, starting from the
/// identity: label_0 = I, label_l = generators[(l-1) % k] * label_{l-1}.
/// Throws PauliError unless the walk visits every group element exactly once
/// per period of |G| segments and returns to the identity.
std::vector<std::size_t> traversal_pattern(const DecouplingGroup& group, std::span<const PauliString> generators,
                                           std::size_t segments);

/// Delta_l = exp(theta_l) / sum_j exp(theta_j), evaluated with max subtraction.
std::vector<double> softmax_map(std::span<const double> theta);

/// r_{alpha,m} = sum_l s_{l,alpha} (t_l^{m+1} - t_{l-1}^{m+1}), axis-major.
/// These are the moments without their 1/(m+1) factor.
std::vector<double> residual_vector(std::span<const double> intervals, std::span<const std::size_t> labels,
                                    const DecouplingGroup& group, std::span<const PauliString> axes, int order);

/// d r / d theta through the softmax map, evaluated in closed form.
Eigen::MatrixXd residual_jacobian(std::span<const double> theta, std::span<const std::size_t> labels,
                                  const DecouplingGroup& group, std::span<const PauliString> axes, int order);

enum class JacobianMode { analytic, forward_difference };

enum class StopReason { exact_zero, ftol, xtol, gtol, budget };
std::string to_string(StopReason reason);

struct OptimizerConfig {
  int order = 1;
  /// Pulse axes applied cyclically; X, Z gives the frames I, X, Y, Z, I, ...
  std::vector<PauliString> pattern{PauliString::parse("X"), PauliString::parse("Z")};
  int max_evaluations = 100000;
  double ftol = 1e-15;
  double xtol = 1e-15;
  double gtol = 1e-15;
  int restarts = 20;
  std::uint64_t seed = 0;
  int jobs = 1;
  JacobianMode jacobian = JacobianMode::analytic;
  /// Relative forward-difference step when jacobian == forward_difference.
  double difference_step = 1e-8;
  double collapse_threshold = 1e-12;
  double verify_tolerance = kOptimizedTolerance;
};

/// Segment count (|G| - 1) K + 1 implied by the configuration.
std::size_t segment_count(const OptimizerConfig& config, const DecouplingGroup& group);

struct OptimizationResult {
  std::vector<double> intervals;
  std::vector<double> theta;
  /// Sum of squared unscaled residuals at `intervals`.
  double cost = 0.0;
  int evaluations = 0;        // residual evaluations of the selected run
  int total_evaluations = 0;  // summed over all restarts
  bool converged = false;
  bool collapsed = false;
  StopReason stop_reason = StopReason::budget;
  int restart = 0;  // index of the selected start
  OrderCheck verification;
};

struct GeneratedSchedule {
  OptimizationResult result;
  PulseSchedule schedule;
};

/// Multi-start nonlinear least squares over the simplex of segment lengths.
/// Start 0 is theta = 0 (uniform); start i > 0 draws theta from N(0, 1) with a
/// generator seeded by (config.seed, i). Runs with any segment shorter than
/// collapse_threshold are discarded unless every run collapses. The result is
/// the lowest cost, ties broken lexicographically by intervals, so it does not
/// depend on config.jobs.
GeneratedSchedule optimize_schedule(const OptimizerConfig& config, const DecouplingGroup& group,
                                    std::span<const PauliString> axes);

/// Convenience overload: single-qubit group {I,X,Y,Z} with axes X, Y, Z.
GeneratedSchedule optimize_schedule(const OptimizerConfig& config);

/// Uhrig sequence: N pulses along `axis` at sin^2(j pi / (2N + 2)), with a
/// closure pulse at tau = 1 when N is odd.
PulseSchedule udd_schedule(int pulses, const PauliString& axis);

/// Quadratic DD: outer UDD_K on X, an inner UDD_K on Z rescaled into every
/// outer interval, coincident pulses merged by projective product.
PulseSchedule qdd_schedule(int order);

/// Equal-length segments on the X, Z traversal; XY4 when segments == 4.
PulseSchedule periodic_schedule(std::size_t segments);

}  // namespace hodd
