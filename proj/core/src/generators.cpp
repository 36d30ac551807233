#include "hodd/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "hodd/seeding.hpp"

namespace hodd {

namespace {

// Per-segment signs s_{l,alpha}, axis-major.
std::vector<double> segment_signs(std::span<const std::size_t> labels, const DecouplingGroup& group,
                                  std::span<const PauliString> axes) {
  std::vector<double> s(axes.size() * labels.size());
  for (std::size_t a = 0; a < axes.size(); ++a) {
    for (std::size_t l = 0; l < labels.size(); ++l) {
      s[a * labels.size() + l] = sign_character(axes[a], group.element(labels[l]));
    }
  }
  return s;
}

class MomentProblem {
 public:
  MomentProblem(std::vector<std::size_t> labels, const DecouplingGroup& group, std::span<const PauliString> axes,
                int order)
      : segments_(labels.size()),
        num_axes_(axes.size()),
        order_(order),
        signs_(segment_signs(labels, group, axes)) {}

  std::size_t num_residuals() const { return num_axes_ * static_cast<std::size_t>(order_); }
  std::size_t num_params() const { return segments_; }

  Eigen::VectorXd residuals_from_intervals(std::span<const double> intervals) const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_residuals()));
    const std::size_t K = static_cast<std::size_t>(order_);
    std::vector<double> lo(K, 0.0), hi(K);
    double t = 0.0;
    for (std::size_t l = 0; l < segments_; ++l) {
      t = (l + 1 == segments_) ? 1.0 : t + intervals[l];
      double p = t;
      for (std::size_t m = 0; m < K; ++m, p *= t) hi[m] = p;
      for (std::size_t a = 0; a < num_axes_; ++a) {
        const double s = signs_[a * segments_ + l];
        for (std::size_t m = 0; m < K; ++m) r[static_cast<Eigen::Index>(a * K + m)] += s * (hi[m] - lo[m]);
      }
      std::swap(lo, hi);
    }
    return r;
  }

  Eigen::VectorXd residuals(const Eigen::VectorXd& theta) const {
    const auto d = softmax_map(std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())));
    return residuals_from_intervals(d);
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta) const {
    const std::size_t N = segments_;
    const std::size_t K = static_cast<std::size_t>(order_);
    const auto d = softmax_map(std::span<const double>(theta.data(), N));
    // Interior boundaries t_1..t_{N-1}; t_N = 1 is fixed by the simplex.
    std::vector<double> t(N, 0.0);
    double acc = 0.0;
    for (std::size_t l = 0; l + 1 < N; ++l) t[l] = (acc += d[l]);

    Eigen::MatrixXd jac(static_cast<Eigen::Index>(num_residuals()), static_cast<Eigen::Index>(N));
    std::vector<double> g(N);
    for (std::size_t a = 0; a < num_axes_; ++a) {
      for (std::size_t m = 0; m < K; ++m) {
        // g_j = d r / d Delta_j = sum_{l >= j} d r / d t_l.
        double suffix = 0.0;
        g[N - 1] = 0.0;
        for (std::size_t l = N - 1; l-- > 0;) {
          const double jump = signs_[a * N + l] - signs_[a * N + l + 1];
          if (jump != 0.0) suffix += jump * static_cast<double>(m + 1) * std::pow(t[l], static_cast<double>(m));
          g[l] = suffix;
        }
        double mean = 0.0;
        for (std::size_t j = 0; j < N; ++j) mean += d[j] * g[j];
        for (std::size_t k = 0; k < N; ++k) {
          jac(static_cast<Eigen::Index>(a * K + m), static_cast<Eigen::Index>(k)) = d[k] * (g[k] - mean);
        }
      }
    }
    return jac;
  }

 private:
  std::size_t segments_;
  std::size_t num_axes_;
  int order_;
  std::vector<double> signs_;
};

struct RunOutcome {
  Eigen::VectorXd theta;
  std::vector<double> intervals;
  double cost = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  StopReason stop = StopReason::budget;
  bool collapsed = false;
};

// Levenberg-Marquardt with a gain-ratio controlled damping parameter; each
// step solves the damped problem [J; sqrt(mu) I] dx = [-r; 0] by Householder QR.
RunOutcome levenberg_marquardt(const MomentProblem& problem, Eigen::VectorXd theta, const OptimizerConfig& config) {
  RunOutcome out;
  const Eigen::Index n = static_cast<Eigen::Index>(problem.num_params());
  const Eigen::Index m = static_cast<Eigen::Index>(problem.num_residuals());

  auto jacobian = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& rx) -> Eigen::MatrixXd {
    if (config.jacobian == JacobianMode::analytic) return problem.jacobian(x);
    Eigen::MatrixXd jac(m, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::VectorXd xp = x;
      const double h = config.difference_step * std::max(1.0, std::abs(x[k]));
      xp[k] += h;
      jac.col(k) = (problem.residuals(xp) - rx) / h;
      ++out.evaluations;
    }
    return jac;
  };

  Eigen::VectorXd r = problem.residuals(theta);
  ++out.evaluations;
  double cost = r.squaredNorm();
  Eigen::MatrixXd jac = jacobian(theta, r);
  double mu = 1e-3 * std::max(jac.colwise().squaredNorm().maxCoeff(), 1e-300);
  double nu = 2.0;

  while (true) {
    if (cost == 0.0) {
      out.stop = StopReason::exact_zero;
      break;
    }
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() <= config.gtol) {
      out.stop = StopReason::gtol;
      break;
    }
    if (out.evaluations >= config.max_evaluations) {
      out.stop = StopReason::budget;
      break;
    }

    Eigen::MatrixXd augmented(m + n, n);
    augmented.topRows(m) = jac;
    augmented.bottomRows(n) = std::sqrt(mu) * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + n);
    rhs.head(m) = -r;
    const Eigen::VectorXd step = augmented.householderQr().solve(rhs);

    if (step.norm() <= config.xtol * (config.xtol + theta.norm())) {
      out.stop = StopReason::xtol;
      break;
    }

    const Eigen::VectorXd candidate = theta + step;
    const Eigen::VectorXd r_new = problem.residuals(candidate);
    ++out.evaluations;
    const double cost_new = r_new.squaredNorm();
    const double predicted = cost - (r + jac * step).squaredNorm();
    const double actual = cost - cost_new;
    const double rho = predicted > 0.0 ? actual / predicted : -1.0;

    if (rho > 0.0 && std::isfinite(cost_new)) {
      theta = candidate;
      r = r_new;
      const double previous = cost;
      cost = cost_new;
      jac = jacobian(theta, r);
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (actual <= config.ftol * previous && rho > 0.25) {
        out.stop = StopReason::ftol;
        break;
      }
    } else {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu) || mu > 1e300) {
        out.stop = StopReason::xtol;
        break;
      }
    }
  }

  out.theta = theta;
  out.intervals = softmax_map(std::span<const double>(theta.data(), static_cast<std::size_t>(n)));
  out.cost = problem.residuals_from_intervals(out.intervals).squaredNorm();
  out.collapsed = std::any_of(out.intervals.begin(), out.intervals.end(),
                              [&](double d) { return d < config.collapse_threshold; });
  return out;
}

bool better(const RunOutcome& a, const RunOutcome& b) {
  if (a.collapsed != b.collapsed) return !a.collapsed;
  if (a.cost != b.cost) return a.cost < b.cost;
  return std::lexicographical_compare(a.intervals.begin(), a.intervals.end(), b.intervals.begin(),
                                      b.intervals.end());
}

double sin_squared_law(int j, int pulses) {
  const double s = std::sin(static_cast<double>(j) * std::numbers::pi / (2.0 * pulses + 2.0));
  return s * s;
}

}  // namespace

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::exact_zero: return "exact_zero";
    case StopReason::ftol: return "ftol";
    case StopReason::xtol: return "xtol";
    case StopReason::gtol: return "gtol";
    case StopReason::budget: return "budget";
  }
  return "unknown";
}

std::vector<std::size_t> traversal_pattern(const DecouplingGroup& group, std::span<const PauliString> generators,
                                           std::size_t segments) {
  if (generators.empty()) throw PauliError("traversal needs at least one generator");
  std::vector<std::size_t> gen_index;
  for (const auto& g : generators) {
    const auto idx = group.index_of(g);
    if (!idx || *idx == 0) throw PauliError("generator " + g.str() + " is not a non-identity group element");
    gen_index.push_back(*idx);
  }

  // One full period must be a permutation of G that closes back on I.
  const std::size_t order = group.order();
  const std::size_t period_check = std::max(segments, order * generators.size()) + 1;
  std::vector<std::size_t> walk{0};
  for (std::size_t l = 1; l < period_check; ++l) {
    walk.push_back(group.product_index(gen_index[(l - 1) % gen_index.size()], walk.back()));
  }
  for (std::size_t start = 0; start + order < walk.size(); start += order) {
    std::vector<bool> seen(order, false);
    for (std::size_t l = start; l < start + order; ++l) {
      if (seen[walk[l]]) {
        throw PauliError("generators do not traverse the group: element " + group.element(walk[l]).str() +
                         " repeats within one period");
      }
      seen[walk[l]] = true;
    }
    if (walk[start + order] != 0) throw PauliError("generators do not return to the identity after |G| steps");
  }
  walk.resize(segments);
  return walk;
}

std::vector<double> softmax_map(std::span<const double> theta) {
  if (theta.empty()) return {};
  double top = -std::numeric_limits<double>::infinity();
  for (double x : theta) {
    if (!std::isfinite(x)) throw std::invalid_argument("softmax input must be finite");
    top = std::max(top, x);
  }
  std::vector<double> out(theta.size());
  double total = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) total += (out[i] = std::exp(theta[i] - top));
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> residual_vector(std::span<const double> intervals, std::span<const std::size_t> labels,
                                    const DecouplingGroup& group, std::span<const PauliString> axes, int order) {
  if (intervals.size() != labels.size()) throw ScheduleError("one label per interval required");
  if (order < 1) throw ScheduleError("order must be at least 1");
  MomentProblem problem(std::vector<std::size_t>(labels.begin(), labels.end()), group, axes, order);
  const Eigen::VectorXd r = problem.residuals_from_intervals(intervals);
  return {r.data(), r.data() + r.size()};
}

Eigen::MatrixXd residual_jacobian(std::span<const double> theta, std::span<const std::size_t> labels,
                                  const DecouplingGroup& group, std::span<const PauliString> axes, int order) {
  if (theta.size() != labels.size()) throw ScheduleError("one label per parameter required");
  MomentProblem problem(std::vector<std::size_t>(labels.begin(), labels.end()), group, axes, order);
  Eigen::VectorXd x(static_cast<Eigen::Index>(theta.size()));
  std::copy(theta.begin(), theta.end(), x.data());
  return problem.jacobian(x);
}

std::size_t segment_count(const OptimizerConfig& config, const DecouplingGroup& group) {
  return (group.order() - 1) * static_cast<std::size_t>(config.order) + 1;
}

GeneratedSchedule optimize_schedule(const OptimizerConfig& config, const DecouplingGroup& group,
                                    std::span<const PauliString> axes) {
  if (config.order < 1) throw std::invalid_argument("order must be at least 1");
  if (config.restarts < 1) throw std::invalid_argument("at least one start is required");
  if (config.max_evaluations < 1) throw std::invalid_argument("evaluation budget must be positive");
  (void)character_table(group, axes);

  const std::size_t segments = segment_count(config, group);
  auto labels = traversal_pattern(group, config.pattern, segments);
  const MomentProblem problem(labels, group, axes, config.order);

  std::vector<RunOutcome> runs(static_cast<std::size_t>(config.restarts));
  auto run_one = [&](std::size_t i) {
    Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(segments));
    if (i > 0) {
      std::mt19937_64 rng(derive_seed(config.seed, {static_cast<std::uint64_t>(i)}));
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index k = 0; k < theta0.size(); ++k) theta0[k] = normal(rng);
    }
    runs[i] = levenberg_marquardt(problem, std::move(theta0), config);
  };

  const std::size_t jobs = static_cast<std::size_t>(std::max(1, config.jobs));
  if (jobs == 1) {
    for (std::size_t i = 0; i < runs.size(); ++i) run_one(i);
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t i = w; i < runs.size(); i += jobs) run_one(i);
      });
    }
  }

  std::size_t best = 0;
  int total = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    total += runs[i].evaluations;
    if (i > 0 && better(runs[i], runs[best])) best = i;
  }
  const RunOutcome& chosen = runs[best];

  OptimizationResult result;
  result.intervals = chosen.intervals;
  result.theta.assign(chosen.theta.data(), chosen.theta.data() + chosen.theta.size());
  result.cost = chosen.cost;
  result.evaluations = chosen.evaluations;
  result.total_evaluations = total;
  result.converged = chosen.stop != StopReason::budget;
  result.collapsed = chosen.collapsed;
  result.stop_reason = chosen.stop;
  result.restart = static_cast<int>(best);

  std::vector<double> cuts;
  double acc = 0.0;
  for (std::size_t l = 0; l + 1 < segments; ++l) cuts.push_back(acc += chosen.intervals[l]);
  PulseSchedule schedule(group, std::move(cuts), std::move(labels), true, config.order);
  result.verification = verify_order(schedule, axes, config.order, config.verify_tolerance);
  return {std::move(result), std::move(schedule)};
}

GeneratedSchedule optimize_schedule(const OptimizerConfig& config) {
  const auto group = DecouplingGroup::single_qubit_universal();
  const auto axes = weight_one_axes(1);
  return optimize_schedule(config, group, axes);
}

PulseSchedule udd_schedule(int pulses, const PauliString& axis) {
  if (pulses < 1) throw std::invalid_argument("UDD needs at least one pulse");
  if (axis.is_identity()) throw PauliError("UDD axis must be a non-identity Pauli");
  auto group = DecouplingGroup::from_elements({PauliString::identity(axis.num_qubits()), axis});
  std::vector<double> cuts;
  std::vector<std::size_t> labels{0};
  for (int j = 1; j <= pulses; ++j) {
    cuts.push_back(sin_squared_law(j, pulses));
    labels.push_back(static_cast<std::size_t>(j % 2));
  }
  return PulseSchedule(std::move(group), std::move(cuts), std::move(labels), true, pulses);
}

PulseSchedule qdd_schedule(int order) {
  if (order < 1) throw std::invalid_argument("QDD order must be at least 1");
  const auto group = DecouplingGroup::single_qubit_universal();
  const auto X = PauliString::parse("X");
  const auto Z = PauliString::parse("Z");
  const bool odd = order % 2 == 1;

  // Outer X pulse times, with the closing X at tau = 1 for odd orders.
  std::vector<double> outer{0.0};
  for (int j = 1; j <= order; ++j) outer.push_back(sin_squared_law(j, order));
  outer.push_back(1.0);

  std::vector<Pulse> events;
  for (std::size_t k = 0; k + 1 < outer.size(); ++k) {
    const double a = outer[k];
    const double b = outer[k + 1];
    for (int j = 1; j <= order; ++j) events.push_back({a + (b - a) * sin_squared_law(j, order), Z});
    if (odd) events.push_back({b, Z});
    if (k + 2 < outer.size() || odd) events.push_back({b, X});
  }

  // Merge coincident pulses; drop any that cancel to the identity.
  std::vector<Pulse> merged;
  for (const auto& e : events) {
    if (!merged.empty() && merged.back().time == e.time) {
      merged.back().op = e.op * merged.back().op;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const Pulse& p) { return p.op.is_identity(); });

  std::vector<double> cuts;
  std::vector<std::size_t> labels{0};
  PauliString frame = PauliString::identity(1);
  for (const auto& p : merged) {
    frame = p.op * frame;
    if (p.time >= 1.0) {
      if (!frame.is_identity()) throw std::logic_error("QDD construction did not close");
      continue;
    }
    cuts.push_back(p.time);
    labels.push_back(*group.index_of(frame));
  }
  return PulseSchedule(group, std::move(cuts), std::move(labels), true, order);
}

PulseSchedule periodic_schedule(std::size_t segments) {
  if (segments < 2) throw std::invalid_argument("a periodic schedule needs at least two segments");
  const auto group = DecouplingGroup::single_qubit_universal();
  const std::vector<PauliString> pattern{PauliString::parse("X"), PauliString::parse("Z")};
  auto labels = traversal_pattern(group, pattern, segments);
  std::vector<double> lengths(segments, 1.0);
  const int order = segments % 4 == 0 ? 1 : 0;
  return PulseSchedule::from_intervals(group, lengths, std::move(labels), true, order);
}

}  // namespace hodd
