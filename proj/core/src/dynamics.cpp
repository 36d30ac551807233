#include "hodd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

namespace hodd {

namespace {

constexpr double kHermitianTolerance = 1e-12;

PreciseMatrix to_precise(const Eigen::MatrixXcd& m) {
  PreciseMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = Complex(m(i, j).real(), m(i, j).imag());
  }
  return out;
}

PreciseMatrix kron(const PreciseMatrix& a, const PreciseMatrix& b) {
  PreciseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

PreciseMatrix identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return PreciseMatrix::Identity(n, n);
}

bool is_hermitian(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= kHermitianTolerance * scale;
}

// exp(-i H dt) for all dt from one diagonalization of H.
class HermitianExponential {
 public:
  explicit HermitianExponential(const PreciseMatrix& h) : solver_(h) {
    if (solver_.info() != Eigen::Success) throw DynamicsError("Hamiltonian diagonalization failed");
  }

  PreciseMatrix operator()(Real dt) const {
    const auto& v = solver_.eigenvectors();
    const auto& w = solver_.eigenvalues();
    PreciseMatrix scaled = v;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      const Real phase = -w(k) * dt;
      scaled.col(k) *= Complex(std::cos(phase), std::sin(phase));
    }
    return scaled * v.adjoint();
  }

  const PreciseMatrix& eigenvectors() const { return solver_.eigenvectors(); }
  const auto& eigenvalues() const { return solver_.eigenvalues(); }

 private:
  Eigen::SelfAdjointEigenSolver<PreciseMatrix> solver_;
};

void check_compatible(const PulseSchedule& schedule, const QuantumNoiseModel& model, double total_time) {
  model.validate();
  if (schedule.num_qubits() != model.system_qubits) {
    throw DynamicsError("schedule acts on " + std::to_string(schedule.num_qubits()) + " qubits but the model has " +
                        std::to_string(model.system_qubits) + " system qubits");
  }
  if (!std::isfinite(total_time) || total_time < 0.0) throw DynamicsError("total time must be finite and >= 0");
}

std::vector<PauliString> single_qubit_axes() {
  return {PauliString::parse("X"), PauliString::parse("Y"), PauliString::parse("Z")};
}

}  // namespace

double operator_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

Real operator_norm(const PreciseMatrix& m) {
  if (m.size() == 0) return 0.0L;
  Eigen::JacobiSVD<PreciseMatrix> svd(m);
  return svd.singularValues()(0);
}

void QuantumNoiseModel::validate() const {
  if (system_qubits == 0 || bath_qubits == 0) throw DynamicsError("system and bath need at least one qubit");
  const auto ds = static_cast<Eigen::Index>(system_dim());
  const auto db = static_cast<Eigen::Index>(bath_dim());
  if (system_hamiltonian.size() != 0) {
    if (system_hamiltonian.rows() != ds || system_hamiltonian.cols() != ds) {
      throw DynamicsError("system Hamiltonian has the wrong dimension");
    }
    if (!is_hermitian(system_hamiltonian)) throw DynamicsError("system Hamiltonian is not Hermitian");
  }
  if (bath_hamiltonian.rows() != db || bath_hamiltonian.cols() != db) {
    throw DynamicsError("bath Hamiltonian has the wrong dimension");
  }
  if (!is_hermitian(bath_hamiltonian)) throw DynamicsError("bath Hamiltonian is not Hermitian");
  for (const auto& term : interactions) {
    if (term.system_axis.num_qubits() != system_qubits) throw DynamicsError("interaction axis has the wrong width");
    if (term.bath_operator.rows() != db || term.bath_operator.cols() != db) {
      throw DynamicsError("bath operator has the wrong dimension");
    }
    if (!is_hermitian(term.bath_operator)) throw DynamicsError("bath operator is not Hermitian");
  }
}

PreciseMatrix QuantumNoiseModel::free_hamiltonian() const {
  PreciseMatrix h = kron(identity(system_dim()), to_precise(bath_hamiltonian));
  if (system_hamiltonian.size() != 0) h += kron(to_precise(system_hamiltonian), identity(bath_dim()));
  return h;
}

PreciseMatrix QuantumNoiseModel::toggled_interaction(const PauliString& frame) const {
  const auto d = static_cast<Eigen::Index>(system_dim() * bath_dim());
  PreciseMatrix h = PreciseMatrix::Zero(d, d);
  for (const auto& term : interactions) {
    const Real y = sign_character(term.system_axis, frame);
    h += y * kron(to_precise(dense_matrix(term.system_axis)), to_precise(term.bath_operator));
  }
  return h;
}

PreciseMatrix QuantumNoiseModel::total_hamiltonian() const {
  return free_hamiltonian() + toggled_interaction(PauliString(system_qubits));
}

QuantumNoiseModel sample_model(std::uint64_t seed, double coupling) {
  if (!std::isfinite(coupling) || coupling < 0.0) throw DynamicsError("coupling J must be finite and >= 0");
  const auto axes = single_qubit_axes();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  std::array<double, 3> c{};
  std::array<std::array<double, 3>, 3> cb{};
  for (;;) {
    for (auto& v : c) v = uniform(rng);
    for (auto& row : cb)
      for (auto& v : row) v = uniform(rng);
    const bool bath_zero = std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
    const bool coupling_zero =
        std::all_of(cb.begin(), cb.end(), [](const auto& row) { return row[0] == 0.0 && row[1] == 0.0 && row[2] == 0.0; });
    if (!bath_zero && !coupling_zero) break;
  }

  QuantumNoiseModel model;
  model.system_qubits = 1;
  model.bath_qubits = 1;
  model.seed = seed;
  model.system_hamiltonian = Eigen::MatrixXcd::Zero(2, 2);
  model.bath_hamiltonian = Eigen::MatrixXcd::Zero(2, 2);
  for (std::size_t a = 0; a < 3; ++a) model.bath_hamiltonian += c[a] * dense_matrix(axes[a]);
  model.bath_hamiltonian /= operator_norm(model.bath_hamiltonian);
  model.beta = 1.0;

  double total = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(2, 2);
    for (std::size_t mu = 0; mu < 3; ++mu) b += cb[a][mu] * dense_matrix(axes[mu]);
    total += operator_norm(b);
    model.interactions.push_back({axes[a], std::move(b)});
  }
  for (auto& term : model.interactions) term.bath_operator *= coupling / total;
  model.coupling = coupling;
  return model;
}

EvolutionReport evolve(const PulseSchedule& schedule, const QuantumNoiseModel& model, double total_time,
                       const EvolveOptions& options) {
  check_compatible(schedule, model, total_time);
  const auto pulses = compile_pulses(schedule);
  if (!options.pulse_phases.empty() && options.pulse_phases.size() != pulses.size()) {
    throw DynamicsError("expected " + std::to_string(pulses.size()) + " pulse phases, got " +
                        std::to_string(options.pulse_phases.size()));
  }
  for (const auto& phase : options.pulse_phases) {
    if (std::abs(std::abs(phase) - 1.0) > 1e-12) throw DynamicsError("pulse phases must have unit modulus");
  }

  const std::size_t ds = model.system_dim();
  const std::size_t db = model.bath_dim();
  const HermitianExponential step(model.total_hamiltonian());
  const auto pulse_matrix = [&](std::size_t k) {
    PreciseMatrix p = to_precise(dense_matrix(pulses[k].op));
    if (!options.pulse_phases.empty()) {
      const auto ph = options.pulse_phases[k];
      p *= Complex(ph.real(), ph.imag());
    }
    return p;
  };

  const Real T = total_time;
  const auto b = schedule.boundaries();
  PreciseMatrix u = identity(ds * db);
  PreciseMatrix control = identity(ds);
  for (std::size_t l = 0; l < schedule.num_segments(); ++l) {
    if (l > 0) {
      const PreciseMatrix p = pulse_matrix(l - 1);
      u = kron(p, identity(db)) * u;
      control = p * control;
    }
    const Real dt = T * (static_cast<Real>(b[l + 1]) - static_cast<Real>(b[l]));
    u = step(dt) * u;
  }
  if (schedule.needs_closure_pulse()) {
    const PreciseMatrix p = pulse_matrix(pulses.size() - 1);
    u = kron(p, identity(db)) * u;
    control = p * control;
  }

  EvolutionReport report;
  report.reference = kron(control, identity(db)) * HermitianExponential(model.free_hamiltonian())(T);
  report.propagator = std::move(u);
  report.error = static_cast<double>(operator_norm(PreciseMatrix(report.propagator - report.reference)));
  report.unitarity_defect = static_cast<double>(
      operator_norm(PreciseMatrix(report.propagator.adjoint() * report.propagator - identity(ds * db))));
  report.magnus_regime_warning = model.coupling * total_time >= std::numbers::pi;
  if (options.compute_first_magnus) report.first_magnus_norm = first_magnus_norm(schedule, model, total_time);
  return report;
}

std::vector<ProductState> haar_product_states(std::size_t count, std::uint64_t seed, std::size_t system_dim,
                                              std::size_t bath_dim) {
  if (system_dim == 0 || bath_dim == 0) throw DynamicsError("state dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto draw = [&](std::size_t dim) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(dim));
    do {
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        v(i) = {re, im};
      }
    } while (v.norm() == 0.0);
    return Eigen::VectorXcd(v / v.norm());
  };
  std::vector<ProductState> states;
  states.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto s = draw(system_dim);
    auto e = draw(bath_dim);
    states.push_back({std::move(s), std::move(e)});
  }
  return states;
}

std::vector<double> reduced_error(const EvolutionReport& evolution, const QuantumNoiseModel& model,
                                  std::span<const ProductState> initial_states) {
  const auto ds = static_cast<Eigen::Index>(model.system_dim());
  const auto db = static_cast<Eigen::Index>(model.bath_dim());
  if (evolution.propagator.rows() != ds * db) throw DynamicsError("evolution does not match the model dimension");

  // rho - rho_ideal = Tr_B(|d><p0| + |p0><d| + |d><d|) with d = (U - U_0) psi,
  // which avoids subtracting two O(1) density matrices.
  const PreciseMatrix diff = evolution.propagator - evolution.reference;
  std::vector<double> out;
  out.reserve(initial_states.size());
  for (const auto& state : initial_states) {
    if (state.system.size() != ds || state.bath.size() != db) throw DynamicsError("initial state has the wrong dimension");
    if (std::abs(state.system.norm() - 1.0) > 1e-10 || std::abs(state.bath.norm() - 1.0) > 1e-10) {
      throw DynamicsError("initial states must be normalized");
    }
    PreciseVector psi(ds * db);
    for (Eigen::Index i = 0; i < ds; ++i) {
      for (Eigen::Index j = 0; j < db; ++j) {
        const auto v = state.system(i) * state.bath(j);
        psi(i * db + j) = Complex(v.real(), v.imag());
      }
    }
    const PreciseVector ideal = evolution.reference * psi;
    const PreciseVector delta = diff * psi;
    PreciseMatrix p0(ds, db), d(ds, db);
    for (Eigen::Index i = 0; i < ds; ++i) {
      for (Eigen::Index j = 0; j < db; ++j) {
        p0(i, j) = ideal(i * db + j);
        d(i, j) = delta(i * db + j);
      }
    }
    const PreciseMatrix rho_diff = d * p0.adjoint() + p0 * d.adjoint() + d * d.adjoint();
    Eigen::JacobiSVD<PreciseMatrix> svd(rho_diff);
    const Real trace_norm = svd.singularValues().sum();
    out.push_back(std::clamp(static_cast<double>(trace_norm / 2), 0.0, 1.0));
  }
  return out;
}

std::vector<double> reduced_error(const PulseSchedule& schedule, const QuantumNoiseModel& model, double total_time,
                                  std::span<const ProductState> initial_states) {
  return reduced_error(evolve(schedule, model, total_time), model, initial_states);
}

double first_magnus_norm(const PulseSchedule& schedule, const QuantumNoiseModel& model, double total_time,
                         double relative_tolerance) {
  check_compatible(schedule, model, total_time);
  if (!(relative_tolerance > 0.0)) throw DynamicsError("quadrature tolerance must be positive");
  using Quadrature = boost::math::quadrature::gauss_kronrod<Real, 31>;
  constexpr unsigned kMaxDepth = 15;

  // In the eigenbasis of H_0 the integrand entry (j, k) is V_jk exp(i (e_j - e_k) t).
  const HermitianExponential free(model.free_hamiltonian());
  const PreciseMatrix& w = free.eigenvectors();
  const auto& energies = free.eigenvalues();
  const Eigen::Index d = w.rows();
  const auto b = schedule.boundaries();
  const Real T = total_time;

  PreciseMatrix omega = PreciseMatrix::Zero(d, d);
  for (std::size_t l = 0; l < schedule.num_segments(); ++l) {
    const Real lo = T * static_cast<Real>(b[l]);
    const Real hi = T * static_cast<Real>(b[l + 1]);
    const PreciseMatrix v = w.adjoint() * model.toggled_interaction(schedule.frame(l)) * w;
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index k = 0; k < d; ++k) {
        const Real freq = energies(j) - energies(k);
        Real err_re = 0, err_im = 0, l1_re = 0, l1_im = 0;
        const Real re = Quadrature::integrate([freq](Real t) { return std::cos(freq * t); }, lo, hi, kMaxDepth,
                                              relative_tolerance, &err_re, &l1_re);
        const Real im = Quadrature::integrate([freq](Real t) { return std::sin(freq * t); }, lo, hi, kMaxDepth,
                                              relative_tolerance, &err_im, &l1_im);
        const Real scale = std::max<Real>(hi - lo, 0);
        if (err_re > relative_tolerance * std::max(l1_re, scale) ||
            err_im > relative_tolerance * std::max(l1_im, scale)) {
          throw DynamicsError("first-order Magnus quadrature did not reach tolerance on segment " +
                              std::to_string(l));
        }
        omega(j, k) += v(j, k) * Complex(re, im);
      }
    }
  }
  return static_cast<double>(operator_norm(PreciseMatrix(w * omega * w.adjoint())));
}

double ClassicalNoiseModel::value(std::size_t axis, double t) const {
  const auto& c = components.at(axis);
  return c.amplitude * std::cos(c.omega * t + c.phase);
}

double ClassicalNoiseModel::beta_max(double horizon) const {
  if (!std::isfinite(horizon) || horizon < 0.0) throw DynamicsError("horizon must be finite and >= 0");
  constexpr int kSamples = 100000;
  double best = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    const double t = horizon * i / kSamples;
    double sum = 0.0;
    for (std::size_t a = 0; a < 3; ++a) sum += std::abs(value(a, t));
    best = std::max(best, sum);
  }
  return best;
}

void ClassicalNoiseModel::validate() const {
  if (!std::isfinite(cutoff) || cutoff < 0.0) throw DynamicsError("cutoff must be finite and >= 0");
  for (const auto& c : components) {
    if (!std::isfinite(c.amplitude) || !std::isfinite(c.omega) || !std::isfinite(c.phase)) {
      throw DynamicsError("noise parameters must be finite");
    }
    if (std::abs(c.omega) > cutoff * (1.0 + 1e-15)) throw DynamicsError("noise frequency exceeds the cutoff");
  }
}

ClassicalNoiseModel sample_single_frequency_noise(std::uint64_t seed, double beta_max, double omega,
                                                  double horizon) {
  if (!std::isfinite(beta_max) || beta_max < 0.0) throw DynamicsError("beta_max must be finite and >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  ClassicalNoiseModel model;
  model.cutoff = std::abs(omega);
  for (;;) {
    for (auto& c : model.components) {
      c.amplitude = uniform(rng);
      c.omega = omega;
      c.phase = 2.0 * std::numbers::pi * uniform(rng);
    }
    if (model.beta_max(horizon) > 0.0) break;
  }
  const double scale = beta_max / model.beta_max(horizon);
  for (auto& c : model.components) c.amplitude *= scale;
  return model;
}

double evolve_classical(const PulseSchedule& schedule, const ClassicalNoiseModel& model, double total_time) {
  namespace odeint = boost::numeric::odeint;
  if (schedule.num_qubits() != 1) throw DynamicsError("classical noise is defined for a single qubit");
  if (!std::isfinite(total_time) || total_time < 0.0) throw DynamicsError("total time must be finite and >= 0");
  model.validate();

  // W = U~ - I as real/imaginary parts of a row-major 2x2 matrix; integrating
  // W directly keeps the small deviation free of cancellation against I.
  using State = std::array<Real, 8>;
  const auto axes = single_qubit_axes();
  std::array<PreciseMatrix, 3> sigma;
  for (std::size_t a = 0; a < 3; ++a) sigma[a] = to_precise(dense_matrix(axes[a]));

  Real amplitude_sum = 0;
  for (const auto& c : model.components) amplitude_sum += std::abs(c.amplitude);
  const Real scale = amplitude_sum * static_cast<Real>(total_time);
  if (scale == 0) return 0.0;

  constexpr long kMaxRhsCalls = 50'000'000;
  long rhs_calls = 0;
  std::array<int, 3> y{};
  const auto rhs = [&](const State& x, State& dxdt, Real t) {
    if (++rhs_calls > kMaxRhsCalls) throw DynamicsError("classical integration exceeded its step budget");
    Eigen::Matrix<Complex, 2, 2> h = Eigen::Matrix<Complex, 2, 2>::Zero();
    for (std::size_t a = 0; a < 3; ++a) {
      const auto& c = model.components[a];
      const Real beta = static_cast<Real>(c.amplitude) *
                        std::cos(static_cast<Real>(c.omega) * t + static_cast<Real>(c.phase));
      h += static_cast<Real>(y[a]) * beta * sigma[a].topLeftCorner<2, 2>();
    }
    Eigen::Matrix<Complex, 2, 2> w;
    for (int i = 0; i < 4; ++i) w(i / 2, i % 2) = Complex(x[2 * i], x[2 * i + 1]);
    const Eigen::Matrix<Complex, 2, 2> dw = Complex(0, -1) * h * (Eigen::Matrix<Complex, 2, 2>::Identity() + w);
    for (int i = 0; i < 4; ++i) {
      dxdt[2 * i] = dw(i / 2, i % 2).real();
      dxdt[2 * i + 1] = dw(i / 2, i % 2).imag();
    }
  };

  using Stepper = odeint::runge_kutta_fehlberg78<State, Real, State, Real>;
  const Real abs_tol = 1e-16L * scale;
  const Real rel_tol = 1e-12L;
  State x{};
  const auto b = schedule.boundaries();
  const Real T = total_time;
  try {
    for (std::size_t l = 0; l < schedule.num_segments(); ++l) {
      for (std::size_t a = 0; a < 3; ++a) y[a] = sign_character(axes[a], schedule.frame(l));
      const Real t0 = T * static_cast<Real>(b[l]);
      const Real t1 = T * static_cast<Real>(b[l + 1]);
      if (t1 <= t0) continue;
      auto stepper = odeint::make_controlled(abs_tol, rel_tol, Stepper());
      odeint::integrate_adaptive(stepper, rhs, x, t0, t1, (t1 - t0) / 8);
    }
  } catch (const odeint::step_adjustment_error& e) {
    throw DynamicsError(std::string("classical integration failed: ") + e.what());
  }

  PreciseMatrix w(2, 2);
  for (int i = 0; i < 4; ++i) w(i / 2, i % 2) = Complex(x[2 * i], x[2 * i + 1]);
  return static_cast<double>(operator_norm(w));
}

}  // namespace hodd
