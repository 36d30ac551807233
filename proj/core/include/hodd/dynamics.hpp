#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hodd/pauli.hpp"
#include "hodd/schedule.hpp"

namespace hodd {

/// Propagators are accumulated in extended precision: at J = 1e-5 the errors of
/// interest sit a few decades above double-precision roundoff.
using Real = long double;
using Complex = std::complex<Real>;
using PreciseMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
using PreciseVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

class DynamicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InteractionTerm {
  PauliString system_axis;
  Eigen::MatrixXcd bath_operator;  // Hermitian
};

/// H = H_S (x) I + I (x) H_B + sum_alpha sigma_alpha (x) B_alpha on a
/// system of `system_qubits` qubits and a bath of `bath_qubits` qubits.
struct QuantumNoiseModel {
  std::size_t system_qubits = 1;
  std::size_t bath_qubits = 1;
  Eigen::MatrixXcd system_hamiltonian;
  Eigen::MatrixXcd bath_hamiltonian;
  std::vector<InteractionTerm> interactions;
  double coupling = 0.0;  // J = sum_alpha ||B_alpha||
  double beta = 1.0;      // ||H_B||
  std::uint64_t seed = 0;

  std::size_t system_dim() const { return std::size_t{1} << system_qubits; }
  std::size_t bath_dim() const { return std::size_t{1} << bath_qubits; }

  /// H_0 = H_S (x) I + I (x) H_B.
  PreciseMatrix free_hamiltonian() const;
  /// sum_alpha y_alpha sigma_alpha (x) B_alpha with y_alpha = chi(sigma_alpha, frame).
  PreciseMatrix toggled_interaction(const PauliString& frame) const;
  PreciseMatrix total_hamiltonian() const;

  /// Throws DynamicsError on inconsistent dimensions or non-Hermitian parts.
  void validate() const;
};

/// One system qubit and one bath qubit: H_B = sum c_a sigma_a with c_a ~ U[0,1]
/// rescaled to ||H_B|| = 1, B_a = sum_mu c_{a,mu} sigma_mu with c ~ U[0,1]
/// rescaled so sum_a ||B_a|| = J, and H_S = 0. Deterministic in `seed`.
QuantumNoiseModel sample_model(std::uint64_t seed, double coupling);

double operator_norm(const Eigen::MatrixXcd& m);
Real operator_norm(const PreciseMatrix& m);

struct EvolveOptions {
  /// Optional unit-modulus factor per compiled pulse (same order as
  /// compile_pulses). The error is insensitive to these by construction.
  std::vector<std::complex<double>> pulse_phases;
  bool compute_first_magnus = false;
};

struct EvolutionReport {
  PreciseMatrix propagator;  // U(T)
  PreciseMatrix reference;   // U_0(T) = U_c(T) exp(-i H_0 T)
  double error = 0.0;        // ||U(T) - U_0(T)||
  double unitarity_defect = 0.0;
  /// True when J T >= pi, outside the range where the Magnus series is known to converge.
  bool magnus_regime_warning = false;
  std::optional<double> first_magnus_norm;
};

/// Exact piecewise-constant evolution: every segment uses exp(-i H dt) from a
/// unitary diagonalization of H; pulses act as P (x) I_B between segments.
EvolutionReport evolve(const PulseSchedule& schedule, const QuantumNoiseModel& model, double total_time,
                       const EvolveOptions& options = {});

struct ProductState {
  Eigen::VectorXcd system;
  Eigen::VectorXcd bath;
};

/// Independent Haar-random pure states on system and bath.
std::vector<ProductState> haar_product_states(std::size_t count, std::uint64_t seed, std::size_t system_dim = 2,
                                              std::size_t bath_dim = 2);

/// Trace distance (1/2)||rho_S - rho_S,ideal||_1 between the reduced system
/// states produced by U(T) and U_0(T), one value per initial state.
std::vector<double> reduced_error(const PulseSchedule& schedule, const QuantumNoiseModel& model, double total_time,
                                  std::span<const ProductState> initial_states);
std::vector<double> reduced_error(const EvolutionReport& evolution, const QuantumNoiseModel& model,
                                  std::span<const ProductState> initial_states);

/// ||Omega_1(T)|| with Omega_1 = -i sum_alpha int_0^T y_alpha(t) e^{iH_0 t}(sigma_alpha (x) B_alpha)e^{-iH_0 t} dt,
/// integrated segment by segment with adaptive Gauss-Kronrod quadrature.
/// Throws DynamicsError if the quadrature misses `relative_tolerance`.
double first_magnus_norm(const PulseSchedule& schedule, const QuantumNoiseModel& model, double total_time,
                         double relative_tolerance = 1e-12);

struct NoiseComponent {
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;
};

/// beta_alpha(t) = A_alpha cos(omega_alpha t + phi_alpha) along X, Y, Z.
struct ClassicalNoiseModel {
  std::array<NoiseComponent, 3> components{};
  double cutoff = 0.0;  // omega_c >= |omega_alpha|

  double value(std::size_t axis, double t) const;
  /// sup_t sum_alpha |beta_alpha(t)| over t in [0, horizon].
  double beta_max(double horizon) const;
  void validate() const;
};

/// All three axes share frequency `omega`; amplitudes and phases are drawn
/// uniformly and amplitudes rescaled so sup_t sum |beta_alpha| = beta_max on [0, horizon].
ClassicalNoiseModel sample_single_frequency_noise(std::uint64_t seed, double beta_max, double omega,
                                                  double horizon);

/// ||U~(T) - I|| for the toggling-frame generator sum_alpha y_alpha(t) beta_alpha(t) sigma_alpha,
/// integrated with an adaptive Runge-Kutta-Fehlberg 7(8) stepper (relative tolerance 1e-12).
/// Only single-qubit schedules are accepted.
double evolve_classical(const PulseSchedule& schedule, const ClassicalNoiseModel& model, double total_time);

}  // namespace hodd
