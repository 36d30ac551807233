#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hodd/dynamics.hpp"
#include "hodd/generators.hpp"
#include "hodd/published.hpp"
#include "oracles.hpp"

using hodd::PauliString;
using oracle::cd;
using oracle::Mat;

namespace {

Mat to_double(const hodd::PreciseMatrix& m) {
  Mat out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out(i, j) = cd(static_cast<double>(m(i, j).real()), static_cast<double>(m(i, j).imag()));
    }
  }
  return out;
}

/// Static field beta_alpha sigma_alpha written as a quantum model with B_alpha = beta_alpha I.
hodd::QuantumNoiseModel static_field_model(const std::array<double, 3>& beta) {
  hodd::QuantumNoiseModel m;
  m.bath_hamiltonian = Mat::Zero(2, 2);
  m.beta = 0.0;
  const auto axes = hodd::weight_one_axes(1);
  for (std::size_t a = 0; a < 3; ++a) {
    m.interactions.push_back({axes[a], beta[a] * Mat::Identity(2, 2)});
    m.coupling += std::abs(beta[a]);
  }
  return m;
}

}  // namespace

TEST(SampleModel, NormalizationAndDeterminism) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto m = hodd::sample_model(seed, 1e-3);
    EXPECT_NO_THROW(m.validate());
    EXPECT_NEAR(oracle::spectral_norm(m.bath_hamiltonian), 1.0, 1e-12);
    double sum = 0.0;
    for (const auto& t : m.interactions) sum += oracle::spectral_norm(t.bath_operator);
    EXPECT_NEAR(sum, 1e-3, 1e-15);
    const auto again = hodd::sample_model(seed, 1e-3);
    EXPECT_EQ(m.bath_hamiltonian, again.bath_hamiltonian);
  }
  EXPECT_NE(hodd::sample_model(1, 1e-3).bath_hamiltonian, hodd::sample_model(2, 1e-3).bath_hamiltonian);
  EXPECT_THROW(hodd::sample_model(1, -1.0), hodd::DynamicsError);
  EXPECT_NO_THROW(hodd::sample_model(1, 0.0));
}

TEST(SampleModel, HamiltonianMatchesOracleAssembly) {
  const auto m = hodd::sample_model(5, 0.3);
  EXPECT_LT((to_double(m.total_hamiltonian()) - oracle::hamiltonian(m)).norm(), 1e-14);
}

TEST(Evolve, MatchesAdaptiveIntegrator) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    const auto s = oracle::random_schedule(rng, 2 + rng() % 12);
    const auto model = hodd::sample_model(rng(), std::pow(10.0, -3.0 * u(rng)));
    const double t = 0.05 + 1.5 * u(rng);
    const auto report = hodd::evolve(s, model, t);
    const auto ref = oracle::propagate(s, model, t);
    // Pulse phases differ between the two; U U0^dagger does not see them.
    const Mat lib = to_double(report.propagator) * to_double(report.reference).adjoint();
    const Mat ora = ref.u * ref.u0.adjoint();
    EXPECT_LT((lib - ora).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(report.error, oracle::spectral_norm(ref.u - ref.u0), 1e-10);
  }
}

TEST(Evolve, PropagatorIsUnitary) {
  const auto model = hodd::sample_model(3, 0.5);
  for (int k = 1; k <= 8; ++k) {
    const auto r = hodd::evolve(hodd::published_schedule(k), model, 2.0);
    EXPECT_LT(r.unitarity_defect, 1e-15);
  }
}

TEST(Evolve, ErrorIgnoresPulsePhases) {
  const auto s = hodd::published_schedule(3);
  const auto model = hodd::sample_model(7, 1e-2);
  const double base = hodd::evolve(s, model, 0.3).error;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 2 * M_PI);
  hodd::EvolveOptions opts;
  for (std::size_t i = 0; i < s.pulse_count(); ++i) opts.pulse_phases.push_back(std::polar(1.0, u(rng)));
  EXPECT_NEAR(hodd::evolve(s, model, 0.3, opts).error, base, 1e-16);
  opts.pulse_phases.pop_back();
  EXPECT_THROW(hodd::evolve(s, model, 0.3, opts), hodd::DynamicsError);
}

TEST(Evolve, ZeroCouplingGivesNumericalZero) {
  const auto model = hodd::sample_model(1, 0.0);
  for (int k = 1; k <= 4; ++k) EXPECT_LT(hodd::evolve(hodd::published_schedule(k), model, 1.0).error, 1e-17);
}

TEST(Evolve, RejectsMismatchedInputs) {
  const auto model = hodd::sample_model(1, 1e-3);
  EXPECT_THROW(hodd::evolve(hodd::published_schedule(1), model, -1.0), hodd::DynamicsError);
  std::vector<PauliString> el;
  for (const char* a : {"I", "X", "Y", "Z"}) {
    for (const char* b : {"I", "X"}) el.push_back(PauliString::parse(std::string(a) + b));
  }
  const auto two = hodd::PulseSchedule(hodd::DecouplingGroup::from_elements(el), {0.5}, {0, 1});
  EXPECT_THROW(hodd::evolve(two, model, 1.0), hodd::DynamicsError);
}

TEST(Evolve, HigherOrderSuppressesErrorAtWeakCoupling) {
  // In the regime J T^{K+1} >> J^2 T^2 the error drops by about 2^{K+1} when T halves.
  const auto model = hodd::sample_model(1, 1e-6);
  for (int k = 1; k <= 3; ++k) {
    const auto s = hodd::published_schedule(k);
    const double ratio = hodd::evolve(s, model, 0.4).error / hodd::evolve(s, model, 0.2).error;
    EXPECT_NEAR(std::log2(ratio), k + 1, 0.3) << "K = " << k;
  }
}

TEST(FirstMagnus, MatchesClosedFormWithoutBathDynamics) {
  // With H_0 = 0, Omega_1 = -i T sum_alpha M_{alpha,0} sigma_alpha (x) B_alpha.
  std::mt19937_64 rng(43);
  const auto axes = hodd::weight_one_axes(1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = oracle::random_schedule(rng, 3 + rng() % 8);
    auto model = hodd::sample_model(rng(), 0.1);
    model.bath_hamiltonian.setZero();
    model.beta = 0.0;
    const double t = 0.7;
    Mat omega = Mat::Zero(4, 4);
    for (std::size_t a = 0; a < 3; ++a) {
      omega += t * oracle::moment_by_quadrature(s, axes[a], 0) *
               oracle::kron(oracle::pauli_matrix(axes[a].str()), model.interactions[a].bath_operator);
    }
    EXPECT_NEAR(hodd::first_magnus_norm(s, model, t), oracle::spectral_norm(omega), 1e-12);
  }
}

TEST(FirstMagnus, MatchesQuadratureWithDiagonalBath) {
  // H_B = b Z makes exp(i H_0 t) diagonal, so each matrix element is a scalar integral.
  std::mt19937_64 rng(44);
  const auto axes = hodd::weight_one_axes(1);
  const double b = 0.8, t = 1.3;
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = oracle::random_schedule(rng, 4 + rng() % 6);
    auto model = hodd::sample_model(rng(), 0.05);
    model.bath_hamiltonian = b * oracle::pauli_matrix("Z");
    const Eigen::Vector4d e{b, -b, b, -b};  // diagonal of I (x) bZ
    Mat omega = Mat::Zero(4, 4);
    std::vector<double> bounds{0.0};
    bounds.insert(bounds.end(), s.cut_times().begin(), s.cut_times().end());
    bounds.push_back(1.0);
    for (std::size_t a = 0; a < 3; ++a) {
      const Mat v = oracle::kron(oracle::pauli_matrix(axes[a].str()), model.interactions[a].bath_operator);
      for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
        const int y = oracle::switching_sign(s, axes[a], 0.5 * (bounds[seg] + bounds[seg + 1]));
        for (int i = 0; i < 4; ++i) {
          for (int j = 0; j < 4; ++j) {
            const double w = e[i] - e[j];
            const auto re = [&](double x) { return std::cos(w * x); };
            const auto im = [&](double x) { return std::sin(w * x); };
            using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
            const double lo = t * bounds[seg], hi = t * bounds[seg + 1];
            omega(i, j) += double(y) * v(i, j) * cd(GK::integrate(re, lo, hi, 5, 1e-13), GK::integrate(im, lo, hi, 5, 1e-13));
          }
        }
      }
    }
    EXPECT_NEAR(hodd::first_magnus_norm(s, model, t), oracle::spectral_norm(omega), 1e-12);
  }
}

TEST(FirstMagnus, TracksErrorInFirstOrderRegime) {
  const auto model = hodd::sample_model(1, 1e-3);
  hodd::EvolveOptions opts;
  opts.compute_first_magnus = true;
  const auto r = hodd::evolve(hodd::published_schedule(2), model, 0.1, opts);
  ASSERT_TRUE(r.first_magnus_norm.has_value());
  EXPECT_NEAR(*r.first_magnus_norm / r.error, 1.0, 0.02);
  EXPECT_FALSE(r.magnus_regime_warning);
  EXPECT_TRUE(hodd::evolve(hodd::published_schedule(2), hodd::sample_model(1, 1.0), 4.0).magnus_regime_warning);
}

TEST(ReducedError, MatchesDensityMatrixOracleAndBound) {
  const auto s = hodd::published_schedule(2);
  const auto model = hodd::sample_model(9, 1e-2);
  const double t = 0.8;
  const auto states = hodd::haar_product_states(10, 77);
  const auto report = hodd::evolve(s, model, t);
  const auto lib = hodd::reduced_error(report, model, states);
  const auto ref = oracle::propagate(s, model, t);
  for (std::size_t i = 0; i < states.size(); ++i) {
    EXPECT_NEAR(states[i].system.norm(), 1.0, 1e-14);
    const Eigen::VectorXcd psi = oracle::kron(states[i].system, states[i].bath);
    const auto reduced = [&](const Mat& u) {
      const Eigen::VectorXcd out = u * psi;
      Mat rho = Mat::Zero(2, 2);
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          for (int k = 0; k < 2; ++k) rho(a, b) += out(2 * a + k) * std::conj(out(2 * b + k));
        }
      }
      return rho;
    };
    const Mat d = reduced(ref.u) - reduced(ref.u0);
    const double trace_distance = 0.5 * Eigen::SelfAdjointEigenSolver<Mat>(d).eigenvalues().cwiseAbs().sum();
    EXPECT_NEAR(lib[i], trace_distance, 1e-11);
    EXPECT_LE(lib[i], report.error * (1 + 1e-12));
  }
  auto bad = states;
  bad[0].system *= 2.0;
  EXPECT_THROW(hodd::reduced_error(report, model, bad), hodd::DynamicsError);
}

TEST(HaarStates, DeterministicAndNormalized) {
  const auto a = hodd::haar_product_states(5, 3);
  const auto b = hodd::haar_product_states(5, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].system, b[i].system);
    EXPECT_NEAR(a[i].bath.norm(), 1.0, 1e-14);
  }
}

TEST(Classical, StaticFieldMatchesQuantumModelWithTrivialBath) {
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = oracle::random_schedule(rng, 4 + rng() % 6);
    hodd::ClassicalNoiseModel c;
    std::array<double, 3> beta{};
    for (std::size_t a = 0; a < 3; ++a) {
      c.components[a] = {0.1 * std::abs(u(rng)), 0.0, 0.0};
      beta[a] = c.components[a].amplitude;
    }
    const double t = 0.9;
    EXPECT_NEAR(hodd::evolve_classical(s, c, t), hodd::evolve(s, static_field_model(beta), t).error, 1e-12);
  }
}

TEST(Classical, SampledNoiseRespectsAmplitudeBound) {
  const auto c = hodd::sample_single_frequency_noise(3, 1e-5, 150.0, 2e-3);
  EXPECT_NO_THROW(c.validate());
  EXPECT_NEAR(c.beta_max(2e-3), 1e-5, 1e-12);
  EXPECT_THROW(hodd::sample_single_frequency_noise(3, -1.0, 1.0, 1.0), hodd::DynamicsError);
  hodd::ClassicalNoiseModel bad;
  bad.components[0] = {1.0, 5.0, 0.0};
  bad.cutoff = 1.0;
  EXPECT_THROW(bad.validate(), hodd::DynamicsError);
}
