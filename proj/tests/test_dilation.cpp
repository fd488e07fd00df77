#include <gtest/gtest.h>

#include <random>

#include "nhknot/dilation.hpp"
#include "nhknot/errors.hpp"
#include "nhknot/evolve.hpp"
#include "nhknot/model.hpp"
#include "nhknot/spectra.hpp"
#include "support.hpp"

namespace nhknot {
namespace {

Mat2 diag_gain(double rate = 1.0) {
  Mat2 h;
  h << kI * rate, 0, 0, -kI * rate;
  return h;
}

HamiltonianSchedule constant(const Mat2& h) {
  return [h](double) { return h; };
}

TEST(Ancilla, SigmaYEigenstates) {
  EXPECT_LT((pauli::y() * ancilla_plus() - ancilla_plus()).norm(), 1e-15);
  EXPECT_LT((pauli::y() * ancilla_minus() + ancilla_minus()).norm(), 1e-15);
  EXPECT_LT(std::abs(ancilla_plus().dot(ancilla_minus())), 1e-15);
}

TEST(SolveM, HermitianGeneratorKeepsCommutingMetric) {
  Mat2 h;
  h << 0.4, Complex(0.1, 0.3), Complex(0.1, -0.3), -0.2;
  const Mat2 m0 = 3.0 * Mat2::Identity() + 0.5 * h;
  const auto series = solve_M(constant(h), m0, uniform_grid(5.0, 500), 0.1);
  for (const auto& m : series.M) EXPECT_LT((m - m0).norm(), 1e-12);
}

TEST(SolveM, DiagonalGainClosedForm) {
  const double m0 = 20.0;
  const auto grid = uniform_grid(1.0, 1000);
  const auto series = solve_M(constant(diag_gain()), m0 * Mat2::Identity(), grid, 0.1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(series.M[i](0, 0).real(), m0 * std::exp(-2.0 * grid[i]), 1e-9);
    EXPECT_NEAR(series.M[i](1, 1).real(), m0 * std::exp(2.0 * grid[i]), 1e-8);
    EXPECT_LT(std::abs(series.M[i](0, 1)), 1e-14);
  }
}

// RK4 in the metric: successive differences under step halving shrink by about 2^4.
TEST(SolveM, FourthOrderUnderStepHalving) {
  const Mat2 h = bloch_hamiltonian(preset_params("hopf_link"), 0.6 * kPi);
  const double eta0 = 1.2 * choose_eta0(constant(h), uniform_grid(4.0, 800));
  const Mat2 m0 = (eta0 * eta0 + 1.0) * Mat2::Identity();
  std::vector<Mat2> finals;
  for (std::size_t n : {50, 100, 200}) finals.push_back(solve_M(constant(h), m0, uniform_grid(4.0, n), 0.1).M.back());
  const double slope = std::log2((finals[0] - finals[1]).norm() / (finals[1] - finals[2]).norm());
  EXPECT_NEAR(slope, 4.0, 0.4);
}

TEST(SolveM, MarginViolationReportsTime) {
  try {
    solve_M(constant(diag_gain()), 2.0 * Mat2::Identity(), uniform_grid(2.0, 2000), 0.1);
    FAIL() << "expected DilationInfeasible";
  } catch (const DilationInfeasible& e) {
    // 2 e^{-2t} - 1 < 0.1 first at t = ln(2 / 1.1) / 2.
    EXPECT_NEAR(e.violation_time, 0.5 * std::log(2.0 / 1.1), 2e-3);
  }
}

TEST(SolveM, NonHermitianStartRejected) {
  Mat2 m0;
  m0 << 2, 1, 0, 2;
  EXPECT_THROW(solve_M(constant(pauli::x()), m0, uniform_grid(1.0, 10), 0.1), InvalidArgument);
}

TEST(Eta, SquareRootAndDerivative) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat2 a = testing::random_matrix(rng);
    const Mat2 m = a.adjoint() * a + 1.5 * Mat2::Identity();
    const Mat2 eta = eta_from_metric(m);
    EXPECT_LT((eta - eta.adjoint()).norm(), 1e-13);
    EXPECT_LT((eta.adjoint() * eta + Mat2::Identity() - m).norm(), 1e-12);

    // Finite-difference oracle along a Hermitian direction.
    const Mat2 b = testing::random_matrix(rng);
    const Mat2 dm = b + b.adjoint();
    const double h = 1e-6;
    const Mat2 numeric = (eta_from_metric(m + h * dm) - eta_from_metric(m - h * dm)) / (2.0 * h);
    EXPECT_LT((eta_derivative(eta, dm) - numeric).norm(), 1e-7);
  }
}

TEST(Generators, HermitianGeneratorWithScalarEta) {
  Mat2 h;
  h << 0.4, Complex(0.1, 0.3), Complex(0.1, -0.3), -0.2;
  const auto g = dilated_generators(h, 2.0 * Mat2::Identity(), Mat2::Zero());
  EXPECT_LT(g.lambda.norm(), 1e-14);
  EXPECT_LT((g.gamma - h).norm(), 1e-14);
}

TEST(Generators, ZeroGenerator) {
  const auto g = dilated_generators(Mat2::Zero(), 0.7 * Mat2::Identity(), Mat2::Zero());
  EXPECT_LT(g.lambda.norm(), 1e-15);
  EXPECT_LT(g.gamma.norm(), 1e-15);
}

TEST(Generators, HopfLinkDirectAlgebra) {
  const Mat2 h = bloch_hamiltonian(preset_params("hopf_link"), 0.6 * kPi);
  const double eta0 = 0.5;
  const Mat2 m = (1.0 + eta0 * eta0) * Mat2::Identity();
  const Mat2 dm = -kI * (h.adjoint() * m - m * h);
  const Mat2 eta = eta0 * Mat2::Identity();
  const Mat2 deta = dm / (2.0 * eta0);  // eta X + X eta = dM for scalar eta
  const Mat2 m_inv = m.inverse();
  const Mat2 gamma = (h + (kI * deta + eta * h) * eta) * m_inv;
  const Mat2 lambda = kI * (h * eta - eta * h - kI * deta) * m_inv;
  const auto g = dilated_generators(h, eta, eta_derivative(eta, dm));
  EXPECT_LT((g.gamma - gamma).norm(), 1e-12);
  EXPECT_LT((g.lambda - lambda).norm(), 1e-12);
  EXPECT_LT((gamma - gamma.adjoint()).norm(), 1e-12);
  EXPECT_LT((lambda - lambda.adjoint()).norm(), 1e-12);
}

TEST(Generators, InconsistentEtaRejected) {
  // dM not generated by H: the outputs cannot be Hermitian.
  const Mat2 h = diag_gain();
  EXPECT_THROW(dilated_generators(h, Mat2::Identity(), Mat2::Zero()), NumericalError);
}

TEST(Pauli, BasisReadout) {
  const auto c = pauli_decompose(kron(pauli::x(), pauli::identity()));
  EXPECT_NEAR(c.a1, 1.0, 1e-15);
  EXPECT_NEAR(c.a2 + c.a3 + c.a4 + c.b1 + c.b2 + c.b3 + c.b4, 0.0, 1e-15);
  const auto d = pauli_decompose(kron(pauli::identity(), pauli::z()) + kron(pauli::z(), pauli::z()));
  EXPECT_NEAR(d.a2, 1.0, 1e-15);
  EXPECT_NEAR(d.a4, 1.0, 1e-15);
  EXPECT_NEAR(d.a1 + d.a3 + d.b1 + d.b2 + d.b3 + d.b4, 0.0, 1e-15);
}

TEST(Pauli, RoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    PauliCoefficients c{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    const auto back = pauli_decompose(pauli_compose(c));
    for (auto f : {&PauliCoefficients::a1, &PauliCoefficients::a2, &PauliCoefficients::a3, &PauliCoefficients::a4,
                   &PauliCoefficients::b1, &PauliCoefficients::b2, &PauliCoefficients::b3, &PauliCoefficients::b4})
      EXPECT_NEAR(back.*f, c.*f, 1e-10);
  }
}

TEST(Pauli, OutOfSpanRejected) {
  EXPECT_THROW(pauli_decompose(kron(pauli::x(), pauli::x())), InvalidArgument);
}

TEST(Pulses, SingleQuadrature) {
  PauliCoefficients c;
  c.a1 = kPi;
  const auto p = pulse_schedule({0.0}, {c}, 10.0, 20.0);
  EXPECT_NEAR(p.rabi1[0], 1.0, 1e-15);
  EXPECT_NEAR(p.rabi2[0], 1.0, 1e-15);
  EXPECT_EQ(p.phi1[0], 0.0);
  EXPECT_EQ(p.phi2[0], 0.0);
  EXPECT_EQ(p.omega1[0], 10.0);
  EXPECT_EQ(p.omega2[0], 20.0);
}

TEST(Pulses, ZeroAmplitudeBranch) {
  PauliCoefficients c;
  c.b2 = kPi;
  c.a3 = -kPi;
  const auto p = pulse_schedule({0.0}, {c}, 0.0, 0.0);
  EXPECT_NEAR(p.rabi1[0], 0.0, 1e-15);
  EXPECT_EQ(p.phi1[0], 0.0);
  EXPECT_NEAR(p.rabi2[0], 2.0, 1e-15);
  EXPECT_NEAR(p.phi2[0], -kPi / 2.0, 1e-15);
}

TEST(Pulses, FrequencyConditions) {
  PauliCoefficients c;
  c.b3 = 0.3;
  c.a4 = -0.7;
  const auto p = pulse_schedule({0.0}, {c}, 100.0, 90.0);
  EXPECT_NEAR(p.omega1[0], 100.0 + 0.6 - 1.4, 1e-12);
  EXPECT_NEAR(p.omega2[0], 90.0 + 0.6 + 1.4, 1e-12);
}

TEST(Pulses, RandomCoefficientsReproduceDriveTerms) {
  // Omega e^{i phi} rebuilds the off-diagonal drive entries of each nuclear block.
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    PauliCoefficients c{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    const auto p = pulse_schedule({0.0}, {c}, 0.0, 0.0);
    const Mat4 h = pauli_compose(c);
    EXPECT_GE(p.rabi1[0], 0.0);
    EXPECT_GT(p.phi1[0], -kPi);
    EXPECT_LE(p.phi1[0], kPi);
    // Tone 1 acts on ancilla index 0, tone 2 on index 1; H(e0, e1) = pi Omega e^{i phi}.
    EXPECT_LT(std::abs(h(0, 2) - kPi * p.rabi1[0] * std::polar(1.0, p.phi1[0])), 1e-12);
    EXPECT_LT(std::abs(h(1, 3) - kPi * p.rabi2[0] * std::polar(1.0, p.phi2[0])), 1e-12);
  }
}

TEST(Initial, RfPhaseClosedForm) {
  EXPECT_NEAR(prepare_initial(1.0).rf_phase, kPi / 2.0, 1e-15);
  EXPECT_NEAR(prepare_initial(0.5).rf_phase, std::atan(-0.75) + kPi / 2.0, 1e-15);
  EXPECT_NEAR(prepare_initial(0.5).rf_phase, 0.9273, 1e-4);
  EXPECT_THROW(prepare_initial(0.0), InvalidArgument);
}

TEST(Initial, LargeEtaApproachesPlus) {
  const Vec4 s = prepare_initial(1e6).state;
  Vec4 plus;
  plus << ancilla_plus()(0), ancilla_plus()(1), 0, 0;
  EXPECT_GT(std::norm(plus.dot(s)), 1.0 - 1e-11);
}

TEST(Initial, StateComponents) {
  const double eta0 = 0.5;
  const Vec4 s = prepare_initial(eta0).state;
  const double norm = std::sqrt(1.0 + eta0 * eta0);
  // |-> + eta0 |+> with |+> = (1, i)/sqrt2, |-> = (i, 1)/sqrt2.
  EXPECT_LT(std::abs(s(0) - Complex(eta0, 1.0) / (std::sqrt(2.0) * norm)), 1e-15);
  EXPECT_LT(std::abs(s(1) - Complex(1.0, eta0) / (std::sqrt(2.0) * norm)), 1e-15);
  EXPECT_EQ(s(2), 0.0);
  EXPECT_EQ(s(3), 0.0);
}

TEST(Initial, RfRotationPreparesAncilla) {
  for (double eta0 : {0.3, 1.0, 2.5, 57.0}) {
    const auto init = prepare_initial(eta0);
    const Vec2 rotated = rf_rotation(init.rf_phase) * Vec2(1.0, 0.0);
    const Vec2 target = (ancilla_minus() + eta0 * ancilla_plus()).normalized();
    EXPECT_GT(std::norm(target.dot(rotated)), 1.0 - 1e-12) << eta0;
  }
}

TEST(ChooseEta0, HermitianNeedsOnlyMargin) {
  Mat2 h;
  h << 0.4, Complex(0.1, 0.3), Complex(0.1, -0.3), -0.2;
  EXPECT_NEAR(choose_eta0(constant(h), uniform_grid(3.0, 300), 0.1), std::sqrt(0.1), 1e-9);
}

TEST(ChooseEta0, DiagonalGainClosedForm) {
  const double eta0 = choose_eta0(constant(diag_gain()), uniform_grid(1.0, 2000), 0.1);
  EXPECT_NEAR(eta0, std::sqrt(1.1 * std::exp(2.0) - 1.0), 1e-6);
}

TEST(ChooseEta0, HopfLinkSelfVerifies) {
  const Mat2 h = bloch_hamiltonian(preset_params("hopf_link"), 0.6 * kPi);
  const auto es = eigensolve2(h);
  const double window = 8.0 / std::abs(es.values[0].imag() - es.values[1].imag());
  const auto grid = uniform_grid(window, 2000);
  const double eta0 = choose_eta0(constant(h), grid, 0.1);
  const auto series = solve_M(constant(h), (eta0 * eta0 + 1.0) * Mat2::Identity(), grid, 0.1);
  EXPECT_GE(series.min_margin, 0.1);
  EXPECT_THROW(solve_M(constant(h), (0.99 * eta0 * 0.99 * eta0 + 1.0) * Mat2::Identity(), grid, 0.1),
               DilationInfeasible);
}

TEST(ChooseEta0, InfeasibleBeyondCap) {
  EXPECT_THROW(choose_eta0(constant(diag_gain(50.0)), uniform_grid(1.0, 2000), 0.1), DilationInfeasible);
}

TEST(Dilate, EvolveRejectsOddIntervals) {
  const auto d = dilate(constant(pauli::x()), uniform_grid(1.0, 5), 1.0);
  EXPECT_THROW(evolve_dilated(d, prepare_initial(1.0).state), InvalidArgument);
}

// Dilated evolution projected on the ancilla |-> subspace reproduces the NH trajectory.
TEST(Dilate, SubspaceEquivalence) {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> uk(0.0, kTwoPi);
  for (auto name : preset_names()) {
    const auto p = preset_params(name);
    for (int trial = 0; trial < 4; ++trial) {
      const double k = uk(rng);
      const Mat2 h = bloch_hamiltonian(p, k);
      const auto es = eigensolve2(h);
      const double window = 8.0 / std::max(0.05, std::abs(es.values[0].imag() - es.values[1].imag()));
      const auto drive = compile_drive(h, window, CompileOptions{.intervals = 2000});
      const auto states = evolve_dilated(drive.dilation, drive.initial.state);
      double worst = 0.0;
      for (std::size_t j = 0; j < states.size(); ++j) {
        const double t = drive.dilation.t[2 * j];
        const Vec2 exact = propagate_nh(h, Vec2(1.0, 0.0), t);
        worst = std::max(worst, testing::pure_distance(project_minus(states[j]), exact));
      }
      EXPECT_LT(worst, 1e-4) << name << " k = " << k / kPi << " pi";
      EXPECT_LT(drive.dilation.max_hermiticity, 1e-10);
      EXPECT_GE(drive.dilation.min_margin, 0.05);
      EXPECT_LT(drive.dilation.max_recomposition, 1e-10);
      for (std::size_t i = 0; i < drive.dilation.t.size(); i += 97) {
        const Mat2& eta = drive.dilation.eta[i];
        EXPECT_LT((eta.adjoint() * eta + Mat2::Identity() - drive.dilation.M[i]).norm(),
                  1e-8 * drive.dilation.M[i].norm());
      }
    }
  }
}

TEST(Compile, PulseInvariants) {
  const Mat2 h = bloch_hamiltonian(preset_params("hopf_link"), 1.65 * kPi);
  const auto drive = compile_drive(h, 10.0, CompileOptions{.intervals = 400, .omega_tilde1 = 5.0, .omega_tilde2 = 7.0});
  const auto& p = drive.pulses;
  ASSERT_EQ(p.size(), 401u);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_GE(p.rabi1[i], 0.0);
    EXPECT_GE(p.rabi2[i], 0.0);
    EXPECT_GT(p.phi1[i], -kPi);
    EXPECT_LE(p.phi1[i], kPi);
    EXPECT_GT(p.phi2[i], -kPi);
    EXPECT_LE(p.phi2[i], kPi);
  }
  EXPECT_NEAR(drive.initial.rf_phase, prepare_initial(drive.dilation.eta0).rf_phase, 1e-15);
  EXPECT_EQ(drive.loss_shift, 0.0);
}

}  // namespace
}  // namespace nhknot
