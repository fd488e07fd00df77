#pragma once

#include <array>
#include <functional>
#include <vector>

#include "nhknot/types.hpp"

namespace nhknot {

using HamiltonianSchedule = std::function<Mat2(double)>;

// Ancilla (nuclear spin) sigma_y eigenstates in the (|1>_n, |0>_n) basis.
Vec2 ancilla_plus();   // (|1> + i|0>)/sqrt2
Vec2 ancilla_minus();  // (i|1> + |0>)/sqrt2

struct MSeries {
  std::vector<Mat2> M;
  std::vector<Mat2> dM;               // -i (H^dag M - M H) at each node
  double min_margin = 0.0;            // min over nodes of the smallest eigenvalue of M - I
  double max_hermiticity = 0.0;       // max ||M - M^dag|| / ||M|| before re-symmetrization
};

// RK4 on the given grid for i dM/dt = H^dag M - M H. Throws DilationInfeasible at the first
// node where the smallest eigenvalue of M - I drops below margin.
MSeries solve_M(const HamiltonianSchedule& h, const Mat2& m0, const std::vector<double>& t_grid, double margin);

// Positive Hermitian square root of M - I.
Mat2 eta_from_metric(const Mat2& m);

// Solves eta X + X eta = dM for X = d(eta)/dt.
Mat2 eta_derivative(const Mat2& eta, const Mat2& dm);

struct Generators {
  Mat2 lambda;
  Mat2 gamma;
};

// Gamma = {H + (i eta' + eta H) eta} M^-1, Lambda = i (H eta - eta H - i eta') M^-1 with M = eta^dag eta + I.
Generators dilated_generators(const Mat2& h, const Mat2& eta, const Mat2& deta_dt);

// Hermitian two-qubit generator Gamma (x) I + Lambda (x) sigma_z (system (x) ancilla).
Mat4 dilated_hamiltonian(const Generators& g);

// Coefficients on {I, X, Y, Z} (x) {I, Z}: B1 II, A1 XI, B2 YI, B3 ZI, A2 IZ, B4 XZ, A3 YZ, A4 ZZ.
struct PauliCoefficients {
  double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
  double b1 = 0.0, b2 = 0.0, b3 = 0.0, b4 = 0.0;
};

PauliCoefficients pauli_decompose(const Mat4& h);
Mat4 pauli_compose(const PauliCoefficients& c);

struct PulseSchedule {
  std::vector<double> t;        // microseconds
  std::vector<double> omega1;   // drive angular frequencies, rad/us
  std::vector<double> omega2;
  std::vector<double> rabi1;    // Omega_i, MHz
  std::vector<double> rabi2;
  std::vector<double> phi1;     // radians, (-pi, pi]
  std::vector<double> phi2;
  // Frame coefficients needed to leave the rotating frame, rad/us.
  std::vector<double> b1, b3, a2, a4;
  double omega_tilde1 = 0.0;
  double omega_tilde2 = 0.0;

  std::size_t size() const { return t.size(); }
};

PulseSchedule pulse_schedule(const std::vector<double>& t, const std::vector<PauliCoefficients>& coeffs,
                             double omega_tilde1, double omega_tilde2);

struct InitialState {
  double rf_phase = 0.0;
  Vec4 state;  // (psi0 (x) |-> + eta0 psi0 (x) |+>) / sqrt(1 + eta0^2)
};

InitialState prepare_initial(double eta0, const Vec2& psi0 = Vec2(1.0, 0.0));

// Nuclear RF pi/2 rotation about cos(phi) x + sin(phi) y.
Mat2 rf_rotation(double phi);

inline constexpr double kDefaultMargin = 0.1;
inline constexpr double kEtaCap = 1e3;

// Smallest feasible eta0 (doubling from sqrt(margin), then bisection); returns the feasible end.
double choose_eta0(const HamiltonianSchedule& h, const std::vector<double>& t_grid, double margin = kDefaultMargin);

struct DilationSchedule {
  std::vector<double> t;
  std::vector<Mat2> M, eta, deta, lambda, gamma;
  std::vector<PauliCoefficients> coeffs;
  double eta0 = 0.0;
  double margin = kDefaultMargin;
  double min_margin = 0.0;
  double max_hermiticity = 0.0;     // relative, M before symmetrization
  double max_generator_hermiticity = 0.0;
  double max_recomposition = 0.0;   // ||H_sa - compose(decompose(H_sa))||
};

DilationSchedule dilate(const HamiltonianSchedule& h, const std::vector<double>& t_grid, double eta0,
                        double margin = kDefaultMargin);

// H_sa(t_i) rebuilt from the stored coefficients.
Mat4 dilated_at(const DilationSchedule& schedule, std::size_t i);

struct CompileOptions {
  double margin = kDefaultMargin;
  std::size_t intervals = 4000;   // schedule nodes = intervals + 1
  double omega_tilde1 = 0.0;
  double omega_tilde2 = 0.0;
  Vec2 psi0 = Vec2(1.0, 0.0);
  double shift_fraction = 0.0;    // fraction of max Im E removed before dilation (0 dilates H as given)
  double eta0 = 0.0;              // 0 searches for the smallest feasible value
};

struct CompiledDrive {
  Mat2 hamiltonian;        // loss-shifted generator actually dilated
  double loss_shift = 0.0; // max Im E removed from the spectrum
  DilationSchedule dilation;
  PulseSchedule pulses;
  InitialState initial;
};

// Full compile of a constant NH generator over [0, duration]: shift, eta0, M(t), generators, pulses.
CompiledDrive compile_drive(const Mat2& h, double duration, const CompileOptions& options = {});

// Four-level evolution under the stored H_sa nodes: RK4 with step 2 dt_grid so every stage lands on a
// node. Returns the state at every even node (grid must have an even number of intervals).
std::vector<Vec4> evolve_dilated(const DilationSchedule& schedule, const Vec4& initial);

// Ancilla <-| component of a dilated state (the embedded NH state, unnormalized).
Vec2 project_minus(const Vec4& state);

std::vector<double> uniform_grid(double duration, std::size_t intervals);

}  // namespace nhknot
