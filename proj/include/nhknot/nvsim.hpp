#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nhknot/dilation.hpp"
#include "nhknot/types.hpp"

namespace nhknot {

// NV ground-state parameters. Frequencies in MHz (ordinary), times in us, lambda in rad/us.
struct NvParams {
  double D = 2870.0;
  double gamma_e = 2.8025;     // MHz/G
  double gamma_n = 0.3077e-3;  // MHz/G
  double B_field = 506.0;      // G
  double Q_quad = -4.95;
  double A = -2.16;
  double T2_star = 78.0;
  double lambda = kTwoPi * 0.085;

  double omega_e() const { return gamma_e * B_field; }
  double omega_n() const { return gamma_n * B_field; }
  // Electron transition angular frequencies in the |1>_n and |0>_n subspaces, rad/us.
  double omega_tilde1() const { return kTwoPi * (D - omega_e() - A); }
  double omega_tilde2() const { return kTwoPi * (D - omega_e()); }
  void validate() const;
};

NvParams purified_nv();
NvParams natural_abundance_nv();

// H0 = pi [-(D - w_e - A/2) Z(x)I + (Q + w_n - A/2) I(x)Z + (A/2) Z(x)Z], rad/us,
// basis |0,1>, |0,0>, |-1,1>, |-1,0>.
Mat4 static_hamiltonian(const NvParams& nv);

// Piecewise-linear view of a pulse schedule with exact phase integrals.
class DriveTimeline {
 public:
  explicit DriveTimeline(const PulseSchedule& schedule);

  double begin() const { return s_.t.front(); }
  double end() const { return s_.t.back(); }
  bool contains(double t) const { return t >= begin() && t <= end(); }

  // pi Omega_i exp(i phi_i), i in {0, 1}.
  Complex amplitude(int tone, double t) const;
  // Integral of omega_i from 0 to t.
  double carrier_phase(int tone, double t) const;
  // Integral of omega_tilde_j + 2 B3 +- 2 A4 (frame rate of block j).
  double frame_phase(int block, double t) const;
  // Integral of omega_i - (omega_tilde_j + 2 B3 +- 2 A4), accumulated without cancellation.
  double detuning_phase(int tone, int block, double t) const;
  // Diagonal frame generator B1 II + B3 ZI + A2 IZ + A4 ZZ.
  Mat4 frame(double t) const;
  // Fastest detuning rate appearing in the rotating frame.
  double max_detuning_rate(bool selective) const;

  const PulseSchedule& schedule() const { return s_; }

 private:
  struct Locator {
    std::size_t j;
    double u;  // fraction in [0, 1]
  };
  Locator locate(double t) const;
  double linear(const std::vector<double>& v, double t) const;
  double integral(const std::vector<double>& rate, const std::vector<double>& cumulative, double t) const;

  PulseSchedule s_;
  std::array<std::vector<double>, 2> tone_rate_, tone_int_;
  std::array<std::vector<double>, 2> frame_rate_, frame_int_;
  std::array<std::array<std::vector<double>, 2>, 2> detune_rate_, detune_int_;
};

// Lab-frame control Hamiltonian sum_i 2 pi Omega_i cos(int omega_i + phi_i) sigma_x (x) P_i.
// Non-selective drive replaces each projector P_i by the identity. Zero outside the schedule.
Mat4 drive_hamiltonian(const DriveTimeline& timeline, double t, bool selective);

// Rotating-frame total Hamiltonian U (H0 + Hc) U^dag - i U dU^dag/dt. With rwa the
// counter-rotating sum-frequency terms are dropped.
Mat4 rotating_frame(const DriveTimeline& timeline, double t, bool selective, bool rwa);

enum class Dephasing { none, quasistatic };

struct SimOptions {
  Dephasing dephasing = Dephasing::none;
  std::size_t ensemble = 1;
  bool selective = true;
  bool rwa = true;
  std::uint64_t seed = 1;
  double dt = 0.0;               // 0 selects an automatic step
  std::size_t records = 200;     // approximate number of stored time points
};

struct SimResult {
  std::vector<double> t;
  std::vector<std::array<double, 4>> populations;  // after the nuclear readout pulse
  std::vector<BlochVector> electron;               // electron in the |1>_n subspace, renormalized
  std::vector<double> coherence;
  Mat4 final_rho;                                  // ensemble average after readout
  Mat2 final_subspace;                             // renormalized |1>_n block of final_rho
  double max_norm_drift = 0.0;
  double dt = 0.0;
  std::size_t ensemble = 0;
};

// Nuclear readout |1><-| + |0><+|: moves the ancilla |-> subspace onto |1>_n.
Mat2 readout_unitary();

SimResult simulate(const NvParams& nv, const PulseSchedule& schedule, const Vec4& initial, const SimOptions& options);

double coherence_metric(const BlochVector& b);

// Normalized 2x2 electron block of a four-level density matrix; block 0 is |1>_n.
Mat2 subspace_block(const Mat4& rho, int block = 0);

// Trace distance between density matrices.
double trace_distance(const Mat2& a, const Mat2& b);

}  // namespace nhknot
