#include "nhknot/nvsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "nhknot/errors.hpp"
#include "nhknot/ode.hpp"

namespace nhknot {
namespace {

constexpr double kPhasePerStep = 0.02;
constexpr double kMaxPhasePerStep = 0.1;
constexpr std::size_t kPrecomputeLimit = 400000;

// Electron indices of the two levels in nuclear block j: |0>_e -> 0 + j, |-1>_e -> 2 + j.
constexpr int upper(int block) { return block; }
constexpr int lower(int block) { return 2 + block; }

Mat2 block_projector(int block) {
  Mat2 p = Mat2::Zero();
  p(block, block) = 1.0;
  return p;
}

double spectral_norm(const Mat4& h) { return Eigen::JacobiSVD<Mat4>(h).singularValues()(0); }

}  // namespace

void NvParams::validate() const {
  for (double v : {D, gamma_e, gamma_n, B_field, Q_quad, A, T2_star, lambda})
    if (!std::isfinite(v)) throw InvalidArgument("nv: non-finite parameter");
  if (!(T2_star > 0.0)) throw InvalidArgument("nv: T2* must be positive");
  if (!(lambda > 0.0)) throw InvalidArgument("nv: lambda must be positive");
}

NvParams purified_nv() { return NvParams{}; }

NvParams natural_abundance_nv() {
  NvParams nv;
  nv.A = -15.0;
  nv.T2_star = 1.5;
  nv.lambda = kTwoPi * 0.85;
  return nv;
}

Mat4 static_hamiltonian(const NvParams& nv) {
  const Mat2 i2 = pauli::identity(), z = pauli::z();
  return kPi * (-(nv.D - nv.omega_e() - nv.A / 2.0) * kron(z, i2) +
                (nv.Q_quad + nv.omega_n() - nv.A / 2.0) * kron(i2, z) + (nv.A / 2.0) * kron(z, z));
}

DriveTimeline::DriveTimeline(const PulseSchedule& schedule) : s_(schedule) {
  const std::size_t n = s_.size();
  if (n < 2) throw InvalidArgument("drive: schedule needs at least two nodes");
  for (std::size_t i = 1; i < n; ++i)
    if (!(s_.t[i] > s_.t[i - 1])) throw InvalidArgument("drive: schedule times must increase");

  auto cumulate = [this, n](const std::vector<double>& rate) {
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) out[i] = out[i - 1] + 0.5 * (s_.t[i] - s_.t[i - 1]) * (rate[i - 1] + rate[i]);
    return out;
  };
  const std::array<const std::vector<double>*, 2> omega{&s_.omega1, &s_.omega2};
  const std::array<double, 2> tilde{s_.omega_tilde1, s_.omega_tilde2};
  const std::array<double, 2> zz_sign{1.0, -1.0};
  for (int b = 0; b < 2; ++b) {
    frame_rate_[b].resize(n);
    for (std::size_t i = 0; i < n; ++i) frame_rate_[b][i] = tilde[b] + 2.0 * s_.b3[i] + zz_sign[b] * 2.0 * s_.a4[i];
    frame_int_[b] = cumulate(frame_rate_[b]);
  }
  for (int tone = 0; tone < 2; ++tone) {
    tone_rate_[tone] = *omega[tone];
    tone_int_[tone] = cumulate(tone_rate_[tone]);
    for (int b = 0; b < 2; ++b) {
      auto& rate = detune_rate_[tone][b];
      rate.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        rate[i] = ((*omega[tone])[i] - tilde[b]) - 2.0 * s_.b3[i] - zz_sign[b] * 2.0 * s_.a4[i];
      detune_int_[tone][b] = cumulate(rate);
    }
  }
}

DriveTimeline::Locator DriveTimeline::locate(double t) const {
  const auto& grid = s_.t;
  if (t <= grid.front()) return {0, 0.0};
  if (t >= grid.back()) return {grid.size() - 2, 1.0};
  const std::size_t j = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), t) - grid.begin()) - 1;
  return {j, (t - grid[j]) / (grid[j + 1] - grid[j])};
}

double DriveTimeline::linear(const std::vector<double>& v, double t) const {
  const Locator l = locate(t);
  return v[l.j] + l.u * (v[l.j + 1] - v[l.j]);
}

double DriveTimeline::integral(const std::vector<double>& rate, const std::vector<double>& cumulative,
                               double t) const {
  const Locator l = locate(t);
  const double width = s_.t[l.j + 1] - s_.t[l.j];
  return cumulative[l.j] + width * l.u * (rate[l.j] + 0.5 * l.u * (rate[l.j + 1] - rate[l.j]));
}

Complex DriveTimeline::amplitude(int tone, double t) const {
  const auto& rabi = tone == 0 ? s_.rabi1 : s_.rabi2;
  const auto& phi = tone == 0 ? s_.phi1 : s_.phi2;
  const Locator l = locate(t);
  const Complex a = kPi * rabi[l.j] * std::exp(kI * phi[l.j]);
  const Complex b = kPi * rabi[l.j + 1] * std::exp(kI * phi[l.j + 1]);
  return a + l.u * (b - a);
}

double DriveTimeline::carrier_phase(int tone, double t) const { return integral(tone_rate_[tone], tone_int_[tone], t); }

double DriveTimeline::frame_phase(int block, double t) const {
  return integral(frame_rate_[block], frame_int_[block], t);
}

double DriveTimeline::detuning_phase(int tone, int block, double t) const {
  return integral(detune_rate_[tone][block], detune_int_[tone][block], t);
}

Mat4 DriveTimeline::frame(double t) const {
  const Mat2 i2 = pauli::identity(), z = pauli::z();
  return linear(s_.b1, t) * kron(i2, i2) + linear(s_.b3, t) * kron(z, i2) + linear(s_.a2, t) * kron(i2, z) +
         linear(s_.a4, t) * kron(z, z);
}

double DriveTimeline::max_detuning_rate(bool selective) const {
  double rate = 0.0;
  for (int tone = 0; tone < 2; ++tone)
    for (int b = 0; b < 2; ++b) {
      if (selective && tone != b) continue;
      for (double r : detune_rate_[tone][b]) rate = std::max(rate, std::abs(r));
    }
  return rate;
}

Mat4 drive_hamiltonian(const DriveTimeline& timeline, double t, bool selective) {
  Mat4 h = Mat4::Zero();
  if (!timeline.contains(t)) return h;
  for (int tone = 0; tone < 2; ++tone) {
    const double value = 2.0 * (timeline.amplitude(tone, t) * std::exp(kI * timeline.carrier_phase(tone, t))).real();
    h += value * kron(pauli::x(), selective ? block_projector(tone) : pauli::identity());
  }
  return h;
}

Mat4 rotating_frame(const DriveTimeline& timeline, double t, bool selective, bool rwa) {
  Mat4 h = timeline.frame(t);
  if (!timeline.contains(t)) return h;
  for (int tone = 0; tone < 2; ++tone) {
    const Complex z = timeline.amplitude(tone, t);
    if (z == 0.0) continue;
    for (int b = 0; b < 2; ++b) {
      if (selective && tone != b) continue;
      Complex element = z * std::exp(kI * timeline.detuning_phase(tone, b, t));
      if (!rwa) {
        const double sum = timeline.carrier_phase(tone, t) + timeline.frame_phase(b, t);
        element += std::conj(z) * std::exp(-kI * sum);
      }
      h(upper(b), lower(b)) += element;
      h(lower(b), upper(b)) += std::conj(element);
    }
  }
  return h;
}

Mat2 readout_unitary() {
  Mat2 u;
  u.row(0) = ancilla_minus().adjoint();
  u.row(1) = ancilla_plus().adjoint();
  return u;
}

double coherence_metric(const BlochVector& b) { return b.x * b.x + b.y * b.y; }

Mat2 subspace_block(const Mat4& rho, int block) {
  Mat2 out;
  out << rho(upper(block), upper(block)), rho(upper(block), lower(block)), rho(lower(block), upper(block)),
      rho(lower(block), lower(block));
  const double tr = out.trace().real();
  if (!(tr > 0.0)) throw NumericalError("subspace block has zero population");
  return out / tr;
}

double trace_distance(const Mat2& a, const Mat2& b) {
  const Mat2 d = 0.5 * ((a - b) + (a - b).adjoint());
  const auto ev = Eigen::SelfAdjointEigenSolver<Mat2>(d, Eigen::EigenvaluesOnly).eigenvalues();
  return 0.5 * (std::abs(ev(0)) + std::abs(ev(1)));
}

SimResult simulate(const NvParams& nv, const PulseSchedule& schedule, const Vec4& initial, const SimOptions& options) {
  nv.validate();
  if (options.ensemble == 0) throw InvalidArgument("simulate: ensemble must be >= 1");
  if (std::abs(initial.norm() - 1.0) > 1e-8) throw InvalidArgument("simulate: initial state must be normalized");
  const DriveTimeline timeline(schedule);
  const double t0 = timeline.begin();
  const double duration = timeline.end() - t0;

  const bool dephase = options.dephasing == Dephasing::quasistatic;
  const double sigma = std::sqrt(2.0) / nv.T2_star;

  double rate = timeline.max_detuning_rate(options.selective);
  for (std::size_t i = 0; i < schedule.size(); ++i)
    rate = std::max(rate, spectral_norm(rotating_frame(timeline, schedule.t[i], options.selective, true)));
  if (!options.rwa) {
    for (int tone = 0; tone < 2; ++tone)
      for (double w : tone == 0 ? schedule.omega1 : schedule.omega2)
        rate = std::max(rate, std::abs(w) + std::max(std::abs(nv.omega_tilde1()), std::abs(nv.omega_tilde2())));
  }
  if (dephase) rate += 5.0 * sigma;
  rate = std::max(rate, 1e-12);

  double dt = options.dt > 0.0 ? options.dt : kPhasePerStep / rate;
  if (dt * rate > kMaxPhasePerStep * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "simulate: step " << dt << " too large for fastest rate " << rate << " rad/us";
    throw StepSizeTooLarge(msg.str(), kPhasePerStep / rate);
  }
  const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration / dt - 1e-9)));
  dt = duration / static_cast<double>(steps);
  const std::size_t stride = std::max<std::size_t>(1, steps / std::max<std::size_t>(1, options.records));

  // The drive is shared by all members; cache it at the RK4 stage times when that fits.
  std::vector<Mat4> cache;
  const bool cached = 2 * steps + 1 <= kPrecomputeLimit;
  if (cached) {
    cache.resize(2 * steps + 1);
    for (std::size_t k = 0; k <= 2 * steps; ++k)
      cache[k] = rotating_frame(timeline, t0 + 0.5 * dt * static_cast<double>(k), options.selective, options.rwa);
  }
  auto hamiltonian_at = [&](std::size_t half_index) {
    return cached ? cache[half_index]
                  : rotating_frame(timeline, t0 + 0.5 * dt * static_cast<double>(half_index), options.selective,
                                   options.rwa);
  };

  std::vector<std::size_t> record_steps;
  for (std::size_t s = 0; s <= steps; s += stride) record_steps.push_back(s);
  if (record_steps.back() != steps) record_steps.push_back(steps);

  const Mat4 readout = kron(pauli::identity(), readout_unitary());
  const std::size_t runs = dephase ? options.ensemble : 1;
  std::vector<Mat4> rho(record_steps.size(), Mat4::Zero());
  SimResult out;
  out.dt = dt;
  out.ensemble = options.ensemble;
  const Mat4 zi = kron(pauli::z(), pauli::identity());

  for (std::size_t member = 0; member < runs; ++member) {
    double detuning = 0.0;
    if (dephase) {
      std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                        static_cast<std::uint32_t>(member)};
      std::mt19937_64 rng(seq);
      detuning = std::normal_distribution<double>(0.0, sigma)(rng);
    }
    const Mat4 noise = 0.5 * detuning * zi;
    Vec4 psi = initial;
    std::size_t next_record = 0;
    auto record = [&](std::size_t step) {
      if (next_record < record_steps.size() && record_steps[next_record] == step) {
        const Vec4 v = readout * psi;
        rho[next_record] += v * v.adjoint() / static_cast<double>(runs);
        ++next_record;
      }
    };
    record(0);
    for (std::size_t s = 0; s < steps; ++s) {
      const Mat4 h0 = hamiltonian_at(2 * s) + noise;
      const Mat4 h1 = hamiltonian_at(2 * s + 1) + noise;
      const Mat4 h2 = hamiltonian_at(2 * s + 2) + noise;
      const Vec4 k1 = -kI * (h0 * psi);
      const Vec4 k2 = -kI * (h1 * (psi + 0.5 * dt * k1));
      const Vec4 k3 = -kI * (h1 * (psi + 0.5 * dt * k2));
      const Vec4 k4 = -kI * (h2 * (psi + dt * k3));
      psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      record(s + 1);
    }
    out.max_norm_drift = std::max(out.max_norm_drift, std::abs(psi.norm() - 1.0));
  }

  for (std::size_t r = 0; r < record_steps.size(); ++r) {
    out.t.push_back(t0 + dt * static_cast<double>(record_steps[r]));
    std::array<double, 4> pops{};
    for (int l = 0; l < 4; ++l) pops[l] = rho[r](l, l).real();
    out.populations.push_back(pops);
    const BlochVector b = bloch_vector(subspace_block(rho[r], 0));
    out.electron.push_back(b);
    out.coherence.push_back(coherence_metric(b));
  }
  out.final_rho = rho.back();
  out.final_subspace = subspace_block(out.final_rho, 0);
  return out;
}

}  // namespace nhknot
