// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nhknot/berry.hpp"
#include "nhknot/dilation.hpp"
#include "nhknot/evolve.hpp"
#include "nhknot/model.hpp"
#include "nhknot/nvsim.hpp"
#include "nhknot/pipeline.hpp"
#include "nhknot/spectra.hpp"
#include "nhknot/tomo.hpp"
#include "support.hpp"

namespace nhknot {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

const char* kPresets[] = {"unlink", "unknot", "hopf_link"};

Outcome winding_numbers() {
  Outcome o;
  for (int i = 0; i < 3; ++i) {
    const auto start = Clock::now();
    const auto w = winding_number(preset_params(kPresets[i]), 1024);
    const double t = seconds_since(start);
    o.detail << kPresets[i] << " nu=" << w.nu << " residue=" << w.residue << " (" << t << " s); ";
    o.require(w.nu == i && w.residue < 0.01 && t < 1.0, kPresets[i]);
  }
  return o;
}

Outcome berry_phases() {
  Outcome o;
  for (int i = 0; i < 3; ++i) {
    const auto start = Clock::now();
    const auto q = global_berry_phase(band_structure(preset_params(kPresets[i]), 2048));
    const double t = seconds_since(start);
    o.detail << kPresets[i] << " Q=" << q.q_raw / kPi << "pi (" << t << " s); ";
    o.require(std::abs(q.q_raw - i * kPi) < 1e-4 * kPi && t < 5.0, kPresets[i]);
  }
  return o;
}

Outcome parity_identity() {
  Outcome o;
  std::mt19937_64 rng(20240501);
  double worst = 0.0;
  int swaps = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto bands = band_structure(testing::random_separable_params(rng), 2048);
    const auto q = global_berry_phase(bands);
    const int parity = parity_check(bands);
    swaps += parity < 0;
    worst = std::max(worst, std::abs(std::exp(kI * q.q_raw) - double(parity)));
  }
  o.detail << "100 random sets (" << swaps << " exchanged), max |e^{iQ} - parity| = " << worst;
  o.require(worst < 1e-3, "identity");
  return o;
}

Outcome steady_states() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uk(0.0, kTwoPi);
  double worst = 1.0;
  for (const char* name : kPresets) {
    const auto p = preset_params(name);
    for (int trial = 0; trial < 10; ++trial) {
      const Mat2 h = bloch_hamiltonian(p, uk(rng));
      for (int which : {1, 2}) {
        const auto s = steady_eigenstate(h, which);
        worst = std::min(worst, fidelity(s.state, dominant_eigenvector(h, which)));
      }
    }
  }
  o.detail << "30 momenta x 2 bands, min fidelity = 1 - " << 1.0 - worst;
  o.require(worst > 1.0 - 1e-6, "fidelity");
  return o;
}

struct DilationStats {
  double worst_distance = 0.0;
  double worst_hermiticity = 0.0;
  double worst_margin_ratio = 1e300;
  int schedules = 0;
};

DilationStats dilation_runs() {
  DilationStats st;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uk(0.0, kTwoPi);
  for (const char* name : kPresets) {
    const auto p = preset_params(name);
    for (int trial = 0; trial < 10; ++trial) {
      const double k = uk(rng);
      const double window = kDriveWindow / std::max(0.05, imaginary_gap(p, k));
      for (double sign : {1.0, -1.0}) {
        const Mat2 h = sign * bloch_hamiltonian(p, k);
        const auto drive = compile_drive(h, window, CompileOptions{.intervals = 2000});
        const auto states = evolve_dilated(drive.dilation, drive.initial.state);
        for (std::size_t j = 0; j < states.size(); ++j) {
          const Vec2 exact = propagate_nh(h, Vec2(1.0, 0.0), drive.dilation.t[2 * j]);
          st.worst_distance = std::max(st.worst_distance, testing::pure_distance(project_minus(states[j]), exact));
        }
        st.worst_hermiticity = std::max(st.worst_hermiticity, drive.dilation.max_hermiticity);
        st.worst_margin_ratio = std::min(st.worst_margin_ratio, drive.dilation.min_margin / drive.dilation.margin);
        ++st.schedules;
      }
    }
  }
  return st;
}

DilationStats g_dilation;

Outcome dilation_equivalence() {
  Outcome o;
  g_dilation = dilation_runs();
  o.detail << g_dilation.schedules << " schedules, max trace distance = " << g_dilation.worst_distance;
  o.require(g_dilation.worst_distance < 1e-4, "distance");
  return o;
}

Outcome metric_integrity() {
  Outcome o;
  o.detail << g_dilation.schedules << " schedules, max relative Hermiticity residual = " << g_dilation.worst_hermiticity
           << ", min eig(M - I)/delta = " << g_dilation.worst_margin_ratio;
  o.require(g_dilation.schedules > 0, "no schedules");
  o.require(g_dilation.worst_hermiticity < 1e-10, "hermiticity");
  o.require(g_dilation.worst_margin_ratio >= 0.5, "margin");
  return o;
}

// hopf_link, k = 0.85 pi, band 1, lambda T = 8, initial |0>_s.
Scenario appendix_scenario(const NvParams& nv, Dephasing dephasing, bool selective) {
  Scenario s;
  s.params = preset_params("hopf_link");
  s.k = 0.85 * kPi;
  s.band = 1;
  s.tau = 8.0;
  s.nv = nv;
  s.sim.dephasing = dephasing;
  s.sim.ensemble = 1000;
  s.sim.selective = selective;
  s.sim.seed = 2023;
  return s;
}

Outcome appendix_reproduction() {
  Outcome o;
  const auto ideal = run_scenario(appendix_scenario(purified_nv(), Dephasing::none, true)).sim;
  const auto purified = run_scenario(appendix_scenario(purified_nv(), Dephasing::quasistatic, false)).sim;
  const auto natural = run_scenario(appendix_scenario(natural_abundance_nv(), Dephasing::quasistatic, false)).sim;
  const double deviation = trace_distance(purified.final_subspace, ideal.final_subspace);
  const double c_ideal = ideal.coherence.back();
  const double c_natural = natural.coherence.back();
  o.detail << "purified deviation = " << deviation << " (0.03 +- 0.02), ideal c = " << c_ideal
           << " (0.97 +- 0.02), natural-abundance c = " << c_natural << " (0.65 +- 0.08)";
  o.require(std::abs(deviation - 0.03) <= 0.02, "purified deviation");
  o.require(std::abs(c_ideal - 0.97) <= 0.02, "ideal c");
  o.require(std::abs(c_natural - 0.65) <= 0.08, "natural-abundance c");
  return o;
}

std::vector<PipelineReport> g_reports;
double g_pipeline_seconds = 0.0;

PipelineConfig paper_scale(const char* name) {
  PipelineConfig c;
  c.params = preset_params(name);
  c.label = name;
  c.nv = purified_nv();
  c.sim.dephasing = Dephasing::quasistatic;
  c.sim.ensemble = 1000;
  c.sim.selective = true;
  c.noise = true;
  c.shots = 100000;
  c.seed = 17;
  return c;
}

Outcome tomography() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  double worst_noiseless = 1.0;
  for (int trial = 0; trial < 50; ++trial) {
    Vec4 v;
    for (int i = 0; i < 4; ++i) v(i) = Complex(g(rng), g(rng));
    const auto truth = PureStateParams::from_vector(v);
    const auto rec = mle_reconstruct(expected_counts(truth));
    worst_noiseless = std::min(worst_noiseless, fidelity(rec.state, truth.subspace_state()));
  }
  o.detail << "noiseless min fidelity = 1 - " << 1.0 - worst_noiseless << "; ";
  o.require(worst_noiseless > 1.0 - 1e-6, "noiseless");

  const auto start = Clock::now();
  for (const char* name : kPresets) g_reports.push_back(run_pipeline(paper_scale(name)));
  g_pipeline_seconds = seconds_since(start);
  for (const auto& r : g_reports) {
    o.detail << r.label << " median=" << r.median_fidelity << " min=" << r.min_fidelity << "; ";
    o.require(r.failures == 0, r.label + " failures");
    o.require(r.median_fidelity >= 0.97, r.label + " median");
  }

  Scenario s;
  s.params = preset_params("hopf_link");
  s.k = 0.6 * kPi;
  s.nv = purified_nv();
  s.sim.dephasing = Dephasing::quasistatic;
  s.sim.ensemble = 1000;
  const auto run = run_scenario(s);
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto counts = sample_counts(expected_counts(run.sim.final_rho), 100000, seed);
    mean += fidelity(mle_reconstruct(counts).state, run.eigenstate) / 10.0;
  }
  o.detail << "k=0.6pi steady state mean fidelity = " << mean;
  o.require(mean >= 0.98, "k=0.6pi steady state");
  return o;
}

Outcome k_fitting() {
  Outcome o;
  const auto p = preset_params("hopf_link");
  const double k = 0.6 * kPi;
  const double lambda = purified_nv().lambda;
  const double duration = kDriveWindow / (lambda * imaginary_gap(p, k));
  int hits = 0;
  double mean_err = 0.0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const auto fit = fit_k(synthetic_trace(p, k, lambda, duration, kTraceSamples, 0.03, 1000 + trial), p, lambda);
    const double err = std::abs(std::remainder(fit.k - k, kTwoPi));
    hits += err < 0.07 * kPi;
    mean_err += fit.std_error / 100.0;
  }
  o.detail << hits << "/100 within 0.07pi (" << kTraceSamples << " samples over " << duration
           << " us, mean stderr " << mean_err / kPi << "pi)";
  o.require(hits >= 95, "recovery rate");
  return o;
}

Outcome pipeline_berry() {
  Outcome o;
  for (int i = 0; i < 3; ++i) {
    const auto& r = g_reports.at(i);
    if (!r.berry) {
      o.require(false, r.label + " no Berry phase");
      continue;
    }
    o.detail << r.label << " Q=" << r.berry->q_raw / kPi << "pi nu=" << (r.nu ? std::to_string(*r.nu) : "-") << "; ";
    o.require(std::abs(r.berry->q_raw - i * kPi) < 0.05 * kPi, r.label);
  }
  // The three pipelines run once, during the tomography criterion.
  o.detail << "pipelines took " << g_pipeline_seconds << " s";
  o.require(g_pipeline_seconds < 900.0, "pipeline runtime");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 means no runtime bound
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace nhknot

int main() {
  using namespace nhknot;
  const Criterion criteria[] = {
      {1, "winding numbers", 3.0, winding_numbers},
      {2, "global Berry phase", 15.0, berry_phases},
      {3, "parity identity", 120.0, parity_identity},
      {4, "steady-state extraction", 30.0, steady_states},
      {5, "dilation equivalence", 120.0, dilation_equivalence},
      {6, "M(t) integrity", 0.0, metric_integrity},
      {7, "Appendix C reproduction", 600.0, appendix_reproduction},
      {8, "tomography", 300.0, tomography},
      {9, "k fitting", 0.0, k_fitting},
      {10, "end-to-end pipeline", 900.0, pipeline_berry},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double t = seconds_since(start);
    if (c.budget_s > 0.0 && t > c.budget_s) o.require(false, "runtime over budget");
    failed += !o.pass;
    std::printf("criterion %2d %s  %-26s %8.2f s  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, t,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
