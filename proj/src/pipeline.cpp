#include "nhknot/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nhknot/errors.hpp"
#include "nhknot/spectra.hpp"

namespace nhknot {
namespace {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double overlap2(const Vec2& a, const Vec2& b) { return std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm()); }

Complex reduced_det(const Mat2& h) {
  const Complex half = 0.5 * h.trace();
  return (h(0, 0) - half) * (h(1, 1) - half) - h(0, 1) * h(1, 0);
}

Json state_json(const Vec2& v) { return Json::array({complex_to_json(v(0)), complex_to_json(v(1))}); }

}  // namespace

double imaginary_gap(const ModelParams& params, double k) {
  const Eigensystem2 es = eigensolve2(bloch_hamiltonian(params, k));
  return std::abs(es.values[0].imag() - es.values[1].imag());
}

std::vector<double> pipeline_grid(std::size_t n) {
  if (n < 2) throw InvalidArgument("pipeline: need at least two momenta");
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) k[i] = kTwoPi * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return k;
}

ScenarioRun run_scenario(const Scenario& s) {
  if (s.band != 1 && s.band != 2) throw InvalidArgument("scenario: band must be 1 or 2");
  s.nv.validate();
  const Mat2 h = bloch_hamiltonian(s.params, s.k);
  double tau = s.tau;
  if (!(tau > 0.0)) {
    const double gap = imaginary_gap(s.params, s.k);
    if (gap < 1e-6) throw NoDominantBand("scenario: imaginary gap vanishes at this momentum");
    tau = kDriveWindow / gap;
  }
  ScenarioRun run;
  run.duration_us = tau / s.nv.lambda;
  CompileOptions options;
  options.intervals = s.intervals;
  options.omega_tilde1 = s.nv.omega_tilde1();
  options.omega_tilde2 = s.nv.omega_tilde2();
  const double sign = s.band == 1 ? 1.0 : -1.0;
  run.drive = compile_drive(sign * s.nv.lambda * h, run.duration_us, options);
  run.sim = simulate(s.nv, run.drive.pulses, run.drive.initial.state, s.sim);
  run.eigenstate = dominant_eigenvector(h, s.band);
  return run;
}

std::array<int, 2> relabel_by_overlap(std::array<std::vector<Vec2>, 2>& states) {
  const std::size_t n = states[0].size();
  for (std::size_t i = 1; i < n; ++i) {
    const double keep = overlap2(states[0][i - 1], states[0][i]) + overlap2(states[1][i - 1], states[1][i]);
    const double swap = overlap2(states[0][i - 1], states[1][i]) + overlap2(states[1][i - 1], states[0][i]);
    if (swap > keep) std::swap(states[0][i], states[1][i]);
  }
  const double keep = overlap2(states[0][n - 1], states[0][0]) + overlap2(states[1][n - 1], states[1][0]);
  const double swap = overlap2(states[0][n - 1], states[1][0]) + overlap2(states[1][n - 1], states[0][0]);
  return swap > keep ? std::array<int, 2>{1, 0} : std::array<int, 2>{0, 1};
}

PipelineReport run_pipeline(const PipelineConfig& config) {
  config.params.validate();
  const std::vector<double> grid = pipeline_grid(config.k_points);
  PipelineReport report;
  report.label = config.label;
  std::vector<double> fidelities;

  for (std::size_t i = 0; i < grid.size(); ++i) {
    KPointReport point;
    point.k = grid[i];
    try {
      for (int band = 1; band <= 2; ++band) {
        const std::uint64_t stream = mix_seed(config.seed ^ mix_seed(2 * i + static_cast<std::uint64_t>(band)));
        Scenario s;
        s.params = config.params;
        s.k = grid[i];
        s.band = band;
        s.nv = config.nv;
        s.sim = config.sim;
        s.sim.seed = stream;
        if (!config.noise) s.sim.dephasing = Dephasing::none;
        if (band == 1) s.sim.records = std::max(s.sim.records, config.trace_samples);
        s.intervals = config.intervals;
        s.tau = config.window / imaginary_gap(config.params, grid[i]);
        const ScenarioRun run = run_scenario(s);

        CountVector counts = expected_counts(run.sim.final_rho, config.rates);
        if (config.noise) counts = sample_counts(counts, config.shots, mix_seed(stream + 1));
        MleOptions mle;
        mle.seed = mix_seed(stream + 2);
        const MleResult rec = mle_reconstruct(counts, config.rates, mle);

        const int b = band - 1;
        point.reconstructed[b] = rec.state;
        point.ideal[b] = run.eigenstate;
        point.fidelity[b] = fidelity(rec.state, run.eigenstate);
        point.eta0[b] = run.drive.dilation.eta0;
        point.mle_loss[b] = rec.loss;

        if (band == 1) {
          const std::size_t records = run.sim.t.size();
          const std::size_t n = std::min(config.trace_samples, records);
          std::mt19937_64 rng(mix_seed(stream + 3));
          std::normal_distribution<double> noise(0.0, config.trace_sigma > 0.0 ? config.trace_sigma : 1.0);
          std::vector<TraceSample> trace;
          for (std::size_t j = 0; j < n; ++j) {
            const std::size_t r = n == 1 ? 0 : j * (records - 1) / (n - 1);
            const auto& pop = run.sim.populations[r];
            double p1 = pop[0] / (pop[0] + pop[2]);
            if (config.noise && config.trace_sigma > 0.0) p1 += noise(rng);
            trace.push_back({run.sim.t[r], p1});
          }
          // Exact aliases give identical traces; the programmed momentum decides between them.
          point.fit = fit_k(trace, config.params, config.nv.lambda, 1e-10, grid[i]);
          const Eigensystem2 es = eigensolve2(bloch_hamiltonian(config.params, point.fit.k));
          point.energies = es.values;
        }
      }
      point.ok = true;
      fidelities.push_back(point.fidelity[0]);
      fidelities.push_back(point.fidelity[1]);
    } catch (const Error& e) {
      point.error = e.what();
      ++report.failures;
    }
    report.points.push_back(point);
  }

  if (!fidelities.empty()) {
    std::sort(fidelities.begin(), fidelities.end());
    report.min_fidelity = fidelities.front();
    const std::size_t m = fidelities.size();
    report.median_fidelity = m % 2 ? fidelities[m / 2] : 0.5 * (fidelities[m / 2 - 1] + fidelities[m / 2]);
  }
  if (report.failures == 0) {
    std::array<std::vector<Vec2>, 2> states;
    for (const auto& p : report.points)
      for (int b = 0; b < 2; ++b) states[b].push_back(p.reconstructed[b]);
    report.permutation = relabel_by_overlap(states);
    report.berry = global_berry_phase(states, report.permutation);

    double total = 0.0;
    const std::size_t n = report.points.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Complex a = reduced_det(bloch_hamiltonian(config.params, report.points[i].fit.k));
      const Complex b = reduced_det(bloch_hamiltonian(config.params, report.points[(i + 1) % n].fit.k));
      total += std::arg(b / a);
    }
    report.nu = static_cast<int>(std::lround(total / kTwoPi));
  }
  return report;
}

Json to_json(const PipelineReport& report) {
  Json points = Json::array();
  for (const auto& p : report.points) {
    Json j = {{"k", p.k}, {"k_over_pi", p.k / kPi}, {"ok", p.ok}};
    if (!p.ok) {
      j["error"] = p.error;
    } else {
      j["fidelity"] = p.fidelity;
      j["eta0"] = p.eta0;
      j["mle_loss"] = p.mle_loss;
      j["reconstructed"] = Json::array({state_json(p.reconstructed[0]), state_json(p.reconstructed[1])});
      j["ideal"] = Json::array({state_json(p.ideal[0]), state_json(p.ideal[1])});
      j["k_fit"] = p.fit.k;
      j["k_fit_stderr"] = p.fit.std_error;
      j["k_fit_aliases"] = p.fit.aliases;
      j["energies"] = Json::array({complex_to_json(p.energies[0]), complex_to_json(p.energies[1])});
    }
    points.push_back(j);
  }
  Json out = {{"label", report.label},
              {"points", points},
              {"failures", report.failures},
              {"min_fidelity", report.min_fidelity},
              {"median_fidelity", report.median_fidelity}};
  if (report.berry) {
    out["Q_raw"] = report.berry->q_raw;
    out["Q_over_pi"] = report.berry->q_raw / kPi;
    out["Q_mod_2pi"] = report.berry->q_mod_2pi;
    out["parity"] = report.berry->parity;
  }
  if (report.nu) out["nu"] = *report.nu;
  return out;
}

}  // namespace nhknot
