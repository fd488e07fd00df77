#include "nhknot/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nhknot/berry.hpp"
#include "nhknot/dilation.hpp"
#include "nhknot/errors.hpp"
#include "nhknot/evolve.hpp"
#include "nhknot/io.hpp"
#include "nhknot/model.hpp"
#include "nhknot/nvsim.hpp"
#include "nhknot/pipeline.hpp"
#include "nhknot/spectra.hpp"
#include "nhknot/tomo.hpp"

namespace nhknot {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string preset;
  std::string config;
  std::optional<std::size_t> grid;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> ensemble;
  std::optional<std::uint64_t> shots;
  std::optional<bool> selective;
  std::optional<bool> rwa;
  std::optional<double> k_over_pi;
  std::optional<int> band;
};

// Flags take precedence over the config file; the config falls back to built-in defaults.
class Settings {
 public:
  explicit Settings(const Options& o) : o_(o) {
    if (!o.config.empty()) cfg_ = read_json_file(o.config);
    if (!cfg_.is_object()) cfg_ = Json::object();
  }

  ModelParams model() const {
    if (!o_.preset.empty()) return preset_params(o_.preset);
    if (cfg_.contains("model")) return model_from_json(cfg_.at("model"));
    throw InvalidArgument("no model given: pass --preset NAME or a config with a \"model\" entry");
  }

  std::string model_label() const {
    if (!o_.preset.empty()) return o_.preset;
    if (cfg_.contains("model") && cfg_.at("model").is_string()) return cfg_.at("model").get<std::string>();
    return "custom";
  }

  std::size_t grid(std::size_t fallback) const { return o_.grid.value_or(get<std::size_t>("grid", fallback)); }
  std::uint64_t seed() const { return o_.seed.value_or(get<std::uint64_t>("seed", 1)); }
  std::uint64_t shots() const { return o_.shots.value_or(get<std::uint64_t>("shots", 100000)); }
  double k() const { return kPi * o_.k_over_pi.value_or(get<double>("k_over_pi", 0.6)); }
  int band() const { return o_.band.value_or(get<int>("band", 1)); }
  NvParams nv() const { return nv_from_json(cfg_.value("nv", Json()), purified_nv()); }

  SimOptions sim() const {
    SimOptions s;
    const Json j = cfg_.value("sim", Json::object());
    const std::string dephasing = j.value("dephasing", std::string("quasistatic"));
    if (dephasing == "none") {
      s.dephasing = Dephasing::none;
    } else if (dephasing == "quasistatic") {
      s.dephasing = Dephasing::quasistatic;
    } else {
      throw InvalidArgument("sim.dephasing must be \"none\" or \"quasistatic\"");
    }
    s.ensemble = o_.ensemble.value_or(j.value("ensemble", std::size_t{1000}));
    s.selective = o_.selective.value_or(j.value("selective", true));
    s.rwa = o_.rwa.value_or(j.value("rwa", true));
    s.seed = seed();
    s.records = j.value("records", std::size_t{200});
    return s;
  }

  const Json& config() const { return cfg_; }

  template <class T>
  T get(const char* key, T fallback) const {
    return cfg_.contains(key) ? cfg_.at(key).get<T>() : fallback;
  }

 private:
  const Options& o_;
  Json cfg_;
};

Json vector_json(const Vec2& v) { return Json::array({complex_to_json(v(0)), complex_to_json(v(1))}); }

void cmd_bands(const Settings& s, const fs::path& out) {
  const ModelParams params = s.model();
  const std::size_t grid = s.grid(kDefaultGrid);
  const BandStructure bands = band_structure(params, grid);
  const WindingResult w = winding_number(params, grid);
  for (int n = 0; n < 2; ++n) {
    CsvTable csv({"k", "re_E", "im_E", "re_v1", "im_v1", "re_v2", "im_v2"});
    for (std::size_t i = 0; i < bands.size(); ++i) {
      const Complex e = bands.energies[n][i];
      const Vec2& v = bands.vectors[n][i];
      csv.add_row({bands.k[i], e.real(), e.imag(), v(0).real(), v(0).imag(), v(1).real(), v(1).imag()});
    }
    write_text_file(out / ("band" + std::to_string(n + 1) + ".csv"), csv.str());
  }
  write_json_file(out / "classification.json", {{"nu", w.nu},
                                                {"tag", phase_tag(w.nu)},
                                                {"min_gap", bands.min_gap},
                                                {"grid_size", grid},
                                                {"permutation", bands.exchanged() ? "swap" : "identity"}});
}

void cmd_winding(const Settings& s, const fs::path& out) {
  const std::size_t grid = s.grid(kDefaultGrid);
  const WindingResult w = winding_number(s.model(), grid);
  write_json_file(out / "winding.json", {{"nu", w.nu},
                                         {"tag", phase_tag(w.nu)},
                                         {"raw", w.raw},
                                         {"residue", w.residue},
                                         {"grid_size", grid},
                                         {"evaluations", w.evaluations}});
}

void cmd_berry(const Settings& s, const fs::path& out) {
  const std::size_t grid = s.grid(2048);
  const BandStructure bands = band_structure(s.model(), grid);
  const BerryResult q = global_berry_phase(bands);
  Json j = {{"Q_raw", q.q_raw},
            {"Q_over_pi", q.q_raw / kPi},
            {"Q_mod_2pi", q.q_mod_2pi},
            {"parity", q.parity},
            {"N", q.grid}};
  j["discretization_error"] = q.discretization_error ? Json(*q.discretization_error) : Json();
  write_json_file(out / "berry.json", j);
  const auto proj = eigenstate_projections(bands);
  CsvTable csv({"band", "k", "sx", "sy", "sz"});
  for (int n = 0; n < 2; ++n)
    for (std::size_t i = 0; i < bands.size(); ++i)
      csv.add_row({static_cast<double>(n + 1), bands.k[i], proj[n][i].x, proj[n][i].y, proj[n][i].z});
  write_text_file(out / "projections.csv", csv.str());
}

void cmd_evolve(const Settings& s, const fs::path& out) {
  const ModelParams params = s.model();
  const double k = s.k();
  const Mat2 h = bloch_hamiltonian(params, k);
  const SteadyState steady = steady_eigenstate(h, s.band());
  const double gap = imaginary_gap(params, k);
  const double duration = s.get<double>("duration", kSteadyWindow / std::max(gap, 1e-6));
  const Mat2 generator = s.band() == 1 ? h : Mat2(-h);
  const double dt = max_stable_step(generator);
  const auto record = static_cast<std::size_t>(std::max(1.0, std::ceil(duration / dt / 400.0)));
  const NhTrajectory traj = integrate_nh(generator, Vec2(1.0, 0.0), duration, dt, record);
  CsvTable csv({"t", "P1", "re_c1", "im_c1", "re_c2", "im_c2", "log_norm"});
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    const Vec2& v = traj.states[i];
    csv.add_row({traj.t[i], traj.populations[i], v(0).real(), v(0).imag(), v(1).real(), v(1).imag(), traj.log_norm[i]});
  }
  write_text_file(out / "trace.csv", csv.str());

  const double lambda = s.nv().lambda;
  const double sigma = s.get<double>("trace_sigma", 0.0);
  const auto samples = synthetic_trace(params, k, lambda, duration / lambda, s.get<std::size_t>("trace_samples", kTraceSamples),
                                       sigma, s.seed());
  const KFit fit = fit_k(samples, params, lambda);
  write_json_file(out / "steady.json", {{"k", k},
                                        {"band", s.band()},
                                        {"state", vector_json(steady.state)},
                                        {"eigenvalue", complex_to_json(steady.eigenvalue)},
                                        {"fidelity", steady.fidelity},
                                        {"duration", steady.duration}});
  write_json_file(out / "fit.json", {{"k_fit", fit.k},
                                     {"k_fit_over_pi", fit.k / kPi},
                                     {"stderr", fit.std_error},
                                     {"objective", fit.objective},
                                     {"aliases", fit.aliases},
                                     {"trace_sigma", sigma}});
}

Scenario scenario_from(const Settings& s) {
  Scenario sc;
  sc.params = s.model();
  sc.k = s.k();
  sc.band = s.band();
  sc.tau = s.get<double>("tau", 0.0);
  sc.nv = s.nv();
  sc.sim = s.sim();
  sc.intervals = s.get<std::size_t>("intervals", 2000);
  return sc;
}

void cmd_dilate(const Settings& s, const fs::path& out) {
  Scenario sc = scenario_from(s);
  const Mat2 h = bloch_hamiltonian(sc.params, sc.k);
  const double tau = sc.tau > 0.0 ? sc.tau : kDriveWindow / std::max(imaginary_gap(sc.params, sc.k), 1e-6);
  CompileOptions opt;
  opt.intervals = sc.intervals;
  opt.omega_tilde1 = sc.nv.omega_tilde1();
  opt.omega_tilde2 = sc.nv.omega_tilde2();
  const double sign = sc.band == 1 ? 1.0 : -1.0;
  const CompiledDrive drive = compile_drive(sign * sc.nv.lambda * h, tau / sc.nv.lambda, opt);
  const PulseSchedule& p = drive.pulses;
  CsvTable csv({"t_us", "Omega1_MHz", "phi1_rad", "omega1_radperus", "Omega2_MHz", "phi2_rad", "omega2_radperus"});
  for (std::size_t i = 0; i < p.size(); ++i)
    csv.add_row({p.t[i], p.rabi1[i], p.phi1[i], p.omega1[i], p.rabi2[i], p.phi2[i], p.omega2[i]});
  write_text_file(out / "pulses.csv", csv.str());
  const DilationSchedule& d = drive.dilation;
  write_json_file(out / "dilation.json", {{"eta0", d.eta0},
                                          {"margin", d.margin},
                                          {"grid", d.t.size()},
                                          {"duration_us", d.t.back()},
                                          {"loss_shift", drive.loss_shift},
                                          {"rf_phase", drive.initial.rf_phase},
                                          {"min_margin", d.min_margin},
                                          {"max_residuals",
                                           {{"M_hermiticity", d.max_hermiticity},
                                            {"recomposition", d.max_recomposition}}}});
}

void cmd_simulate(const Settings& s, const fs::path& out) {
  const ScenarioRun run = run_scenario(scenario_from(s));
  const SimResult& r = run.sim;
  CsvTable csv({"t", "P1", "P2", "P3", "P4", "sx", "sy", "sz", "c"});
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    const auto& p = r.populations[i];
    csv.add_row({r.t[i], p[0], p[1], p[2], p[3], r.electron[i].x, r.electron[i].y, r.electron[i].z, r.coherence[i]});
  }
  write_text_file(out / "sim.csv", csv.str());
  const Mat2 ideal = run.eigenstate * run.eigenstate.adjoint();
  write_json_file(out / "sim.json", {{"final_c", r.coherence.back()},
                                     {"deviation_from_eigenstate", trace_distance(r.final_subspace, ideal)},
                                     {"duration_us", run.duration_us},
                                     {"dt", r.dt},
                                     {"ensemble", r.ensemble},
                                     {"eta0", run.drive.dilation.eta0},
                                     {"max_norm_drift", r.max_norm_drift}});
}

void cmd_tomo(const Settings& s, const fs::path& out) {
  PlRates rates = kDefaultRates;
  const Json& cfg = s.config();
  if (cfg.contains("rates")) rates = cfg.at("rates").get<PlRates>();
  CountVector counts{};
  std::optional<Vec2> reference;
  if (cfg.contains("counts")) {
    counts = cfg.at("counts").get<CountVector>();
  } else {
    const Vec2 v = dominant_eigenvector(bloch_hamiltonian(s.model(), s.k()), s.band());
    reference = v;
    const Vec4 state(v(0), 0.0, v(1), 0.0);
    counts = sample_counts(expected_counts(state, rates), s.shots(), s.seed());
  }
  MleOptions mle;
  mle.seed = s.seed();
  const MleResult rec = mle_reconstruct(counts, rates, mle);
  write_json_file(out / "counts.json", {{"counts", counts}, {"shots", s.shots()}, {"rates", rates}, {"seed", s.seed()}});
  Json j = {{"alpha", rec.params.alpha},     {"beta", rec.params.beta},   {"gamma", rec.params.gamma},
            {"delta", rec.params.delta},     {"epsilon", rec.params.epsilon}, {"zeta", rec.params.zeta},
            {"loss", rec.loss},              {"state", vector_json(rec.state)}};
  if (reference) j["fidelity_vs_reference"] = fidelity(rec.state, *reference);
  write_json_file(out / "reconstruction.json", j);
}

void cmd_pipeline(const Settings& s, const fs::path& out) {
  PipelineConfig c;
  c.params = s.model();
  c.label = s.model_label();
  c.nv = s.nv();
  c.sim = s.sim();
  const Json p = s.config().value("pipeline", Json::object());
  c.k_points = s.grid(p.value("k_points", std::size_t{20}));
  c.window = p.value("window", kDriveWindow);
  c.intervals = p.value("intervals", std::size_t{2000});
  c.noise = p.value("noise", true);
  c.trace_sigma = p.value("trace_sigma", 0.03);
  c.trace_samples = p.value("trace_samples", kTraceSamples);
  c.shots = s.shots();
  c.seed = s.seed();
  write_json_file(out / "report.json", to_json(run_pipeline(c)));
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Non-Hermitian knot topology: spectra, Berry phase, dilation, NV simulation and tomography"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  struct Command {
    const char* name;
    const char* help;
    void (*run)(const Settings&, const fs::path&);
  };
  const Command commands[] = {
      {"bands", "band structure CSV and knot classification", cmd_bands},
      {"winding", "braid winding number", cmd_winding},
      {"berry", "global biorthogonal Berry phase", cmd_berry},
      {"evolve", "non-Hermitian evolution, steady state and k fit", cmd_evolve},
      {"dilate", "compile a steady-state drive into NV pulses", cmd_dilate},
      {"simulate-nv", "simulate the four-level NV system under a compiled drive", cmd_simulate},
      {"tomo", "synthesize counts and reconstruct a state by MLE", cmd_tomo},
      {"pipeline", "end-to-end compile, simulate and reconstruct over a k grid", cmd_pipeline},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--preset", o.preset, "model preset: unlink, unknot, hopf_link");
    sub->add_option("--config", o.config, "JSON scenario config")->check(CLI::ExistingFile);
    sub->add_option("--grid", o.grid, "grid size (k points)");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "root random seed");
    sub->add_option("--ensemble", o.ensemble, "dephasing ensemble size");
    sub->add_option("--shots", o.shots, "shots per count");
    sub->add_option("--selective", o.selective, "selective microwave drive (true/false)");
    sub->add_option("--rwa", o.rwa, "rotating-wave approximation (true/false)");
    sub->add_option("--k", o.k_over_pi, "quasi-momentum in units of pi");
    sub->add_option("--band", o.band, "band selector 1 or 2")->check(CLI::Range(1, 2));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const Command* chosen = nullptr;
  for (const auto& c : commands)
    if (app.got_subcommand(c.name)) chosen = &c;

  const auto start = std::chrono::steady_clock::now();
  try {
    const Settings settings(o);
    const fs::path out(o.out);
    fs::create_directories(out);
    chosen->run(settings, out);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json_file(out / "manifest.json", {{"command", chosen->name},
                                            {"config", o.config},
                                            {"preset", o.preset},
                                            {"output", o.out},
                                            {"seed", settings.seed()},
                                            {"version", kVersion},
                                            {"duration_s", seconds}});
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Json::exception& e) {
    std::cerr << "error: bad config value: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace nhknot
