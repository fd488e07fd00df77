#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nhknot/berry.hpp"
#include "nhknot/dilation.hpp"
#include "nhknot/evolve.hpp"
#include "nhknot/io.hpp"
#include "nhknot/model.hpp"
#include "nhknot/nvsim.hpp"
#include "nhknot/tomo.hpp"

namespace nhknot {

// Imaginary gap times duration used when compiling a steady-state drive.
inline constexpr double kDriveWindow = 8.0;

// One NV run of the steady-state protocol: band 1 evolves under +lambda H(k), band 2 under -lambda H(k).
struct Scenario {
  ModelParams params;
  double k = 0.0;
  int band = 1;
  double tau = 0.0;             // dimensionless duration lambda * T; 0 picks kDriveWindow / |Delta Im E|
  NvParams nv;
  SimOptions sim;
  std::size_t intervals = 2000;
};

struct ScenarioRun {
  CompiledDrive drive;
  SimResult sim;
  Vec2 eigenstate;              // ideal steady state of the selected band
  double duration_us = 0.0;
};

ScenarioRun run_scenario(const Scenario& scenario);

// |Delta Im E| of the lattice Hamiltonian at k.
double imaginary_gap(const ModelParams& params, double k);

// Offset momentum grid k_i = 2 pi (i + 1/2) / n.
std::vector<double> pipeline_grid(std::size_t n);

struct PipelineConfig {
  ModelParams params;
  std::string label;
  std::size_t k_points = 20;
  NvParams nv;
  SimOptions sim;               // dephasing and ensemble for each NV run
  double window = kDriveWindow;
  std::size_t intervals = 2000;
  bool noise = true;            // shot noise on counts and Gaussian noise on the P1 trace
  std::uint64_t shots = 100000;
  PlRates rates = kDefaultRates;
  double trace_sigma = 0.03;
  std::size_t trace_samples = kTraceSamples;
  std::uint64_t seed = 1;
};

struct KPointReport {
  double k = 0.0;
  bool ok = false;
  std::string error;
  std::array<Vec2, 2> reconstructed;
  std::array<Vec2, 2> ideal;
  std::array<double, 2> fidelity{};
  std::array<double, 2> eta0{};
  std::array<double, 2> mle_loss{};
  KFit fit;
  std::array<Complex, 2> energies{};  // eigenvalues of H(k_fit)
};

struct PipelineReport {
  std::string label;
  std::vector<KPointReport> points;
  std::array<int, 2> permutation{0, 1};
  std::optional<BerryResult> berry;   // from reconstructed states
  std::optional<int> nu;              // from eigenvalues at the fitted momenta
  double min_fidelity = 0.0;
  double median_fidelity = 0.0;
  std::size_t failures = 0;
};

PipelineReport run_pipeline(const PipelineConfig& config);

// Relabels per-k state pairs so each band is continuous in overlap; returns the seam permutation.
std::array<int, 2> relabel_by_overlap(std::array<std::vector<Vec2>, 2>& states);

Json to_json(const PipelineReport& report);

}  // namespace nhknot
