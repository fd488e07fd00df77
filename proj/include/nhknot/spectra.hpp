#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nhknot/model.hpp"
#include "nhknot/types.hpp"

namespace nhknot {

using BlochFunction = std::function<Mat2(double)>;

struct Eigensystem2 {
  std::array<Complex, 2> values;
  std::array<Vec2, 2> vectors;  // unit norm, largest-magnitude component real positive
  bool exceptional = false;     // defective matrix: eigenvectors coalesce
};

// Closed-form 2x2 eigenproblem. Never throws; defective input is flagged instead.
Eigensystem2 eigensolve2(const Mat2& h);

// Rescales v to unit norm with its largest-magnitude component real and positive.
Vec2 canonical_gauge(const Vec2& v);

struct BandStructure {
  std::vector<double> k;                          // k_i = 2 pi i / N
  std::array<std::vector<Complex>, 2> energies;   // continuation-tracked bands
  std::array<std::vector<Vec2>, 2> vectors;       // matching right eigenvectors
  std::array<int, 2> permutation{0, 1};           // band n at k = 2pi continues as band permutation[n] at k = 0
  double min_gap = 0.0;
  std::size_t refinements = 0;                    // extra points inserted by local grid doubling

  std::size_t size() const { return k.size(); }
  bool exchanged() const { return permutation[0] != 0; }
};

struct BandOptions {
  double gap_tolerance = 1e-8;
  int max_refinement_depth = 30;
};

inline constexpr std::size_t kDefaultGrid = 1024;

BandStructure band_structure(const BlochFunction& hamiltonian, std::size_t grid,
                             const BandOptions& options = {});
BandStructure band_structure(const ModelParams& params, std::size_t grid,
                             const BandOptions& options = {});

struct WindingResult {
  int nu = 0;
  double raw = 0.0;      // accumulated phase / 2pi before rounding
  double residue = 0.0;  // |raw - nu|
  std::size_t evaluations = 0;
};

// Braid winding number from the unwrapped phase of Det[H - Tr(H)/2] over k in [0, 2pi].
WindingResult winding_number(const BlochFunction& hamiltonian, std::size_t grid);
WindingResult winding_number(const ModelParams& params, std::size_t grid = kDefaultGrid);

struct PhaseLabel {
  int nu = 0;
  std::string tag;
  double min_gap = 0.0;
  std::size_t grid = 0;
};

// 0 -> unlink, 1 -> unknot, 2 -> hopf_link, anything else -> braid(nu).
std::string phase_tag(int nu);

PhaseLabel classify(const ModelParams& params, std::size_t grid = kDefaultGrid);

}  // namespace nhknot
