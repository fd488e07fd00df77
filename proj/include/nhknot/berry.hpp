#pragma once

#include <array>
#include <optional>
#include <vector>

#include "nhknot/spectra.hpp"
#include "nhknot/types.hpp"

namespace nhknot {

struct BiorthogonalPair {
  Vec2 psi;  // right eigenvector, unit norm
  Vec2 chi;  // left eigenvector, <chi|psi> = 1
  Complex eigenvalue;
};

// Pairs ordered as eigensolve2 orders the eigenvalues. Throws ExceptionalPoint on defective H.
std::array<BiorthogonalPair, 2> biorthogonal_pairs(const Mat2& h);

// Left vectors with <chi_m|psi_n> = delta_mn for two independent right vectors.
std::array<Vec2, 2> dual_basis(const Vec2& psi1, const Vec2& psi2);

struct BerryResult {
  double q_raw = 0.0;
  double q_mod_2pi = 0.0;                      // in [0, 2pi)
  int parity = 1;
  std::vector<double> terms;                   // Im ln <chi_n(k_{i+1})|psi_n(k_i)>, band 0 links then band 1
  std::optional<double> discretization_error;  // |Q(N) - Q(N/2)|, even N only
  std::size_t grid = 0;
};

// Q from tracked right eigenvectors states[n][i] at k_i = 2 pi i / N; permutation as in BandStructure.
BerryResult global_berry_phase(const std::array<std::vector<Vec2>, 2>& states, std::array<int, 2> permutation);
BerryResult global_berry_phase(const BandStructure& structure);

// (-1)^P(sigma): +1 when the bands close on themselves, -1 when they exchange.
int parity_check(const BandStructure& structure);

// <sigma_x>, <sigma_y>, <sigma_z> of each tracked right eigenvector.
std::array<std::vector<BlochVector>, 2> eigenstate_projections(const BandStructure& structure);

}  // namespace nhknot
