#pragma once

#include <array>
#include <cstdint>

#include "nhknot/types.hpp"

namespace nhknot {

// (alpha|0>_e + beta e^{i gamma}|-1>_e)|1>_n + (delta|0>_e + epsilon e^{i zeta}|-1>_e)|0>_n
struct PureStateParams {
  double alpha = 1.0, beta = 0.0, delta = 0.0, epsilon = 0.0;
  double gamma = 0.0, zeta = 0.0;

  // Four-level vector in the |0,1>, |0,0>, |-1,1>, |-1,0> ordering.
  Vec4 vector() const;
  // Normalized |1>_n component alpha|0>_e + beta e^{i gamma}|-1>_e.
  Vec2 subspace_state() const;
  double norm_squared() const { return alpha * alpha + beta * beta + delta * delta + epsilon * epsilon; }

  static PureStateParams from_vector(const Vec4& v);
};

// Photoluminescence rates of levels 1..4 = |0,1>, |-1,1>, |0,0>, |-1,0>.
using PlRates = std::array<double, 4>;
inline constexpr PlRates kDefaultRates{1.0, 0.7, 1.0, 0.7};

using CountVector = std::array<double, 9>;

inline constexpr int kSequences = 9;

// Sequence s = 3 r + p: electron readout r in {I, R_-y(pi/2), R_-x(pi/2)} on both nuclear
// subspaces, then population transfer p in {I, R^e(pi) on |1>_n, R^n(pi) on |0>_e}.
Mat4 sequence_unitary(int sequence);
// Four-level index holding the population read as level l (0-based) after sequence s.
int level_index(int level);

CountVector expected_counts(const PureStateParams& state, const PlRates& rates = kDefaultRates);
CountVector expected_counts(const Vec4& state, const PlRates& rates = kDefaultRates);
CountVector expected_counts(const Mat4& rho, const PlRates& rates = kDefaultRates);

// Poisson(shots * C) / shots per count, deterministic for a given seed.
CountVector sample_counts(const CountVector& expected, std::uint64_t shots, std::uint64_t seed);

struct MleOptions {
  int starts = 16;
  std::uint64_t seed = 7;
  int max_iterations = 4000;
};

struct MleResult {
  PureStateParams params;
  Vec2 state;           // renormalized |1>_n subspace component
  double loss = 0.0;
  int converged_starts = 0;
};

double mle_loss(const CountVector& counts, const PureStateParams& state, const PlRates& rates = kDefaultRates);

MleResult mle_reconstruct(const CountVector& counts, const PlRates& rates = kDefaultRates,
                          const MleOptions& options = {});

// |<reference|state>|^2 for normalized inputs (normalizes defensively).
double fidelity(const Vec2& state, const Vec2& reference);

}  // namespace nhknot
