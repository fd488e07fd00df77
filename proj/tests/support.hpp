#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "nhknot/errors.hpp"
#include "nhknot/model.hpp"
#include "nhknot/spectra.hpp"
#include "nhknot/types.hpp"

namespace nhknot::testing {

inline Complex random_complex(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng)};
}

inline Mat2 random_matrix(std::mt19937_64& rng, double scale = 1.0) {
  Mat2 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = random_complex(rng, scale);
  return m;
}

inline Vec2 random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec2 v(Complex(g(rng), g(rng)), Complex(g(rng), g(rng)));
  return v.normalized();
}

inline ModelParams random_params(std::mt19937_64& rng, int range) {
  ModelParams p;
  p.gamma0 = {random_complex(rng, 0.8), random_complex(rng, 0.8)};
  for (int n = 0; n < range; ++n) {
    p.gamma1.push_back({random_complex(rng, 0.5), random_complex(rng, 0.5)});
    p.gamma2.push_back({random_complex(rng, 0.5), random_complex(rng, 0.5)});
  }
  return p;
}

// Draws until the bands stay at least min_gap apart on a coarse grid.
inline ModelParams random_separable_params(std::mt19937_64& rng, double min_gap = 0.1) {
  std::uniform_int_distribution<int> range(1, 3);
  for (;;) {
    ModelParams p = random_params(rng, range(rng));
    double gap = 1e300;
    for (int i = 0; i < 512; ++i) {
      const Mat2 h = bloch_hamiltonian(p, kTwoPi * i / 512.0);
      gap = std::min(gap, 2.0 * std::abs(std::sqrt(h(0, 1) * h(1, 0))));
    }
    if (gap > min_gap) return p;
  }
}

// Trace distance between the pure states a and b (normalized here).
inline double pure_distance(const Vec2& a, const Vec2& b) {
  // Norm of the part of b orthogonal to a; avoids the sqrt(eps) floor of sqrt(1 - |<a|b>|^2).
  const Vec2 u = a.normalized(), v = b.normalized();
  return (v - u.dot(v) * u).norm();
}

}  // namespace nhknot::testing
