#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "nhknot/model.hpp"
#include "nhknot/types.hpp"

namespace nhknot {

struct NhTrajectory {
  std::vector<double> t;
  std::vector<Vec2> states;        // unit norm
  std::vector<double> log_norm;    // ln of the accumulated raw norm growth
  std::vector<double> populations; // P1 = |first component|^2
};

// Largest step accepted by integrate_nh: 0.01 / ||H||_2.
double max_stable_step(const Mat2& h);

// Fixed-step RK4 for i dpsi/dt = H psi with per-step renormalization. The step is shrunk
// so that it divides the duration; every record_every-th step is stored, plus the endpoint.
NhTrajectory integrate_nh(const Mat2& h, const Vec2& psi0, double duration, double dt,
                          std::size_t record_every = 1);

struct SteadyState {
  Vec2 state;        // normalized steady state of the evolution
  Vec2 reference;    // eigenvector from direct diagonalization, same gauge
  Complex eigenvalue;
  double fidelity = 0.0;
  double duration = 0.0;
};

inline constexpr double kSteadyWindow = 14.0;

// which = 1 evolves under +H and returns the eigenstate with the larger Im E;
// which = 2 evolves under -H and returns the one with the smaller Im E.
SteadyState steady_eigenstate(const Mat2& h, int which);

// Eigenvector of the band selected as in steady_eigenstate.
Vec2 dominant_eigenvector(const Mat2& h, int which);

double renormalized_population(const Vec2& psi);
std::vector<double> renormalized_population(const NhTrajectory& trajectory);

// Normalized exp(-i H t) psi0 from the closed-form 2x2 exponential; exact for any t.
Vec2 propagate_nh(const Mat2& h, const Vec2& psi0, double t);

struct TraceSample {
  double t = 0.0;   // microseconds
  double p1 = 0.0;
};

// P1(t) for the lattice model at momentum k started in (1, 0) under lambda * H(k).
double model_population(const ModelParams& params, double k, double lambda, double t);

struct KFit {
  double k = 0.0;
  double std_error = 0.0;
  double objective = 0.0;
  std::vector<double> aliases;  // other momenta reaching the same objective
};

// Least-squares momentum from a renormalized population trace. Exact aliases are resolved toward
// prior when given, otherwise toward the lowest objective.
KFit fit_k(const std::vector<TraceSample>& samples, const ModelParams& params, double lambda,
           double noise_floor = 1e-10, std::optional<double> prior = std::nullopt);

// Default number of trace samples; with 3% noise per sample fewer points let k + pi style aliases win.
inline constexpr std::size_t kTraceSamples = 400;

// Uniform-in-time synthetic trace with additive Gaussian noise of width sigma.
std::vector<TraceSample> synthetic_trace(const ModelParams& params, double k, double lambda, double duration,
                                         std::size_t count, double sigma, std::uint64_t seed);

}  // namespace nhknot
