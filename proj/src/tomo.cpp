#include "nhknot/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "nhknot/errors.hpp"

namespace nhknot {
namespace {

constexpr std::array<int, 4> kLevelIndex{0, 2, 1, 3};

Mat2 electron_readout(int r) {
  // R_-y(pi/2) = exp(i pi sigma_y / 4), R_-x(pi/2) = exp(i pi sigma_x / 4).
  const double c = std::cos(kPi / 4.0), s = std::sin(kPi / 4.0);
  switch (r) {
    case 0: return Mat2::Identity();
    case 1: return c * Mat2::Identity() + kI * s * pauli::y();
    default: return c * Mat2::Identity() + kI * s * pauli::x();
  }
}

Mat4 transfer(int p) {
  Mat4 m = Mat4::Identity();
  if (p == 0) return m;
  const int other = p == 1 ? 2 : 1;  // R^e swaps |0,1> and |-1,1>; R^n swaps |0,1> and |0,0>
  m.row(0).swap(m.row(other));
  return m;
}

const std::array<Mat4, kSequences>& sequences() {
  static const std::array<Mat4, kSequences> all = [] {
    std::array<Mat4, kSequences> out;
    for (int r = 0; r < 3; ++r)
      for (int p = 0; p < 3; ++p) out[3 * r + p] = transfer(p) * kron(electron_readout(r), pauli::identity());
    return out;
  }();
  return all;
}

struct Angles {
  double t1, t2, t3, gamma, zeta;
};

PureStateParams from_angles(const double* x) {
  PureStateParams p;
  const double s1 = std::sin(x[0]), s2 = std::sin(x[1]);
  p.alpha = std::abs(std::cos(x[0]));
  p.beta = std::abs(s1 * std::cos(x[1]));
  p.delta = std::abs(s1 * s2 * std::cos(x[2]));
  p.epsilon = std::abs(s1 * s2 * std::sin(x[2]));
  p.gamma = std::remainder(x[3], kTwoPi);
  p.zeta = std::remainder(x[4], kTwoPi);
  return p;
}

Angles to_angles(const PureStateParams& p) {
  const double n = std::sqrt(p.norm_squared());
  const double a = p.alpha / n, b = p.beta / n, d = p.delta / n, e = p.epsilon / n;
  return {std::acos(std::clamp(a, -1.0, 1.0)), std::atan2(std::hypot(d, e), b), std::atan2(e, d), p.gamma, p.zeta};
}

struct LossContext {
  const CountVector* counts;
  const PlRates* rates;
};

double gsl_loss(const gsl_vector* v, void* raw) {
  const auto* ctx = static_cast<const LossContext*>(raw);
  return mle_loss(*ctx->counts, from_angles(v->data), *ctx->rates);
}

}  // namespace

Vec4 PureStateParams::vector() const {
  Vec4 v;
  v(0) = alpha;
  v(1) = delta;
  v(2) = beta * std::exp(kI * gamma);
  v(3) = epsilon * std::exp(kI * zeta);
  return v;
}

Vec2 PureStateParams::subspace_state() const {
  const Vec2 v(alpha, beta * std::exp(kI * gamma));
  const double n = v.norm();
  if (n == 0.0) throw NumericalError("state has no |1>_n component");
  return v / n;
}

PureStateParams PureStateParams::from_vector(const Vec4& v) {
  PureStateParams p;
  const double n = v.norm();
  if (n == 0.0) throw InvalidArgument("zero state vector");
  p.alpha = std::abs(v(0)) / n;
  p.delta = std::abs(v(1)) / n;
  p.beta = std::abs(v(2)) / n;
  p.epsilon = std::abs(v(3)) / n;
  p.gamma = p.beta > 0.0 ? std::arg(v(2) * std::conj(v(0) == 0.0 ? Complex(1.0) : v(0) / std::abs(v(0)))) : 0.0;
  p.zeta = p.epsilon > 0.0 ? std::arg(v(3) * std::conj(v(1) == 0.0 ? Complex(1.0) : v(1) / std::abs(v(1)))) : 0.0;
  return p;
}

Mat4 sequence_unitary(int sequence) {
  if (sequence < 0 || sequence >= kSequences) throw InvalidArgument("sequence index out of range");
  return sequences()[sequence];
}

int level_index(int level) { return kLevelIndex.at(level); }

CountVector expected_counts(const Mat4& rho, const PlRates& rates) {
  CountVector c{};
  for (int s = 0; s < kSequences; ++s) {
    const Mat4& u = sequences()[s];
    const Mat4 out = u * rho * u.adjoint();
    double sum = 0.0;
    for (int l = 0; l < 4; ++l) sum += rates[l] * out(kLevelIndex[l], kLevelIndex[l]).real();
    c[s] = sum;
  }
  return c;
}

CountVector expected_counts(const Vec4& state, const PlRates& rates) {
  if (std::abs(state.norm() - 1.0) > 1e-8) throw InvalidArgument("expected_counts: state must be normalized");
  CountVector c{};
  for (int s = 0; s < kSequences; ++s) {
    const Vec4 out = sequences()[s] * state;
    double sum = 0.0;
    for (int l = 0; l < 4; ++l) sum += rates[l] * std::norm(out(kLevelIndex[l]));
    c[s] = sum;
  }
  return c;
}

CountVector expected_counts(const PureStateParams& state, const PlRates& rates) {
  if (std::abs(state.norm_squared() - 1.0) > 1e-8) throw InvalidArgument("expected_counts: state must be normalized");
  return expected_counts(state.vector(), rates);
}

CountVector sample_counts(const CountVector& expected, std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) throw InvalidArgument("sample_counts: shots must be >= 1");
  std::mt19937_64 rng(seed);
  CountVector out{};
  const double n = static_cast<double>(shots);
  for (int s = 0; s < kSequences; ++s) {
    if (expected[s] < 0.0) throw InvalidArgument("sample_counts: negative expected count");
    std::poisson_distribution<long long> draw(n * expected[s]);
    out[s] = expected[s] == 0.0 ? 0.0 : static_cast<double>(draw(rng)) / n;
  }
  return out;
}

double mle_loss(const CountVector& counts, const PureStateParams& state, const PlRates& rates) {
  const CountVector model = expected_counts(state.vector(), rates);
  double loss = 0.0;
  for (int s = 0; s < kSequences; ++s) loss += (counts[s] - model[s]) * (counts[s] - model[s]);
  return loss;
}

MleResult mle_reconstruct(const CountVector& counts, const PlRates& rates, const MleOptions& options) {
  if (options.starts < 1) throw InvalidArgument("mle: need at least one start");
  gsl_set_error_handler_off();
  LossContext ctx{&counts, &rates};
  gsl_multimin_function fn{&gsl_loss, 5, &ctx};
  gsl_multimin_fminimizer* solver = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 5);
  gsl_vector* x = gsl_vector_alloc(5);
  gsl_vector* step = gsl_vector_alloc(5);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> phase(-kPi, kPi);

  MleResult best;
  best.loss = std::numeric_limits<double>::infinity();
  int converged = 0;
  for (int start = 0; start < options.starts; ++start) {
    // Uniform on the sphere of (alpha, beta, delta, epsilon) magnitudes, uniform phases.
    PureStateParams guess;
    Eigen::Vector4d g;
    for (int i = 0; i < 4; ++i) g(i) = std::abs(normal(rng));
    g.normalize();
    guess.alpha = g(0);
    guess.beta = g(1);
    guess.delta = g(2);
    guess.epsilon = g(3);
    guess.gamma = phase(rng);
    guess.zeta = phase(rng);
    const Angles a = to_angles(guess);
    const double init[5] = {a.t1, a.t2, a.t3, a.gamma, a.zeta};
    for (int i = 0; i < 5; ++i) {
      gsl_vector_set(x, i, init[i]);
      gsl_vector_set(step, i, 0.3);
    }
    gsl_multimin_fminimizer_set(solver, &fn, x, step);

    bool done = false;
    // Restart the simplex once it collapses so a degenerate simplex cannot stall short of the minimum.
    for (int round = 0; round < 3; ++round) {
      done = false;
      for (int iter = 0; iter < options.max_iterations; ++iter) {
        if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver), 1e-11) == GSL_SUCCESS) {
          done = true;
          break;
        }
      }
      gsl_vector_memcpy(x, gsl_multimin_fminimizer_x(solver));
      for (int i = 0; i < 5; ++i) gsl_vector_set(step, i, round == 0 ? 0.05 : 0.005);
      gsl_multimin_fminimizer_set(solver, &fn, x, step);
    }
    if (done) ++converged;
    const double loss = solver->fval;
    if (loss < best.loss) {
      best.loss = loss;
      best.params = from_angles(gsl_multimin_fminimizer_x(solver)->data);
    }
  }
  gsl_vector_free(step);
  gsl_vector_free(x);
  gsl_multimin_fminimizer_free(solver);

  best.converged_starts = converged;
  if (converged == 0) {
    std::ostringstream msg;
    msg << "mle: no start converged (best loss " << best.loss << ")";
    throw ConvergenceFailure(msg.str());
  }
  best.state = best.params.subspace_state();
  return best;
}

double fidelity(const Vec2& state, const Vec2& reference) {
  const double ns = state.norm(), nr = reference.norm();
  if (ns == 0.0 || nr == 0.0) throw InvalidArgument("fidelity: zero vector");
  return std::norm(reference.dot(state)) / (ns * ns * nr * nr);
}

}  // namespace nhknot
