#include "nhknot/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>

#include "nhknot/errors.hpp"
#include "nhknot/spectra.hpp"

namespace nhknot {
namespace {

constexpr double kStepSafety = 0.01;
constexpr double kConvergenceRate = 1e-10;
constexpr double kMaxWindow = 60.0;
constexpr int kCoarseScan = 64;

double operator_norm(const Mat2& h) {
  return Eigen::JacobiSVD<Mat2>(h).singularValues()(0);
}

// RK4 step map for a constant generator: sum_{j<=4} (-i H dt)^j / j!.
Mat2 rk4_propagator(const Mat2& h, double dt) {
  const Mat2 a = -kI * dt * h;
  Mat2 term = Mat2::Identity();
  Mat2 out = Mat2::Identity();
  for (int j = 1; j <= 4; ++j) {
    term = term * a / static_cast<double>(j);
    out += term;
  }
  return out;
}

// Phase-insensitive distance between unit vectors.
double phase_distance(const Vec2& a, const Vec2& b) {
  const Complex overlap = a.dot(b);
  const double mag = std::abs(overlap);
  if (mag == 0.0) return std::sqrt(2.0);
  return (b * (std::conj(overlap) / mag) - a).norm();
}

int band_index(const Eigensystem2& es, int which) {
  const bool first_up = es.values[0].imag() >= es.values[1].imag();
  return (which == 1) == first_up ? 0 : 1;
}

double objective(const std::vector<TraceSample>& samples, const ModelParams& params, double lambda, double k) {
  double sum = 0.0;
  for (const auto& s : samples) {
    const double r = model_population(params, k, lambda, s.t) - s.p1;
    sum += r * r;
  }
  return sum;
}

struct FitContext {
  const std::vector<TraceSample>* samples;
  const ModelParams* params;
  double lambda;
};

double gsl_objective(double k, void* raw) {
  const auto* ctx = static_cast<const FitContext*>(raw);
  return objective(*ctx->samples, *ctx->params, ctx->lambda, k);
}

}  // namespace

double max_stable_step(const Mat2& h) {
  const double norm = operator_norm(h);
  return norm == 0.0 ? std::numeric_limits<double>::infinity() : kStepSafety / norm;
}

NhTrajectory integrate_nh(const Mat2& h, const Vec2& psi0, double duration, double dt, std::size_t record_every) {
  if (std::abs(psi0.norm() - 1.0) > 1e-8) throw InvalidArgument("integrate_nh: initial state must be normalized");
  if (!(duration >= 0.0) || !(dt > 0.0)) throw InvalidArgument("integrate_nh: need duration >= 0 and dt > 0");
  const double limit = max_stable_step(h);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "integrate_nh: step " << dt << " exceeds 0.01/||H|| = " << limit;
    throw StepSizeTooLarge(msg.str(), limit);
  }
  record_every = std::max<std::size_t>(record_every, 1);
  const auto steps = static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));
  const double h_step = steps == 0 ? 0.0 : duration / static_cast<double>(steps);
  const Mat2 step_map = rk4_propagator(h, h_step);

  NhTrajectory out;
  auto record = [&out](double t, const Vec2& psi, double log_norm) {
    out.t.push_back(t);
    out.states.push_back(psi);
    out.log_norm.push_back(log_norm);
    out.populations.push_back(std::norm(psi(0)));
  };
  Vec2 psi = psi0;
  double log_norm = 0.0;
  record(0.0, psi, log_norm);
  for (std::size_t i = 1; i <= steps; ++i) {
    psi = step_map * psi;
    const double norm = psi.norm();
    psi /= norm;
    log_norm += std::log(norm);
    if (i % record_every == 0 || i == steps) record(h_step * static_cast<double>(i), psi, log_norm);
  }
  return out;
}

Vec2 dominant_eigenvector(const Mat2& h, int which) {
  const Eigensystem2 es = eigensolve2(h);
  return es.vectors[band_index(es, which)];
}

SteadyState steady_eigenstate(const Mat2& h, int which) {
  if (which != 1 && which != 2) throw InvalidArgument("steady_eigenstate: band selector must be 1 or 2");
  const Eigensystem2 es = eigensolve2(h);
  const double gap = std::abs(es.values[0].imag() - es.values[1].imag());
  if (gap < 1e-6) {
    std::ostringstream msg;
    msg << "no dominant band: imaginary gap " << gap << " below 1e-6";
    throw NoDominantBand(msg.str());
  }
  const int band = band_index(es, which);
  const Mat2 generator = which == 1 ? h : Mat2(-h);

  Vec2 psi(1.0, 0.0);
  if (std::abs(es.vectors[band](0)) < 1e-6) psi = Vec2(1.0, 1.0) / std::sqrt(2.0);

  const double dt = max_stable_step(generator);
  const double window = kSteadyWindow / gap;
  const auto steps_per_unit = static_cast<std::size_t>(std::ceil(1.0 / dt));
  const Mat2 unit_map = rk4_propagator(generator, 1.0 / static_cast<double>(steps_per_unit));

  auto advance = [&](Vec2 v, double duration) {
    const auto units = static_cast<std::size_t>(std::ceil(duration));
    for (std::size_t u = 0; u < units; ++u)
      for (std::size_t s = 0; s < steps_per_unit; ++s) {
        v = unit_map * v;
        v /= v.norm();
      }
    return v;
  };

  double elapsed = std::ceil(window);
  psi = advance(psi, window);
  while (true) {
    const Vec2 next = advance(psi, 1.0);
    elapsed += 1.0;
    const double change = phase_distance(psi, next);
    psi = next;
    if (change < kConvergenceRate) break;
    if (elapsed * gap > kMaxWindow) {
      throw ConvergenceFailure("steady_eigenstate: state still changing after window " + std::to_string(elapsed));
    }
  }

  SteadyState out;
  out.reference = es.vectors[band];
  out.eigenvalue = es.values[band];
  out.state = canonical_gauge(psi);
  out.fidelity = std::norm(out.reference.dot(out.state));
  out.duration = elapsed;
  return out;
}

double renormalized_population(const Vec2& psi) { return std::norm(psi(0)) / psi.squaredNorm(); }

std::vector<double> renormalized_population(const NhTrajectory& trajectory) {
  std::vector<double> out;
  out.reserve(trajectory.states.size());
  for (const auto& psi : trajectory.states) out.push_back(renormalized_population(psi));
  return out;
}

Vec2 propagate_nh(const Mat2& h, const Vec2& psi0, double t) {
  // exp(-i H t) = exp(-i c t) [cos(s t) - i sin(s t) K / s], K = H - c, K^2 = s^2.
  const Complex c = 0.5 * h.trace();
  const Mat2 traceless = h - c * Mat2::Identity();
  const Complex s = std::sqrt(traceless(0, 0) * traceless(0, 0) + traceless(0, 1) * traceless(1, 0));
  // Scale both exponentials by exp(-|Im s| t) so the magnitudes stay bounded.
  const double shift = std::abs(s.imag()) * std::abs(t);
  const Complex up = std::exp(kI * s * t - shift);
  const Complex down = std::exp(-kI * s * t - shift);
  const Complex cos_st = 0.5 * (up + down);
  Complex sinc_st;
  if (std::abs(s * t) < 1e-6) {
    sinc_st = t * std::exp(-shift) * (1.0 - (s * t) * (s * t) / 6.0);
  } else {
    sinc_st = (up - down) / (2.0 * kI * s);
  }
  // The trace factor exp(-i c t) only rescales; keep its phase.
  const Vec2 out = std::polar(1.0, -c.real() * t) * (cos_st * psi0 - kI * sinc_st * (traceless * psi0));
  return out / out.norm();
}

double model_population(const ModelParams& params, double k, double lambda, double t) {
  return renormalized_population(propagate_nh(lambda * bloch_hamiltonian(params, k), Vec2(1.0, 0.0), t));
}

KFit fit_k(const std::vector<TraceSample>& samples, const ModelParams& params, double lambda, double noise_floor,
           std::optional<double> prior) {
  if (samples.size() < 8) throw InvalidArgument("fit_k: need at least 8 samples");
  if (!(lambda > 0.0)) throw InvalidArgument("fit_k: lambda must be positive");

  const double dk = kTwoPi / kCoarseScan;
  std::vector<double> scan(kCoarseScan);
  std::vector<double> mean(samples.size(), 0.0), second(samples.size(), 0.0);
  for (int j = 0; j < kCoarseScan; ++j) {
    const double k = dk * j;
    double sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double p = model_population(params, k, lambda, samples[i].t);
      mean[i] += p / kCoarseScan;
      second[i] += p * p / kCoarseScan;
      const double r = p - samples[i].p1;
      sum += r * r;
    }
    scan[j] = sum;
  }
  double model_variance = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) model_variance += (second[i] - mean[i] * mean[i]) / samples.size();
  if (model_variance < noise_floor) {
    std::ostringstream msg;
    msg << "k unidentifiable: model variance over k is " << model_variance << " (floor " << noise_floor << ")";
    throw Unidentifiable(msg.str());
  }

  // Refine every local minimum of the periodic scan; aliases of the true momentum can sit in a
  // neighbouring basin with an almost equal coarse value.
  FitContext ctx{&samples, &params, lambda};
  gsl_set_error_handler_off();
  gsl_function fn{&gsl_objective, &ctx};
  gsl_min_fminimizer* solver = gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent);
  std::vector<std::pair<double, double>> minima;  // (k, objective)
  for (int j = 0; j < kCoarseScan; ++j) {
    const double f_lo = scan[(j + kCoarseScan - 1) % kCoarseScan];
    const double f_hi = scan[(j + 1) % kCoarseScan];
    if (!(scan[j] < f_lo && scan[j] < f_hi)) continue;
    double k_j = dk * j;
    double f_j = scan[j];
    if (gsl_min_fminimizer_set_with_values(solver, &fn, k_j, f_j, dk * (j - 1), f_lo, dk * (j + 1), f_hi) ==
        GSL_SUCCESS) {
      for (int iter = 0; iter < 200; ++iter) {
        if (gsl_min_fminimizer_iterate(solver) != GSL_SUCCESS) break;
        const double a = gsl_min_fminimizer_x_lower(solver);
        const double b = gsl_min_fminimizer_x_upper(solver);
        if (gsl_min_test_interval(a, b, 1e-12, 0.0) == GSL_SUCCESS) break;
      }
      k_j = gsl_min_fminimizer_x_minimum(solver);
      f_j = gsl_min_fminimizer_f_minimum(solver);
    }
    minima.emplace_back(fold_momentum(k_j), f_j);
  }
  gsl_min_fminimizer_free(solver);
  if (minima.empty()) {
    const int best = static_cast<int>(std::min_element(scan.begin(), scan.end()) - scan.begin());
    minima.emplace_back(dk * best, scan[best]);
  }

  // Momenta whose traces coincide exactly (e.g. H(k') = conj H(k)) tie to rounding; the prior picks among them.
  double f_opt = std::min_element(minima.begin(), minima.end(), [](auto& a, auto& b) { return a.second < b.second; })->second;
  const double tie = 1e-9 * f_opt + 1e-14 * static_cast<double>(samples.size());
  std::vector<double> tied;
  for (const auto& [k, f] : minima) {
    const bool duplicate = std::any_of(tied.begin(), tied.end(),
                                       [&](double q) { return std::abs(std::remainder(q - k, kTwoPi)) < 0.5 * dk; });
    if (f <= f_opt + tie && !duplicate) tied.push_back(k);
  }
  auto score = [&](double k) {
    if (prior) return std::abs(std::remainder(k - *prior, kTwoPi));
    return objective(samples, params, lambda, k);
  };
  const double k_opt = *std::min_element(tied.begin(), tied.end(), [&](double a, double b) { return score(a) < score(b); });
  f_opt = objective(samples, params, lambda, k_opt);

  KFit out;
  out.k = fold_momentum(k_opt);
  out.objective = f_opt;
  for (double k : tied)
    if (k != k_opt) out.aliases.push_back(k);
  const double h = 1e-4;
  const double curvature =
      (objective(samples, params, lambda, k_opt + h) - 2.0 * f_opt + objective(samples, params, lambda, k_opt - h)) /
      (h * h);
  const double s2 = f_opt / static_cast<double>(samples.size() - 1);
  out.std_error = curvature > 0.0 ? std::sqrt(2.0 * s2 / curvature) : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<TraceSample> synthetic_trace(const ModelParams& params, double k, double lambda, double duration,
                                         std::size_t count, double sigma, std::uint64_t seed) {
  if (count < 2) throw InvalidArgument("synthetic_trace: need at least 2 samples");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  std::vector<TraceSample> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = duration * static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = {t, model_population(params, k, lambda, t) + (sigma > 0.0 ? noise(rng) : 0.0)};
  }
  return out;
}

}  // namespace nhknot
