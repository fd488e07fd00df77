#include "nhknot/dilation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nhknot/errors.hpp"
#include "nhknot/ode.hpp"

namespace nhknot {
namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;

Mat2 hermitian_part(const Mat2& m) { return 0.5 * (m + m.adjoint()); }

double min_eigenvalue(const Mat2& hermitian) {
  return Eigen::SelfAdjointEigenSolver<Mat2>(hermitian, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

double relative_antihermitian(const Mat2& m) {
  return (m - m.adjoint()).norm() / std::max(1.0, m.norm());
}

struct PauliTerm {
  double PauliCoefficients::*field;
  Mat4 basis;
};

const std::array<PauliTerm, 8>& pauli_terms() {
  static const std::array<PauliTerm, 8> terms{{
      {&PauliCoefficients::b1, kron(pauli::identity(), pauli::identity())},
      {&PauliCoefficients::a1, kron(pauli::x(), pauli::identity())},
      {&PauliCoefficients::b2, kron(pauli::y(), pauli::identity())},
      {&PauliCoefficients::b3, kron(pauli::z(), pauli::identity())},
      {&PauliCoefficients::a2, kron(pauli::identity(), pauli::z())},
      {&PauliCoefficients::b4, kron(pauli::x(), pauli::z())},
      {&PauliCoefficients::a3, kron(pauli::y(), pauli::z())},
      {&PauliCoefficients::a4, kron(pauli::z(), pauli::z())},
  }};
  return terms;
}

double wrap_phase(double phi) { return phi <= -kPi ? phi + kTwoPi : phi; }

bool feasible(const HamiltonianSchedule& h, const std::vector<double>& t_grid, double eta0, double margin) {
  try {
    solve_M(h, (eta0 * eta0 + 1.0) * Mat2::Identity(), t_grid, margin);
    return true;
  } catch (const DilationInfeasible&) {
    return false;
  }
}

}  // namespace

Vec2 ancilla_plus() { return Vec2(kSqrtHalf, Complex(0.0, kSqrtHalf)); }
Vec2 ancilla_minus() { return Vec2(Complex(0.0, kSqrtHalf), kSqrtHalf); }

std::vector<double> uniform_grid(double duration, std::size_t intervals) {
  if (intervals == 0 || !(duration > 0.0)) throw InvalidArgument("grid: need duration > 0 and intervals > 0");
  std::vector<double> t(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) t[i] = duration * static_cast<double>(i) / static_cast<double>(intervals);
  return t;
}

MSeries solve_M(const HamiltonianSchedule& h, const Mat2& m0, const std::vector<double>& t_grid, double margin) {
  if (t_grid.empty()) throw InvalidArgument("solve_M: empty time grid");
  if (relative_antihermitian(m0) > 1e-12) throw InvalidArgument("solve_M: M0 must be Hermitian");
  auto rhs = [&h](double t, const Mat2& m) -> Mat2 {
    const Mat2 ht = h(t);
    return -kI * (ht.adjoint() * m - m * ht);
  };

  MSeries out;
  out.M.reserve(t_grid.size());
  out.dM.reserve(t_grid.size());
  out.min_margin = std::numeric_limits<double>::infinity();
  Mat2 m = hermitian_part(m0);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (i > 0) {
      m = rk4_step(rhs, t_grid[i - 1], m, t_grid[i] - t_grid[i - 1]);
      out.max_hermiticity = std::max(out.max_hermiticity, relative_antihermitian(m));
      m = hermitian_part(m);
    }
    const double slack = min_eigenvalue(m - Mat2::Identity());
    out.min_margin = std::min(out.min_margin, slack);
    if (slack < margin) {
      std::ostringstream msg;
      msg << "dilation infeasible: increase eta0 (min eig(M - I) = " << slack << " < " << margin
          << " at t = " << t_grid[i] << ")";
      throw DilationInfeasible(msg.str(), t_grid[i]);
    }
    out.M.push_back(m);
    out.dM.push_back(rhs(t_grid[i], m));
  }
  return out;
}

Mat2 eta_from_metric(const Mat2& m) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(hermitian_part(m - Mat2::Identity()));
  const Eigen::Vector2d root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

Mat2 eta_derivative(const Mat2& eta, const Mat2& dm) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(hermitian_part(eta));
  const Mat2& u = es.eigenvectors();
  const Eigen::Vector2d e = es.eigenvalues();
  Mat2 x = u.adjoint() * dm * u;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double denom = e(i) + e(j);
      if (denom <= 0.0) throw NumericalError("eta derivative: eta must be positive definite");
      x(i, j) /= denom;
    }
  return u * x * u.adjoint();
}

Generators dilated_generators(const Mat2& h, const Mat2& eta, const Mat2& deta_dt) {
  const Mat2 m = eta.adjoint() * eta + Mat2::Identity();
  const Mat2 m_inv = m.inverse();
  Generators g;
  g.gamma = (h + (kI * deta_dt + eta * h) * eta) * m_inv;
  g.lambda = kI * (h * eta - eta * h - kI * deta_dt) * m_inv;
  const double scale = std::max(1.0, h.norm());
  const double residual = std::max((g.gamma - g.gamma.adjoint()).norm(), (g.lambda - g.lambda.adjoint()).norm()) / scale;
  if (residual > 1e-6) {
    std::ostringstream msg;
    msg << "dilated generators not Hermitian (residual " << residual << "): eta and M out of sync";
    throw NumericalError(msg.str());
  }
  g.gamma = hermitian_part(g.gamma);
  g.lambda = hermitian_part(g.lambda);
  return g;
}

Mat4 dilated_hamiltonian(const Generators& g) {
  return kron(g.gamma, pauli::identity()) + kron(g.lambda, pauli::z());
}

PauliCoefficients pauli_decompose(const Mat4& h) {
  PauliCoefficients c;
  for (const auto& term : pauli_terms()) c.*(term.field) = 0.25 * (term.basis * h).trace().real();
  const double residual = (h - pauli_compose(c)).norm();
  if (residual > 1e-8 * std::max(1.0, h.norm())) {
    std::ostringstream msg;
    msg << "pauli_decompose: component outside the {I,X,Y,Z}(x){I,Z} span (" << residual << ")";
    throw InvalidArgument(msg.str());
  }
  return c;
}

Mat4 pauli_compose(const PauliCoefficients& c) {
  Mat4 h = Mat4::Zero();
  for (const auto& term : pauli_terms()) h += c.*(term.field) * term.basis;
  return h;
}

PulseSchedule pulse_schedule(const std::vector<double>& t, const std::vector<PauliCoefficients>& coeffs,
                             double omega_tilde1, double omega_tilde2) {
  if (t.size() != coeffs.size()) throw InvalidArgument("pulse_schedule: grid and coefficient lengths differ");
  PulseSchedule p;
  p.t = t;
  p.omega_tilde1 = omega_tilde1;
  p.omega_tilde2 = omega_tilde2;
  const std::size_t n = t.size();
  for (auto* v : {&p.omega1, &p.omega2, &p.rabi1, &p.rabi2, &p.phi1, &p.phi2, &p.b1, &p.b3, &p.a2, &p.a4}) v->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = coeffs[i];
    const double x1 = c.a1 + c.b4, y1 = -c.b2 - c.a3;
    const double x2 = c.a1 - c.b4, y2 = c.a3 - c.b2;
    p.rabi1[i] = std::hypot(x1, y1) / kPi;
    p.rabi2[i] = std::hypot(x2, y2) / kPi;
    p.phi1[i] = p.rabi1[i] == 0.0 ? 0.0 : wrap_phase(std::atan2(y1, x1));
    p.phi2[i] = p.rabi2[i] == 0.0 ? 0.0 : wrap_phase(std::atan2(y2, x2));
    p.omega1[i] = omega_tilde1 + 2.0 * c.b3 + 2.0 * c.a4;
    p.omega2[i] = omega_tilde2 + 2.0 * c.b3 - 2.0 * c.a4;
    p.b1[i] = c.b1;
    p.b3[i] = c.b3;
    p.a2[i] = c.a2;
    p.a4[i] = c.a4;
  }
  return p;
}

Mat2 rf_rotation(double phi) {
  const Mat2 axis = std::cos(phi) * pauli::x() + std::sin(phi) * pauli::y();
  return kSqrtHalf * (Mat2::Identity() - kI * axis);
}

InitialState prepare_initial(double eta0, const Vec2& psi0) {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw InvalidArgument("prepare_initial: eta0 must be positive");
  if (psi0.norm() == 0.0) throw InvalidArgument("prepare_initial: zero system state");
  InitialState out;
  out.rf_phase = std::atan((eta0 * eta0 - 1.0) / (2.0 * eta0)) + kPi / 2.0;
  const Vec2 ancilla = (ancilla_minus() + eta0 * ancilla_plus()) / std::sqrt(1.0 + eta0 * eta0);
  const Vec2 sys = psi0 / psi0.norm();
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) out.state(2 * s + a) = sys(s) * ancilla(a);
  return out;
}

double choose_eta0(const HamiltonianSchedule& h, const std::vector<double>& t_grid, double margin) {
  if (!(margin > 0.0)) throw InvalidArgument("choose_eta0: margin must be positive");
  double lo = std::sqrt(margin) * (1.0 + 1e-12);
  if (feasible(h, t_grid, lo, margin)) return lo;
  double hi = lo;
  while (true) {
    lo = hi;
    hi *= 2.0;
    if (hi > kEtaCap) {
      if (feasible(h, t_grid, kEtaCap, margin)) {
        hi = kEtaCap;
        break;
      }
      std::ostringstream msg;
      msg << "dilation infeasible: no eta0 <= " << kEtaCap << " keeps min eig(M - I) >= " << margin;
      double when = t_grid.back();
      try {
        solve_M(h, (kEtaCap * kEtaCap + 1.0) * Mat2::Identity(), t_grid, margin);
      } catch (const DilationInfeasible& e) {
        when = e.violation_time;
      }
      throw DilationInfeasible(msg.str(), when);
    }
    if (feasible(h, t_grid, hi, margin)) break;
  }
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    (feasible(h, t_grid, mid, margin) ? hi : lo) = mid;
  }
  return hi;
}

DilationSchedule dilate(const HamiltonianSchedule& h, const std::vector<double>& t_grid, double eta0, double margin) {
  DilationSchedule d;
  d.t = t_grid;
  d.eta0 = eta0;
  d.margin = margin;
  MSeries series = solve_M(h, (eta0 * eta0 + 1.0) * Mat2::Identity(), t_grid, margin);
  d.min_margin = series.min_margin;
  d.max_hermiticity = series.max_hermiticity;
  const std::size_t n = t_grid.size();
  d.M = std::move(series.M);
  d.eta.resize(n);
  d.deta.resize(n);
  d.lambda.resize(n);
  d.gamma.resize(n);
  d.coeffs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Mat2 ht = h(t_grid[i]);
    d.eta[i] = eta_from_metric(d.M[i]);
    d.deta[i] = eta_derivative(d.eta[i], series.dM[i]);
    const Generators g = dilated_generators(ht, d.eta[i], d.deta[i]);
    d.lambda[i] = g.lambda;
    d.gamma[i] = g.gamma;
    const Mat4 hsa = dilated_hamiltonian(g);
    d.coeffs[i] = pauli_decompose(hsa);
    d.max_recomposition = std::max(d.max_recomposition, (hsa - pauli_compose(d.coeffs[i])).norm());
  }
  return d;
}

std::vector<Vec4> evolve_dilated(const DilationSchedule& schedule, const Vec4& initial) {
  const std::size_t n = schedule.t.size();
  if (n < 3 || (n - 1) % 2 != 0) throw InvalidArgument("evolve_dilated: need an even number of grid intervals");
  std::vector<Vec4> out{initial};
  Vec4 psi = initial;
  for (std::size_t i = 0; i + 2 < n; i += 2) {
    const double dt = schedule.t[i + 2] - schedule.t[i];
    const Mat4 h0 = dilated_at(schedule, i), h1 = dilated_at(schedule, i + 1), h2 = dilated_at(schedule, i + 2);
    const Vec4 k1 = -kI * (h0 * psi);
    const Vec4 k2 = -kI * (h1 * (psi + 0.5 * dt * k1));
    const Vec4 k3 = -kI * (h1 * (psi + 0.5 * dt * k2));
    const Vec4 k4 = -kI * (h2 * (psi + dt * k3));
    psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back(psi);
  }
  return out;
}

Vec2 project_minus(const Vec4& state) {
  const Vec2 minus = ancilla_minus();
  Vec2 out;
  for (int s = 0; s < 2; ++s) out(s) = std::conj(minus(0)) * state(2 * s) + std::conj(minus(1)) * state(2 * s + 1);
  return out;
}

Mat4 dilated_at(const DilationSchedule& schedule, std::size_t i) { return pauli_compose(schedule.coeffs.at(i)); }

CompiledDrive compile_drive(const Mat2& h, double duration, const CompileOptions& options) {
  const Eigen::Vector2cd spectrum = Eigen::ComplexEigenSolver<Mat2>(h, false).eigenvalues();
  CompiledDrive out;
  out.loss_shift = options.shift_fraction * std::max(spectrum(0).imag(), spectrum(1).imag());
  out.hamiltonian = h - kI * out.loss_shift * Mat2::Identity();
  const Mat2 generator = out.hamiltonian;
  const HamiltonianSchedule schedule = [generator](double) { return generator; };
  const std::vector<double> grid = uniform_grid(duration, options.intervals);
  const double eta0 = options.eta0 > 0.0 ? options.eta0 : choose_eta0(schedule, grid, options.margin);
  out.dilation = dilate(schedule, grid, eta0, options.margin);
  out.pulses = pulse_schedule(grid, out.dilation.coeffs, options.omega_tilde1, options.omega_tilde2);
  out.initial = prepare_initial(eta0, options.psi0);
  return out;
}

}  // namespace nhknot
