#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace nhknot {

using Complex = std::complex<double>;
using Vec2 = Eigen::Vector2cd;
using Mat2 = Eigen::Matrix2cd;
using Vec4 = Eigen::Vector4cd;
using Mat4 = Eigen::Matrix4cd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

namespace pauli {
inline Mat2 identity() { return Mat2::Identity(); }
inline Mat2 x() {
  Mat2 m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
inline Mat2 y() {
  Mat2 m;
  m << 0.0, -kI, kI, 0.0;
  return m;
}
inline Mat2 z() {
  Mat2 m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
}  // namespace pauli

// Two-spin product ordering used everywhere: index = 2 * system + ancilla.
inline Mat4 kron(const Mat2& system, const Mat2& ancilla) {
  Mat4 out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      out.block<2, 2>(2 * a, 2 * b) = system(a, b) * ancilla;
  return out;
}

// Bloch-vector components <sigma_x>, <sigma_y>, <sigma_z> of a normalized 2-vector.
struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline BlochVector bloch_vector(const Vec2& psi) {
  const double norm2 = psi.squaredNorm();
  const Complex cross = std::conj(psi(0)) * psi(1);
  return {2.0 * cross.real() / norm2, 2.0 * cross.imag() / norm2,
          (std::norm(psi(0)) - std::norm(psi(1))) / norm2};
}

inline BlochVector bloch_vector(const Mat2& rho) {
  const double tr = rho.trace().real();
  return {2.0 * rho(1, 0).real() / tr, 2.0 * rho(1, 0).imag() / tr,
          (rho(0, 0).real() - rho(1, 1).real()) / tr};
}

}  // namespace nhknot
