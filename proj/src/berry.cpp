#include "nhknot/berry.hpp"

#include <cmath>
#include <sstream>

#include "nhknot/errors.hpp"

namespace nhknot {
namespace {

constexpr double kOverlapFloor = 1e-8;

// Smooth gauge away from exceptional points: first component real and non-negative.
Vec2 first_component_gauge(const Vec2& v) {
  const double mag = std::abs(v(0));
  if (mag == 0.0) return v / v.norm();
  return v * (std::conj(v(0)) / mag) / v.norm();
}

double accumulate(const std::array<std::vector<Vec2>, 2>& states, std::array<int, 2> permutation,
                  std::size_t stride, std::vector<double>* terms) {
  const std::size_t n_points = states[0].size();
  std::vector<std::array<Vec2, 2>> psi, chi;
  for (std::size_t i = 0; i < n_points; i += stride) {
    std::array<Vec2, 2> p{first_component_gauge(states[0][i]), first_component_gauge(states[1][i])};
    chi.push_back(dual_basis(p[0], p[1]));
    psi.push_back(p);
  }
  const std::size_t m = psi.size();
  double q = 0.0;
  for (int n = 0; n < 2; ++n) {
    for (std::size_t i = 0; i < m; ++i) {
      const bool seam = i + 1 == m;
      const Vec2& left = seam ? chi[0][permutation[n]] : chi[i + 1][n];
      const Complex overlap = left.dot(psi[i][n]);
      if (std::abs(overlap) < kOverlapFloor) {
        std::ostringstream msg;
        msg << "grid too coarse: biorthogonal overlap " << std::abs(overlap) << " on link " << i
            << " of band " << n + 1;
        throw GridTooCoarse(msg.str());
      }
      const double term = std::arg(overlap);
      if (terms) terms->push_back(term);
      q += term;
    }
  }
  return q;
}

}  // namespace

std::array<Vec2, 2> dual_basis(const Vec2& psi1, const Vec2& psi2) {
  auto orthogonal = [](const Vec2& v) { return Vec2(-std::conj(v(1)), std::conj(v(0))); };
  const Vec2 o1 = orthogonal(psi2);
  const Vec2 o2 = orthogonal(psi1);
  const Complex d1 = o1.dot(psi1);
  const Complex d2 = o2.dot(psi2);
  const double scale = psi1.norm() * psi2.norm();
  if (std::abs(d1) <= 1e-12 * scale) {
    throw ExceptionalPoint("dual basis: right eigenvectors are linearly dependent");
  }
  return {o1 / std::conj(d1), o2 / std::conj(d2)};
}

std::array<BiorthogonalPair, 2> biorthogonal_pairs(const Mat2& h) {
  const Eigensystem2 es = eigensolve2(h);
  if (es.exceptional) throw ExceptionalPoint("biorthogonal pairs: defective Hamiltonian");
  const auto chi = dual_basis(es.vectors[0], es.vectors[1]);
  return {BiorthogonalPair{es.vectors[0], chi[0], es.values[0]},
          BiorthogonalPair{es.vectors[1], chi[1], es.values[1]}};
}

BerryResult global_berry_phase(const std::array<std::vector<Vec2>, 2>& states, std::array<int, 2> permutation) {
  const std::size_t n = states[0].size();
  if (n < 2 || states[1].size() != n) throw InvalidArgument("berry: need two equal state lists of length >= 2");
  if (permutation[0] == permutation[1]) throw InvalidArgument("berry: permutation must be a bijection");

  BerryResult out;
  out.grid = n;
  out.q_raw = accumulate(states, permutation, 1, &out.terms);
  out.q_mod_2pi = std::fmod(out.q_raw, kTwoPi);
  if (out.q_mod_2pi < 0.0) out.q_mod_2pi += kTwoPi;
  if (out.q_mod_2pi >= kTwoPi) out.q_mod_2pi = 0.0;
  out.parity = permutation[0] == 0 ? 1 : -1;
  if (n % 2 == 0 && n >= 4) out.discretization_error = std::abs(out.q_raw - accumulate(states, permutation, 2, nullptr));
  return out;
}

BerryResult global_berry_phase(const BandStructure& structure) {
  return global_berry_phase(structure.vectors, structure.permutation);
}

int parity_check(const BandStructure& structure) { return structure.exchanged() ? -1 : 1; }

std::array<std::vector<BlochVector>, 2> eigenstate_projections(const BandStructure& structure) {
  std::array<std::vector<BlochVector>, 2> out;
  for (int n = 0; n < 2; ++n) {
    out[n].reserve(structure.size());
    for (const auto& v : structure.vectors[n]) out[n].push_back(bloch_vector(v));
  }
  return out;
}

}  // namespace nhknot
