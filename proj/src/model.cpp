#include "nhknot/model.hpp"

#include <array>
#include <cmath>

#include "nhknot/errors.hpp"

namespace nhknot {
namespace {

constexpr std::array<std::string_view, 3> kPresetNames{"unlink", "unknot", "hopf_link"};

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

void ModelParams::validate() const {
  if (gamma1.size() != gamma2.size()) {
    throw InvalidArgument("model: gamma1 and gamma2 must list the same number of ranges (got " +
                          std::to_string(gamma1.size()) + " and " + std::to_string(gamma2.size()) +
                          ")");
  }
  auto check = [](const CouplingPair& p) {
    if (!finite(p.minus) || !finite(p.plus)) throw InvalidArgument("model: non-finite coupling");
  };
  check(gamma0);
  for (const auto& p : gamma1) check(p);
  for (const auto& p : gamma2) check(p);
}

ModelParams ModelParams::scaled(double factor) const {
  ModelParams out = *this;
  auto scale = [factor](CouplingPair& p) {
    p.minus *= factor;
    p.plus *= factor;
  };
  scale(out.gamma0);
  for (auto& p : out.gamma1) scale(p);
  for (auto& p : out.gamma2) scale(p);
  return out;
}

std::span<const std::string_view> preset_names() { return kPresetNames; }

ModelParams preset_params(std::string_view tag) {
  ModelParams p;
  if (tag == "unlink" || tag == "unknot") {
    p.gamma0 = tag == "unlink" ? CouplingPair{-0.45, 0.79} : CouplingPair{-0.21, 0.70};
    p.gamma1 = {{Complex(0.0, -0.30), 0.0}};
    p.gamma2 = {{Complex(0.0, 0.08), 0.0}};
    return p;
  }
  if (tag == "hopf_link") {
    p.gamma0 = {0.04, 0.49};
    p.gamma1 = {{Complex(0.0, -0.13), Complex(0.0, 0.02)}, {Complex(0.0, -0.58), Complex(0.0, 0.03)}};
    p.gamma2 = {{Complex(0.0, 0.02), Complex(0.0, -0.13)}, {Complex(0.0, 0.09), Complex(0.0, -0.21)}};
    return p;
  }
  std::string valid;
  for (auto name : kPresetNames) valid += (valid.empty() ? "" : ", ") + std::string(name);
  throw InvalidArgument("unknown preset '" + std::string(tag) + "' (valid: " + valid + ")");
}

double fold_momentum(double k) {
  double folded = std::fmod(k, kTwoPi);
  if (folded < 0.0) folded += kTwoPi;
  return folded;
}

Mat2 bloch_hamiltonian(const ModelParams& params, double k) {
  const double kf = fold_momentum(k);
  Complex upper = params.gamma0.minus;
  Complex lower = params.gamma0.plus;
  for (int n = 1; n <= params.range(); ++n) {
    const Complex forward = std::polar(1.0, n * kf);
    const Complex backward = std::conj(forward);
    const auto& g1 = params.gamma1[n - 1];
    const auto& g2 = params.gamma2[n - 1];
    upper += g1.minus * forward + g2.plus * backward;
    lower += g1.plus * backward + g2.minus * forward;
  }
  Mat2 h;
  h << 0.0, upper, lower, 0.0;
  return h;
}

}  // namespace nhknot
