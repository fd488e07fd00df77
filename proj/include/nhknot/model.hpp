#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nhknot/types.hpp"

namespace nhknot {

// A "minus"/"plus" pair of complex couplings, e.g. (Gamma_1^{n-}, Gamma_1^{n+}).
struct CouplingPair {
  Complex minus{};
  Complex plus{};
};

// Coupling constants of the two-band lattice model with coupling range m = gamma1.size().
// gamma1[n-1] holds (Gamma_1^{n-}, Gamma_1^{n+}); gamma2[n-1] holds (Gamma_2^{n-}, Gamma_2^{n+}).
struct ModelParams {
  CouplingPair gamma0;
  std::vector<CouplingPair> gamma1;
  std::vector<CouplingPair> gamma2;

  int range() const { return static_cast<int>(gamma1.size()); }

  // Throws InvalidArgument on mismatched hopping lists or non-finite coefficients.
  void validate() const;

  ModelParams scaled(double factor) const;
};

std::span<const std::string_view> preset_names();

// Published coupling sets for "unlink", "unknot" and "hopf_link".
ModelParams preset_params(std::string_view tag);

// Maps k onto [0, 2pi).
double fold_momentum(double k);

// Off-diagonal Bloch matrix H^(m)(k); diagonal entries are zero.
Mat2 bloch_hamiltonian(const ModelParams& params, double k);

}  // namespace nhknot
