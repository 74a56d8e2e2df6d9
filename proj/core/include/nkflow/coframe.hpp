#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nkflow/form.hpp"

namespace nkflow {

/// An ordered coframe e^0, ..., e^{dim-1} with the fixed-s part of the
/// exterior derivative stored directly: structure[k] is the 2-form d e^k.
///
/// Frames built from a Lie algebra have constant structure coefficients;
/// assembled six-dimensional frames additionally carry s-dependent jets and
/// ds-channel terms in the structure forms. The distinguished coordinate
/// one-form ds, when present, is identified by s_index.
struct Coframe {
  int dim = 0;
  std::vector<std::string> labels;
  std::vector<Form> structure;
  std::optional<int> s_index;

  Coframe() = default;
  Coframe(std::vector<std::string> lab, std::optional<int> s_idx = std::nullopt);

  int index_of(std::string_view label) const;  // throws domain_error if absent

  /// d e^k for basis index k.
  const Form& d_basis(int k) const { return structure[static_cast<size_t>(k)]; }
  void set_d_basis(int k, Form f);
};

/// True iff the structure-part d∘d of every basis one-form vanishes
/// (the Jacobi identity for a Lie coframe), to the given tolerance.
bool check_d_squared(const Coframe& frame, double tol = 1e-12);

/// Re-express a coframe under e'_i = sum_j M[i][j] e_j (M invertible).
/// Jacobi frames stay Jacobi; used by the property-test generators.
Coframe change_of_basis(const Coframe& frame, const JetMatrix& m);

}  // namespace nkflow
