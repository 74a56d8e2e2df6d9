#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nkflow/coframe.hpp"
#include "nkflow/form.hpp"

namespace nkflow {

/// The quadruple (g, σ, ψ₊, ψ₋) on a six-dimensional coframe.
/// The almost complex structure J is derived from (g, σ) on demand rather
/// than stored, so the compatibility checks can catch inconsistencies.
struct SU3Structure {
  Coframe frame;
  MetricTensor g;
  Form sigma;
  Form psi_plus;
  Form psi_minus;
};

/// The two commuting generators of the torus action, in the dual frame.
struct TorusAction {
  Vector U;
  Vector V;
};

struct ResidualEntry {
  std::string check;
  double residual = 0.0;
  double s = 0.0;
};

struct CompatibilityReport {
  std::vector<ResidualEntry> entries;
  double max_residual() const;
};

/// The model structure on an orthonormal frame ordered
/// (f1, Jf1, f2, Jf2, f3, Jf3): identity metric, σ = Σ f_k ∧ Jf_k and the
/// standard real and imaginary volume forms.
SU3Structure standard_su3(const Coframe& frame);

/// J with σ(X, Y) = g(JX, Y); as a matrix, J = -g⁻¹ σ.
JetMatrix complex_structure(const MetricTensor& g, const Form& sigma);

/// Residuals of the five structure invariants:
/// σ∧ψ₊, σ∧ψ₋, ψ₊∧ψ₋ - (2/3)σ³, J² + Id, ψ₊(J·,·,·) + ψ₋.
CompatibilityReport su3_compatibility(const SU3Structure& s);

/// Nearly Kähler residuals: (max|dσ - 3ψ₊|, max|dψ₋ + 2σ∧σ|).
std::pair<double, double> nk_residual(const SU3Structure& s);

/// Multi-moment map value σ(U, V) as a jet.
Jet multi_moment(const SU3Structure& s, const TorusAction& a);

/// max-abs coefficient of d(σ(U,V)) - 3 V ⨼ U ⨼ ψ₊.
double check_moment_gradient(const SU3Structure& s, const TorusAction& a);

/// -⋆d⋆d applied to the flow coordinate (jet (·,1)); the positive Laplacian.
Jet laplacian_of_s(const SU3Structure& s);

/// Residual of V ⨼ U ⨼ (σ∧σ) = 2(ν σ - (U ⨼ σ) ∧ (V ⨼ σ)).
double check_useful_formula(const SU3Structure& s, const TorusAction& a);

/// Orientation convention: vol = (1/6) σ∧σ∧σ.
Form volume_form(const SU3Structure& s);

}  // namespace nkflow
