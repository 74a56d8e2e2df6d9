#pragma once

#include <array>
#include <utility>

#include "nkflow/su3.hpp"

namespace nkflow {

/// Reduced data on the three-dimensional quotient at level s: the fiber Gram
/// matrix G = [g_UU g_UV; g_UV g_VV], the basic one-forms α₀, α₁, α₂, the
/// horizontal parts of the connection forms, and f = 4h²/(h²-s²).
struct ReducedData {
  double s = 0.0;
  JetMatrix G;                 // 2x2 symmetric jets
  std::array<Form, 3> alpha;   // grade-1 forms on frame3
  std::array<Form, 2> theta;   // horizontal drift of the connection forms
  Jet f;
  Coframe frame3;

  Jet h2() const;              // det G
  Jet gUU() const { return G.at(0, 0); }
  Jet gUV() const { return G.at(0, 1); }
  Jet gVV() const { return G.at(1, 1); }

  /// Throws domain_error when g_UU <= 0, h² <= 0, h² == s², or f <= 4.
  void validate() const;
};

/// Embed a form on the base coframe into a larger frame, shifting every
/// index by offset.
Form embed_form(const Form& f, int offset, int dim);

/// Connection one-forms dual to the torus generators:
/// ϑ₁ = h⁻²(g_VV U♭ - g_UV V♭), ϑ₂ = h⁻²(g_UU V♭ - g_UV U♭);
/// the pairing ϑ_i(generator_j) is the identity. Throws domain_error when
/// the orbit Gram determinant h² vanishes.
std::pair<Form, Form> dual_connection_forms(const TorusAction& a, const MetricTensor& g);

/// Basic one-forms at level s:
/// α₀ = V ⨼ U ⨼ ψ₋, α₁ = sϑ₁ + V ⨼ σ, α₂ = sϑ₂ - U ⨼ σ.
std::array<Form, 3> reduced_one_forms(const SU3Structure& s6, const TorusAction& a, Jet s);

/// Assemble (g, σ, ψ₊, ψ₋) on frame6 = (ds, ϑ₁, ϑ₂, base coframe) from
/// reduced data, with the level coordinate as multi-moment value. frame6
/// must carry the matching structure forms (see evolution::build_frame6).
SU3Structure assemble_six(const ReducedData& r, const Coframe& frame6);

struct LevelSetResiduals {
  double r1 = 0.0;
  double r2 = 0.0;
};

/// Residuals of the two level-set relations
///   s dϑ₁ = dα₁ - (3g_UV α₁ + 3g_VV α₂) ∧ α₀ / (h²-s²),
///   s dϑ₂ = dα₂ + (3g_UU α₁ + 3g_UV α₂) ∧ α₀ / (h²-s²),
/// with dϑ_k supplied by the caller (structure part on the bundle).
LevelSetResiduals check_level_set_relations(const ReducedData& r, const Form& dtheta1,
                                            const Form& dtheta2);

struct Q3Residuals {
  double r0 = 0.0;  // dα₀ - f α₁∧α₂
  double r1 = 0.0;  // dα₁∧α₀ + (df/f)∧α₁∧α₀
  double r2 = 0.0;  // dα₂∧α₀ + (df/f)∧α₂∧α₀
};

/// Residuals of the quotient relations; df is the spatial derivative of f
/// (zero for invariant data). Throws domain_error when f.val <= 4.
Q3Residuals check_q3_relations(Jet f, const std::array<Form, 3>& alpha, const Coframe& frame3);
Q3Residuals check_q3_relations(Jet f, const std::array<Form, 3>& alpha, const Coframe& frame3,
                               const Form& df);

/// β₀ = α₀, β_i = f α_i and the inverse. Throws domain_error when f.val == 0.
std::array<Form, 3> to_beta_frame(Jet f, const std::array<Form, 3>& alpha);
std::array<Form, 3> from_beta_frame(Jet f, const std::array<Form, 3>& beta);

}  // namespace nkflow
