#pragma once

#include <array>
#include <string>
#include <vector>

#include "nkflow/evolution.hpp"

namespace nkflow {

/// Parameters of the invariant family on the three-dimensional Heisenberg
/// group: C = s₀ h(s₀), the initial level s₀, and the common initial value
/// fs0 of the three profile functions.
struct HeisenbergParams {
  double C = 2.0;
  double s0 = 1.0;
  double fs0 = 3.0 / 16.0;

  /// fs0 fixed by f(s₀) = 4h₀²/(h₀²-s₀²), fs0 = 1/f(s₀).
  static HeisenbergParams standard(double C, double s0);

  /// Requires C > 0, 0 < s₀, s₀² < C (strict, relative margin 1e-9).
  void validate() const;
  void check_level(double s) const;  // same domain test for an evaluation level
};

/// The Heisenberg coframe: dσ₀ = σ₁∧σ₂, dσ₁ = dσ₂ = 0.
Coframe h3_coframe();

/// Closed-form profiles as exact jets, plus the first-derivative jets
/// (whose dds channels carry the second derivatives, used by the frame
/// builder for exactly consistent structure coefficients).
struct ClosedFormProfiles {
  Jet h;
  Jet f0, f1, f2;
  Jet df0, df1, df2;
};

ClosedFormProfiles closed_form_profiles(const HeisenbergParams& p, double s);

/// The six-dimensional coframe above the Heisenberg base with exact-jet
/// structure forms: dϑ₁ = -3h/(s(h²-s²)) α₂∧α₀ + ds∧ϑ₁', etc.
Coframe heisenberg_frame6(const HeisenbergParams& p, double s);

/// The explicit six-dimensional structure, written directly from the
/// closed-form coefficient expressions (independent of assemble_six).
SU3Structure heisenberg_structure(const HeisenbergParams& p, double s);

/// Reduced data of the family at level s (jets exact).
ReducedData heisenberg_reduced_data(const HeisenbergParams& p, double s);

/// Flow state at s₀: G = h₀·Id, α rows = fs0·Id, zero drift.
EvolutionState heisenberg_initial_state(const HeisenbergParams& p);

/// The fiber generators (duals of ϑ₁, ϑ₂) on an assembled frame.
TorusAction fiber_action();

struct NormalizedFrame {
  Form sigma0, sigma1, sigma2;
};

/// Bring a dual frame (β₀, β₁, β₂) with dβ₀ = (1/f)β₁∧β₂, β₁, β₂ in the
/// span of τ₁, τ₂, into the model form: σ₀ = f β₀ and σ₁ ⟂ σ₂ with equal
/// g̃-norms and σ₁∧σ₂ = β₁∧β₂ (positive against τ₁∧τ₂). The rotational
/// gauge is fixed by Gram-Schmidt starting from β₁.
NormalizedFrame normalize_h3_frame(const Form& beta0, const Form& beta1, const Form& beta2,
                                   const MetricTensor& g_tilde, double f);

/// Per-channel maximum relative errors of the flow against the closed forms.
struct CompareReport {
  struct Channel {
    std::string name;
    double max_rel_err = 0.0;
  };
  std::vector<Channel> channels;
  double channel(const std::string& name) const;
  double max_over_profiles() const;  // max over h, f0, f1, f2
};

/// Integrate from the initial state to s_end and compare every emitted state
/// against the closed forms; connection drifts are compared against
/// Gauss-Legendre quadrature of the closed-form drift rate.
CompareReport compare_ode_vs_closed(const HeisenbergParams& p, double s_end, int steps,
                                    IntegratorMethod method = IntegratorMethod::rk4);

}  // namespace nkflow
