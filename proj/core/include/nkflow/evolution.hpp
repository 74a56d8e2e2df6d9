#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nkflow/reduction.hpp"

namespace nkflow {

/// State advanced by the level-parameter flow: the fiber Gram matrix, the
/// coefficient rows of α₀, α₁, α₂ in the fixed base coframe, and the
/// horizontal parts of the connection forms.
struct EvolutionState {
  double s = 0.0;
  JetMatrix G;                                   // 2x2 symmetric jets
  std::array<std::array<double, 3>, 3> alpha{};  // rows = α₀, α₁, α₂
  std::array<std::array<double, 3>, 2> theta{};  // horizontal parts of ϑ₁, ϑ₂
  Coframe frame3;

  double gUU() const { return G.at(0, 0).val; }
  double gUV() const { return G.at(0, 1).val; }
  double gVV() const { return G.at(1, 1).val; }
  double h2() const { return gUU() * gVV() - gUV() * gUV(); }

  /// Invariants: g_UU > 0, det G > 0, |h²-s²| >= pole_rel_tol·h², α rows
  /// invertible, all entries finite. Throws domain_error / singular_error.
  void validate(double pole_rel_tol = 1e-6) const;
};

/// Honest d/ds of the state entries (what a fixed-step integrator advances).
struct StateDerivative {
  std::array<std::array<double, 3>, 3> dAlpha{};
  std::array<std::array<double, 3>, 2> dTheta{};
  std::array<double, 3> dG{};  // g_UU', g_UV', g_VV'
  double dh2 = 0.0;
  double guv_mismatch = 0.0;   // |difference of the two g_UV' expressions|
};

/// Coefficients of a 2-form in the α_i ∧ α_j basis, increasing pairs.
struct WedgeCoeffs {
  double c01 = 0.0;
  double c02 = 0.0;
  double c12 = 0.0;
};

/// Spatial derivatives of the base 2-forms dα₁, dα₂ re-expressed in the
/// α∧α basis: (b_ij, c_ij). Throws singular_error when the α rows are
/// linearly dependent.
std::pair<WedgeCoeffs, WedgeCoeffs> expand_d3_alphas(const EvolutionState& st);

/// Spatial directional derivatives along the duals X_i of the α_i.
/// All zero for left-invariant data.
struct SpatialTerms {
  double X0_h2 = 0.0, X1_h2 = 0.0, X2_h2 = 0.0;
  double X0_gUU = 0.0, X0_gUV = 0.0, X0_gVV = 0.0;
};

/// Supplies the spatial (base-manifold) one-forms d g_UU, d g_UV, d g_VV,
/// d h² on the base coframe. The default returns zero, the left-invariant
/// case; tests inject synthetic nonzero forms through subclasses.
class DerivativeOracle {
 public:
  virtual ~DerivativeOracle() = default;
  virtual Form d_gUU(const EvolutionState& st) const { return Form(st.frame3.dim, 1); }
  virtual Form d_gUV(const EvolutionState& st) const { return Form(st.frame3.dim, 1); }
  virtual Form d_gVV(const EvolutionState& st) const { return Form(st.frame3.dim, 1); }
  virtual Form d_h2(const EvolutionState& st) const { return Form(st.frame3.dim, 1); }
};

const DerivativeOracle& zero_oracle();

/// Contract the oracle's one-forms with the α-duals of the state.
SpatialTerms spatial_terms(const EvolutionState& st, const DerivativeOracle& oracle);

/// The six flow coefficients a_ij of α₁' = Σ a_1i α_i, α₂' = Σ a_2j α_j
/// (primes in the ds-channel convention d_s γ = γ'∧ds) together with (h²)'.
struct EvolutionCoefficients {
  double a10 = 0.0, a11 = 0.0, a12 = 0.0;
  double a20 = 0.0, a21 = 0.0, a22 = 0.0;
  double dh2 = 0.0;
};

/// Pure formula evaluation; h² is taken as given so the reduction of the
/// general system to special cases can be tested directly.
/// Throws domain_error at the poles s = 0 and h² = s².
EvolutionCoefficients evolution_coefficients(double s, double h2, double gUU, double gUV,
                                             double gVV, const WedgeCoeffs& b,
                                             const WedgeCoeffs& c, const SpatialTerms& x = {});

struct MetricDerivatives {
  double dgUU = 0.0;
  double dgUV = 0.0;  // average of the two expressions
  double dgVV = 0.0;
  double mismatch = 0.0;
};

/// g' from the coefficient system. The two equivalent g_UV' expressions are
/// both evaluated; the advanced value is their average and the mismatch is
/// reported as a consistency diagnostic, never asserted.
MetricDerivatives metric_derivatives(double s, double h2, double gUU, double gUV, double gVV,
                                     const EvolutionCoefficients& a, const WedgeCoeffs& b,
                                     const WedgeCoeffs& c, const SpatialTerms& x = {});

/// Curvature two-forms of the connection on the base coframe:
/// Θ₁ = (1/s)(dα₁ - 3(g_UV α₁ + g_VV α₂)∧α₀/(h²-s²)), Θ₂ analogous with
/// opposite sign and (g_UU α₁ + g_UV α₂). Coefficients carry first-order
/// jets derived from the flow.
std::pair<Form, Form> curvature_forms(const EvolutionState& st,
                                      const DerivativeOracle& oracle = zero_oracle());

/// Residual three-forms of the two closure conditions on Θ₁, Θ₂; zero
/// exactly when the connection exists (e.g. for all invariant data).
std::pair<double, double> check_closure(const EvolutionState& st,
                                        const DerivativeOracle& oracle = zero_oracle());

/// Full right-hand side: honest d/ds rows assembled from the coefficient
/// system, ϑ_k' relations and metric derivatives.
StateDerivative evolution_rhs(const EvolutionState& st,
                              const DerivativeOracle& oracle = zero_oracle());

enum class IntegratorMethod { euler, rk4 };

struct Trajectory {
  std::vector<EvolutionState> states;
  bool aborted = false;
  std::string abort_reason;
  double abort_s = 0.0;
};

/// Fixed-step integration of evolution_rhs. Every emitted state revalidates
/// the invariants; pole proximity (|h²-s²| < 1e-6·h²) or non-finite values
/// abort the run, leaving the partial trajectory and the offending s.
Trajectory integrate(const EvolutionState& st0, double ds, int steps, IntegratorMethod method,
                     const DerivativeOracle& oracle = zero_oracle());

/// Reduced data at the state's level with jet channels filled from the flow.
ReducedData to_reduced_data(const EvolutionState& st,
                            const DerivativeOracle& oracle = zero_oracle());

/// The six-dimensional coframe (ds, ϑ₁, ϑ₂, base) above a state, with
/// dϑ_k = Θ_k + ds ∧ (dϑ_k/ds) and the base structure embedded.
Coframe build_frame6(const EvolutionState& st, const DerivativeOracle& oracle = zero_oracle());

/// Convenience: assemble the full six-dimensional structure above a state.
SU3Structure assemble_state_structure(const EvolutionState& st,
                                      const DerivativeOracle& oracle = zero_oracle());

/// Model input for a flow run (the evolve/verify CLI surface).
struct ModelFile {
  Coframe frame3;
  std::array<std::array<double, 3>, 3> alpha{};
  double gUU = 0.0, gUV = 0.0, gVV = 0.0;
  std::optional<double> f;
  std::optional<double> s0;
  bool periods_integral = false;

  /// s₀ is taken directly when given, or computed from f via s₀ = (1-4/f)^{1/2} h
  /// (rejecting f <= 4); one of the two must be present.
  EvolutionState initial_state() const;
};

}  // namespace nkflow
