#include "nkflow/heisenberg.hpp"

#include <algorithm>
#include <cmath>

#include "nkflow/errors.hpp"

namespace nkflow {

namespace {
constexpr double kDomainMargin = 1e-9;
}

HeisenbergParams HeisenbergParams::standard(double C, double s0) {
  HeisenbergParams p;
  p.C = C;
  p.s0 = s0;
  p.validate();
  const double h0 = C / s0;
  const double f = 4.0 * h0 * h0 / (h0 * h0 - s0 * s0);
  p.fs0 = 1.0 / f;
  return p;
}

void HeisenbergParams::validate() const {
  if (!(C > 0.0)) throw domain_error("heisenberg: C must be positive");
  check_level(s0);
  if (!(fs0 > 0.0)) throw domain_error("heisenberg: fs0 must be positive");
}

void HeisenbergParams::check_level(double s) const {
  if (!(s > 0.0)) throw domain_error("heisenberg: level s must be positive");
  if (s * s * s * s > C * C * (1.0 - kDomainMargin))
    throw domain_error("heisenberg: level s^4 too close to the pole C^2, s = " + std::to_string(s));
}

Coframe h3_coframe() {
  Coframe frame({"sigma0", "sigma1", "sigma2"});
  Form d0(3, 2);
  d0.set(mask_of({1, 2}), Jet{1.0});
  frame.set_d_basis(0, d0);
  return frame;
}

ClosedFormProfiles closed_form_profiles(const HeisenbergParams& p, double s) {
  p.validate();
  p.check_level(s);
  const Jet sj = Jet::coordinate(s);
  const double d0 = p.C * p.C - p.s0 * p.s0 * p.s0 * p.s0;
  const Jet s2 = sj * sj;
  const Jet ratio = (Jet{p.C * p.C} - s2 * s2) / Jet{d0};
  // d(ratio)/ds as a jet, so first-derivative jets carry exact second derivatives
  const Jet dratio{-4.0 * s * s * s / d0, -12.0 * s * s / d0};

  ClosedFormProfiles out;
  out.h = Jet{p.C} / sj;
  out.f0 = Jet{p.fs0} * pow(ratio, 1.0 / 3.0);
  out.f1 = Jet{p.fs0} * pow(ratio, 2.0 / 3.0);
  out.f2 = out.f1;
  out.df0 = Jet{p.fs0 / 3.0} * pow(ratio, -2.0 / 3.0) * dratio;
  out.df1 = Jet{2.0 * p.fs0 / 3.0} * pow(ratio, -1.0 / 3.0) * dratio;
  out.df2 = out.df1;
  return out;
}

Coframe heisenberg_frame6(const HeisenbergParams& p, double s) {
  const ClosedFormProfiles cf = closed_form_profiles(p, s);
  const Jet sj = Jet::coordinate(s);
  const Jet h2 = cf.h * cf.h;
  const Jet w = h2 - sj * sj;

  Coframe frame({"ds", "theta1", "theta2", "sigma0", "sigma1", "sigma2"}, 0);
  // base structure
  Form d_s0(6, 2);
  d_s0.set(mask_of({4, 5}), Jet{1.0});
  frame.set_d_basis(3, d_s0);

  const Form ds = Form::basis_monomial(6, Mask{1} << 0);
  const Form sg0 = Form::basis_monomial(6, Mask{1} << 3);
  const Form sg1 = Form::basis_monomial(6, Mask{1} << 4);
  const Form sg2 = Form::basis_monomial(6, Mask{1} << 5);
  const Form a0 = cf.f0 * sg0;
  const Form a1 = cf.f1 * sg1;
  const Form a2 = cf.f2 * sg2;

  const Jet k = Jet{3.0} * cf.h / (sj * w);
  // dϑ_k/ds = (1/s) dα_k/ds + α_k/(h²-s²), with exact-jet coefficients
  const Form th1dot = (cf.df1 / sj + cf.f1 / w) * sg1;
  const Form th2dot = (cf.df2 / sj + cf.f2 / w) * sg2;
  frame.set_d_basis(1, -k * wedge(a2, a0) + wedge(ds, th1dot));
  frame.set_d_basis(2, k * wedge(a1, a0) + wedge(ds, th2dot));
  return frame;
}

SU3Structure heisenberg_structure(const HeisenbergParams& p, double s) {
  const ClosedFormProfiles cf = closed_form_profiles(p, s);
  const Jet sj = Jet::coordinate(s);
  const double C = p.C;
  const double C2 = C * C;
  const double d0 = C2 - p.s0 * p.s0 * p.s0 * p.s0;  // C² - s₀⁴
  const Jet Ds = Jet{C2} - sj * sj * sj * sj;        // C² - s⁴
  const Jet ratio = Ds / Jet{d0};
  const Jet r13 = pow(ratio, 1.0 / 3.0);
  const Jet r23 = pow(ratio, 2.0 / 3.0);

  SU3Structure out;
  out.frame = heisenberg_frame6(p, s);

  const Form ds = Form::basis_monomial(6, Mask{1} << 0);
  const Form th1 = Form::basis_monomial(6, Mask{1} << 1);
  const Form th2 = Form::basis_monomial(6, Mask{1} << 2);
  const Form sg0 = Form::basis_monomial(6, Mask{1} << 3);
  const Form sg1 = Form::basis_monomial(6, Mask{1} << 4);
  const Form sg2 = Form::basis_monomial(6, Mask{1} << 5);

  // metric (diagonal in this family)
  MetricTensor g(6);
  g.at(0, 0) = sj * sj / (Jet{9.0} * Ds);
  g.at(1, 1) = g.at(2, 2) = Jet{C} / sj;
  const Jet base = sj * sj * Jet{d0 / (16.0 * C2 * C2)};
  g.at(3, 3) = base / r13;
  g.at(4, 4) = g.at(5, 5) = base * (Jet{C} / sj) * r13;
  out.g = std::move(g);

  out.sigma = (sj * sj / (Jet{12.0 * C2} * r23)) * wedge(ds, sg0);
  out.sigma += sj * wedge(th1, th2);
  out.sigma += (Jet{d0 / (4.0 * C2)} * r23) * (wedge(th2, sg1) - wedge(th1, sg2));
  out.sigma -= (sj * sj * sj * Jet{d0 / (16.0 * C2 * C2)} * r13) * wedge(sg1, sg2);

  out.psi_plus = Jet{1.0 / 3.0} * wedge(ds, wedge(th1, th2));
  out.psi_plus +=
      (sj * sj * sj / (Jet{12.0 * C2} * r13)) * wedge(ds, wedge(th1, sg2) - wedge(th2, sg1));
  out.psi_plus -= (Jet{d0 / (16.0 * C2 * C2)} * (sj * sj / Jet{3.0}) * r13)
                  * wedge(ds, wedge(sg1, sg2));
  out.psi_plus -= (Jet{d0 * C / (16.0 * C2 * C2)} * sj)
                  * wedge(wedge(th1, sg1) + wedge(th2, sg2), sg0);

  out.psi_minus = (sj / (Jet{12.0 * C} * r13)) * wedge(ds, wedge(th1, sg1) + wedge(th2, sg2));
  out.psi_minus += (Jet{d0 / (4.0 * C2)} * r13) * wedge(wedge(th1, th2), sg0);
  const Jet s2d0 = sj * sj * Jet{d0 / (16.0 * C2 * C2)};
  out.psi_minus += s2d0 * sj * wedge(wedge(th1, sg2) - wedge(th2, sg1), sg0);
  out.psi_minus -= s2d0 * (Jet{d0 / (4.0 * C2)} * r23) * wedge(wedge(sg1, sg2), sg0);
  return out;
}

ReducedData heisenberg_reduced_data(const HeisenbergParams& p, double s) {
  const ClosedFormProfiles cf = closed_form_profiles(p, s);
  ReducedData r;
  r.s = s;
  r.frame3 = h3_coframe();
  r.G = JetMatrix(2, 2);
  r.G.at(0, 0) = r.G.at(1, 1) = cf.h;
  r.G.at(0, 1) = r.G.at(1, 0) = Jet{0.0};
  Form a0(3, 1), a1(3, 1), a2(3, 1);
  a0.set(Mask{1} << 0, cf.f0);
  a1.set(Mask{1} << 1, cf.f1);
  a2.set(Mask{1} << 2, cf.f2);
  r.alpha = {a0, a1, a2};
  r.theta = {Form(3, 1), Form(3, 1)};
  const Jet sj = Jet::coordinate(s);
  const Jet h2 = cf.h * cf.h;
  r.f = Jet{4.0} * h2 / (h2 - sj * sj);
  return r;
}

EvolutionState heisenberg_initial_state(const HeisenbergParams& p) {
  p.validate();
  const ClosedFormProfiles cf = closed_form_profiles(p, p.s0);
  EvolutionState st;
  st.s = p.s0;
  st.frame3 = h3_coframe();
  st.G = JetMatrix(2, 2);
  st.G.at(0, 0) = st.G.at(1, 1) = cf.h;
  st.G.at(0, 1) = st.G.at(1, 0) = Jet{0.0};
  st.alpha = {{{cf.f0.val, 0.0, 0.0}, {0.0, cf.f1.val, 0.0}, {0.0, 0.0, cf.f2.val}}};
  return st;
}

TorusAction fiber_action() {
  return {Vector::basis(6, 1), Vector::basis(6, 2)};
}

NormalizedFrame normalize_h3_frame(const Form& beta0, const Form& beta1, const Form& beta2,
                                   const MetricTensor& g_tilde, double f) {
  if (f == 0.0) throw domain_error("normalize: f must be nonzero");
  const double scale = std::max({beta1.max_abs(), beta2.max_abs(), 1e-300});
  if (std::abs(beta1.coeff(Mask{1}).val) > 1e-12 * scale
      || std::abs(beta2.coeff(Mask{1}).val) > 1e-12 * scale)
    throw domain_error("normalize: beta1, beta2 must lie in span{tau1, tau2}");

  const Form b12 = wedge(beta1, beta2);
  const double c1 = b12.coeff(mask_of({1, 2})).val;
  if (c1 == 0.0) throw domain_error("normalize: beta1 ^ beta2 = 0, degenerate input");
  if (c1 < 0.0)
    throw domain_error("normalize: beta1 ^ beta2 negatively oriented against tau1 ^ tau2");

  const Jet ip11 = form_inner(beta1, beta1, g_tilde);
  const Jet ip12 = form_inner(beta1, beta2, g_tilde);
  const Form u1 = beta1;
  Form u2 = beta2;
  u2 -= (ip12 / ip11) * beta1;
  const Jet n1 = sqrt(form_inner(u1, u1, g_tilde));
  const Jet n2 = sqrt(form_inner(u2, u2, g_tilde));
  const Jet lambda = sqrt(n2 / n1);

  NormalizedFrame out;
  out.sigma0 = Jet{f} * beta0;
  out.sigma1 = lambda * u1;
  out.sigma2 = (Jet{1.0} / lambda) * u2;
  return out;
}

double CompareReport::channel(const std::string& name) const {
  for (const auto& c : channels)
    if (c.name == name) return c.max_rel_err;
  throw domain_error("no comparison channel named '" + name + "'");
}

double CompareReport::max_over_profiles() const {
  return std::max({channel("h"), channel("f0"), channel("f1"), channel("f2")});
}

namespace {

/// 5-point Gauss-Legendre quadrature on [a, b]; far more accurate than the
/// RK4 trajectories it serves as a reference for.
template <typename F>
double gauss5(F&& fn, double a, double b) {
  static const double xs[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                               0.5384693101056831, 0.9061798459386640};
  static const double ws[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                               0.4786286704993665, 0.2369268850561891};
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < 5; ++i) acc += ws[i] * fn(mid + half * xs[i]);
  return acc * half;
}

}  // namespace

CompareReport compare_ode_vs_closed(const HeisenbergParams& p, double s_end, int steps,
                                    IntegratorMethod method) {
  p.validate();
  const EvolutionState st0 = heisenberg_initial_state(p);
  const double ds = steps == 0 ? 0.0 : (s_end - p.s0) / steps;
  const Trajectory traj = integrate(st0, ds, steps, method);
  if (traj.aborted)
    throw domain_error("comparison aborted at s = " + std::to_string(traj.abort_s) + ": "
                       + traj.abort_reason);

  // closed-form drift rate of the connection forms: dϑ_k/ds = -5 f_k /(3(h²-s²))
  const auto drift_rate = [&](double u) {
    const ClosedFormProfiles cf = closed_form_profiles(p, u);
    const double w = cf.h.val * cf.h.val - u * u;
    return -5.0 * cf.f1.val / (3.0 * w);
  };

  double eh = 0.0, e0 = 0.0, e1 = 0.0, e2 = 0.0, eguv = 0.0, eoff = 0.0;
  double et1 = 0.0, et2 = 0.0, drift_scale = 0.0;
  double drift_ref = 0.0;
  double prev_s = p.s0;
  const auto rel = [](double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
  };
  for (const EvolutionState& st : traj.states) {
    const ClosedFormProfiles cf = closed_form_profiles(p, st.s);
    eh = std::max(eh, rel(st.gUU(), cf.h.val));
    eh = std::max(eh, rel(st.gVV(), cf.h.val));
    eguv = std::max(eguv, std::abs(st.gUV()));
    e0 = std::max(e0, rel(st.alpha[0][0], cf.f0.val));
    e1 = std::max(e1, rel(st.alpha[1][1], cf.f1.val));
    e2 = std::max(e2, rel(st.alpha[2][2], cf.f2.val));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j)
          eoff = std::max(eoff, std::abs(st.alpha[static_cast<size_t>(i)][static_cast<size_t>(j)]));
    if (st.s != prev_s) drift_ref += gauss5(drift_rate, prev_s, st.s);
    prev_s = st.s;
    drift_scale = std::max(drift_scale, std::abs(drift_ref));
    et1 = std::max(et1, std::abs(st.theta[0][1] - drift_ref));
    et2 = std::max(et2, std::abs(st.theta[1][2] - drift_ref));
    // off-axis drift components must stay zero
    et1 = std::max(et1, std::max(std::abs(st.theta[0][0]), std::abs(st.theta[0][2])));
    et2 = std::max(et2, std::max(std::abs(st.theta[1][0]), std::abs(st.theta[1][1])));
  }
  if (drift_scale > 0.0) {
    et1 /= drift_scale;
    et2 /= drift_scale;
  }

  CompareReport rep;
  rep.channels = {{"h", eh},   {"f0", e0},        {"f1", e1},
                  {"f2", e2},  {"g_UV", eguv},    {"alpha_offdiag", eoff},
                  {"theta1", et1}, {"theta2", et2}};
  return rep;
}

}  // namespace nkflow
