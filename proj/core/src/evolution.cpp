#include "nkflow/evolution.hpp"

#include <cmath>

#include "nkflow/errors.hpp"

namespace nkflow {

namespace {

Form row_to_form(const std::array<double, 3>& row, int dim) {
  Form f(dim, 1);
  for (int j = 0; j < 3; ++j)
    if (row[static_cast<size_t>(j)] != 0.0) f.set(Mask{1} << j, Jet{row[static_cast<size_t>(j)]});
  return f;
}

Form row_form(const std::array<double, 3>& row, const std::array<double, 3>& deriv, int dim) {
  Form f(dim, 1);
  for (int j = 0; j < 3; ++j)
    if (row[static_cast<size_t>(j)] != 0.0 || deriv[static_cast<size_t>(j)] != 0.0)
      f.set(Mask{1} << j, Jet{row[static_cast<size_t>(j)], deriv[static_cast<size_t>(j)]});
  return f;
}

}  // namespace

void EvolutionState::validate(double pole_rel_tol) const {
  if (!std::isfinite(s)) throw domain_error("state: s is not finite");
  if (gUU() <= 0.0) throw domain_error("state: g_UU must be positive");
  const double det = h2();
  if (!(det > 0.0)) throw domain_error("state: det G must be positive");
  if (std::abs(det - s * s) < pole_rel_tol * det)
    throw domain_error("state: pole proximity |h^2 - s^2| < tol * h^2 at s = " + std::to_string(s));
  for (const auto& row : alpha)
    for (double v : row)
      if (!std::isfinite(v)) throw domain_error("state: non-finite alpha coefficient");
  for (const auto& row : theta)
    for (double v : row)
      if (!std::isfinite(v)) throw domain_error("state: non-finite theta coefficient");
  JetMatrix a(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      a.at(i, j) = Jet{alpha[static_cast<size_t>(i)][static_cast<size_t>(j)]};
  if (std::abs(a.det().val) < 1e-14)
    throw singular_error("state: alpha coefficient rows are not a coframe");
}

const DerivativeOracle& zero_oracle() {
  static const DerivativeOracle o;
  return o;
}

std::pair<WedgeCoeffs, WedgeCoeffs> expand_d3_alphas(const EvolutionState& st) {
  const int n = st.frame3.dim;
  JetMatrix a(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      a.at(i, j) = Jet{st.alpha[static_cast<size_t>(i)][static_cast<size_t>(j)]};
  // map from the alpha-pair basis to the frame-pair basis: column (i<j) holds
  // the 2x2 minors of rows i, j
  static constexpr int pair_i[3] = {0, 0, 1};
  static constexpr int pair_j[3] = {1, 2, 2};
  JetMatrix m(3, 3);
  for (int col = 0; col < 3; ++col) {
    const int i = pair_i[col], j = pair_j[col];
    for (int row = 0; row < 3; ++row) {
      const int p = pair_i[row], q = pair_j[row];
      m.at(row, col) = a.at(i, p) * a.at(j, q) - a.at(i, q) * a.at(j, p);
    }
  }
  JetMatrix minv;
  try {
    minv = m.inverse();
  } catch (const singular_error&) {
    throw singular_error("expand_d3_alphas: alpha rows do not span");
  }

  const auto solve = [&](const Form& d3) {
    Jet rhs[3];
    for (int row = 0; row < 3; ++row)
      rhs[row] = d3.coeff((Mask{1} << pair_i[row]) | (Mask{1} << pair_j[row]));
    WedgeCoeffs out;
    double* dst[3] = {&out.c01, &out.c02, &out.c12};
    for (int col = 0; col < 3; ++col) {
      Jet v{};
      for (int row = 0; row < 3; ++row) v += minv.at(col, row) * rhs[row];
      *dst[col] = v.val;
    }
    return out;
  };

  const Form a1 = row_to_form(st.alpha[1], n);
  const Form a2 = row_to_form(st.alpha[2], n);
  return {solve(ext_d_structure(a1, st.frame3)), solve(ext_d_structure(a2, st.frame3))};
}

SpatialTerms spatial_terms(const EvolutionState& st, const DerivativeOracle& oracle) {
  JetMatrix a(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      a.at(i, j) = Jet{st.alpha[static_cast<size_t>(i)][static_cast<size_t>(j)]};
  const JetMatrix ainv = a.inverse();
  const auto along = [&](const Form& df, int i) {
    Jet v{};
    for (int k = 0; k < 3; ++k) v += df.coeff(Mask{1} << k) * ainv.at(k, i);
    return v.val;
  };
  SpatialTerms x;
  const Form dh2 = oracle.d_h2(st);
  x.X0_h2 = along(dh2, 0);
  x.X1_h2 = along(dh2, 1);
  x.X2_h2 = along(dh2, 2);
  x.X0_gUU = along(oracle.d_gUU(st), 0);
  x.X0_gUV = along(oracle.d_gUV(st), 0);
  x.X0_gVV = along(oracle.d_gVV(st), 0);
  return x;
}

EvolutionCoefficients evolution_coefficients(double s, double h2, double gUU, double gUV,
                                             double gVV, const WedgeCoeffs& b,
                                             const WedgeCoeffs& c, const SpatialTerms& x) {
  if (s == 0.0) throw domain_error("evolution coefficients: s = 0 pole");
  const double w = h2 - s * s;
  if (w == 0.0) throw domain_error("evolution coefficients: h^2 = s^2 pole");

  EvolutionCoefficients out;
  out.a10 = s / (3.0 * h2 * w) * x.X2_h2;
  out.a20 = -s / (3.0 * h2 * w) * x.X1_h2;
  out.a21 = gUU * s / (3.0 * h2 * w) * x.X0_h2 - s / (3.0 * h2) * (x.X0_gUU + gUU * b.c01 + gUV * c.c01);
  out.a12 = -gVV * s / (3.0 * h2 * w) * x.X0_h2 + s / (3.0 * h2) * (x.X0_gVV + gUV * b.c02 + gVV * c.c02);
  out.dh2 = -2.0 * h2 / s + w / (3.0 * s) * ((b.c01 - c.c02) * gUV + c.c01 * gVV - b.c02 * gUU);
  out.a11 = 8.0 * s / (3.0 * w) + s / (3.0 * h2) * (x.X0_gUV + b.c02 * gUU + c.c02 * gUV)
            - s * gUV / (3.0 * h2 * w) * x.X0_h2;
  out.a22 = 8.0 * s / (3.0 * w) - s / (3.0 * h2) * (x.X0_gUV + b.c01 * gUV + c.c01 * gVV)
            + s * gUV / (3.0 * h2 * w) * x.X0_h2;
  return out;
}

MetricDerivatives metric_derivatives(double s, double h2, double gUU, double gUV, double gVV,
                                     const EvolutionCoefficients& a, const WedgeCoeffs& b,
                                     const WedgeCoeffs& c, const SpatialTerms& x) {
  if (s == 0.0) throw domain_error("metric derivatives: s = 0 pole");
  const double w = h2 - s * s;
  if (w == 0.0) throw domain_error("metric derivatives: h^2 = s^2 pole");

  const auto common = [&](double aii) { return a.dh2 / w + 1.0 / s + aii - 2.0 * s / (3.0 * w); };
  MetricDerivatives out;
  out.dgUU = gUU * common(a.a11) - h2 / (3.0 * s) * c.c01 + gUV * a.a21;
  const double guv1 = gUV * common(a.a22) - h2 / (3.0 * s) * c.c02 + gUU * a.a12
                      + s * x.X0_h2 / (3.0 * w);
  const double guv2 = gUV * common(a.a11) + h2 / (3.0 * s) * b.c01 + gVV * a.a21
                      - s * x.X0_h2 / (3.0 * w);
  out.dgUV = 0.5 * (guv1 + guv2);
  out.mismatch = std::abs(guv1 - guv2);
  out.dgVV = gVV * common(a.a22) + h2 / (3.0 * s) * b.c02 + gUV * a.a12;
  return out;
}

StateDerivative evolution_rhs(const EvolutionState& st, const DerivativeOracle& oracle) {
  const double s = st.s;
  const double h2 = st.h2();
  if (s == 0.0) throw domain_error("evolution rhs: s = 0 pole");
  const double w = h2 - s * s;
  if (w == 0.0) throw domain_error("evolution rhs: h^2 = s^2 pole");

  const auto [b, c] = expand_d3_alphas(st);
  const SpatialTerms x = spatial_terms(st, oracle);
  const EvolutionCoefficients a =
      evolution_coefficients(s, h2, st.gUU(), st.gUV(), st.gVV(), b, c, x);
  const MetricDerivatives md = metric_derivatives(s, h2, st.gUU(), st.gUV(), st.gVV(), a, b, c, x);

  StateDerivative d;
  // The coefficient system gives the ds-channel components γ' (d_s γ = γ'∧ds);
  // for one-forms that component is minus the coefficient derivative d/ds,
  // which is what the integrator advances.
  const double rowmul0 = -4.0 * s / (3.0 * w);
  for (int j = 0; j < 3; ++j) {
    d.dAlpha[0][static_cast<size_t>(j)] = rowmul0 * st.alpha[0][static_cast<size_t>(j)];
    d.dAlpha[1][static_cast<size_t>(j)] =
        -(a.a10 * st.alpha[0][static_cast<size_t>(j)] + a.a11 * st.alpha[1][static_cast<size_t>(j)]
          + a.a12 * st.alpha[2][static_cast<size_t>(j)]);
    d.dAlpha[2][static_cast<size_t>(j)] =
        -(a.a20 * st.alpha[0][static_cast<size_t>(j)] + a.a21 * st.alpha[1][static_cast<size_t>(j)]
          + a.a22 * st.alpha[2][static_cast<size_t>(j)]);
    // dϑ_k/ds = (1/s) dα_k/ds + α_k/(h²-s²)
    d.dTheta[0][static_cast<size_t>(j)] =
        d.dAlpha[1][static_cast<size_t>(j)] / s + st.alpha[1][static_cast<size_t>(j)] / w;
    d.dTheta[1][static_cast<size_t>(j)] =
        d.dAlpha[2][static_cast<size_t>(j)] / s + st.alpha[2][static_cast<size_t>(j)] / w;
  }
  d.dG = {md.dgUU, md.dgUV, md.dgVV};
  d.dh2 = a.dh2;
  d.guv_mismatch = md.mismatch;
  return d;
}

std::pair<Form, Form> curvature_forms(const EvolutionState& st, const DerivativeOracle& oracle) {
  const double s = st.s;
  if (s == 0.0) throw domain_error("curvature forms: s = 0 pole");
  const double h2v = st.h2();
  if (h2v == s * s) throw domain_error("curvature forms: h^2 = s^2 pole");
  if (h2v <= 0.0 || st.gUU() <= 0.0) throw domain_error("curvature forms: G not positive definite");

  const StateDerivative rhs = evolution_rhs(st, oracle);
  const int n = st.frame3.dim;
  const Form a0 = row_form(st.alpha[0], rhs.dAlpha[0], n);
  const Form a1 = row_form(st.alpha[1], rhs.dAlpha[1], n);
  const Form a2 = row_form(st.alpha[2], rhs.dAlpha[2], n);

  const Jet sj = Jet::coordinate(s);
  const JetMatrix gj = st.G;
  Jet guu = gj.at(0, 0), guv = gj.at(0, 1), gvv = gj.at(1, 1);
  // ensure the Gram jets carry the flow derivative
  guu.dds = rhs.dG[0];
  guv.dds = rhs.dG[1];
  gvv.dds = rhs.dG[2];
  const Jet h2 = guu * gvv - guv * guv;
  const Jet w = h2 - sj * sj;
  const Jet k = Jet{3.0} / w;

  Form t1 = ext_d_structure(a1, st.frame3);
  t1 -= k * wedge(guv * a1 + gvv * a2, a0);
  t1 *= Jet{1.0} / sj;

  Form t2 = ext_d_structure(a2, st.frame3);
  t2 += k * wedge(guu * a1 + guv * a2, a0);
  t2 *= Jet{1.0} / sj;
  return {std::move(t1), std::move(t2)};
}

std::pair<double, double> check_closure(const EvolutionState& st, const DerivativeOracle& oracle) {
  const int n = st.frame3.dim;
  const double h2v = st.h2();
  const Form a0 = row_to_form(st.alpha[0], n);
  const Form a1 = row_to_form(st.alpha[1], n);
  const Form a2 = row_to_form(st.alpha[2], n);
  const Form dh2 = oracle.d_h2(st);
  const Form dguu = oracle.d_gUU(st);
  const Form dguv = oracle.d_gUV(st);
  const Form dgvv = oracle.d_gVV(st);

  const Form w10 = wedge(a1, a0);
  const Form w20 = wedge(a2, a0);

  Form r1 = wedge(Jet{st.gUV() / h2v} * dh2 - dguv, w10);
  r1 += wedge(Jet{st.gVV() / h2v} * dh2 - dgvv, w20);

  Form r2 = wedge(Jet{st.gUU() / h2v} * dh2 - dguu, w10);
  r2 += wedge(Jet{st.gUV() / h2v} * dh2 - dguv, w20);
  return {r1.max_abs(), r2.max_abs()};
}

namespace {

constexpr int kStateSize = 18;

void flatten(const EvolutionState& st, double* y) {
  y[0] = st.gUU();
  y[1] = st.gUV();
  y[2] = st.gVV();
  int k = 3;
  for (const auto& row : st.alpha)
    for (double v : row) y[k++] = v;
  for (const auto& row : st.theta)
    for (double v : row) y[k++] = v;
}

void unflatten(const double* y, EvolutionState& st) {
  st.G = JetMatrix(2, 2);
  st.G.at(0, 0) = Jet{y[0]};
  st.G.at(0, 1) = st.G.at(1, 0) = Jet{y[1]};
  st.G.at(1, 1) = Jet{y[2]};
  int k = 3;
  for (auto& row : st.alpha)
    for (double& v : row) v = y[k++];
  for (auto& row : st.theta)
    for (double& v : row) v = y[k++];
}

void derivative(const EvolutionState& tmpl, double s, const double* y, double* dy,
                const DerivativeOracle& oracle) {
  EvolutionState st = tmpl;
  st.s = s;
  unflatten(y, st);
  const StateDerivative d = evolution_rhs(st, oracle);
  dy[0] = d.dG[0];
  dy[1] = d.dG[1];
  dy[2] = d.dG[2];
  int k = 3;
  for (const auto& row : d.dAlpha)
    for (double v : row) dy[k++] = v;
  for (const auto& row : d.dTheta)
    for (double v : row) dy[k++] = v;
}

/// Store the current flow derivatives in the state's jet channels.
void attach_derivatives(EvolutionState& st, const DerivativeOracle& oracle) {
  const StateDerivative d = evolution_rhs(st, oracle);
  st.G.at(0, 0).dds = d.dG[0];
  st.G.at(0, 1).dds = st.G.at(1, 0).dds = d.dG[1];
  st.G.at(1, 1).dds = d.dG[2];
}

}  // namespace

Trajectory integrate(const EvolutionState& st0, double ds, int steps, IntegratorMethod method,
                     const DerivativeOracle& oracle) {
  if (steps < 0) throw domain_error("integrate: negative step count");
  Trajectory traj;
  EvolutionState st = st0;
  st.validate();
  attach_derivatives(st, oracle);
  traj.states.push_back(st);

  double y[kStateSize], k1[kStateSize], k2[kStateSize], k3[kStateSize], k4[kStateSize],
      tmp[kStateSize];
  for (int n = 0; n < steps; ++n) {
    flatten(st, y);
    const double s = st.s;
    const double w_now = st.h2() - s * s;
    try {
      derivative(st, s, y, k1, oracle);
      // project h^2 - s^2 one step ahead: the path must not reach or cross
      // the singular level, nor cross s = 0
      const double w_rate =
          k1[0] * st.gVV() + st.gUU() * k1[2] - 2.0 * st.gUV() * k1[1] - 2.0 * s;
      const double w_next = w_now + ds * w_rate;
      if (w_next * w_now <= 0.0 || std::abs(w_next) < 1e-6 * st.h2())
        throw domain_error("integrate: pole guard |h^2 - s^2| at s = " + std::to_string(s));
      if ((s + ds) * s <= 0.0)
        throw domain_error("integrate: path crosses s = 0 at s = " + std::to_string(s));

      if (method == IntegratorMethod::euler) {
        for (int i = 0; i < kStateSize; ++i) y[i] += ds * k1[i];
      } else {
        for (int i = 0; i < kStateSize; ++i) tmp[i] = y[i] + 0.5 * ds * k1[i];
        derivative(st, s + 0.5 * ds, tmp, k2, oracle);
        for (int i = 0; i < kStateSize; ++i) tmp[i] = y[i] + 0.5 * ds * k2[i];
        derivative(st, s + 0.5 * ds, tmp, k3, oracle);
        for (int i = 0; i < kStateSize; ++i) tmp[i] = y[i] + ds * k3[i];
        derivative(st, s + ds, tmp, k4, oracle);
        for (int i = 0; i < kStateSize; ++i)
          y[i] += ds / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
      st.s = s + ds;
      unflatten(y, st);
      for (int i = 0; i < kStateSize; ++i)
        if (!std::isfinite(y[i])) throw domain_error("integrate: non-finite state");
      st.validate();
      if ((st.h2() - st.s * st.s) * w_now <= 0.0)
        throw domain_error("integrate: singular level crossed near s = " + std::to_string(s));
      attach_derivatives(st, oracle);
    } catch (const error& e) {
      traj.aborted = true;
      traj.abort_reason = e.what();
      traj.abort_s = s;
      return traj;
    }
    traj.states.push_back(st);
  }
  return traj;
}

ReducedData to_reduced_data(const EvolutionState& st, const DerivativeOracle& oracle) {
  const StateDerivative d = evolution_rhs(st, oracle);
  ReducedData r;
  r.s = st.s;
  r.frame3 = st.frame3;
  r.G = JetMatrix(2, 2);
  r.G.at(0, 0) = Jet{st.gUU(), d.dG[0]};
  r.G.at(0, 1) = r.G.at(1, 0) = Jet{st.gUV(), d.dG[1]};
  r.G.at(1, 1) = Jet{st.gVV(), d.dG[2]};
  const int n = st.frame3.dim;
  for (int i = 0; i < 3; ++i)
    r.alpha[static_cast<size_t>(i)] =
        row_form(st.alpha[static_cast<size_t>(i)], d.dAlpha[static_cast<size_t>(i)], n);
  for (int k = 0; k < 2; ++k)
    r.theta[static_cast<size_t>(k)] =
        row_form(st.theta[static_cast<size_t>(k)], d.dTheta[static_cast<size_t>(k)], n);
  const Jet sj = Jet::coordinate(st.s);
  const Jet h2 = r.G.det();
  r.f = Jet{4.0} * h2 / (h2 - sj * sj);
  return r;
}

Coframe build_frame6(const EvolutionState& st, const DerivativeOracle& oracle) {
  const int n3 = st.frame3.dim;
  std::vector<std::string> labels = {"ds", "theta1", "theta2"};
  for (const auto& l : st.frame3.labels) labels.push_back(l);
  Coframe frame(labels, 0);

  // base structure, embedded
  for (int k = 0; k < n3; ++k)
    frame.set_d_basis(3 + k, embed_form(st.frame3.d_basis(k), 3, frame.dim));

  const auto [t1, t2] = curvature_forms(st, oracle);
  const StateDerivative d = evolution_rhs(st, oracle);
  const Form ds = Form::basis_monomial(frame.dim, Mask{1} << 0);
  const Form td1 = embed_form(row_to_form(d.dTheta[0], n3), 3, frame.dim);
  const Form td2 = embed_form(row_to_form(d.dTheta[1], n3), 3, frame.dim);
  frame.set_d_basis(1, embed_form(t1, 3, frame.dim) + wedge(ds, td1));
  frame.set_d_basis(2, embed_form(t2, 3, frame.dim) + wedge(ds, td2));
  return frame;
}

SU3Structure assemble_state_structure(const EvolutionState& st, const DerivativeOracle& oracle) {
  return assemble_six(to_reduced_data(st, oracle), build_frame6(st, oracle));
}

EvolutionState ModelFile::initial_state() const {
  EvolutionState st;
  st.frame3 = frame3;
  st.alpha = alpha;
  st.G = JetMatrix(2, 2);
  st.G.at(0, 0) = Jet{gUU};
  st.G.at(0, 1) = st.G.at(1, 0) = Jet{gUV};
  st.G.at(1, 1) = Jet{gVV};
  const double det = gUU * gVV - gUV * gUV;
  if (det <= 0.0) throw domain_error("model: G0 must be positive definite");
  if (s0) {
    st.s = *s0;
  } else if (f) {
    if (*f <= 4.0) throw domain_error("model: f must exceed 4");
    st.s = std::sqrt((1.0 - 4.0 / *f) * det);
  } else {
    throw domain_error("model: either s0 or f must be given");
  }
  st.validate();
  return st;
}

}  // namespace nkflow
