#include "nkflow/reduction.hpp"

#include <cmath>

#include "nkflow/errors.hpp"

namespace nkflow {

Jet ReducedData::h2() const { return G.det(); }

void ReducedData::validate() const {
  if (gUU().val <= 0.0) throw domain_error("reduced data: g_UU must be positive");
  const double h2v = h2().val;
  if (h2v <= 0.0) throw domain_error("reduced data: h^2 = det G must be positive");
  if (h2v == s * s) throw domain_error("reduced data: singular level h^2 = s^2");
  const double fv = 4.0 * h2v / (h2v - s * s);
  if (fv <= 4.0) throw domain_error("reduced data: f = 4h^2/(h^2-s^2) must exceed 4");
}

Form embed_form(const Form& f, int offset, int dim) {
  Form out(dim, f.grade());
  for (const auto& [m, c] : f.coeffs()) out.set(m << offset, c);
  return out;
}

std::pair<Form, Form> dual_connection_forms(const TorusAction& a, const MetricTensor& g) {
  const Form ub = flat(a.U, g);
  const Form vb = flat(a.V, g);
  Jet guu{}, guv{}, gvv{};
  const int n = g.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Jet gij = g.at(i, j);
      guu += gij * a.U[i] * a.U[j];
      guv += gij * a.U[i] * a.V[j];
      gvv += gij * a.V[i] * a.V[j];
    }
  const Jet h2 = guu * gvv - guv * guv;
  if (h2.val == 0.0) throw domain_error("degenerate torus action: h^2 = 0");
  Form th1 = gvv * ub - guv * vb;
  Form th2 = guu * vb - guv * ub;
  const Jet inv = Jet{1.0} / h2;
  th1 *= inv;
  th2 *= inv;
  return {std::move(th1), std::move(th2)};
}

std::array<Form, 3> reduced_one_forms(const SU3Structure& s6, const TorusAction& a, Jet s) {
  auto [th1, th2] = dual_connection_forms(a, s6.g);
  Form a0 = contract(a.V, contract(a.U, s6.psi_minus));
  Form a1 = s * th1 + contract(a.V, s6.sigma);
  Form a2 = s * th2 - contract(a.U, s6.sigma);
  return {std::move(a0), std::move(a1), std::move(a2)};
}

SU3Structure assemble_six(const ReducedData& r, const Coframe& frame6) {
  r.validate();
  if (frame6.dim != 6) throw domain_error("assemble_six expects a 6-dimensional frame");

  const Jet nu = Jet::coordinate(r.s);
  const Jet h2 = r.h2();
  const Jet w = h2 - nu * nu;
  const Jet guu = r.gUU(), guv = r.gUV(), gvv = r.gVV();

  const Form ds = Form::basis_monomial(6, Mask{1} << 0);
  const Form th1 = Form::basis_monomial(6, Mask{1} << 1);
  const Form th2 = Form::basis_monomial(6, Mask{1} << 2);
  const Form a0 = embed_form(r.alpha[0], 3, 6);
  const Form a1 = embed_form(r.alpha[1], 3, 6);
  const Form a2 = embed_form(r.alpha[2], 3, 6);

  SU3Structure out;
  out.frame = frame6;

  // metric
  MetricTensor g(6);
  g.at(0, 0) = Jet{1.0} / (Jet{9.0} * w);
  g.at(1, 1) = guu;
  g.at(2, 2) = gvv;
  g.at(1, 2) = g.at(2, 1) = guv;
  const Jet winv = Jet{1.0} / w;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Jet a0i = r.alpha[0].coeff(Mask{1} << i), a0j = r.alpha[0].coeff(Mask{1} << j);
      const Jet a1i = r.alpha[1].coeff(Mask{1} << i), a1j = r.alpha[1].coeff(Mask{1} << j);
      const Jet a2i = r.alpha[2].coeff(Mask{1} << i), a2j = r.alpha[2].coeff(Mask{1} << j);
      g.at(3 + i, 3 + j) =
          winv * (a0i * a0j + guu * a1i * a1j + gvv * a2i * a2j + guv * (a1i * a2j + a2i * a1j));
    }
  out.g = std::move(g);
  if (!out.g.is_positive_definite())
    throw domain_error("assemble_six: assembled metric is not positive definite");

  // sigma
  out.sigma = Jet{1.0} / (Jet{3.0} * w) * wedge(ds, a0);
  out.sigma += nu * wedge(th1, th2);
  out.sigma -= wedge(th1, a2);
  out.sigma += wedge(th2, a1);
  out.sigma -= (nu / w) * wedge(a1, a2);

  // the recurring combinations
  Form bracket = w * wedge(th1, th2);
  bracket += nu * (wedge(th1, a2) - wedge(th2, a1));
  bracket -= wedge(a1, a2);
  Form conn = wedge(th1, guu * a1 + guv * a2);
  conn += wedge(th2, guv * a1 + gvv * a2);

  out.psi_plus = Jet{1.0} / (Jet{3.0} * w) * wedge(ds, bracket);
  out.psi_plus -= winv * wedge(conn, a0);

  out.psi_minus = Jet{1.0} / (Jet{3.0} * w) * wedge(ds, conn);
  out.psi_minus += winv * wedge(bracket, a0);
  return out;
}

LevelSetResiduals check_level_set_relations(const ReducedData& r, const Form& dtheta1,
                                            const Form& dtheta2) {
  if (r.s == 0.0) throw domain_error("level-set relations need s != 0");
  const Jet sj{r.s};
  const Jet w = r.h2() - sj * sj;
  const Jet three_over_w = Jet{3.0} / w;

  Form lhs1 = sj * dtheta1;
  lhs1 -= ext_d_structure(r.alpha[1], r.frame3);
  lhs1 += three_over_w * wedge(r.gUV() * r.alpha[1] + r.gVV() * r.alpha[2], r.alpha[0]);

  Form lhs2 = sj * dtheta2;
  lhs2 -= ext_d_structure(r.alpha[2], r.frame3);
  lhs2 -= three_over_w * wedge(r.gUU() * r.alpha[1] + r.gUV() * r.alpha[2], r.alpha[0]);

  return {lhs1.max_abs(), lhs2.max_abs()};
}

Q3Residuals check_q3_relations(Jet f, const std::array<Form, 3>& alpha, const Coframe& frame3) {
  return check_q3_relations(f, alpha, frame3, Form(frame3.dim, 1));
}

Q3Residuals check_q3_relations(Jet f, const std::array<Form, 3>& alpha, const Coframe& frame3,
                               const Form& df) {
  if (f.val <= 4.0) throw domain_error("quotient relations need f > 4");
  Q3Residuals out;

  Form r0 = ext_d_structure(alpha[0], frame3);
  r0 -= f * wedge(alpha[1], alpha[2]);
  out.r0 = r0.max_abs();

  const Form df_over_f = Jet{1.0} / f * df;
  Form r1 = wedge(ext_d_structure(alpha[1], frame3), alpha[0]);
  r1 += wedge(df_over_f, wedge(alpha[1], alpha[0]));
  out.r1 = r1.max_abs();

  Form r2 = wedge(ext_d_structure(alpha[2], frame3), alpha[0]);
  r2 += wedge(df_over_f, wedge(alpha[2], alpha[0]));
  out.r2 = r2.max_abs();
  return out;
}

std::array<Form, 3> to_beta_frame(Jet f, const std::array<Form, 3>& alpha) {
  if (f.val == 0.0) throw domain_error("beta frame needs f != 0");
  return {alpha[0], f * alpha[1], f * alpha[2]};
}

std::array<Form, 3> from_beta_frame(Jet f, const std::array<Form, 3>& beta) {
  if (f.val == 0.0) throw domain_error("beta frame needs f != 0");
  const Jet inv = Jet{1.0} / f;
  return {beta[0], inv * beta[1], inv * beta[2]};
}

}  // namespace nkflow
