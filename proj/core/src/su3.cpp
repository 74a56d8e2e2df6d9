#include "nkflow/su3.hpp"

#include <algorithm>
#include <cmath>

#include "nkflow/errors.hpp"

namespace nkflow {

double CompatibilityReport::max_residual() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.residual);
  return m;
}

SU3Structure standard_su3(const Coframe& frame) {
  if (frame.dim != 6) throw domain_error("standard_su3 expects a 6-dimensional frame");
  SU3Structure s;
  s.frame = frame;
  s.g = MetricTensor::identity(6);

  // basis ordering f1, Jf1, f2, Jf2, f3, Jf3 = e0..e5
  s.sigma = Form(6, 2);
  s.sigma.set(mask_of({0, 1}), Jet{1.0});
  s.sigma.set(mask_of({2, 3}), Jet{1.0});
  s.sigma.set(mask_of({4, 5}), Jet{1.0});

  s.psi_plus = Form(6, 3);
  s.psi_plus.set(mask_of({0, 2, 4}), Jet{1.0});   //  f1 f2 f3
  s.psi_plus.set(mask_of({1, 3, 4}), Jet{-1.0});  // -Jf1 Jf2 f3
  s.psi_plus.set(mask_of({0, 3, 5}), Jet{-1.0});  // -f1 Jf2 Jf3
  s.psi_plus.set(mask_of({1, 2, 5}), Jet{-1.0});  // -Jf1 f2 Jf3

  s.psi_minus = Form(6, 3);
  s.psi_minus.set(mask_of({0, 2, 5}), Jet{1.0});  //  f1 f2 Jf3
  s.psi_minus.set(mask_of({1, 3, 5}), Jet{-1.0}); // -Jf1 Jf2 Jf3
  s.psi_minus.set(mask_of({0, 3, 4}), Jet{1.0});  //  f1 Jf2 f3
  s.psi_minus.set(mask_of({1, 2, 4}), Jet{1.0});  //  Jf1 f2 f3
  return s;
}

JetMatrix complex_structure(const MetricTensor& g, const Form& sigma) {
  const int n = g.dim();
  JetMatrix smat(n, n);
  for (const auto& [m, c] : sigma.coeffs()) {
    const auto idx = mask_indices(m);
    smat.at(idx[0], idx[1]) = c;
    smat.at(idx[1], idx[0]) = -c;
  }
  const JetMatrix ginv = g.gram.inverse();
  JetMatrix j = ginv * smat;
  for (int r = 0; r < n; ++r)
    for (int cidx = 0; cidx < n; ++cidx) j.at(r, cidx) = -j.at(r, cidx);
  return j;
}

namespace {

/// Value of the full antisymmetric tensor of a 3-form on an arbitrary triple.
Jet full_coeff3(const Form& f, int i, int j, int k) {
  if (i == j || j == k || i == k) return Jet{};
  int a = i, b = j, c = k;
  int sign = 1;
  if (a > b) { std::swap(a, b); sign = -sign; }
  if (b > c) { std::swap(b, c); sign = -sign; }
  if (a > b) { std::swap(a, b); sign = -sign; }
  const Jet v = f.coeff(mask_of({a, b, c}));
  return sign > 0 ? v : -v;
}

}  // namespace

CompatibilityReport su3_compatibility(const SU3Structure& s) {
  CompatibilityReport rep;
  rep.entries.push_back({"sigma_wedge_psi_plus", wedge(s.sigma, s.psi_plus).max_abs(), 0.0});
  rep.entries.push_back({"sigma_wedge_psi_minus", wedge(s.sigma, s.psi_minus).max_abs(), 0.0});

  const Form sigma3 = wedge(s.sigma, wedge(s.sigma, s.sigma));
  Form norm = wedge(s.psi_plus, s.psi_minus);
  norm -= Jet{2.0 / 3.0} * sigma3;
  rep.entries.push_back({"volume_normalization", norm.max_abs(), 0.0});

  const JetMatrix j = complex_structure(s.g, s.sigma);
  JetMatrix j2 = j * j;
  for (int i = 0; i < 6; ++i) j2.at(i, i) += Jet{1.0};
  rep.entries.push_back({"J_squared_plus_id", j2.max_abs_val(), 0.0});

  // ψ₊(J·,·,·) + ψ₋ over all first slots and increasing last pairs
  double worst = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int a = 0; a < 6; ++a)
      for (int b = a + 1; b < 6; ++b) {
        Jet lhs{};
        for (int m = 0; m < 6; ++m) lhs += j.at(m, i) * full_coeff3(s.psi_plus, m, a, b);
        lhs += full_coeff3(s.psi_minus, i, a, b);
        worst = std::max(worst, std::abs(lhs.val));
      }
  rep.entries.push_back({"psi_plus_J_pairing", worst, 0.0});
  return rep;
}

std::pair<double, double> nk_residual(const SU3Structure& s) {
  Form r1 = ext_d(s.sigma, s.frame);
  r1 -= Jet{3.0} * s.psi_plus;
  Form r2 = ext_d(s.psi_minus, s.frame);
  r2 += Jet{2.0} * wedge(s.sigma, s.sigma);
  return {r1.max_abs(), r2.max_abs()};
}

Jet multi_moment(const SU3Structure& s, const TorusAction& a) {
  return contract(a.V, contract(a.U, s.sigma)).coeff(0);
}

double check_moment_gradient(const SU3Structure& s, const TorusAction& a) {
  const Jet nu = multi_moment(s, a);
  Form lhs = ext_d(Form::scalar(s.frame.dim, nu), s.frame);
  Form rhs = Jet{3.0} * contract(a.V, contract(a.U, s.psi_plus));
  lhs -= rhs;
  return lhs.max_abs();
}

Jet laplacian_of_s(const SU3Structure& s) {
  if (!s.frame.s_index) throw domain_error("laplacian_of_s needs a frame with s_index");
  const Form vol = volume_form(s);
  const Form ds = ext_d(Form::scalar(6, Jet{0.0, 1.0}), s.frame);
  const Form star_ds = hodge(ds, s.g, vol);
  const Form d_star_ds = ext_d(star_ds, s.frame);
  const Form result = hodge(d_star_ds, s.g, vol);
  return -result.coeff(0);
}

double check_useful_formula(const SU3Structure& s, const TorusAction& a) {
  const Jet nu = multi_moment(s, a);
  Form lhs = contract(a.V, contract(a.U, wedge(s.sigma, s.sigma)));
  Form rhs = nu * s.sigma;
  rhs -= wedge(contract(a.U, s.sigma), contract(a.V, s.sigma));
  lhs -= Jet{2.0} * rhs;
  return lhs.max_abs();
}

Form volume_form(const SU3Structure& s) {
  return Jet{1.0 / 6.0} * wedge(s.sigma, wedge(s.sigma, s.sigma));
}

}  // namespace nkflow
