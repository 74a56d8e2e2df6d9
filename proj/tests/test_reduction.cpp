#include <doctest.h>

#include <cmath>

#include "nkflow/heisenberg.hpp"
#include "nkflow/reduction.hpp"
#include "test_support.hpp"

using namespace nkflow;
using nktest::Rng;

TEST_CASE("dual connection forms: orthonormal generators give the flats") {
  const MetricTensor id = MetricTensor::identity(6);
  const TorusAction a{Vector::basis(6, 1), Vector::basis(6, 2)};
  const auto [th1, th2] = dual_connection_forms(a, id);
  CHECK(th1.coeff(Mask{1} << 1).val == doctest::Approx(1.0));
  CHECK(th1.coeffs().size() == 1);
  CHECK(th2.coeff(Mask{1} << 2).val == doctest::Approx(1.0));
}

TEST_CASE("dual connection forms: pairing identity on random Gram matrices") {
  Rng rng(47);
  for (int it = 0; it < 200; ++it) {
    const MetricTensor g = nktest::random_spd_metric(rng, 6);
    const Vector u = nktest::random_vector(rng, 6);
    const Vector v = nktest::random_vector(rng, 6);
    const TorusAction a{u, v};
    const auto [th1, th2] = dual_connection_forms(a, g);
    const auto pair = [](const Form& th, const Vector& x) {
      Jet acc{};
      for (int i = 0; i < 6; ++i) acc += th.coeff(Mask{1} << i) * x[i];
      return acc.val;
    };
    CHECK(pair(th1, u) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(pair(th1, v)) <= 1e-10);
    CHECK(std::abs(pair(th2, u)) <= 1e-10);
    CHECK(pair(th2, v) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("dual connection forms reject a degenerate action") {
  const MetricTensor id = MetricTensor::identity(6);
  const Vector u = Vector::basis(6, 1);
  CHECK_THROWS_AS(dual_connection_forms({u, u}, id), domain_error);
}

TEST_CASE("reduced one-forms are basic with norm h^2 - s^2") {
  const HeisenbergParams p;
  for (double s : {1.05, 1.2, 1.3}) {
    const SU3Structure s6 = heisenberg_structure(p, s);
    const TorusAction a = fiber_action();
    const auto alpha = reduced_one_forms(s6, a, Jet::coordinate(s));
    for (const Form& al : alpha) {
      CHECK(contract(a.U, al).max_abs() <= 1e-12);
      CHECK(contract(a.V, al).max_abs() <= 1e-12);
    }
    // ||alpha0||^2 = h^2 - s^2 against the assembled metric
    const ClosedFormProfiles cf = closed_form_profiles(p, s);
    const double w = cf.h.val * cf.h.val - s * s;
    CHECK(form_inner(alpha[0], alpha[0], s6.g).val == doctest::Approx(w).epsilon(1e-10));
    // ||d nu||^2 = 9 (h^2 - s^2)
    const Form ds = Form::basis_monomial(6, Mask{1} << 0);
    CHECK(form_inner(ds, ds, s6.g).val == doctest::Approx(9.0 * w).epsilon(1e-10));
  }
}

TEST_CASE("reduced one-forms of a dependent pair vanish in the psi- slot") {
  const HeisenbergParams p;
  const SU3Structure s6 = heisenberg_structure(p, 1.1);
  const Vector u = Vector::basis(6, 1);
  Vector v(6);
  for (int i = 0; i < 6; ++i) v[i] = Jet{2.0} * u[i];
  const Form a0 = contract(v, contract(u, s6.psi_minus));
  CHECK(a0.max_abs() == 0.0);
}

TEST_CASE("round trip: connection forms and alphas of the assembled structure") {
  const HeisenbergParams p;
  const double s = 1.15;
  const SU3Structure s6 = heisenberg_structure(p, s);
  const TorusAction a = fiber_action();

  const auto [th1, th2] = dual_connection_forms(a, s6.g);
  CHECK((th1 - Form::basis_monomial(6, Mask{1} << 1)).max_abs() <= 1e-12);
  CHECK((th2 - Form::basis_monomial(6, Mask{1} << 2)).max_abs() <= 1e-12);

  const auto alpha = reduced_one_forms(s6, a, Jet::coordinate(s));
  const ReducedData r = heisenberg_reduced_data(p, s);
  for (int i = 0; i < 3; ++i) {
    Form diff = alpha[static_cast<size_t>(i)];
    diff -= embed_form(r.alpha[static_cast<size_t>(i)], 3, 6);
    CHECK(diff.max_abs() <= 1e-12);
  }
}

TEST_CASE("assemble_six produces the expected coefficients") {
  const HeisenbergParams p;
  const double s = 1.1;
  const ReducedData r = heisenberg_reduced_data(p, s);
  const SU3Structure s6 = assemble_six(r, heisenberg_frame6(p, s));

  const Jet h2 = r.h2();
  const double w = h2.val - s * s;
  CHECK(s6.g.at(0, 0).val == doctest::Approx(1.0 / (9.0 * w)).epsilon(1e-13));
  const Jet c12 = s6.sigma.coeff(mask_of({1, 2}));
  CHECK(c12.val == doctest::Approx(s).epsilon(1e-14));
  CHECK(c12.dds == doctest::Approx(1.0).epsilon(1e-14));  // nu == s as a jet

  CHECK(su3_compatibility(s6).max_residual() <= 1e-9);
}

TEST_CASE("assemble_six rejects singular levels") {
  const HeisenbergParams p;
  ReducedData r = heisenberg_reduced_data(p, 1.1);
  r.G.at(0, 0) = r.G.at(1, 1) = Jet{1.1};  // h = s: h^2 = s^2
  CHECK_THROWS_AS(assemble_six(r, heisenberg_frame6(p, 1.1)), domain_error);
}

TEST_CASE("level-set relations hold on closed-form data") {
  const HeisenbergParams p;
  for (double s : {1.05, 1.2, 1.34}) {
    const ReducedData r = heisenberg_reduced_data(p, s);
    // d theta_k on the bundle: the curvature two-forms of the family
    const ClosedFormProfiles cf = closed_form_profiles(p, s);
    const Jet h2 = cf.h * cf.h;
    const Jet w = h2 - Jet{s * s};
    const Jet k = Jet{3.0} * cf.h / (Jet{s} * w);
    const Form dth1 = -k * wedge(r.alpha[2], r.alpha[0]);
    const Form dth2 = k * wedge(r.alpha[1], r.alpha[0]);
    const LevelSetResiduals res = check_level_set_relations(r, dth1, dth2);
    CHECK(res.r1 <= 1e-10);
    CHECK(res.r2 <= 1e-10);
  }
}

TEST_CASE("level-set relations: s = 0 is rejected, g_UV = 0 kills the alpha1 term") {
  const HeisenbergParams p;
  ReducedData r = heisenberg_reduced_data(p, 1.1);
  const Form z(3, 2);
  ReducedData r0 = r;
  r0.s = 0.0;
  CHECK_THROWS_AS(check_level_set_relations(r0, z, z), domain_error);
  // with g_UV = 0 the 3 g_UV alpha1 ^ alpha0 correction vanishes identically
  CHECK(wedge(r.gUV() * r.alpha[1], r.alpha[0]).max_abs() == 0.0);
}

TEST_CASE("level-set residual grows linearly under perturbation of alpha1") {
  const HeisenbergParams p;
  const double s = 1.2;
  const ReducedData base = heisenberg_reduced_data(p, s);
  const ClosedFormProfiles cf = closed_form_profiles(p, s);
  const Jet h2 = cf.h * cf.h;
  const Jet w = h2 - Jet{s * s};
  const Jet k = Jet{3.0} * cf.h / (Jet{s} * w);
  const Form dth1 = -k * wedge(base.alpha[2], base.alpha[0]);
  const Form dth2 = k * wedge(base.alpha[1], base.alpha[0]);

  Rng rng(53);
  const Form dir = nktest::random_form(rng, 3, 1, false);
  const auto residual_at = [&](double eps) {
    ReducedData r = base;
    r.alpha[1] += Jet{eps} * dir;
    return check_level_set_relations(r, dth1, dth2).r1;
  };
  const double r1 = residual_at(1e-4);
  const double r2 = residual_at(2e-4);
  CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-6));
}

TEST_CASE("quotient relations on closed-form data and the abelian rejection") {
  const HeisenbergParams p;
  for (double s : {1.02, 1.2, 1.33}) {
    const ReducedData r = heisenberg_reduced_data(p, s);
    const Q3Residuals q = check_q3_relations(r.f, r.alpha, r.frame3);
    CHECK(q.r0 <= 1e-12);
    CHECK(q.r1 == 0.0);  // d alpha_1 = 0 and df = 0 identically here
    CHECK(q.r2 == 0.0);
  }

  // abelian frame: d alpha0 = 0 forces residual f |alpha1 ^ alpha2|
  Coframe ab({"e0", "e1", "e2"});
  std::array<Form, 3> alpha = {Form::basis_monomial(3, 1), Form::basis_monomial(3, 2),
                               Form::basis_monomial(3, 4)};
  const Q3Residuals q = check_q3_relations(Jet{5.0}, alpha, ab);
  CHECK(q.r0 == doctest::Approx(5.0));

  CHECK_THROWS_AS(check_q3_relations(Jet{4.0}, alpha, ab), domain_error);
}

TEST_CASE("beta frame equivalence and round trip") {
  const HeisenbergParams p;
  const double s = 1.17;
  const ReducedData r = heisenberg_reduced_data(p, s);

  // f = 1: identity
  const auto same = to_beta_frame(Jet{1.0}, r.alpha);
  for (int i = 0; i < 3; ++i) CHECK((same[static_cast<size_t>(i)] - r.alpha[static_cast<size_t>(i)]).max_abs() == 0.0);

  const auto beta = to_beta_frame(r.f, r.alpha);
  const auto back = from_beta_frame(r.f, beta);
  for (int i = 0; i < 3; ++i)
    CHECK((back[static_cast<size_t>(i)] - r.alpha[static_cast<size_t>(i)]).max_abs() <= 1e-13);

  // d beta0 = (1/f) beta1 ^ beta2
  Form res = ext_d_structure(beta[0], r.frame3);
  res -= Jet{1.0} / r.f * wedge(beta[1], beta[2]);
  CHECK(res.max_abs() <= 1e-12);

  // beta_1, beta_2 closed here, so d beta_k ^ beta_0 = 0
  CHECK(wedge(ext_d_structure(beta[1], r.frame3), beta[0]).max_abs() == 0.0);
  CHECK(wedge(ext_d_structure(beta[2], r.frame3), beta[0]).max_abs() == 0.0);

  CHECK_THROWS_AS(to_beta_frame(Jet{0.0}, r.alpha), domain_error);
}

TEST_CASE("nk residual reacts to a profile perturbation but compatibility does not") {
  const HeisenbergParams p;
  const double s = 1.1;
  ReducedData r = heisenberg_reduced_data(p, s);
  r.alpha[0] *= Jet{1.01};  // 1% perturbation of f0
  const SU3Structure s6 = assemble_six(r, heisenberg_frame6(p, s));
  CHECK(su3_compatibility(s6).max_residual() <= 1e-9);
  const auto [r1, r2] = nk_residual(s6);
  CHECK(r2 >= 1e-3);
  CHECK(r1 + r2 >= 1e-3);
}
