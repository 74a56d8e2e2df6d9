#include <doctest.h>

#include <cmath>

#include "nkflow/heisenberg.hpp"
#include "test_support.hpp"

using namespace nkflow;
using nktest::Rng;

TEST_CASE("h3 coframe structure") {
  const Coframe h3 = h3_coframe();
  const Form d0 = h3.d_basis(0);
  CHECK(d0.coeff(mask_of({1, 2})).val == 1.0);
  CHECK(h3.d_basis(1).empty());
  CHECK(h3.d_basis(2).empty());
  CHECK(check_d_squared(h3));
}

TEST_CASE("parameter validation and the standard preset") {
  const HeisenbergParams p = HeisenbergParams::standard(2.0, 1.0);
  CHECK(p.fs0 == doctest::Approx(3.0 / 16.0).epsilon(1e-15));
  CHECK_THROWS_AS(HeisenbergParams::standard(2.0, 0.0), domain_error);
  CHECK_THROWS_AS(HeisenbergParams::standard(2.0, 1.5), domain_error);  // s0^2 > C
  CHECK_THROWS_AS(HeisenbergParams::standard(-1.0, 0.5), domain_error);
}

TEST_CASE("closed-form profiles: initial values and frozen spot values") {
  const HeisenbergParams p;
  const ClosedFormProfiles at_s0 = closed_form_profiles(p, 1.0);
  CHECK(at_s0.h.val == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(at_s0.f0.val == doctest::Approx(0.1875).epsilon(1e-15));
  CHECK(at_s0.f1.val == doctest::Approx(0.1875).epsilon(1e-15));
  CHECK(at_s0.f2.val == doctest::Approx(0.1875).epsilon(1e-15));

  const ClosedFormProfiles cf = closed_form_profiles(p, 1.2);
  CHECK(cf.h.val == doctest::Approx(2.0 / 1.2).epsilon(1e-15));
  CHECK(cf.f0.val == doctest::Approx(0.16176193886046426).epsilon(1e-14));
  CHECK(cf.f1.val == doctest::Approx(0.13955693260744841).epsilon(1e-14));

  CHECK_THROWS_AS(closed_form_profiles(p, 0.0), domain_error);
  CHECK_THROWS_AS(closed_form_profiles(p, std::sqrt(2.0)), domain_error);
}

TEST_CASE("profile jets agree with finite differences") {
  const HeisenbergParams p;
  Rng rng(61);
  for (int it = 0; it < 200; ++it) {
    const double s = rng.uniform(1.0, 1.35);
    const ClosedFormProfiles cf = closed_form_profiles(p, s);
    const auto fd = [&](auto pick) {
      return nktest::central_fd([&](double u) { return pick(closed_form_profiles(p, u)); }, s,
                                1e-5);
    };
    CHECK(std::abs(cf.h.dds - fd([](const ClosedFormProfiles& c) { return c.h.val; }))
          <= 1e-8 * std::abs(cf.h.dds));
    CHECK(std::abs(cf.f0.dds - fd([](const ClosedFormProfiles& c) { return c.f0.val; }))
          <= 1e-8 * std::max(1.0, std::abs(cf.f0.dds)));
    CHECK(std::abs(cf.f1.dds - fd([](const ClosedFormProfiles& c) { return c.f1.val; }))
          <= 1e-8 * std::max(1.0, std::abs(cf.f1.dds)));
    // first-derivative jets carry the second derivatives
    CHECK(std::abs(cf.df1.dds - fd([](const ClosedFormProfiles& c) { return c.df1.val; }))
          <= 1e-6 * std::max(1.0, std::abs(cf.df1.dds)));
  }
}

TEST_CASE("explicit structure: frozen coefficients") {
  const HeisenbergParams p;
  const double s = 1.1;
  const SU3Structure s6 = heisenberg_structure(p, s);
  // metric ds x ds coefficient s^2/(9(C^2-s^4))
  CHECK(s6.g.at(0, 0).val == doctest::Approx(0.053016461392185987).epsilon(1e-13));
  CHECK(s6.g.at(1, 1).val == doctest::Approx(2.0 / 1.1).epsilon(1e-14));
  // sigma: theta1^theta2 coefficient is the level itself
  CHECK(s6.sigma.coeff(mask_of({1, 2})).val == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(s6.sigma.coeff(mask_of({4, 5})).val
        == doctest::Approx(-0.014747881336044136).epsilon(1e-12));
}

TEST_CASE("explicit structure is nearly Kahler across the level grid") {
  const HeisenbergParams p;
  for (int i = 0; i < 20; ++i) {
    const double s = 1.0 + 0.35 * i / 19.0;
    const SU3Structure s6 = heisenberg_structure(p, s);
    const auto [r1, r2] = nk_residual(s6);
    CHECK(r1 <= 1e-9);
    CHECK(r2 <= 1e-9);
    CHECK(su3_compatibility(s6).max_residual() <= 1e-9);
  }
}

TEST_CASE("explicit structure agrees with the general assembly coefficientwise") {
  const HeisenbergParams p;
  for (double s : {1.02, 1.1, 1.28}) {
    const SU3Structure direct = heisenberg_structure(p, s);
    const SU3Structure assembled =
        assemble_six(heisenberg_reduced_data(p, s), heisenberg_frame6(p, s));
    CHECK((direct.sigma - assembled.sigma).max_abs() <= 1e-10);
    CHECK((direct.psi_plus - assembled.psi_plus).max_abs() <= 1e-10);
    CHECK((direct.psi_minus - assembled.psi_minus).max_abs() <= 1e-10);
    CHECK((direct.g.gram - assembled.g.gram).max_abs_val() <= 1e-10);
  }
}

TEST_CASE("multi-moment map of the fiber action is the level coordinate") {
  const HeisenbergParams p;
  for (double s : {1.0, 1.18, 1.33}) {
    const SU3Structure s6 = heisenberg_structure(p, s);
    const Jet nu = multi_moment(s6, fiber_action());
    CHECK(nu.val == doctest::Approx(s).epsilon(1e-12));
    CHECK(nu.dds == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(check_moment_gradient(s6, fiber_action()) <= 1e-9);
    CHECK(check_useful_formula(s6, fiber_action()) <= 1e-10);
  }
}

TEST_CASE("Laplace eigenvalue through the from-scratch Hodge star") {
  const HeisenbergParams p;
  const Jet lap11 = laplacian_of_s(heisenberg_structure(p, 1.1));
  CHECK(lap11.val == doctest::Approx(26.4).epsilon(1e-10));
  const Jet lap10 = laplacian_of_s(heisenberg_structure(p, 1.0));
  CHECK(lap10.val == doctest::Approx(24.0).epsilon(1e-10));
}

TEST_CASE("the Hodge identity behind the Laplace computation") {
  const HeisenbergParams p;
  const double s = 1.1;
  const SU3Structure s6 = heisenberg_structure(p, s);
  const Form ds = Form::basis_monomial(6, Mask{1} << 0);
  const Form star = hodge(ds, s6.g, volume_form(s6));
  const Form a0 = embed_form(heisenberg_reduced_data(p, s).alpha[0], 3, 6);
  Form target = wedge(wedge(s6.sigma, s6.sigma), a0);
  target *= Jet{1.5};
  CHECK((star - target).max_abs() <= 1e-10);
}

TEST_CASE("fiber coefficient decays monotonically toward the pole") {
  const HeisenbergParams p;
  double prev = 1e300;
  for (int i = 0; i < 12; ++i) {
    const double s = 0.35 + i * 0.08;  // sample of (0, sqrt(C))
    const double fiber = closed_form_profiles(p, s).h.val;  // C/s
    CHECK(fiber < prev);
    prev = fiber;
  }
}

TEST_CASE("frame normalization: already-normal input is returned unchanged") {
  const Coframe h3 = h3_coframe();
  const double f = 16.0 / 3.0;
  Form b0(3, 1), b1(3, 1), b2(3, 1);
  b0.set(Mask{1} << 0, Jet{1.0 / f});
  b1.set(Mask{1} << 1, Jet{1.0});
  b2.set(Mask{1} << 2, Jet{1.0});
  const MetricTensor id = MetricTensor::identity(3);
  const NormalizedFrame n = normalize_h3_frame(b0, b1, b2, id, f);
  CHECK((n.sigma1 - b1).max_abs() <= 1e-14);
  CHECK((n.sigma2 - b2).max_abs() <= 1e-14);
  CHECK(n.sigma0.coeff(Mask{1} << 0).val == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("frame normalization: defining conditions hold for beta1 = 2 tau1") {
  Form b0(3, 1), b1(3, 1), b2(3, 1);
  b0.set(Mask{1} << 0, Jet{0.4});
  b1.set(Mask{1} << 1, Jet{2.0});
  b2.set(Mask{1} << 2, Jet{1.0});
  const MetricTensor id = MetricTensor::identity(3);
  const NormalizedFrame n = normalize_h3_frame(b0, b1, b2, id, 5.0);
  const Jet ip = form_inner(n.sigma1, n.sigma2, id);
  CHECK(std::abs(ip.val) <= 1e-12);
  const double n1 = std::sqrt(form_inner(n.sigma1, n.sigma1, id).val);
  const double n2 = std::sqrt(form_inner(n.sigma2, n.sigma2, id).val);
  CHECK(n1 == doctest::Approx(n2).epsilon(1e-12));
  CHECK((wedge(n.sigma1, n.sigma2) - wedge(b1, b2)).max_abs() <= 1e-12);
}

TEST_CASE("frame normalization: property test over random spans and conformal metrics") {
  Rng rng(67);
  for (int it = 0; it < 300; ++it) {
    Form b0(3, 1), b1(3, 1), b2(3, 1);
    b0.set(Mask{1} << 0, Jet{rng.uniform(0.1, 2.0)});
    b0.set(Mask{1} << 1, Jet{rng.uniform(-1.0, 1.0)});
    b0.set(Mask{1} << 2, Jet{rng.uniform(-1.0, 1.0)});
    b1.set(Mask{1} << 1, Jet{rng.uniform(-2.0, 2.0)});
    b1.set(Mask{1} << 2, Jet{rng.uniform(-2.0, 2.0)});
    b2.set(Mask{1} << 1, Jet{rng.uniform(-2.0, 2.0)});
    b2.set(Mask{1} << 2, Jet{rng.uniform(-2.0, 2.0)});
    const double c1 = wedge(b1, b2).coeff(mask_of({1, 2})).val;
    if (std::abs(c1) < 0.05) continue;
    if (c1 < 0.0) {
      CHECK_THROWS_AS(normalize_h3_frame(b0, b1, b2, MetricTensor::identity(3), 5.0),
                      domain_error);
      continue;
    }
    MetricTensor g = MetricTensor::identity(3);
    const double conf = rng.uniform(0.3, 3.0);
    for (int i = 0; i < 3; ++i) g.at(i, i) = Jet{conf};
    const double f = rng.uniform(4.1, 9.0);
    const NormalizedFrame n = normalize_h3_frame(b0, b1, b2, g, f);
    CHECK(std::abs(form_inner(n.sigma1, n.sigma2, g).val) <= 1e-11);
    const double n1 = std::sqrt(form_inner(n.sigma1, n.sigma1, g).val);
    const double n2 = std::sqrt(form_inner(n.sigma2, n.sigma2, g).val);
    CHECK(std::abs(n1 - n2) <= 1e-11 * std::max(1.0, n1));
    CHECK((wedge(n.sigma1, n.sigma2) - wedge(b1, b2)).max_abs() <= 1e-11);
    CHECK(wedge(n.sigma1, n.sigma2).coeff(mask_of({1, 2})).val > 0.0);
  }
}

TEST_CASE("frame normalization error paths") {
  Form b0(3, 1), b1(3, 1), b2(3, 1);
  b0.set(Mask{1} << 0, Jet{1.0});
  b1.set(Mask{1} << 1, Jet{1.0});
  b2.set(Mask{1} << 1, Jet{2.0});  // parallel to b1
  const MetricTensor id = MetricTensor::identity(3);
  CHECK_THROWS_AS(normalize_h3_frame(b0, b1, b2, id, 5.0), domain_error);

  Form bad = b1;
  bad.set(Mask{1} << 0, Jet{0.5});  // tau0 component
  Form b2ok(3, 1);
  b2ok.set(Mask{1} << 2, Jet{1.0});
  CHECK_THROWS_AS(normalize_h3_frame(b0, bad, b2ok, id, 5.0), domain_error);
}

TEST_CASE("ode versus closed forms: rk4 accuracy and euler degradation") {
  const HeisenbergParams p;
  const CompareReport rk = compare_ode_vs_closed(p, 1.3, 300, IntegratorMethod::rk4);
  CHECK(rk.max_over_profiles() < 1e-7);
  CHECK(rk.channel("g_UV") <= 1e-12);
  CHECK(rk.channel("alpha_offdiag") <= 1e-12);
  CHECK(rk.channel("theta1") <= 1e-6);
  CHECK(rk.channel("theta2") <= 1e-6);

  const CompareReport eu = compare_ode_vs_closed(p, 1.3, 300, IntegratorMethod::euler);
  CHECK(eu.max_over_profiles() >= 100.0 * rk.max_over_profiles());

  const CompareReport zero = compare_ode_vs_closed(p, 1.3, 0);
  for (const auto& ch : zero.channels) CHECK(ch.max_rel_err == 0.0);

  // identical start and end: the flow never moves, all errors vanish
  const CompareReport still = compare_ode_vs_closed(p, p.s0, 50);
  for (const auto& ch : still.channels) CHECK(ch.max_rel_err == 0.0);
}
