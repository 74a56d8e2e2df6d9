#include <doctest.h>

#include <cmath>

#include "nkflow/jet.hpp"
#include "test_support.hpp"

using nkflow::Jet;

TEST_CASE("jet product rule") {
  const Jet a{1.5, 0.7}, b{-2.0, 0.3};
  const Jet p = a * b;
  CHECK(p.val == doctest::Approx(-3.0).epsilon(1e-15));
  CHECK(p.dds == doctest::Approx(1.5 * 0.3 + 0.7 * (-2.0)).epsilon(1e-15));
}

TEST_CASE("jet quotient and power rules") {
  const Jet a{2.0, 1.0};
  const Jet q = Jet{1.0} / a;
  CHECK(q.val == doctest::Approx(0.5));
  CHECK(q.dds == doctest::Approx(-0.25));

  const Jet p = nkflow::pow(a, 1.0 / 3.0);
  CHECK(p.val == doctest::Approx(std::cbrt(2.0)));
  CHECK(p.dds == doctest::Approx(std::pow(2.0, -2.0 / 3.0) / 3.0));

  CHECK_THROWS_AS(nkflow::pow(Jet{-1.0}, 0.5), nkflow::domain_error);
  CHECK_THROWS_AS((a / Jet{0.0, 1.0}), nkflow::domain_error);
}

TEST_CASE("jet arithmetic matches central finite differences of closed profiles") {
  // the closed-form family profiles over the working level range
  const auto profile = [](double s) {
    const double r = (4.0 - s * s * s * s) / 3.0;
    return 2.0 / s + 0.1875 * std::cbrt(r) + 0.1875 * std::pow(r, 2.0 / 3.0);
  };
  const auto jet_profile = [](double s) {
    const Jet sj = Jet::coordinate(s);
    const Jet r = (Jet{4.0} - sj * sj * sj * sj) / Jet{3.0};
    return Jet{2.0} / sj + Jet{0.1875} * nkflow::pow(r, 1.0 / 3.0)
           + Jet{0.1875} * nkflow::pow(r, 2.0 / 3.0);
  };
  nktest::Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const double s = rng.uniform(1.0, 1.35);
    const double fd = nktest::central_fd(profile, s, 1e-4);
    CHECK(std::abs(jet_profile(s).dds - fd) <= 1e-6);
  }
}
