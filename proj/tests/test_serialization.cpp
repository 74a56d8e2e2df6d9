#include <doctest.h>

#include <sstream>

#include "nkflow/serialization.hpp"
#include "test_support.hpp"

using namespace nkflow;

TEST_CASE("coframe json round trip") {
  const Coframe h3 = h3_coframe();
  const json j = to_json(h3);
  CHECK(j.at("dim") == 3);
  CHECK(j.at("s_index").is_null());
  CHECK(j.at("d").contains("0"));
  const Coframe back = coframe_from_json(j);
  CHECK(back.labels == h3.labels);
  for (int k = 0; k < 3; ++k) CHECK((back.d_basis(k) - h3.d_basis(k)).max_abs() == 0.0);

  Coframe with_s = h3;
  with_s.s_index = 1;
  CHECK(coframe_from_json(to_json(with_s)).s_index == 1);
}

TEST_CASE("form json round trip keeps both jet channels") {
  nktest::Rng rng(71);
  const Form f = nktest::random_form(rng, 6, 3);
  const json j = to_json(f);
  CHECK(j.at("grade") == 3);
  const Form back = form_from_json(j);
  CHECK((back - f).max_abs() == 0.0);
  for (const auto& [m, c] : f.coeffs()) {
    CHECK(back.coeff(m).val == c.val);
    CHECK(back.coeff(m).dds == c.dds);
  }
}

TEST_CASE("reduced data json round trip") {
  const HeisenbergParams p;
  const ReducedData r = heisenberg_reduced_data(p, 1.15);
  const ReducedData back = reduced_data_from_json(to_json(r));
  CHECK(back.s == r.s);
  CHECK((back.G - r.G).max_abs_val() == 0.0);
  CHECK(back.f.val == r.f.val);
  for (int i = 0; i < 3; ++i) CHECK((back.alpha[static_cast<size_t>(i)] - r.alpha[static_cast<size_t>(i)]).max_abs() == 0.0);
}

TEST_CASE("model file parsing") {
  const json j{{"frame3", to_json(h3_coframe())},
               {"alpha0", {0.1875, 0.0, 0.0}},
               {"alpha1", {0.0, 0.1875, 0.0}},
               {"alpha2", {0.0, 0.0, 0.1875}},
               {"G0", {{2.0, 0.0}, {0.0, 2.0}}},
               {"f", nullptr},
               {"s0", 1.0},
               {"periods_integral", true}};
  const ModelFile m = model_from_json(j);
  CHECK(m.s0 == 1.0);
  CHECK_FALSE(m.f.has_value());
  CHECK(m.periods_integral);
  const EvolutionState st = m.initial_state();
  CHECK(st.s == 1.0);
  CHECK(st.gUU() == 2.0);

  json missing = j;
  missing.erase("periods_integral");
  CHECK_THROWS_AS(model_from_json(missing), domain_error);

  json asym = j;
  asym["G0"] = {{2.0, 0.1}, {0.2, 2.0}};
  CHECK_THROWS_AS(model_from_json(asym), domain_error);

  // round trip through the writer
  const ModelFile back = model_from_json(to_json(m));
  CHECK(back.s0 == m.s0);
  CHECK(back.gUU == m.gUU);
}

TEST_CASE("trajectory csv formatting") {
  const HeisenbergParams p;
  const Trajectory traj =
      integrate(heisenberg_initial_state(p), 1e-2, 10, IntegratorMethod::rk4);
  std::vector<std::pair<double, double>> nk(traj.states.size(), {0.0, 0.0});
  std::ostringstream os1, os2;
  write_trajectory_csv(os1, traj, nk);
  write_trajectory_csv(os2, traj, nk);
  CHECK(os1.str() == os2.str());  // byte-identical reruns

  std::istringstream in(os1.str());
  std::string line;
  int rows = 0;
  std::getline(in, line);
  CHECK(line.substr(0, 19) == std::string("s,g_UU,g_UV,g_VV,h2"));
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 11);

  // 17 significant digits survive a parse round trip
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
  CHECK(std::stod(format_double(traj.states.back().gUU())) == traj.states.back().gUU());
}
