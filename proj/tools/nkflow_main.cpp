// nkflow - verification suites, evolution runs and oracle comparisons for
// nearly Kahler structures with two-torus symmetry.
//
// Exit codes: 0 success, 1 residual over threshold, 2 domain error,
// 3 integrator abort (partial output written). Usage errors follow CLI11.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include "nkflow/serialization.hpp"

using namespace nkflow;

namespace {

struct Thresholds {
  double structural = 1e-9;
  double laplace = 1e-8;
  double ode = 1e-7;
};

struct Options {
  std::string preset;
  std::string model_path;
  double C = 2.0;
  double s0 = 1.0;
  int grid = 50;
  double s_start = 0.0;  // 0 = default to s0
  double s_end = 0.0;    // 0 = command-specific default
  int steps = 300;
  std::string method = "rk4";
  std::string out;
  std::string format = "csv";
  Thresholds thresholds;
};

int thread_count() {
  if (const char* env = std::getenv("NK_FLOW_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

/// Evaluate fn(i) for i in [0, n) on up to NK_FLOW_THREADS workers;
/// results land in index order, so output files stay ordered by s.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  const int workers = std::min(thread_count(), n > 0 ? n : 1);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

IntegratorMethod parse_method(const std::string& m) {
  if (m == "euler") return IntegratorMethod::euler;
  if (m == "rk4") return IntegratorMethod::rk4;
  throw domain_error("unknown method '" + m + "'");
}

void write_report(const Options& opt, const std::vector<ResidualEntry>& entries) {
  if (opt.out.empty()) return;
  std::ofstream os(opt.out);
  if (!os) throw domain_error("cannot open output file: " + opt.out);
  if (opt.format == "json") {
    json arr = json::array();
    for (const auto& e : entries) arr.push_back(to_json(e));
    os << arr.dump(2) << '\n';
  } else {
    os << "check,residual,s\n";
    for (const auto& e : entries)
      os << e.check << ',' << format_double(e.residual) << ',' << format_double(e.s) << '\n';
  }
}

/// Drop ds-channel terms of a 2-form on the assembled 6-frame and pull the
/// base part back to the 3-dimensional coframe.
Form base_part(const Form& f6) {
  Form out(3, 2);
  for (const auto& [m, c] : f6.coeffs())
    if ((m & 1u) == 0) out.set(m >> 3, c);
  return out;
}

/// Oracle fed from optional spatial-derivative rows of a model file.
struct FileOracle final : DerivativeOracle {
  std::array<std::optional<std::array<double, 3>>, 4> rows{};  // gUU, gUV, gVV, h2

  static Form to_form(const std::optional<std::array<double, 3>>& row, int dim) {
    Form f(dim, 1);
    if (row)
      for (int i = 0; i < 3; ++i)
        if ((*row)[static_cast<size_t>(i)] != 0.0)
          f.set(Mask{1} << i, Jet{(*row)[static_cast<size_t>(i)]});
    return f;
  }
  Form d_gUU(const EvolutionState& st) const override { return to_form(rows[0], st.frame3.dim); }
  Form d_gUV(const EvolutionState& st) const override { return to_form(rows[1], st.frame3.dim); }
  Form d_gVV(const EvolutionState& st) const override { return to_form(rows[2], st.frame3.dim); }
  Form d_h2(const EvolutionState& st) const override { return to_form(rows[3], st.frame3.dim); }
};

struct LoadedModel {
  ModelFile model;
  FileOracle oracle;
};

LoadedModel load_model_with_oracle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot open model file: " + path);
  json j;
  in >> j;
  LoadedModel lm;
  lm.model = model_from_json(j);
  const char* keys[4] = {"d_gUU", "d_gUV", "d_gVV", "d_h2"};
  for (int i = 0; i < 4; ++i)
    if (j.contains(keys[i]) && !j.at(keys[i]).is_null()) {
      const auto row = j.at(keys[i]).get<std::vector<double>>();
      if (row.size() != 3) throw domain_error("model: spatial derivative rows need 3 entries");
      lm.oracle.rows[static_cast<size_t>(i)] = {{row[0], row[1], row[2]}};
    }
  return lm;
}

void collect_state_checks(const EvolutionState& st, const DerivativeOracle& oracle,
                          std::vector<ResidualEntry>& out) {
  const double s = st.s;
  const ReducedData r = to_reduced_data(st, oracle);
  const SU3Structure s6 = assemble_six(r, build_frame6(st, oracle));

  for (const auto& e : su3_compatibility(s6).entries) out.push_back({e.check, e.residual, s});
  const auto [r1, r2] = nk_residual(s6);
  out.push_back({"nk_dsigma", r1, s});
  out.push_back({"nk_dpsi_minus", r2, s});
  out.push_back({"moment_gradient", check_moment_gradient(s6, fiber_action()), s});
  out.push_back({"useful_formula", check_useful_formula(s6, fiber_action()), s});

  const Jet lap = laplacian_of_s(s6);
  out.push_back({"laplace_eigenvalue", std::abs(lap.val - 24.0 * s) / (24.0 * s), s});

  // spatial df = -4 s^2/(h^2-s^2)^2 d(h^2); zero for invariant data
  Form df3(r.frame3.dim, 1);
  const Form dh2 = oracle.d_h2(st);
  if (!dh2.empty()) {
    const double h2 = st.h2();
    df3 = Jet{-4.0 * s * s / ((h2 - s * s) * (h2 - s * s))} * dh2;
  }
  const Q3Residuals q = check_q3_relations(r.f, r.alpha, r.frame3, df3);
  out.push_back({"q3_dalpha0", q.r0, s});
  out.push_back({"q3_dalpha1_wedge", q.r1, s});
  out.push_back({"q3_dalpha2_wedge", q.r2, s});

  const auto [t1, t2] = curvature_forms(st, oracle);
  const LevelSetResiduals ls = check_level_set_relations(r, t1, t2);
  out.push_back({"level_set_theta1", ls.r1, s});
  out.push_back({"level_set_theta2", ls.r2, s});

  const auto [c1, c2] = check_closure(st, oracle);
  out.push_back({"closure_theta1", c1, s});
  out.push_back({"closure_theta2", c2, s});
}

void collect_preset_checks(const HeisenbergParams& p, double s, std::vector<ResidualEntry>& out) {
  const SU3Structure s6 = heisenberg_structure(p, s);
  for (const auto& e : su3_compatibility(s6).entries) out.push_back({e.check, e.residual, s});
  const auto [r1, r2] = nk_residual(s6);
  out.push_back({"nk_dsigma", r1, s});
  out.push_back({"nk_dpsi_minus", r2, s});
  out.push_back({"moment_gradient", check_moment_gradient(s6, fiber_action()), s});
  out.push_back({"useful_formula", check_useful_formula(s6, fiber_action()), s});
  const Jet lap = laplacian_of_s(s6);
  out.push_back({"laplace_eigenvalue", std::abs(lap.val - 24.0 * s) / (24.0 * s), s});

  const ReducedData r = heisenberg_reduced_data(p, s);
  const Q3Residuals q = check_q3_relations(r.f, r.alpha, r.frame3);
  out.push_back({"q3_dalpha0", q.r0, s});
  out.push_back({"q3_dalpha1_wedge", q.r1, s});
  out.push_back({"q3_dalpha2_wedge", q.r2, s});

  // d(theta_k) from the independently built frame, restricted to the base
  const Coframe frame6 = heisenberg_frame6(p, s);
  const LevelSetResiduals ls =
      check_level_set_relations(r, base_part(frame6.d_basis(1)), base_part(frame6.d_basis(2)));
  out.push_back({"level_set_theta1", ls.r1, s});
  out.push_back({"level_set_theta2", ls.r2, s});

  // beta-frame equivalence: d beta0 = (1/f) beta1 ^ beta2
  const auto beta = to_beta_frame(r.f, r.alpha);
  Form bres = ext_d_structure(beta[0], r.frame3);
  bres -= Jet{1.0} / r.f * wedge(beta[1], beta[2]);
  out.push_back({"beta_frame", bres.max_abs(), s});

  EvolutionState st;
  st.s = s;
  st.frame3 = r.frame3;
  st.G = JetMatrix(2, 2);
  st.G.at(0, 0) = r.G.at(0, 0);
  st.G.at(1, 1) = r.G.at(1, 1);
  st.alpha = {{{r.alpha[0].coeff(1).val, 0.0, 0.0},
               {0.0, r.alpha[1].coeff(2).val, 0.0},
               {0.0, 0.0, r.alpha[2].coeff(4).val}}};
  const auto [c1, c2] = check_closure(st);
  out.push_back({"closure_theta1", c1, s});
  out.push_back({"closure_theta2", c2, s});
}

double threshold_for(const Thresholds& t, const std::string& check) {
  return check == "laplace_eigenvalue" ? t.laplace : t.structural;
}

/// A reduced-data file carries forms and jets; the flow state keeps the
/// values and re-derives the jet channels from the coefficient system.
EvolutionState state_from_reduced(const ReducedData& r) {
  EvolutionState st;
  st.s = r.s;
  st.frame3 = r.frame3;
  st.G = JetMatrix(2, 2);
  st.G.at(0, 0) = Jet{r.gUU().val};
  st.G.at(0, 1) = st.G.at(1, 0) = Jet{r.gUV().val};
  st.G.at(1, 1) = Jet{r.gVV().val};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      st.alpha[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          r.alpha[static_cast<size_t>(i)].coeff(Mask{1} << j).val;
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 3; ++j)
      st.theta[static_cast<size_t>(k)][static_cast<size_t>(j)] =
          r.theta[static_cast<size_t>(k)].coeff(Mask{1} << j).val;
  st.validate();
  return st;
}

int cmd_verify(const Options& opt) {
  std::vector<ResidualEntry> entries;
  if (!opt.model_path.empty()) {
    std::ifstream probe(opt.model_path);
    if (!probe) throw domain_error("cannot open model file: " + opt.model_path);
    json j;
    probe >> j;
    if (j.contains("G") && !j.contains("G0")) {
      // serialized reduced data at a single level
      const ReducedData r = reduced_data_from_json(j);
      r.validate();
      collect_state_checks(state_from_reduced(r), zero_oracle(), entries);
    } else {
      const LoadedModel lm = load_model_with_oracle(opt.model_path);
      const EvolutionState st = lm.model.initial_state();
      collect_state_checks(st, lm.oracle, entries);
    }
  } else {
    const HeisenbergParams p = HeisenbergParams::standard(opt.C, opt.s0);
    const double start = opt.s_start != 0.0 ? opt.s_start : p.s0;
    double end = opt.s_end;
    if (end == 0.0) end = std::min(start + 0.35, std::sqrt(p.C) * (1.0 - 1e-6));
    p.check_level(start);
    p.check_level(end);
    const int n = std::max(1, opt.grid);
    std::vector<std::vector<ResidualEntry>> per_point(static_cast<size_t>(n));
    std::string error_message;
    parallel_for(n, [&](int i) {
      const double s = n == 1 ? start : start + (end - start) * i / (n - 1);
      try {
        collect_preset_checks(p, s, per_point[static_cast<size_t>(i)]);
      } catch (const std::exception& e) {
        error_message = e.what();
      }
    });
    if (!error_message.empty()) throw domain_error(error_message);
    for (auto& v : per_point) entries.insert(entries.end(), v.begin(), v.end());
  }

  double worst = 0.0;
  std::vector<std::string> failures;
  for (const auto& e : entries) {
    worst = std::max(worst, e.residual);
    if (e.residual > threshold_for(opt.thresholds, e.check))
      failures.push_back(e.check + " at s=" + format_double(e.s)
                         + " residual=" + format_double(e.residual));
  }
  std::cout << "verify: " << entries.size() << " checks";
  if (failures.empty()) {
    std::cout << ", all within thresholds (worst " << format_double(worst) << ")\n";
  } else {
    std::cout << ", " << failures.size() << " over threshold\n";
    for (const auto& f : failures) std::cout << "  FAIL " << f << '\n';
  }
  write_report(opt, entries);
  return failures.empty() ? 0 : 1;
}

int cmd_evolve(const Options& opt) {
  EvolutionState st0;
  FileOracle file_oracle;
  const DerivativeOracle* oracle = &zero_oracle();
  bool periods = true;
  if (!opt.model_path.empty()) {
    LoadedModel lm = load_model_with_oracle(opt.model_path);
    st0 = lm.model.initial_state();
    file_oracle = lm.oracle;
    oracle = &file_oracle;
    periods = lm.model.periods_integral;
  } else {
    const HeisenbergParams p = HeisenbergParams::standard(opt.C, opt.s0);
    st0 = heisenberg_initial_state(p);
  }
  if (!periods)
    std::cerr << "warning: periods_integral=false, the connection is only locally defined\n";

  const double end = opt.s_end != 0.0 ? opt.s_end : st0.s + 0.3;
  const double ds = (end - st0.s) / opt.steps;
  const Trajectory traj = integrate(st0, ds, opt.steps, parse_method(opt.method), *oracle);

  std::vector<std::pair<double, double>> nk(traj.states.size());
  parallel_for(static_cast<int>(traj.states.size()), [&](int i) {
    try {
      nk[static_cast<size_t>(i)] =
          nk_residual(assemble_state_structure(traj.states[static_cast<size_t>(i)], *oracle));
    } catch (const std::exception&) {
      nk[static_cast<size_t>(i)] = {-1.0, -1.0};
    }
  });

  const std::string path = opt.out.empty() ? "trajectory." + opt.format : opt.out;
  std::ofstream os(path);
  if (!os) throw domain_error("cannot open output file: " + path);
  if (opt.format == "json")
    os << trajectory_to_json(traj, nk).dump(2) << '\n';
  else
    write_trajectory_csv(os, traj, nk);

  std::cout << "evolve: wrote " << traj.states.size() << " rows to " << path << '\n';
  if (traj.aborted) {
    std::cerr << "integrator aborted at s=" << format_double(traj.abort_s) << ": "
              << traj.abort_reason << '\n';
    return 3;
  }
  return 0;
}

int cmd_compare(const Options& opt) {
  if (!opt.model_path.empty())
    throw domain_error("compare runs against the closed forms; only --preset heisenberg");
  const HeisenbergParams p = HeisenbergParams::standard(opt.C, opt.s0);
  const double end = opt.s_end != 0.0 ? opt.s_end : 1.3;
  const CompareReport rep = compare_ode_vs_closed(p, end, opt.steps, parse_method(opt.method));

  json out = json::object();
  for (const auto& ch : rep.channels) out[ch.name] = ch.max_rel_err;
  out["threshold"] = opt.thresholds.ode;
  out["profiles_within_threshold"] = rep.max_over_profiles() < opt.thresholds.ode;
  std::cout << out.dump(2) << '\n';
  if (!opt.out.empty()) {
    std::ofstream os(opt.out);
    if (!os) throw domain_error("cannot open output file: " + opt.out);
    os << out.dump(2) << '\n';
  }
  return 0;
}

int cmd_export(const Options& opt) {
  if (!opt.model_path.empty())
    throw domain_error("export emits the closed-form profiles; only --preset heisenberg");
  const HeisenbergParams p = HeisenbergParams::standard(opt.C, opt.s0);
  const double start = opt.s_start != 0.0 ? opt.s_start : p.s0;
  double end = opt.s_end;
  if (end == 0.0) end = std::min(start + 0.35, std::sqrt(p.C) * (1.0 - 1e-6));
  p.check_level(start);
  p.check_level(end);
  const int n = std::max(1, opt.grid);

  struct Row {
    double s;
    const char* quantity;
    double value;
  };
  std::vector<std::vector<Row>> rows(static_cast<size_t>(n));
  parallel_for(n, [&](int i) {
    const double s = n == 1 ? start : start + (end - start) * i / (n - 1);
    const ClosedFormProfiles cf = closed_form_profiles(p, s);
    const SU3Structure s6 = heisenberg_structure(p, s);
    auto& r = rows[static_cast<size_t>(i)];
    r.push_back({s, "h", cf.h.val});
    r.push_back({s, "f0", cf.f0.val});
    r.push_back({s, "f1", cf.f1.val});
    r.push_back({s, "f2", cf.f2.val});
    r.push_back({s, "g_ds_ds", s6.g.at(0, 0).val});
    r.push_back({s, "g_theta_theta", s6.g.at(1, 1).val});
    r.push_back({s, "g_sigma0_sigma0", s6.g.at(3, 3).val});
    r.push_back({s, "g_sigma1_sigma1", s6.g.at(4, 4).val});
  });

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!opt.out.empty()) {
    file.open(opt.out);
    if (!file) throw domain_error("cannot open output file: " + opt.out);
    os = &file;
  }
  *os << "s,quantity,value\n";
  for (const auto& chunk : rows)
    for (const Row& r : chunk)
      *os << format_double(r.s) << ',' << r.quantity << ',' << format_double(r.value) << '\n';
  if (!opt.out.empty()) std::cout << "export: wrote " << n * 8 << " rows to " << opt.out << '\n';
  return 0;
}

void add_common(CLI::App* cmd, Options& opt, bool with_grid, bool with_steps) {
  cmd->add_option("--preset", opt.preset, "built-in model family (heisenberg)")
      ->check(CLI::IsMember({"heisenberg"}));
  cmd->add_option("--model", opt.model_path, "model file (JSON)");
  cmd->add_option("--C", opt.C, "family constant C = s0 h(s0)");
  cmd->add_option("--s0", opt.s0, "initial level");
  if (with_grid)
    cmd->add_option("--grid", opt.grid, "number of grid points")->check(CLI::PositiveNumber);
  cmd->add_option("--s-start", opt.s_start, "first level (defaults to s0)");
  cmd->add_option("--s-end", opt.s_end, "last level");
  if (with_steps)
    cmd->add_option("--steps", opt.steps, "integration step count")->check(CLI::PositiveNumber);
  cmd->add_option("--method", opt.method, "integrator: rk4 or euler")
      ->check(CLI::IsMember({"euler", "rk4"}));
  cmd->add_option("--out", opt.out, "output file");
  cmd->add_option("--format", opt.format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threshold-structural", opt.thresholds.structural,
                  "structure/reduction residual threshold (default 1e-9)");
  cmd->add_option("--threshold-laplace", opt.thresholds.laplace,
                  "relative Laplace eigenvalue threshold (default 1e-8)");
  cmd->add_option("--threshold-ode", opt.thresholds.ode,
                  "flow-vs-closed-form threshold (default 1e-7)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nearly Kahler torus-symmetry engine"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* verify = app.add_subcommand("verify", "run the residual suite over a level grid");
  add_common(verify, opt, true, false);
  CLI::App* evolve = app.add_subcommand("evolve", "integrate the flow and write a trajectory");
  add_common(evolve, opt, false, true);
  CLI::App* compare = app.add_subcommand("compare", "integrate and compare with closed forms");
  add_common(compare, opt, false, true);
  CLI::App* exp = app.add_subcommand("export", "emit profile/metric data for plotting");
  add_common(exp, opt, true, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) return cmd_verify(opt);
    if (evolve->parsed()) return cmd_evolve(opt);
    if (compare->parsed()) return cmd_compare(opt);
    if (exp->parsed()) return cmd_export(opt);
  } catch (const domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 2;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
