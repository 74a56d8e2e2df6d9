#include "nkflow/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "nkflow/errors.hpp"

namespace nkflow {

json to_json(const Coframe& frame) {
  json d = json::object();
  for (int k = 0; k < frame.dim; ++k) {
    const Form& de = frame.d_basis(k);
    if (de.empty()) continue;
    json rows = json::array();
    for (const auto& [m, c] : de.coeffs()) {
      const auto idx = mask_indices(m);
      rows.push_back({idx[0], idx[1], c.val});
    }
    d[std::to_string(k)] = rows;
  }
  json j{{"dim", frame.dim}, {"labels", frame.labels}, {"d", d}};
  if (frame.s_index)
    j["s_index"] = *frame.s_index;
  else
    j["s_index"] = nullptr;
  return j;
}

Coframe coframe_from_json(const json& j) {
  std::vector<std::string> labels = j.at("labels").get<std::vector<std::string>>();
  if (static_cast<int>(labels.size()) != j.at("dim").get<int>())
    throw domain_error("coframe json: dim does not match labels");
  std::optional<int> s_index;
  if (j.contains("s_index") && !j.at("s_index").is_null()) s_index = j.at("s_index").get<int>();
  Coframe frame(labels, s_index);
  if (j.contains("d")) {
    for (const auto& [key, rows] : j.at("d").items()) {
      const int k = std::stoi(key);
      if (k < 0 || k >= frame.dim) throw domain_error("coframe json: basis index out of range");
      Form de(frame.dim, 2);
      for (const auto& row : rows) {
        const int a = row.at(0).get<int>(), b = row.at(1).get<int>();
        const double v = row.at(2).get<double>();
        if (a == b) throw domain_error("coframe json: repeated index in structure pair");
        de.add_to(mask_of({std::min(a, b), std::max(a, b)}), a < b ? Jet{v} : Jet{-v});
      }
      frame.set_d_basis(k, de);
    }
  }
  return frame;
}

namespace {

std::string mask_key(Mask m) {
  std::string key;
  for (int i : mask_indices(m)) {
    if (!key.empty()) key += ',';
    key += std::to_string(i);
  }
  return key;
}

}  // namespace

json to_json(const Form& f) {
  json coeffs = json::object();
  for (const auto& [m, c] : f.coeffs()) coeffs[mask_key(m)] = {c.val, c.dds};
  return {{"dim", f.dim()}, {"grade", f.grade()}, {"coeffs", coeffs}};
}

Form form_from_json(const json& j, int dim) {
  Form f(dim, j.at("grade").get<int>());
  if (j.contains("coeffs"))
    for (const auto& [key, val] : j.at("coeffs").items()) {
      std::vector<int> idx;
      std::stringstream ss(key);
      std::string tok;
      while (std::getline(ss, tok, ',')) idx.push_back(std::stoi(tok));
      f.set(mask_of(idx), Jet{val.at(0).get<double>(), val.at(1).get<double>()});
    }
  return f;
}

Form form_from_json(const json& j) {
  if (!j.contains("dim")) throw domain_error("form json: missing dim");
  return form_from_json(j, j.at("dim").get<int>());
}

json to_json(const ReducedData& r) {
  json g = json::array();
  for (int i = 0; i < 2; ++i) {
    json row = json::array();
    for (int k = 0; k < 2; ++k) row.push_back({r.G.at(i, k).val, r.G.at(i, k).dds});
    g.push_back(row);
  }
  return {{"s", r.s},
          {"G", g},
          {"alpha", {to_json(r.alpha[0]), to_json(r.alpha[1]), to_json(r.alpha[2])}},
          {"theta", {to_json(r.theta[0]), to_json(r.theta[1])}},
          {"f", {r.f.val, r.f.dds}},
          {"frame3", to_json(r.frame3)}};
}

ReducedData reduced_data_from_json(const json& j) {
  ReducedData r;
  r.s = j.at("s").get<double>();
  r.frame3 = coframe_from_json(j.at("frame3"));
  r.G = JetMatrix(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) {
      const auto& cell = j.at("G").at(i).at(k);
      r.G.at(i, k) = Jet{cell.at(0).get<double>(), cell.at(1).get<double>()};
    }
  for (int i = 0; i < 3; ++i) r.alpha[static_cast<size_t>(i)] = form_from_json(j.at("alpha").at(i), r.frame3.dim);
  for (int i = 0; i < 2; ++i) r.theta[static_cast<size_t>(i)] = form_from_json(j.at("theta").at(i), r.frame3.dim);
  r.f = Jet{j.at("f").at(0).get<double>(), j.at("f").at(1).get<double>()};
  return r;
}

json to_json(const ResidualEntry& e) {
  return {{"check", e.check}, {"residual", e.residual}, {"s", e.s}};
}

json to_json(const ModelFile& m) {
  json j{{"frame3", to_json(m.frame3)},
         {"alpha0", m.alpha[0]},
         {"alpha1", m.alpha[1]},
         {"alpha2", m.alpha[2]},
         {"G0", {{m.gUU, m.gUV}, {m.gUV, m.gVV}}},
         {"periods_integral", m.periods_integral}};
  j["f"] = m.f ? json(*m.f) : json(nullptr);
  j["s0"] = m.s0 ? json(*m.s0) : json(nullptr);
  return j;
}

ModelFile model_from_json(const json& j) {
  ModelFile m;
  m.frame3 = coframe_from_json(j.at("frame3"));
  if (m.frame3.dim != 3) throw domain_error("model: frame3 must be 3-dimensional");
  for (int i = 0; i < 3; ++i) {
    const auto row = j.at("alpha" + std::to_string(i)).get<std::vector<double>>();
    if (row.size() != 3) throw domain_error("model: alpha rows must have 3 entries");
    for (int k = 0; k < 3; ++k) m.alpha[static_cast<size_t>(i)][static_cast<size_t>(k)] = row[static_cast<size_t>(k)];
  }
  const auto& g0 = j.at("G0");
  m.gUU = g0.at(0).at(0).get<double>();
  m.gUV = g0.at(0).at(1).get<double>();
  m.gVV = g0.at(1).at(1).get<double>();
  if (g0.at(1).at(0).get<double>() != m.gUV) throw domain_error("model: G0 must be symmetric");
  if (j.contains("f") && !j.at("f").is_null()) m.f = j.at("f").get<double>();
  if (j.contains("s0") && !j.at("s0").is_null()) m.s0 = j.at("s0").get<double>();
  if (!j.contains("periods_integral"))
    throw domain_error("model: periods_integral flag is required");
  m.periods_integral = j.at("periods_integral").get<bool>();
  return m;
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot open model file: " + path);
  json j;
  in >> j;
  return model_from_json(j);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void append_row(std::ostream& os, const EvolutionState& st, double r1, double r2) {
  os << format_double(st.s) << ',' << format_double(st.gUU()) << ',' << format_double(st.gUV())
     << ',' << format_double(st.gVV()) << ',' << format_double(st.h2());
  for (const auto& row : st.alpha)
    for (double v : row) os << ',' << format_double(v);
  for (const auto& row : st.theta)
    for (double v : row) os << ',' << format_double(v);
  os << ',' << format_double(r1) << ',' << format_double(r2) << '\n';
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::pair<double, double>>& nk_residuals) {
  os << "s,g_UU,g_UV,g_VV,h2";
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) os << ",alpha" << i << '_' << k;
  for (int i = 1; i <= 2; ++i)
    for (int k = 0; k < 3; ++k) os << ",theta" << i << '_' << k;
  os << ",nk_r1,nk_r2\n";
  for (size_t i = 0; i < traj.states.size(); ++i) {
    const auto [r1, r2] = i < nk_residuals.size() ? nk_residuals[i] : std::pair<double, double>{};
    append_row(os, traj.states[i], r1, r2);
  }
}

json trajectory_to_json(const Trajectory& traj,
                        const std::vector<std::pair<double, double>>& nk_residuals) {
  json rows = json::array();
  for (size_t i = 0; i < traj.states.size(); ++i) {
    const EvolutionState& st = traj.states[i];
    json row{{"s", st.s},
             {"g_UU", st.gUU()},
             {"g_UV", st.gUV()},
             {"g_VV", st.gVV()},
             {"h2", st.h2()},
             {"alpha", st.alpha},
             {"theta", st.theta}};
    if (i < nk_residuals.size()) {
      row["nk_r1"] = nk_residuals[i].first;
      row["nk_r2"] = nk_residuals[i].second;
    }
    rows.push_back(row);
  }
  json out{{"rows", rows}, {"aborted", traj.aborted}};
  if (traj.aborted) {
    out["abort_reason"] = traj.abort_reason;
    out["abort_s"] = traj.abort_s;
  }
  return out;
}

}  // namespace nkflow
