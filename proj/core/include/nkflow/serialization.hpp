#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "nkflow/evolution.hpp"
#include "nkflow/heisenberg.hpp"

namespace nkflow {

using json = nlohmann::json;

// Coframe: {"dim": n, "labels": [...], "d": {"k": [[i, j, value], ...]}, "s_index": m|null}
json to_json(const Coframe& frame);
Coframe coframe_from_json(const json& j);

// Form: {"dim": n, "grade": k, "coeffs": {"i,j,...": [val, dds]}}
json to_json(const Form& f);
Form form_from_json(const json& j);
Form form_from_json(const json& j, int dim);  // dim supplied by context

// ReducedData mirrors its fields.
json to_json(const ReducedData& r);
ReducedData reduced_data_from_json(const json& j);

json to_json(const ResidualEntry& e);

// Model input: {"frame3": Coframe, "alpha0": [3], "alpha1": [3], "alpha2": [3],
//               "G0": [[gUU,gUV],[gUV,gVV]], "f": x|null, "s0": x|null,
//               "periods_integral": bool}
json to_json(const ModelFile& m);
ModelFile model_from_json(const json& j);
ModelFile load_model(const std::string& path);

/// Full double precision (17 significant digits) so comparisons stay bit-stable.
std::string format_double(double v);

/// Trajectory CSV: s, g_UU, g_UV, g_VV, h2, nine alpha coefficients,
/// six theta coefficients, nk_r1, nk_r2.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::pair<double, double>>& nk_residuals);
json trajectory_to_json(const Trajectory& traj,
                        const std::vector<std::pair<double, double>>& nk_residuals);

}  // namespace nkflow
