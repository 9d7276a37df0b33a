#pragma once

#include <nlohmann/json.hpp>

#include <memory>
#include <string>

#include "cpcert/coupling.hpp"

namespace cpcert {

using json = nlohmann::ordered_json;

// Matrix encoding (bit-exact file-format contract): row-major [re, im] pairs.
//   {"rows": r, "cols": c, "data": [[re, im], ...]}
json mat_to_json(const Mat& a);
Mat mat_from_json(const json& j);

json real_vec_to_json(const RealVec& v);

json algebra_to_json(const AlgebraSpec& spec);
AlgebraSpec algebra_from_json(const json& j);

// {"schema": "cpcert/channel-v1", "algebra": {...}, "label": "...", "kraus": [matrix...]}
json channel_to_json(const KrausChannel& ch);
KrausChannel channel_from_json(const json& j, const Tolerance& tol, bool require_unital = true);

// {"schema": "cpcert/state-v1", "algebra": {...}?, "state": matrix}
json state_to_json(const DensityState& phi, const AlgebraSpec* spec = nullptr);
DensityState state_from_json(const json& j, const Tolerance& tol);
// nullopt when the file carries no algebra.
std::shared_ptr<const AlgebraModel> state_algebra_from_json(const json& j);

// {"schema": "cpcert/coupling-v1", "algebra": {...}, "coupling": matrix, "state": matrix}
json coupling_to_json(const AlgebraSpec& spec, const CouplingState& d, const DensityState& phi);

json tolerance_to_json(const Tolerance& tol);

// Kernel element on C^d (x) H rendered as a d x d grid of N x N matrices.
json kernel_element_to_json(const Mat& lambda, Index d, Index n);

json certificate_to_json(const Certificate& cert, Index carrier_dim);
json phi_certificate_to_json(const PhiCertificate& cert, Index carrier_dim);

json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace cpcert
