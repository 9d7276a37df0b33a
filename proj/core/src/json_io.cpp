#include "cpcert/json_io.hpp"

#include <fstream>

namespace cpcert {

json mat_to_json(const Mat& a) {
  json data = json::array();
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      data.push_back(json::array({a(i, j).real(), a(i, j).imag()}));
  return json{{"rows", a.rows()}, {"cols", a.cols()}, {"data", std::move(data)}};
}

Mat mat_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw PreconditionError("matrix object needs rows, cols and data");
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols)
    throw PreconditionError("matrix data length must equal rows*cols");
  Mat a(rows, cols);
  Index k = 0;
  for (const auto& entry : data) {
    if (!entry.is_array() || entry.size() != 2)
      throw PreconditionError("matrix entries must be [re, im] pairs");
    a(k / cols, k % cols) = Complex(entry[0].get<double>(), entry[1].get<double>());
    ++k;
  }
  return a;
}

json real_vec_to_json(const RealVec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json algebra_to_json(const AlgebraSpec& spec) {
  json blocks = json::array();
  for (const auto& b : spec.blocks)
    blocks.push_back(json{{"dim", b.dim}, {"multiplicity", b.multiplicity}});
  return json{{"blocks", std::move(blocks)}};
}

AlgebraSpec algebra_from_json(const json& j) {
  if (!j.is_object() || !j.contains("blocks"))
    throw PreconditionError("algebra object needs a blocks array");
  AlgebraSpec spec;
  for (const auto& b : j.at("blocks"))
    spec.blocks.push_back(Block{b.at("dim").get<Index>(), b.at("multiplicity").get<Index>()});
  spec.validate();
  return spec;
}

json channel_to_json(const KrausChannel& ch) {
  json kraus = json::array();
  for (const Mat& v : ch.kraus()) kraus.push_back(mat_to_json(v));
  return json{{"schema", "cpcert/channel-v1"},
              {"algebra", algebra_to_json(ch.algebra().spec())},
              {"label", ch.label()},
              {"kraus", std::move(kraus)}};
}

KrausChannel channel_from_json(const json& j, const Tolerance& tol, bool require_unital) {
  if (!j.is_object() || !j.contains("algebra") || !j.contains("kraus"))
    throw PreconditionError("channel file needs algebra and kraus fields");
  auto algebra = std::make_shared<const AlgebraModel>(
      AlgebraModel::build(algebra_from_json(j.at("algebra"))));
  std::vector<Mat> kraus;
  for (const auto& m : j.at("kraus")) kraus.push_back(mat_from_json(m));
  const std::string label = j.value("label", std::string{});
  return KrausChannel(std::move(algebra), std::move(kraus), label, tol, require_unital);
}

json state_to_json(const DensityState& phi, const AlgebraSpec* spec) {
  json out{{"schema", "cpcert/state-v1"}};
  if (spec) out["algebra"] = algebra_to_json(*spec);
  out["state"] = mat_to_json(phi.rho);
  return out;
}

DensityState state_from_json(const json& j, const Tolerance& tol) {
  if (!j.is_object() || !j.contains("state"))
    throw PreconditionError("state file needs a state field");
  return make_density(mat_from_json(j.at("state")), tol);
}

std::shared_ptr<const AlgebraModel> state_algebra_from_json(const json& j) {
  if (!j.is_object() || !j.contains("algebra")) return nullptr;
  return std::make_shared<const AlgebraModel>(AlgebraModel::build(algebra_from_json(j.at("algebra"))));
}

json coupling_to_json(const AlgebraSpec& spec, const CouplingState& d, const DensityState& phi) {
  return json{{"schema", "cpcert/coupling-v1"},
              {"algebra", algebra_to_json(spec)},
              {"coupling", mat_to_json(d.density)},
              {"state", mat_to_json(phi.rho)}};
}

json tolerance_to_json(const Tolerance& tol) {
  return json{{"rank_tol", tol.rank_tol},
              {"residual_tol", tol.residual_tol},
              {"indeterminate_band", tol.indeterminate_band}};
}

json kernel_element_to_json(const Mat& lambda, Index d, Index n) {
  json rows = json::array();
  for (Index k = 0; k < d; ++k) {
    json cols = json::array();
    for (Index j = 0; j < d; ++j) cols.push_back(mat_to_json(lambda.block(k * n, j * n, n, n)));
    rows.push_back(std::move(cols));
  }
  return rows;
}

namespace {

json residuals_to_json(const std::map<std::string, double>& residuals) {
  json out = json::object();
  for (const auto& [k, v] : residuals) out[k] = v;
  return out;
}

}  // namespace

json certificate_to_json(const Certificate& cert, Index carrier_dim) {
  json kernel = json::array();
  for (const Mat& lam : cert.kernel_basis)
    kernel.push_back(kernel_element_to_json(lam, cert.d, carrier_dim));
  return json{{"verdict", to_string(cert.verdict)},
              {"kernel_dim", cert.kernel_dim},
              {"kraus_count", cert.d},
              {"index", cert.index},
              {"kernel_basis", std::move(kernel)},
              {"singular_spectrum", real_vec_to_json(cert.singular_spectrum)},
              {"residuals", residuals_to_json(cert.residuals)},
              {"notes", cert.notes}};
}

json phi_certificate_to_json(const PhiCertificate& cert, Index carrier_dim) {
  json kernel = json::array();
  for (const Mat& lam : cert.kernel_basis)
    kernel.push_back(kernel_element_to_json(lam, cert.d, carrier_dim));
  return json{{"verdict", to_string(cert.verdict)},
              {"kernel_dim", cert.kernel_dim},
              {"kraus_count", cert.d},
              {"inner", cert.inner},
              {"via_cp_certificate", cert.via_cp_certificate},
              {"kernel_basis", std::move(kernel)},
              {"singular_spectrum", real_vec_to_json(cert.singular_spectrum)},
              {"residuals", residuals_to_json(cert.residuals)},
              {"notes", cert.notes}};
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw PreconditionError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace cpcert
