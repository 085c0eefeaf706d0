// JSON serialization: operator coefficient files, witness dumps, solver
// results, and scan output. Coefficient files map basis label pairs "k,l"
// to the real coefficients w_kl = Tr(S_kl W), so a consumer reassembles
// the operator as W = (1/(d_A d_B)) sum_kl w_kl S_kl.

#pragma once

#include "qkdverify/scan.hpp"
#include "qkdverify/verifier.hpp"

#include <json.hpp>

namespace qkdverify {

namespace detail {

inline const OperatorBasis& skl_basis() {
  static const OperatorBasis basis = product_basis(pauli_basis(), gellmann_basis());
  return basis;
}

}  // namespace detail

using json = nlohmann::ordered_json;

/// Coefficients of a dim-6 operator in the S_kl product basis, keyed by
/// the "k,l" labels.
inline json coeffs_to_json(const HermitianOp& op) {
  const auto& basis = detail::skl_basis();
  const CoeffVector c = expand(op, basis);
  json out = json::object();
  for (size_t i = 0; i < basis.labels.size(); ++i)
    out[basis.labels[i]] = c(static_cast<Eigen::Index>(i));
  return out;
}

inline HermitianOp coeffs_from_json(const json& j) {
  const auto& basis = detail::skl_basis();
  CoeffVector c = CoeffVector::Zero(static_cast<Eigen::Index>(basis.labels.size()));
  for (size_t i = 0; i < basis.labels.size(); ++i)
    if (j.contains(basis.labels[i])) c(static_cast<Eigen::Index>(i)) = j.at(basis.labels[i]);
  return assemble(c, basis);
}

inline json witness_to_json(const Witness& w, double t_star) {
  json out;
  out["kind"] = to_string(w.kind);
  out["normalization"] = "W = (1/(d_A*d_B)) * sum_kl w[k,l] * S_kl";
  out["coefficients"] = coeffs_to_json(w.op);
  out["value"] = w.value;
  out["t_star"] = t_star;
  out["trace"] = w.trace;
  out["valid"] = w.valid;
  out["certificate"] = {{"min_eigenvalue_1", w.cert_min_eig_1},
                        {"min_eigenvalue_2", w.cert_min_eig_2}};
  out["free_direction_max_overlap"] = w.free_dir_overlap;
  return out;
}

inline json sdp_result_to_json(const SdpResult& r) {
  json out;
  out["status"] = to_string(r.status);
  out["iterations"] = r.iterations;
  out["primal_value"] = r.primal_value;
  out["dual_value"] = r.dual_value;
  out["gap"] = r.gap;
  out["x"] = std::vector<double>(r.x.data(), r.x.data() + r.x.size());
  std::vector<std::vector<double>> z(r.Z.rows());
  for (Eigen::Index i = 0; i < r.Z.rows(); ++i)
    z[i] = std::vector<double>(r.Z.row(i).data(), r.Z.row(i).data() + r.Z.cols());
  out["Z"] = z;
  return out;
}

inline json verdict_to_json(const VerdictReport& report) {
  json out;
  out["mode"] = to_string(report.mode);
  out["decision"] = to_string(report.decision);
  out["t_star"] = report.t_star;
  out["facially_reduced"] = report.facially_reduced;
  out["solver"] = {{"status", to_string(report.solver.status)},
                   {"iterations", report.solver.iterations},
                   {"gap", report.solver.gap},
                   {"primal_value", report.solver.primal_value},
                   {"dual_value", report.solver.dual_value}};
  out["witness"] = witness_to_json(report.witness, report.t_star);
  return out;
}

inline json scan_to_json(const ScanConfig& cfg, const std::vector<ScanRow>& rows) {
  json out;
  out["config"] = {{"protocol", cfg.protocol},
                   {"mode", to_string(cfg.mode)},
                   {"theta", cfg.theta},
                   {"p_min", cfg.p_min},
                   {"p_max", cfg.p_max},
                   {"p_steps", cfg.p_steps},
                   {"tol", cfg.tol}};
  if (cfg.alpha) out["config"]["alpha"] = *cfg.alpha;
  out["rows"] = json::array();
  for (const auto& r : rows)
    out["rows"].push_back({{"p", r.p},
                           {"e_star", r.e_star},
                           {"qber_star", r.qber_star},
                           {"status", r.status},
                           {"iterations", r.iterations}});
  return out;
}

}  // namespace qkdverify
