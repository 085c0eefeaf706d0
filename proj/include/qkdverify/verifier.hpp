// Secret-key precondition checks. From observed correlation data this
// module builds the affine class of compatible states, then decides
//
//   two-way : does the class contain a state with positive partial
//             transpose? On H_2 (x) H_3 that is exactly separability, so
//             "no" certifies the entanglement precondition.
//   one-way : does the class contain a state with a symmetric extension
//             to two copies of Alice's system (reverse reconciliation) or
//             of Bob's (direct reconciliation)?
//
// Both questions are LMI feasibility problems solved through the t-shift
// transform; the dual solution is folded into an optimal witness operator
// whose expectation value is computable from the observed data alone and
// equals -t* at the optimum.
//
// Boundary parameters (no loss, total loss, zero error rate) make the
// compatible set lose interior: some measured PSD operator has observed
// value exactly zero, which forces its range into the kernel of every
// compatible state, so the shifted optimum is t* = 0 and the plain check
// reads Marginal on the feasible side. Those kernels are certified by the
// data, so a Marginal verdict triggers one facial-reduction pass: the
// forced null rows are added to the class as zero-valued constraints and
// the LMI blocks are restricted to their supports, after which a feasible
// class has strictly feasible points again.

#pragma once

#include "qkdverify/basis.hpp"
#include "qkdverify/channel.hpp"
#include "qkdverify/sdp.hpp"

namespace qkdverify {

enum class Mode { TwoWay, RR, DR };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::TwoWay: return "two-way";
    case Mode::RR: return "rr";
    case Mode::DR: return "dr";
  }
  return "unknown";
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "two-way") return Mode::TwoWay;
  if (s == "rr") return Mode::RR;
  if (s == "dr") return Mode::DR;
  throw std::invalid_argument("unknown mode: " + s + " (expected two-way, rr, dr)");
}

enum class Decision { PreconditionHolds, NoKey, Marginal };

inline const char* to_string(Decision d) {
  switch (d) {
    case Decision::PreconditionHolds: return "precondition-holds";
    case Decision::NoKey: return "no-key";
    case Decision::Marginal: return "marginal";
  }
  return "unknown";
}

inline constexpr double kRankTol = 1e-10;
inline constexpr double kResidualTol = 1e-8;
inline constexpr double kForcedZeroTol = 1e-11;

/// Affine set of states compatible with the data: rho_fix plus the span of
/// the free directions. rho_fix is the minimum-norm solution restricted to
/// the row space of the constraint matrix; the free directions are an
/// orthonormal basis of its null space.
struct EquivalenceClass {
  HermitianOp rho_fix;                  // dim 6
  std::vector<HermitianOp> free_dirs;   // Hilbert-Schmidt orthonormal
  int determined_dim = 0;
  double residual = 0.0;
  RMatrix rows;   // constraint rows (HS coordinates)
  RVector vals;   // observed values
};

namespace detail {

// Hilbert-Schmidt orthonormal product basis T_m = S_m / sqrt(6) on the
// 2 (x) 3 space, shared by every class computation.
inline const OperatorBasis& hs_basis() {
  static const OperatorBasis basis = [] {
    OperatorBasis b = product_basis(pauli_basis(), gellmann_basis());
    const double scale = 1.0 / std::sqrt(6.0);
    for (auto& el : b.elements) el = scale * el;
    return b;
  }();
  return basis;
}

inline RVector hs_coords(const HermitianOp& op) {
  const auto& basis = hs_basis();
  RVector c(36);
  for (int m = 0; m < 36; ++m) c(m) = hs_inner(basis.elements[m], op);
  return c;
}

inline HermitianOp from_hs_coords(const RVector& c) {
  const auto& basis = hs_basis();
  CMatrix acc = CMatrix::Zero(6, 6);
  for (int m = 0; m < 36; ++m) acc += c(m) * basis.elements[m].mat();
  return HermitianOp(acc);
}

// Constraint rows in HS coordinates plus the normalization row. Row r
// satisfies <row_r, coords(rho)> = value_r for every compatible rho.
inline std::pair<RMatrix, RVector> constraint_rows(const CorrelationData& data) {
  const size_t n_meas = data.operators.size();
  RMatrix rows(static_cast<Eigen::Index>(n_meas) + 1, 36);
  RVector vals(static_cast<Eigen::Index>(n_meas) + 1);
  rows.row(0) = hs_coords(identity_op(6)).transpose();
  vals(0) = 1.0;
  for (size_t r = 0; r < n_meas; ++r) {
    rows.row(static_cast<Eigen::Index>(r) + 1) = hs_coords(data.operators[r]).transpose();
    vals(static_cast<Eigen::Index>(r) + 1) = data.values[r];
  }
  return {rows, vals};
}

inline EquivalenceClass class_from_rows(RMatrix rows, RVector vals) {
  Eigen::JacobiSVD<RMatrix> svd(rows, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > kRankTol * std::max(1.0, sv(0))) ++rank;

  RVector x_fix = RVector::Zero(36);
  for (int i = 0; i < rank; ++i)
    x_fix += (svd.matrixU().col(i).dot(vals) / sv(i)) * svd.matrixV().col(i);

  EquivalenceClass ec;
  ec.residual = (rows * x_fix - vals).norm();
  if (ec.residual >= kResidualTol)
    throw std::invalid_argument(
        "equivalence class: inconsistent correlation data (residual " +
        std::to_string(ec.residual) + ")");
  ec.rho_fix = from_hs_coords(x_fix);
  ec.determined_dim = rank;
  for (Eigen::Index i = rank; i < 36; ++i)
    ec.free_dirs.push_back(from_hs_coords(svd.matrixV().col(i)));
  ec.rows = std::move(rows);
  ec.vals = std::move(vals);
  return ec;
}

}  // namespace detail

inline EquivalenceClass build_equivalence_class(const CorrelationData& data) {
  auto [rows, vals] = detail::constraint_rows(data);
  return detail::class_from_rows(std::move(rows), std::move(vals));
}

/// Layout of the symmetric-extension space: dims of the three factors,
/// which subsystem is copied, the swap with its copy, and the traceless
/// swap-symmetric directions G_J that parametrize the extension beyond the
/// lift of rho_AB.
struct ExtensionLayout {
  Mode mode = Mode::RR;
  std::vector<Eigen::Index> dims;     // {d_A, d_B, copy}
  int copied = 0;                     // position of the copied factor
  double d_copy = 2;
  HermitianOp swap_p;
  std::vector<HermitianOp> sym_basis; // HS-normalized, P G P = G, Tr_copy'(G) = 0
};

namespace detail {

inline const OperatorBasis& basis_for_dim(Eigen::Index d) {
  static const OperatorBasis b1 = {1, {identity_op(1)}, {"0"}};
  static const OperatorBasis b2 = pauli_basis();
  static const OperatorBasis b3 = gellmann_basis();
  switch (d) {
    case 1: return b1;
    case 2: return b2;
    case 3: return b3;
  }
  throw std::invalid_argument("basis_for_dim: unsupported dimension");
}

inline ExtensionLayout extension_layout(Mode mode, Eigen::Index d_a, Eigen::Index d_b) {
  if (mode == Mode::TwoWay)
    throw std::invalid_argument("extension layout: expected rr or dr");

  ExtensionLayout layout;
  layout.mode = mode;
  const auto& abasis = basis_for_dim(d_a);
  const auto& bbasis = basis_for_dim(d_b);

  auto normalized = [](HermitianOp g) {
    return (1.0 / std::sqrt(hs_inner(g, g))) * g;
  };

  const Eigen::Index na = d_a * d_a, nb = d_b * d_b;
  if (mode == Mode::RR) {
    layout.dims = {d_a, d_b, d_a};
    layout.copied = 0;
    layout.d_copy = static_cast<double>(d_a);
    layout.swap_p = swap_operator(layout.dims, 0, 2);
    for (Eigen::Index k = 1; k < na; ++k)
      for (Eigen::Index l = 0; l < nb; ++l)
        layout.sym_basis.push_back(normalized(
            tensor(abasis.elements[k], bbasis.elements[l], abasis.elements[k])));
    for (Eigen::Index k = 2; k < na; ++k)
      for (Eigen::Index m = 1; m < k; ++m)
        for (Eigen::Index l = 0; l < nb; ++l)
          layout.sym_basis.push_back(normalized(
              tensor(abasis.elements[m], bbasis.elements[l], abasis.elements[k]) +
              tensor(abasis.elements[k], bbasis.elements[l], abasis.elements[m])));
  } else {
    layout.dims = {d_a, d_b, d_b};
    layout.copied = 1;
    layout.d_copy = static_cast<double>(d_b);
    layout.swap_p = swap_operator(layout.dims, 1, 2);
    for (Eigen::Index k = 0; k < na; ++k) {
      for (Eigen::Index l = 1; l < nb; ++l)
        layout.sym_basis.push_back(normalized(
            tensor(abasis.elements[k], bbasis.elements[l], bbasis.elements[l])));
      for (Eigen::Index l = 2; l < nb; ++l)
        for (Eigen::Index n = 1; n < l; ++n)
          layout.sym_basis.push_back(normalized(
              tensor(abasis.elements[k], bbasis.elements[n], bbasis.elements[l]) +
              tensor(abasis.elements[k], bbasis.elements[l], bbasis.elements[n])));
    }
  }
  return layout;
}

}  // namespace detail

inline ExtensionLayout build_extension_layout(Mode mode) {
  return detail::extension_layout(mode, 2, 3);
}

/// Lift of a bipartite operator into the extension space: the unique
/// swap-symmetric operator with Tr_copy'(lift(A)) = A whose coefficients
/// vanish on all sym_basis directions,
///   lift(A) = (1/d) [ A (x) I + P (A (x) I) P - (1/d) insert(Tr_copied A) ].
inline HermitianOp lift_map(const HermitianOp& op, const ExtensionLayout& layout) {
  const Eigen::Index d_a = layout.dims[0], d_b = layout.dims[1];
  if (op.dim() != d_a * d_b) throw std::invalid_argument("lift_map: dimension mismatch");
  const double d = layout.d_copy;
  const HermitianOp copy_identity = identity_op(layout.dims[2]);
  const HermitianOp lifted = tensor(op, copy_identity);
  const HermitianOp swapped = conjugate_by(layout.swap_p.mat(), lifted);

  HermitianOp middle = (layout.mode == Mode::RR)
      ? tensor(identity_op(d_a), partial_trace(op, {d_a, d_b}, {0}), identity_op(d_a))
      : tensor(partial_trace(op, {d_a, d_b}, {1}), identity_op(d_b), identity_op(d_b));

  return (1.0 / d) * (lifted + swapped - (1.0 / d) * middle);
}

/// Adjoint of lift_map with respect to the trace inner product:
///   adjoint(U) = (1/d) [ Tr_copy'(U) + Tr_copy'(P U P)
///                        - (1/d) insert(Tr_{copy, copy'} U) ].
inline HermitianOp lift_adjoint(const HermitianOp& ext, const ExtensionLayout& layout) {
  const Eigen::Index ext_dim = layout.dims[0] * layout.dims[1] * layout.dims[2];
  if (ext.dim() != ext_dim) throw std::invalid_argument("lift_adjoint: dimension mismatch");
  const double d = layout.d_copy;
  const HermitianOp swapped = conjugate_by(layout.swap_p.mat(), ext);
  const HermitianOp traced = partial_trace(ext, layout.dims, {2});
  const HermitianOp traced_swapped = partial_trace(swapped, layout.dims, {2});

  HermitianOp middle = (layout.mode == Mode::RR)
      ? tensor(identity_op(layout.dims[0]), partial_trace(ext, layout.dims, {0, 2}))
      : tensor(partial_trace(ext, layout.dims, {1, 2}), identity_op(layout.dims[1]));

  return (1.0 / d) * (traced + traced_swapped - (1.0 / d) * middle);
}

enum class WitnessKind { DecomposableEW, SymExtRR, SymExtDR };

inline const char* to_string(WitnessKind k) {
  switch (k) {
    case WitnessKind::DecomposableEW: return "decomposable-ew";
    case WitnessKind::SymExtRR: return "symext-rr";
    case WitnessKind::SymExtDR: return "symext-dr";
  }
  return "unknown";
}

/// Optimal witness extracted from the dual solution. `value` is its
/// expectation on rho_fix (equivalently on any compatible state); a
/// negative value certifies the precondition.
struct Witness {
  WitnessKind kind = WitnessKind::DecomposableEW;
  HermitianOp op;          // dim 6, unit trace
  double value = 0.0;      // Tr(W rho_fix) = -t*
  bool valid = false;
  double trace = 0.0;
  double cert_min_eig_1 = 0.0;   // two-way: Z1; one-way: symmetrized dual Z
  double cert_min_eig_2 = 0.0;   // two-way: Z2; one-way: witness LMI
  double free_dir_overlap = 0.0; // max |Tr(W G_m)| over free directions
  HermitianOp cert_z1;           // certificate blocks (two-way) or Z~ (one-way)
  HermitianOp cert_z2;
};

inline constexpr double kWitnessPsdTol = 1e-8;
inline constexpr double kWitnessValueTol = 1e-6;

struct SolverSummary {
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  double gap = 0.0;
  double primal_value = 0.0;
  double dual_value = 0.0;
};

struct VerdictReport {
  Mode mode = Mode::TwoWay;
  Decision decision = Decision::Marginal;
  double t_star = 0.0;
  Witness witness;
  SolverSummary solver;
  bool facially_reduced = false;
  // When a compatible state exists (NoKey), the solver's primal point
  // assembled back into the class: rho_fix + sum_m x_m G_m.
  bool has_compatible_state = false;
  HermitianOp compatible_state;
};

namespace detail {

inline double max_free_dir_overlap(const HermitianOp& w, const EquivalenceClass& ec) {
  double worst = 0.0;
  for (const auto& g : ec.free_dirs) worst = std::max(worst, std::abs(hs_inner(w, g)));
  return worst;
}

inline Decision decision_from(Feasibility f) {
  switch (f) {
    case Feasibility::Infeasible: return Decision::PreconditionHolds;
    case Feasibility::Feasible: return Decision::NoKey;
    case Feasibility::Marginal: return Decision::Marginal;
  }
  return Decision::Marginal;
}

inline SolverSummary summarize(const SdpResult& r) {
  return {r.status, r.iterations, r.gap, r.primal_value, r.dual_value};
}

inline void attach_compatible_state(VerdictReport& report, const RVector& x,
                                    const EquivalenceClass& ec) {
  if (report.decision != Decision::NoKey) return;
  HermitianOp state = ec.rho_fix;
  for (size_t m = 0; m < ec.free_dirs.size(); ++m)
    state += x(static_cast<Eigen::Index>(m)) * ec.free_dirs[m];
  report.compatible_state = state;
  report.has_compatible_state = true;
}

// Hermitian dual certificate from the real-embedded dual matrix. The
// embedding doubles traces, so the complex certificate is twice the block
// average; this keeps Tr(F Z) values and the normalization intact.
inline HermitianOp unembed_dual(const RMatrix& z) { return 2.0 * real_unembed(z); }

// ---- facial reduction ------------------------------------------------

// Forced kernel of every compatible PSD state: the joint range of all
// measured PSD operators whose observed value is zero (Tr(E rho) = 0 with
// E >= 0 and rho >= 0 forces rho E = 0). `transpose_b` certifies the
// partial-transpose block instead: Tr(E rho) = Tr(E^G rho^G), and E^G >= 0
// must hold for the range of E^G to be forced in rho^G.
inline std::vector<CVector> forced_null_space(const EquivalenceClass& ec, bool transpose_b) {
  std::vector<CVector> raw;
  for (Eigen::Index r = 0; r < ec.rows.rows(); ++r) {
    if (std::abs(ec.vals(r)) > kForcedZeroTol) continue;
    HermitianOp op = from_hs_coords(ec.rows.row(r).transpose());
    if (transpose_b) op = partial_transpose(op, 2, 3);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(op.mat());
    if (es.eigenvalues().minCoeff() < -1e-9) continue;  // not PSD, certifies nothing
    for (Eigen::Index i = 0; i < 6; ++i)
      if (es.eigenvalues()(i) > 1e-9) raw.push_back(es.eigenvectors().col(i));
  }
  if (raw.empty()) return {};

  // Orthonormal basis of the span.
  CMatrix stacked(6, static_cast<Eigen::Index>(raw.size()));
  for (size_t i = 0; i < raw.size(); ++i) stacked.col(static_cast<Eigen::Index>(i)) = raw[i];
  Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeFullU);
  std::vector<CVector> out;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-9) out.push_back(svd.matrixU().col(i));
  return out;
}

// Orthonormal complement of a set of orthonormal vectors.
inline CMatrix complement_basis(const std::vector<CVector>& nulls, Eigen::Index dim) {
  CMatrix n(dim, static_cast<Eigen::Index>(nulls.size()));
  for (size_t i = 0; i < nulls.size(); ++i) n.col(static_cast<Eigen::Index>(i)) = nulls[i];
  Eigen::JacobiSVD<CMatrix> svd(n, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(dim - static_cast<Eigen::Index>(nulls.size()));
}

// Add the constraints <u| rho |v> = 0 for every basis vector u and forced
// null v (optionally acting on the partial transpose), then rebuild the
// class. Every member of the augmented class annihilates the forced nulls
// identically, so restricting the LMI blocks to the supports is exact.
inline EquivalenceClass augment_class(const EquivalenceClass& ec,
                                      const std::vector<CVector>& nulls,
                                      const std::vector<CVector>& gamma_nulls) {
  std::vector<HermitianOp> extra;
  auto add_rows = [&](const CVector& v, bool transpose_b) {
    for (Eigen::Index u = 0; u < 6; ++u) {
      CMatrix e = CVector::Unit(6, u) * v.adjoint();
      HermitianOp re = HermitianOp((0.5 * (e + e.adjoint())).eval());
      HermitianOp im = HermitianOp((Complex(0, 0.5) * (e - e.adjoint())).eval());
      if (transpose_b) {
        re = partial_transpose(re, 2, 3);
        im = partial_transpose(im, 2, 3);
      }
      extra.push_back(re);
      extra.push_back(im);
    }
  };
  for (const auto& v : nulls) add_rows(v, false);
  for (const auto& v : gamma_nulls) add_rows(v, true);

  RMatrix rows(ec.rows.rows() + static_cast<Eigen::Index>(extra.size()), 36);
  RVector vals(rows.rows());
  rows.topRows(ec.rows.rows()) = ec.rows;
  vals.head(ec.vals.size()) = ec.vals;
  for (size_t i = 0; i < extra.size(); ++i) {
    rows.row(ec.rows.rows() + static_cast<Eigen::Index>(i)) = hs_coords(extra[i]).transpose();
    vals(ec.vals.size() + static_cast<Eigen::Index>(i)) = 0.0;
  }
  return class_from_rows(std::move(rows), std::move(vals));
}

inline HermitianOp restrict_to(const HermitianOp& op, const CMatrix& support) {
  return HermitianOp((support.adjoint() * op.mat() * support).eval());
}

// Bob-local forced nulls: directions b with Tr[(I (x) |b><b|) rho] = 0 for
// every compatible state. Certified by projecting the operator onto the
// row space and checking that its observed value is exactly zero.
inline std::vector<CVector> forced_bob_nulls(const EquivalenceClass& ec) {
  const HermitianOp marginal = partial_trace(ec.rho_fix, {2, 3}, {0});
  Eigen::SelfAdjointEigenSolver<CMatrix> es(marginal.mat());
  std::vector<CVector> out;
  Eigen::JacobiSVD<RMatrix> svd(ec.rows.transpose(),
                                Eigen::ComputeThinU | Eigen::ComputeThinV);
  for (Eigen::Index i = 0; i < 3; ++i) {
    if (std::abs(es.eigenvalues()(i)) > kForcedZeroTol) continue;
    const CVector b = es.eigenvectors().col(i);
    const RVector coords = hs_coords(tensor(identity_op(2), projector(b)));
    const RVector q = svd.solve(coords);
    if ((ec.rows.transpose() * q - coords).norm() > 1e-9) continue;  // undetermined
    if (std::abs(q.dot(ec.vals)) > kForcedZeroTol) continue;
    out.push_back(b);
  }
  return out;
}

struct FeasibilityOutcome {
  FeasibilityVerdict verdict;
  bool reduced = false;
  EquivalenceClass reduced_class;  // augmented class when reduced
};

}  // namespace detail

/// Decomposable entanglement witness W = Z1 + Z2^Gamma from the dual of
/// the two-way check, with (Z1, Z2) retained as the decomposability
/// certificate.
inline Witness extract_witness_two_way(const SdpResult& result, const EquivalenceClass& ec) {
  const HermitianOp z = detail::unembed_dual(result.Z);
  const HermitianOp z1 = HermitianOp(z.mat().topLeftCorner(6, 6).eval());
  const HermitianOp z2 = HermitianOp(z.mat().bottomRightCorner(6, 6).eval());

  Witness w;
  w.kind = WitnessKind::DecomposableEW;
  w.op = z1 + partial_transpose(z2, 2, 3);
  w.value = hs_inner(w.op, ec.rho_fix);
  w.trace = w.op.trace();
  w.cert_min_eig_1 = min_eigenvalue(z1);
  w.cert_min_eig_2 = min_eigenvalue(z2);
  w.free_dir_overlap = detail::max_free_dir_overlap(w.op, ec);
  w.cert_z1 = z1;
  w.cert_z2 = z2;

  const double t_star = result.x(result.x.size() - 1);
  w.valid = result.status == SolveStatus::Optimal &&
            w.cert_min_eig_1 > -kWitnessPsdTol && w.cert_min_eig_2 > -kWitnessPsdTol &&
            std::abs(w.trace - 1.0) < kWitnessPsdTol &&
            std::abs(w.value + t_star) < kWitnessValueTol &&
            w.free_dir_overlap < kWitnessPsdTol;
  return w;
}

/// Witness for the symmetric-extendibility problem: symmetrize the dual as
/// (Z + PZP)/2, pull it back with the lift adjoint, and verify the
/// witness LMI  W (x) I + P (W (x) I) P >= 0  together with Tr(W) = 1.
inline Witness extract_witness_one_way(const SdpResult& result, const ExtensionLayout& layout,
                                       const EquivalenceClass& ec) {
  const HermitianOp z = detail::unembed_dual(result.Z);
  const HermitianOp z_sym = 0.5 * (z + conjugate_by(layout.swap_p.mat(), z));

  Witness w;
  w.kind = layout.mode == Mode::RR ? WitnessKind::SymExtRR : WitnessKind::SymExtDR;
  w.op = lift_adjoint(z_sym, layout);
  w.value = hs_inner(w.op, ec.rho_fix);
  w.trace = w.op.trace();

  const HermitianOp lifted = tensor(w.op, identity_op(layout.dims[2]));
  const HermitianOp lmi = lifted + conjugate_by(layout.swap_p.mat(), lifted);
  w.cert_min_eig_1 = min_eigenvalue(z_sym);
  w.cert_min_eig_2 = min_eigenvalue(lmi);
  w.free_dir_overlap = detail::max_free_dir_overlap(w.op, ec);
  w.cert_z1 = z_sym;
  w.cert_z2 = lmi;

  const double t_star = result.x(result.x.size() - 1);
  w.valid = result.status == SolveStatus::Optimal &&
            w.cert_min_eig_2 > -kWitnessPsdTol &&
            std::abs(w.trace - 1.0) < kWitnessPsdTol &&
            std::abs(w.value + t_star) < kWitnessValueTol &&
            w.free_dir_overlap < kWitnessPsdTol;
  return w;
}

namespace detail {

inline SdpProblem two_way_problem(const EquivalenceClass& ec, const CMatrix& supp,
                                  const CMatrix& supp_gamma) {
  SdpProblem prob;
  auto block = [&](const HermitianOp& h) {
    return direct_sum(restrict_to(h, supp),
                      restrict_to(partial_transpose(h, 2, 3), supp_gamma));
  };
  prob.F0 = real_embed(block(ec.rho_fix));
  for (const auto& g : ec.free_dirs) prob.Fi.push_back(real_embed(block(g)));
  prob.c = RVector::Zero(static_cast<Eigen::Index>(prob.Fi.size()));
  return prob;
}

inline SdpProblem one_way_problem(const EquivalenceClass& ec, const ExtensionLayout& layout,
                                  const CMatrix& bob_supp) {
  auto restrict_b = [&](const HermitianOp& h) {
    return HermitianOp((tensor(CMatrix::Identity(2, 2), bob_supp).adjoint() * h.mat() *
                        tensor(CMatrix::Identity(2, 2), bob_supp))
                           .eval());
  };
  SdpProblem prob;
  prob.F0 = real_embed(lift_map(restrict_b(ec.rho_fix), layout));
  for (const auto& g : ec.free_dirs)
    prob.Fi.push_back(real_embed(lift_map(restrict_b(g), layout)));
  for (const auto& g : layout.sym_basis) prob.Fi.push_back(real_embed(g));
  prob.c = RVector::Zero(static_cast<Eigen::Index>(prob.Fi.size()));
  return prob;
}

inline FeasibilityVerdict solve_two_way(const EquivalenceClass& ec, const CMatrix& supp,
                                        const CMatrix& supp_gamma, const SolveOptions& opts) {
  return check_feasibility(two_way_problem(ec, supp, supp_gamma), 1.0, opts);
}

inline FeasibilityVerdict solve_one_way(const EquivalenceClass& ec, const ExtensionLayout& layout,
                                        const CMatrix& bob_supp, const SolveOptions& opts) {
  return check_feasibility(one_way_problem(ec, layout, bob_supp), 1.0 / layout.d_copy, opts);
}

}  // namespace detail

/// The feasibility LMI of the two-way check as a standard-form problem
/// (identity-scale 1): F0 from rho_fix (+) rho_fix^Gamma, one direction
/// per free coefficient.
inline SdpProblem two_way_problem(const EquivalenceClass& ec) {
  const CMatrix full = CMatrix::Identity(6, 6);
  return detail::two_way_problem(ec, full, full);
}

/// The feasibility LMI of the one-way check (identity-scale 1/d_copy):
/// lifted class directions plus the swap-symmetric extension directions.
inline SdpProblem one_way_problem(const EquivalenceClass& ec, const ExtensionLayout& layout) {
  return detail::one_way_problem(ec, layout, CMatrix::Identity(3, 3));
}

/// Two-way precondition: does any compatible state have a positive partial
/// transpose? Exact separability test on H_2 (x) H_3, where only NPT
/// entangled states exist.
inline VerdictReport two_way_check(const EquivalenceClass& ec, const SolveOptions& opts = {}) {
  const CMatrix full = CMatrix::Identity(6, 6);
  FeasibilityVerdict fv = detail::solve_two_way(ec, full, full, opts);

  VerdictReport report;
  report.mode = Mode::TwoWay;
  report.decision = detail::decision_from(fv.decision);
  report.t_star = fv.t_star;
  report.solver = detail::summarize(fv.result);
  report.witness = extract_witness_two_way(fv.result, ec);
  detail::attach_compatible_state(report, fv.x, ec);

  if (report.decision != Decision::Marginal) return report;

  // Marginal at the boundary of the PSD cone: restrict to the support
  // forced by zero-probability outcomes and decide on the reduced problem.
  const auto nulls = detail::forced_null_space(ec, false);
  const auto gamma_nulls = detail::forced_null_space(ec, true);
  if (nulls.empty() && gamma_nulls.empty()) return report;

  EquivalenceClass aug;
  try {
    aug = detail::augment_class(ec, nulls, gamma_nulls);
  } catch (const std::invalid_argument&) {
    return report;  // augmented system inconsistent within tolerance
  }
  const CMatrix supp = detail::complement_basis(nulls, 6);
  const CMatrix supp_gamma = detail::complement_basis(gamma_nulls, 6);
  FeasibilityVerdict rfv = detail::solve_two_way(aug, supp, supp_gamma, opts);

  VerdictReport reduced;
  reduced.mode = Mode::TwoWay;
  reduced.decision = detail::decision_from(rfv.decision);
  reduced.t_star = rfv.t_star;
  reduced.solver = detail::summarize(rfv.result);
  reduced.solver.iterations += fv.result.iterations;
  reduced.facially_reduced = true;
  // Certificate blocks live on the restricted supports; pad them back.
  {
    const HermitianOp z = detail::unembed_dual(rfv.result.Z);
    const Eigen::Index k1 = supp.cols(), k2 = supp_gamma.cols();
    const HermitianOp z1 = HermitianOp(
        (supp * z.mat().topLeftCorner(k1, k1) * supp.adjoint()).eval());
    const HermitianOp z2 = HermitianOp(
        (supp_gamma * z.mat().bottomRightCorner(k2, k2) * supp_gamma.adjoint()).eval());
    Witness w;
    w.kind = WitnessKind::DecomposableEW;
    w.op = z1 + partial_transpose(z2, 2, 3);
    w.value = hs_inner(w.op, aug.rho_fix);
    w.trace = w.op.trace();
    w.cert_min_eig_1 = min_eigenvalue(z1);
    w.cert_min_eig_2 = min_eigenvalue(z2);
    w.free_dir_overlap = detail::max_free_dir_overlap(w.op, aug);
    w.cert_z1 = z1;
    w.cert_z2 = z2;
    w.valid = rfv.result.status == SolveStatus::Optimal &&
              w.cert_min_eig_1 > -kWitnessPsdTol && w.cert_min_eig_2 > -kWitnessPsdTol &&
              std::abs(w.trace - 1.0) < kWitnessPsdTol &&
              std::abs(w.value + rfv.t_star) < kWitnessValueTol &&
              w.free_dir_overlap < kWitnessPsdTol;
    reduced.witness = w;
  }
  detail::attach_compatible_state(reduced, rfv.x, aug);
  return reduced;
}

/// One-way precondition: does any compatible state admit a symmetric
/// extension to two copies of A (RR) or of B (DR)? Positivity of the
/// extension already implies positivity of the reduced state, so the LMI
/// has a single block.
inline VerdictReport one_way_check(const EquivalenceClass& ec, Mode mode,
                                   const SolveOptions& opts = {}) {
  const ExtensionLayout layout = detail::extension_layout(mode, 2, 3);
  FeasibilityVerdict fv = detail::solve_one_way(ec, layout, CMatrix::Identity(3, 3), opts);

  VerdictReport report;
  report.mode = mode;
  report.decision = detail::decision_from(fv.decision);
  report.t_star = fv.t_star;
  report.solver = detail::summarize(fv.result);
  report.witness = extract_witness_one_way(fv.result, layout, ec);
  detail::attach_compatible_state(report, fv.x, ec);

  if (report.decision != Decision::Marginal) return report;

  // Marginal through loss of interior. Only Bob-local forced kernels keep
  // the copy structure intact, and they cover the boundary channels
  // (vacuum block at p = 0, qubit block at p = 1).
  const auto bob_nulls = detail::forced_bob_nulls(ec);
  if (bob_nulls.empty()) return report;

  std::vector<CVector> nulls;
  for (const auto& b : bob_nulls)
    for (Eigen::Index a = 0; a < 2; ++a) {
      CVector v = CVector::Zero(6);
      v.segment(3 * a, 3) = b;
      nulls.push_back(v);
    }

  EquivalenceClass aug;
  try {
    aug = detail::augment_class(ec, nulls, {});
  } catch (const std::invalid_argument&) {
    return report;
  }
  std::vector<CVector> bvecs = bob_nulls;
  CMatrix bn(3, static_cast<Eigen::Index>(bvecs.size()));
  for (size_t i = 0; i < bvecs.size(); ++i) bn.col(static_cast<Eigen::Index>(i)) = bvecs[i];
  Eigen::JacobiSVD<CMatrix> svd(bn, Eigen::ComputeFullU);
  const CMatrix bob_supp = svd.matrixU().rightCols(3 - bn.cols());
  const Eigen::Index d_b = bob_supp.cols();

  const ExtensionLayout reduced_layout = detail::extension_layout(mode, 2, d_b);
  FeasibilityVerdict rfv = detail::solve_one_way(aug, reduced_layout, bob_supp, opts);

  VerdictReport reduced;
  reduced.mode = mode;
  reduced.decision = detail::decision_from(rfv.decision);
  reduced.t_star = rfv.t_star;
  reduced.solver = detail::summarize(rfv.result);
  reduced.solver.iterations += fv.result.iterations;
  reduced.facially_reduced = true;
  {
    // Witness on the reduced space, padded back to the full Bob space.
    const HermitianOp z = detail::unembed_dual(rfv.result.Z);
    const HermitianOp z_sym =
        0.5 * (z + conjugate_by(reduced_layout.swap_p.mat(), z));
    const HermitianOp w_red = lift_adjoint(z_sym, reduced_layout);
    const CMatrix pad = tensor(CMatrix::Identity(2, 2), bob_supp);
    Witness w;
    w.kind = mode == Mode::RR ? WitnessKind::SymExtRR : WitnessKind::SymExtDR;
    w.op = HermitianOp((pad * w_red.mat() * pad.adjoint()).eval());
    w.value = hs_inner(w.op, aug.rho_fix);
    w.trace = w.op.trace();
    const HermitianOp lifted = tensor(w_red, identity_op(reduced_layout.dims[2]));
    const HermitianOp lmi = lifted + conjugate_by(reduced_layout.swap_p.mat(), lifted);
    w.cert_min_eig_1 = min_eigenvalue(z_sym);
    w.cert_min_eig_2 = min_eigenvalue(lmi);
    w.free_dir_overlap = detail::max_free_dir_overlap(w.op, aug);
    w.cert_z1 = z_sym;
    w.cert_z2 = lmi;
    w.valid = rfv.result.status == SolveStatus::Optimal &&
              w.cert_min_eig_2 > -kWitnessPsdTol &&
              std::abs(w.trace - 1.0) < kWitnessPsdTol &&
              std::abs(w.value + rfv.t_star) < kWitnessValueTol &&
              w.free_dir_overlap < kWitnessPsdTol;
    reduced.witness = w;
  }
  detail::attach_compatible_state(reduced, rfv.x, aug);
  return reduced;
}

/// Expectation of a witness on the observed data alone: express W in the
/// span of the measured operators and contract the weights with the
/// observed values. Throws if W leaves the determined subspace.
inline double witness_value(const Witness& w, const CorrelationData& data) {
  auto [rows, vals] = detail::constraint_rows(data);
  const RVector coords = detail::hs_coords(w.op);
  // Minimum-norm q with rows^T q = coords.
  Eigen::JacobiSVD<RMatrix> svd(rows.transpose(),
                                Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector q = svd.solve(coords);
  if ((rows.transpose() * q - coords).norm() > 1e-8)
    throw std::invalid_argument("witness_value: witness not supported on the measured operators");
  return q.dot(vals);
}

}  // namespace qkdverify
