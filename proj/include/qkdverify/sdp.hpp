// Standard-form semidefinite programming:
//
//   minimize    c^T x
//   subject to  F(x) = F0 + sum_i x_i F_i  >= 0,
//
// with the associated dual
//
//   maximize    -Tr(F0 Z)
//   subject to  Z >= 0,  Tr(F_i Z) = c_i  for all i.
//
// Solved with an infeasible-start primal-dual path-following method using
// the HKM search direction and a Mehrotra predictor-corrector step. The
// iteration schedule is fixed and nothing is randomized, so identical
// inputs produce identical results on the same platform.
//
// Pure feasibility problems (c = 0) are handled through the transform
//   minimize t  s.t.  F(x) + t * s * I >= 0
// whose optimum t* certifies feasibility of the original LMI: t* > 0 means
// infeasible, t* < 0 feasible, and the dual solution Z is the certificate
// (normalized to Tr(Z) = 1/s by the constraint on the t variable).

#pragma once

#include "qkdverify/operators.hpp"

#include <Eigen/Cholesky>

#include <cstdio>
#include <limits>

namespace qkdverify {

struct SdpProblem {
  RVector c;                 // objective coefficients, one per variable
  RMatrix F0;                // constant term of the LMI
  std::vector<RMatrix> Fi;   // coefficient matrices, same size as F0
  std::vector<std::string> labels;  // optional variable names
};

enum class SolveStatus { Optimal, MaxIterations, NumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

struct SdpResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  RVector x;
  RMatrix Z;
  double primal_value = std::numeric_limits<double>::quiet_NaN();
  double dual_value = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
};

struct SolveOptions {
  int max_iterations = 200;
  double tol_gap = 1e-10;       // relative complementarity target
  double tol_residual = 1e-10;  // relative primal/dual residual target
  double step_fraction = 0.98;  // fraction-to-boundary
  double sigma_min = 0.05;      // centering bounds
  double sigma_max = 0.5;
  bool verbose = false;
  RVector x0;                   // optional primal start; F(x0) should be PD
};

namespace detail {

// Largest a >= 0 with S + a * dS >= 0, given the Cholesky factor L of S.
inline double max_psd_step(const Eigen::LLT<RMatrix>& llt, const RMatrix& d_s) {
  RMatrix w = llt.matrixL().solve(d_s);
  w = llt.matrixL().solve(w.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (w + w.transpose()),
                                            Eigen::EigenvaluesOnly);
  const double lam = es.eigenvalues().minCoeff();
  if (lam >= 0) return std::numeric_limits<double>::infinity();
  return -1.0 / lam;
}

inline double min_eig_sym(const RMatrix& m) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (m + m.transpose()),
                                            Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace detail

inline SdpResult solve(const SdpProblem& prob, const SolveOptions& opts = {}) {
  const Eigen::Index n = prob.F0.rows();
  const Eigen::Index m = static_cast<Eigen::Index>(prob.Fi.size());
  if (prob.F0.cols() != n) throw std::invalid_argument("solve: F0 must be square");
  if (prob.c.size() != m) throw std::invalid_argument("solve: c size must match Fi count");
  for (const auto& f : prob.Fi)
    if (f.rows() != n || f.cols() != n)
      throw std::invalid_argument("solve: all Fi must match F0 in size");

  auto lmi_at = [&](const RVector& x) {
    RMatrix s = prob.F0;
    for (Eigen::Index i = 0; i < m; ++i) s += x(i) * prob.Fi[i];
    return s;
  };

  // Flattened coefficient matrices for fast Schur-complement assembly.
  RMatrix fmat(m, n * n);
  for (Eigen::Index i = 0; i < m; ++i)
    fmat.row(i) = Eigen::Map<const RVector>(prob.Fi[i].data(), n * n);

  SdpResult res;
  res.x = (opts.x0.size() == m) ? opts.x0 : RVector::Zero(m);

  RMatrix s = lmi_at(res.x);
  if (detail::min_eig_sym(s) < 1e-8) {
    // Infeasible primal start: begin from a positive definite slack.
    const double shift = std::abs(detail::min_eig_sym(prob.F0)) + 1.0;
    s = std::max(1.0, shift) * RMatrix::Identity(n, n);
  }
  RMatrix z = RMatrix::Identity(n, n) / static_cast<double>(n);

  auto dual_residual = [&](const RMatrix& zz) {
    RVector r(m);
    for (Eigen::Index i = 0; i < m; ++i)
      r(i) = prob.c(i) - (prob.Fi[i].cwiseProduct(zz)).sum();
    return r;
  };

  const double f0_scale = 1.0 + prob.F0.norm();
  const double c_scale = 1.0 + (m > 0 ? prob.c.cwiseAbs().maxCoeff() : 0.0);

  int stall_count = 0;
  res.status = SolveStatus::MaxIterations;

  // Residual quality at which an iterate is accepted once numerical
  // precision is exhausted: tighter progress is not achievable in double
  // arithmetic on nearly singular optimal faces.
  auto acceptable = [&](double pres, double dres, double mu, double gap, double scale) {
    return pres <= 1e-8 * f0_scale && dres <= 1e-8 * c_scale &&
           mu * n <= 1e-7 * scale && gap <= 1e-7 * scale;
  };

  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const RMatrix rp = lmi_at(res.x) - s;           // primal residual
    const RVector rd = dual_residual(z);            // dual residual
    const double mu = (s.cwiseProduct(z)).sum() / static_cast<double>(n);
    const double pobj = prob.c.dot(res.x);
    const double dobj = -(prob.F0.cwiseProduct(z)).sum();
    const double gap = std::abs(pobj - dobj);
    const double pres = rp.norm();
    const double dres = (m > 0) ? rd.cwiseAbs().maxCoeff() : 0.0;
    const double obj_scale = 1.0 + std::abs(pobj) + std::abs(dobj);

    if (opts.verbose)
      std::fprintf(stderr, "sdp iter %3d  mu %.3e  pres %.3e  dres %.3e  gap %.3e\n",
                   iter, mu, pres / f0_scale, dres / c_scale, gap);

    const bool primal_ok = pres <= opts.tol_residual * f0_scale;
    const bool dual_ok = (m == 0) || dres <= opts.tol_residual * c_scale;
    const bool gap_ok = mu * n <= opts.tol_gap * obj_scale && gap <= 100 * opts.tol_gap * obj_scale;
    if (primal_ok && dual_ok && gap_ok) {
      res.status = SolveStatus::Optimal;
      break;
    }

    Eigen::LLT<RMatrix> llt_s(s);
    Eigen::LLT<RMatrix> llt_z(z);
    if (llt_s.info() != Eigen::Success || llt_z.info() != Eigen::Success) {
      res.status = acceptable(pres, dres, mu, gap, obj_scale) ? SolveStatus::Optimal
                                                              : SolveStatus::NumericalFailure;
      break;
    }
    const RMatrix s_inv = llt_s.solve(RMatrix::Identity(n, n));

    // HKM scaling operator H(X) = (S^-1 X Z + Z X S^-1) / 2 and the Schur
    // complement M_ij = <F_i, H(F_j)>, assembled via flattened GEMM.
    auto h_of = [&](const RMatrix& x) {
      RMatrix u = s_inv * x * z;
      return RMatrix(0.5 * (u + u.transpose()));
    };

    RMatrix hmat(m, n * n);
    for (Eigen::Index j = 0; j < m; ++j) {
      RMatrix hj = h_of(prob.Fi[j]);
      hmat.row(j) = Eigen::Map<const RVector>(hj.data(), n * n);
    }
    RMatrix schur = fmat * hmat.transpose();
    schur = 0.5 * (schur + schur.transpose().eval());

    Eigen::LLT<RMatrix> llt_m;
    double reg = 1e-12;
    bool factored = false;
    for (int attempt = 0; attempt <= 3; ++attempt) {
      llt_m.compute(schur);
      if (llt_m.info() == Eigen::Success) {
        factored = true;
        break;
      }
      schur += reg * RMatrix::Identity(m, m);
      reg *= 100;
    }
    if (!factored && m > 0) {
      res.status = acceptable(pres, dres, mu, gap, obj_scale) ? SolveStatus::Optimal
                                                              : SolveStatus::NumericalFailure;
      break;
    }

    const RMatrix h_rp = h_of(rp);
    RVector a_sinv(m), f_dot_hrp(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      a_sinv(i) = (prob.Fi[i].cwiseProduct(s_inv)).sum();
      f_dot_hrp(i) = (prob.Fi[i].cwiseProduct(h_rp)).sum();
    }

    auto direction = [&](double sigma_mu, const RMatrix& corr) {
      RVector rhs(m);
      for (Eigen::Index i = 0; i < m; ++i)
        rhs(i) = sigma_mu * a_sinv(i) - prob.c(i) - f_dot_hrp(i) -
                 (prob.Fi[i].cwiseProduct(corr)).sum();
      RVector dx = (m > 0) ? RVector(llt_m.solve(rhs)) : RVector(0);
      RMatrix ds = rp;
      for (Eigen::Index i = 0; i < m; ++i) ds += dx(i) * prob.Fi[i];
      RMatrix dz = sigma_mu * s_inv - z - h_of(ds) - corr;
      dz = 0.5 * (dz + dz.transpose().eval());
      return std::make_tuple(dx, ds, dz);
    };

    // Predictor (affine direction).
    const RMatrix no_corr = RMatrix::Zero(n, n);
    auto [dx_a, ds_a, dz_a] = direction(0.0, no_corr);
    const double ap_a =
        std::min(1.0, opts.step_fraction * detail::max_psd_step(llt_s, ds_a));
    const double ad_a =
        std::min(1.0, opts.step_fraction * detail::max_psd_step(llt_z, dz_a));
    const double mu_aff =
        ((s + ap_a * ds_a).cwiseProduct(z + ad_a * dz_a)).sum() / static_cast<double>(n);
    double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
    sigma = std::min(opts.sigma_max, std::max(opts.sigma_min, sigma));

    // Corrector with the Mehrotra second-order term.
    RMatrix corr = s_inv * ds_a * dz_a;
    corr = 0.5 * (corr + corr.transpose().eval());
    auto [dx, ds, dz] = direction(sigma * mu, corr);

    const double ap = std::min(1.0, opts.step_fraction * detail::max_psd_step(llt_s, ds));
    const double ad = std::min(1.0, opts.step_fraction * detail::max_psd_step(llt_z, dz));
    if (!std::isfinite(ap) || !std::isfinite(ad)) {
      res.status = acceptable(pres, dres, mu, gap, obj_scale) ? SolveStatus::Optimal
                                                              : SolveStatus::NumericalFailure;
      break;
    }

    res.x += ap * dx;
    s += ap * ds;
    z += ad * dz;
    z = 0.5 * (z + z.transpose().eval());
    s = 0.5 * (s + s.transpose().eval());

    if (ap < 1e-8 && ad < 1e-8) {
      if (++stall_count >= 3) {
        res.status = acceptable(pres, dres, mu, gap, obj_scale) ? SolveStatus::Optimal
                                                                : SolveStatus::NumericalFailure;
        break;
      }
    } else {
      stall_count = 0;
    }
  }

  res.iterations = iter;
  res.Z = z;
  res.primal_value = prob.c.dot(res.x);
  res.dual_value = -(prob.F0.cwiseProduct(z)).sum();
  res.gap = std::abs(res.primal_value - res.dual_value);
  return res;
}

/// Transform a pure feasibility problem (c = 0) into
///   min t  s.t.  F(x) + t * scale_identity * I >= 0.
/// The added variable comes last. Strictly feasible for any x once t is
/// large enough, so the solver always has an interior starting point.
inline SdpProblem feasibility_transform(const SdpProblem& prob,
                                        double scale_identity = 1.0) {
  if (prob.c.size() > 0 && prob.c.cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("feasibility_transform: objective must be zero");
  if (scale_identity <= 0)
    throw std::invalid_argument("feasibility_transform: identity scale must be positive");
  SdpProblem out;
  out.F0 = prob.F0;
  out.Fi = prob.Fi;
  out.Fi.push_back(scale_identity * RMatrix::Identity(prob.F0.rows(), prob.F0.cols()));
  out.c = RVector::Zero(static_cast<Eigen::Index>(out.Fi.size()));
  out.c(out.c.size() - 1) = 1.0;
  out.labels = prob.labels;
  out.labels.push_back("t");
  return out;
}

enum class Feasibility { Feasible, Infeasible, Marginal };

inline const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::Feasible: return "feasible";
    case Feasibility::Infeasible: return "infeasible";
    case Feasibility::Marginal: return "marginal";
  }
  return "unknown";
}

inline constexpr double kFeasibilityTol = 1e-7;

struct FeasibilityVerdict {
  double t_star = std::numeric_limits<double>::quiet_NaN();
  RVector x;      // candidate point for the original variables
  RMatrix Z;      // dual certificate, Tr(Z) = 1/scale_identity at optimum
  Feasibility decision = Feasibility::Marginal;
  SdpResult result;
};

/// Decide feasibility of F(x) >= 0 via the t-shift transform. Infeasible
/// iff t* > kFeasibilityTol, Feasible iff t* < -kFeasibilityTol, Marginal
/// within solver noise of the boundary.
inline FeasibilityVerdict check_feasibility(const SdpProblem& prob,
                                            double scale_identity = 1.0,
                                            const SolveOptions& opts = {}) {
  SdpProblem shifted = feasibility_transform(prob, scale_identity);
  SolveOptions o = opts;
  if (o.x0.size() == 0) {
    // x = 0, t just past the spectrum of F0: strictly interior start.
    o.x0 = RVector::Zero(shifted.c.size());
    o.x0(shifted.c.size() - 1) =
        (std::abs(detail::min_eig_sym(prob.F0)) + 1.0) / scale_identity;
  }
  SdpResult r = solve(shifted, o);

  FeasibilityVerdict v;
  v.result = r;
  v.t_star = (r.x.size() > 0) ? r.x(r.x.size() - 1) : std::numeric_limits<double>::quiet_NaN();
  v.x = r.x.head(std::max<Eigen::Index>(0, r.x.size() - 1));
  v.Z = r.Z;
  if (r.status == SolveStatus::NumericalFailure) {
    v.decision = Feasibility::Marginal;
    return v;
  }
  if (v.t_star > kFeasibilityTol)
    v.decision = Feasibility::Infeasible;
  else if (v.t_star < -kFeasibilityTol)
    v.decision = Feasibility::Feasible;
  else
    v.decision = Feasibility::Marginal;
  return v;
}

}  // namespace qkdverify
