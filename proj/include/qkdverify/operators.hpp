// Dense complex Hermitian operator algebra on small Hilbert spaces:
// tensor products, partial transpose/trace, swap permutations, and the
// real symmetric embedding used to feed Hermitian LMIs to a real SDP
// solver. All values are immutable after construction and safe to share
// across threads.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkdverify {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-12;

/// Hermitian operator with value semantics. Construction symmetrizes
/// (H + H^dag)/2 and rejects inputs whose asymmetry exceeds kHermitianTol
/// relative to the matrix scale.
class HermitianOp {
 public:
  HermitianOp() = default;

  explicit HermitianOp(const CMatrix& m) {
    if (m.rows() != m.cols() || m.rows() < 1)
      throw std::invalid_argument("HermitianOp: matrix must be square, dim >= 1");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (asym > kHermitianTol * scale)
      throw std::invalid_argument("HermitianOp: matrix is not Hermitian (asymmetry " +
                                  std::to_string(asym) + ")");
    m_ = 0.5 * (m + m.adjoint().eval());
  }

  const CMatrix& mat() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

  double trace() const { return m_.trace().real(); }

  HermitianOp& operator+=(const HermitianOp& o) {
    m_ += o.m_;
    return *this;
  }
  HermitianOp& operator-=(const HermitianOp& o) {
    m_ -= o.m_;
    return *this;
  }
  HermitianOp& operator*=(double s) {
    m_ *= s;
    return *this;
  }

  friend HermitianOp operator+(HermitianOp a, const HermitianOp& b) { return a += b; }
  friend HermitianOp operator-(HermitianOp a, const HermitianOp& b) { return a -= b; }
  friend HermitianOp operator*(double s, HermitianOp a) { return a *= s; }
  friend HermitianOp operator*(HermitianOp a, double s) { return a *= s; }

 private:
  CMatrix m_;
};

inline HermitianOp identity_op(Eigen::Index n) {
  return HermitianOp(CMatrix::Identity(n, n));
}

inline HermitianOp zero_op(Eigen::Index n) { return HermitianOp(CMatrix::Zero(n, n)); }

/// Rank-one projector |v><v| (v need not be normalized).
inline HermitianOp projector(const CVector& v) {
  return HermitianOp((v * v.adjoint()).eval());
}

inline CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline HermitianOp tensor(const HermitianOp& a, const HermitianOp& b) {
  return HermitianOp(tensor(a.mat(), b.mat()));
}

inline HermitianOp tensor(const HermitianOp& a, const HermitianOp& b, const HermitianOp& c) {
  return tensor(tensor(a, b), c);
}

/// u H u^dag for a unitary or isometry u.
inline HermitianOp conjugate_by(const CMatrix& u, const HermitianOp& h) {
  return HermitianOp((u * h.mat() * u.adjoint()).eval());
}

enum class Subsystem { A, B };

/// Transpose with respect to one factor of a bipartite space H_dA (x) H_dB.
/// An involution; preserves the trace exactly.
inline HermitianOp partial_transpose(const HermitianOp& op, Eigen::Index d_a,
                                     Eigen::Index d_b, Subsystem which = Subsystem::B) {
  if (op.dim() != d_a * d_b)
    throw std::invalid_argument("partial_transpose: dimension mismatch");
  const CMatrix& m = op.mat();
  CMatrix out(op.dim(), op.dim());
  for (Eigen::Index a = 0; a < d_a; ++a)
    for (Eigen::Index b = 0; b < d_b; ++b)
      for (Eigen::Index ap = 0; ap < d_a; ++ap)
        for (Eigen::Index bp = 0; bp < d_b; ++bp) {
          if (which == Subsystem::B)
            out(a * d_b + b, ap * d_b + bp) = m(a * d_b + bp, ap * d_b + b);
          else
            out(a * d_b + b, ap * d_b + bp) = m(ap * d_b + b, a * d_b + bp);
        }
  return HermitianOp(out);
}

/// Trace out the listed factors (0-based positions into dims).
inline HermitianOp partial_trace(const HermitianOp& op,
                                 const std::vector<Eigen::Index>& dims,
                                 const std::vector<int>& traced) {
  const Eigen::Index total =
      std::accumulate(dims.begin(), dims.end(), Eigen::Index{1}, std::multiplies<>());
  if (op.dim() != total)
    throw std::invalid_argument("partial_trace: dims do not factor the operator");
  for (int t : traced)
    if (t < 0 || t >= static_cast<int>(dims.size()))
      throw std::invalid_argument("partial_trace: traced index out of range");

  std::vector<bool> is_traced(dims.size(), false);
  for (int t : traced) is_traced[t] = true;

  std::vector<Eigen::Index> kept_dims, traced_dims;
  std::vector<int> kept_pos, traced_pos;
  for (size_t s = 0; s < dims.size(); ++s) {
    if (is_traced[s]) {
      traced_dims.push_back(dims[s]);
      traced_pos.push_back(static_cast<int>(s));
    } else {
      kept_dims.push_back(dims[s]);
      kept_pos.push_back(static_cast<int>(s));
    }
  }
  const Eigen::Index kept_total =
      std::accumulate(kept_dims.begin(), kept_dims.end(), Eigen::Index{1}, std::multiplies<>());
  const Eigen::Index traced_total = total / kept_total;

  // Strides of each factor in the full-space index.
  std::vector<Eigen::Index> stride(dims.size(), 1);
  for (int s = static_cast<int>(dims.size()) - 2; s >= 0; --s)
    stride[s] = stride[s + 1] * dims[s + 1];

  auto full_index = [&](Eigen::Index kept, Eigen::Index tr) {
    Eigen::Index idx = 0;
    for (int s = static_cast<int>(kept_pos.size()) - 1; s >= 0; --s) {
      idx += (kept % kept_dims[s]) * stride[kept_pos[s]];
      kept /= kept_dims[s];
    }
    for (int s = static_cast<int>(traced_pos.size()) - 1; s >= 0; --s) {
      idx += (tr % traced_dims[s]) * stride[traced_pos[s]];
      tr /= traced_dims[s];
    }
    return idx;
  };

  CMatrix out = CMatrix::Zero(kept_total, kept_total);
  const CMatrix& m = op.mat();
  for (Eigen::Index i = 0; i < kept_total; ++i)
    for (Eigen::Index j = 0; j < kept_total; ++j) {
      Complex acc = 0.0;
      for (Eigen::Index t = 0; t < traced_total; ++t)
        acc += m(full_index(i, t), full_index(j, t));
      out(i, j) = acc;
    }
  return HermitianOp(out);
}

/// Permutation operator exchanging factors i and j of a tensor product.
/// Hermitian and unitary; squares to the identity.
inline HermitianOp swap_operator(const std::vector<Eigen::Index>& dims, int i, int j) {
  if (i < 0 || j < 0 || i >= static_cast<int>(dims.size()) || j >= static_cast<int>(dims.size()))
    throw std::invalid_argument("swap_operator: factor index out of range");
  if (dims[i] != dims[j])
    throw std::invalid_argument("swap_operator: swapped factors must have equal dimension");

  const Eigen::Index total =
      std::accumulate(dims.begin(), dims.end(), Eigen::Index{1}, std::multiplies<>());
  std::vector<Eigen::Index> stride(dims.size(), 1);
  for (int s = static_cast<int>(dims.size()) - 2; s >= 0; --s)
    stride[s] = stride[s + 1] * dims[s + 1];

  CMatrix p = CMatrix::Zero(total, total);
  std::vector<Eigen::Index> digits(dims.size());
  for (Eigen::Index from = 0; from < total; ++from) {
    Eigen::Index rem = from;
    for (size_t s = 0; s < dims.size(); ++s) {
      digits[s] = rem / stride[s];
      rem %= stride[s];
    }
    std::swap(digits[i], digits[j]);
    Eigen::Index to = 0;
    for (size_t s = 0; s < dims.size(); ++s) to += digits[s] * stride[s];
    p(to, from) = 1.0;
  }
  return HermitianOp(p);
}

/// Real symmetric embedding of H = A + iB as [[A, -B], [B, A]].
/// The embedding has the eigenvalues of H, each doubled, so positive
/// semidefiniteness is preserved in both directions.
inline RMatrix real_embed(const HermitianOp& op) {
  const Eigen::Index n = op.dim();
  RMatrix out(2 * n, 2 * n);
  const RMatrix a = op.mat().real();
  const RMatrix b = op.mat().imag();
  out.topLeftCorner(n, n) = a;
  out.topRightCorner(n, n) = -b;
  out.bottomLeftCorner(n, n) = b;
  out.bottomRightCorner(n, n) = a;
  return out;
}

/// Inverse of real_embed by block averaging: round-trips exactly.
inline HermitianOp real_unembed(const RMatrix& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0)
    throw std::invalid_argument("real_unembed: expected even-sized square matrix");
  const Eigen::Index n = m.rows() / 2;
  RMatrix a = 0.5 * (m.topLeftCorner(n, n) + m.bottomRightCorner(n, n));
  RMatrix b = 0.5 * (m.bottomLeftCorner(n, n) - m.topRightCorner(n, n));
  CMatrix h = a.cast<Complex>() + Complex(0, 1) * b.cast<Complex>();
  return HermitianOp(h);
}

inline double min_eigenvalue(const HermitianOp& op) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(op.mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Hilbert-Schmidt inner product Tr(a b); real for Hermitian arguments.
inline double hs_inner(const HermitianOp& a, const HermitianOp& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("hs_inner: dimension mismatch");
  return (a.mat().cwiseProduct(b.mat().transpose())).sum().real();
}

/// Direct sum a (+) b.
inline HermitianOp direct_sum(const HermitianOp& a, const HermitianOp& b) {
  CMatrix out = CMatrix::Zero(a.dim() + b.dim(), a.dim() + b.dim());
  out.topLeftCorner(a.dim(), a.dim()) = a.mat();
  out.bottomRightCorner(b.dim(), b.dim()) = b.mat();
  return HermitianOp(out);
}

}  // namespace qkdverify
