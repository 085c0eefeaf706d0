// Hermitian operator bases normalized to Tr(sigma_i sigma_j) = d delta_ij
// with sigma_0 = identity, plus expansion/assembly of operators in such a
// basis. Coefficient vectors use the convention
//   op = (1/d) sum_i c_i sigma_i,   c_i = Tr(sigma_i op),
// so expand and assemble are mutually inverse.

#pragma once

#include "qkdverify/operators.hpp"

#include <cmath>

namespace qkdverify {

struct OperatorBasis {
  Eigen::Index dim = 0;
  std::vector<HermitianOp> elements;  // dim^2 of them, identity first
  std::vector<std::string> labels;
};

using CoeffVector = RVector;

namespace paulis {

inline CMatrix sigma_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline CMatrix sigma_y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline CMatrix sigma_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace paulis

/// {1, sigma_x, sigma_y, sigma_z}; satisfies Tr(s_i s_j) = 2 delta_ij.
inline OperatorBasis pauli_basis() {
  OperatorBasis b;
  b.dim = 2;
  b.elements = {identity_op(2), HermitianOp(paulis::sigma_x()),
                HermitianOp(paulis::sigma_y()), HermitianOp(paulis::sigma_z())};
  b.labels = {"0", "x", "y", "z"};
  return b;
}

/// Gell-Mann operators in the standard numbering, rescaled by sqrt(3/2)
/// so that Tr(s_i s_j) = 3 delta_ij, with s_0 the identity.
inline OperatorBasis gellmann_basis() {
  const double r = std::sqrt(1.5);
  auto m3 = [&](std::initializer_list<Complex> vals) {
    CMatrix m(3, 3);
    auto it = vals.begin();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = *it++;
    return HermitianOp((r * m).eval());
  };
  const Complex i1(0, 1);
  const double s3 = 1.0 / std::sqrt(3.0);

  OperatorBasis b;
  b.dim = 3;
  b.elements = {
      identity_op(3),
      m3({0, 1, 0, 1, 0, 0, 0, 0, 0}),
      m3({0, -i1, 0, i1, 0, 0, 0, 0, 0}),
      m3({1, 0, 0, 0, -1, 0, 0, 0, 0}),
      m3({0, 0, 1, 0, 0, 0, 1, 0, 0}),
      m3({0, 0, -i1, 0, 0, 0, i1, 0, 0}),
      m3({0, 0, 0, 0, 0, 1, 0, 1, 0}),
      m3({0, 0, 0, 0, 0, -i1, 0, i1, 0}),
      m3({s3, 0, 0, 0, s3, 0, 0, 0, -2 * s3}),
  };
  b.labels = {"0", "1", "2", "3", "4", "5", "6", "7", "8"};
  return b;
}

/// Product basis S_kl = a_k (x) b_l, row-major in (k, l). Inherits the
/// trace conventions with d = d_a * d_b; labels are "k,l".
inline OperatorBasis product_basis(const OperatorBasis& a, const OperatorBasis& b) {
  OperatorBasis out;
  out.dim = a.dim * b.dim;
  out.elements.reserve(a.elements.size() * b.elements.size());
  out.labels.reserve(a.elements.size() * b.elements.size());
  for (size_t k = 0; k < a.elements.size(); ++k)
    for (size_t l = 0; l < b.elements.size(); ++l) {
      out.elements.push_back(tensor(a.elements[k], b.elements[l]));
      out.labels.push_back(a.labels[k] + "," + b.labels[l]);
    }
  return out;
}

/// Coefficients c_i = Tr(basis_i op). Imaginary parts (roundoff only for
/// Hermitian inputs) are discarded.
inline CoeffVector expand(const HermitianOp& op, const OperatorBasis& basis) {
  if (op.dim() != basis.dim) throw std::invalid_argument("expand: dimension mismatch");
  CoeffVector c(static_cast<Eigen::Index>(basis.elements.size()));
  for (size_t i = 0; i < basis.elements.size(); ++i)
    c(static_cast<Eigen::Index>(i)) = hs_inner(basis.elements[i], op);
  return c;
}

/// op = (1/d) sum_i c_i basis_i; inverse of expand.
inline HermitianOp assemble(const CoeffVector& coeffs, const OperatorBasis& basis) {
  if (coeffs.size() != static_cast<Eigen::Index>(basis.elements.size()))
    throw std::invalid_argument("assemble: coefficient count mismatch");
  CMatrix acc = CMatrix::Zero(basis.dim, basis.dim);
  for (size_t i = 0; i < basis.elements.size(); ++i)
    acc += coeffs(static_cast<Eigen::Index>(i)) * basis.elements[i].mat();
  acc /= static_cast<double>(basis.dim);
  return HermitianOp(acc);
}

}  // namespace qkdverify
