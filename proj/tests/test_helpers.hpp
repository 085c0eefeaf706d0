#pragma once

#include "qkdverify/operators.hpp"

#include <random>

namespace qkdtest {

using qkdverify::CMatrix;
using qkdverify::Complex;
using qkdverify::CVector;
using qkdverify::HermitianOp;

inline CMatrix random_complex(Eigen::Index n, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

inline HermitianOp random_hermitian(Eigen::Index n, std::mt19937& rng) {
  CMatrix m = random_complex(n, rng);
  return HermitianOp((0.5 * (m + m.adjoint())).eval());
}

// Hilbert-Schmidt ensemble: G G^dag normalized to unit trace.
inline HermitianOp random_density(Eigen::Index n, std::mt19937& rng) {
  CMatrix g = random_complex(n, rng);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return HermitianOp(rho);
}

inline CVector random_state(Eigen::Index n, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  v.normalize();
  return v;
}

}  // namespace qkdtest
