#include "qkdverify/basis.hpp"
#include "qkdverify/operators.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace qkdverify;
using qkdtest::random_hermitian;

namespace {

CVector bell_pair() {
  CVector v = CVector::Zero(4);
  v(0) = 1.0 / std::sqrt(2.0);
  v(3) = 1.0 / std::sqrt(2.0);
  return v;
}

}  // namespace

TEST_CASE("pauli basis satisfies the d delta_ij trace conventions") {
  auto b = pauli_basis();
  REQUIRE(b.elements.size() == 4);
  REQUIRE((b.elements[0].mat() - CMatrix::Identity(2, 2)).norm() == 0.0);
  CHECK(hs_inner(b.elements[1], b.elements[1]) == Catch::Approx(2.0));
  CHECK(std::abs(hs_inner(b.elements[1], b.elements[2])) < 1e-14);
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j)
      CHECK(hs_inner(b.elements[i], b.elements[j]) ==
            Catch::Approx(i == j ? 2.0 : 0.0).margin(1e-12));
}

TEST_CASE("gellmann basis is traceless beyond the identity and normalized") {
  auto b = gellmann_basis();
  REQUIRE(b.elements.size() == 9);
  REQUIRE((b.elements[0].mat() - CMatrix::Identity(3, 3)).norm() == 0.0);
  for (size_t i = 1; i < 9; ++i) CHECK(std::abs(b.elements[i].trace()) < 1e-14);
  CHECK(hs_inner(b.elements[3], b.elements[3]) == Catch::Approx(3.0));
  for (size_t i = 0; i < 9; ++i)
    for (size_t j = 0; j < 9; ++j)
      CHECK(hs_inner(b.elements[i], b.elements[j]) ==
            Catch::Approx(i == j ? 3.0 : 0.0).margin(1e-12));
}

TEST_CASE("product basis inherits count, identity, and orthogonality") {
  auto pb = product_basis(pauli_basis(), gellmann_basis());
  REQUIRE(pb.elements.size() == 36);
  REQUIRE(pb.dim == 6);
  CHECK((pb.elements[0].mat() - CMatrix::Identity(6, 6)).norm() < 1e-14);
  CHECK(pb.labels[0] == "0,0");
  CHECK(pb.labels[9 + 3] == "x,3");
  for (size_t i = 0; i < 36; ++i)
    for (size_t j = 0; j < 36; ++j)
      CHECK(hs_inner(pb.elements[i], pb.elements[j]) ==
            Catch::Approx(i == j ? 6.0 : 0.0).margin(1e-11));
}

TEST_CASE("expand picks out coefficients and assemble inverts it") {
  auto pb = product_basis(pauli_basis(), gellmann_basis());

  SECTION("normalized identity expands to (1, 0, ..., 0)") {
    auto c = expand((1.0 / 6.0) * identity_op(6), pb);
    CHECK(c(0) == Catch::Approx(1.0));
    CHECK(c.tail(35).cwiseAbs().maxCoeff() < 1e-14);
  }

  SECTION("sigma_z in the pauli basis") {
    auto p = pauli_basis();
    auto c = expand(p.elements[3], p);
    CHECK(c(0) == Catch::Approx(0.0).margin(1e-14));
    CHECK(c(3) == Catch::Approx(2.0));  // Tr(sigma_z^2)
  }

  SECTION("unit coefficient on the identity assembles to I/6") {
    CoeffVector c = CoeffVector::Zero(36);
    c(0) = 1.0;
    auto op = assemble(c, pb);
    CHECK((op.mat() - CMatrix::Identity(6, 6) / 6.0).norm() < 1e-14);
  }

  SECTION("all-zero coefficients assemble to the zero operator") {
    auto op = assemble(CoeffVector::Zero(36), pb);
    CHECK(op.mat().norm() == 0.0);
  }

  SECTION("expand/assemble are mutually inverse on random operators") {
    std::mt19937 rng(12345);
    for (int trial = 0; trial < 100; ++trial) {
      auto h = random_hermitian(6, rng);
      auto c = expand(h, pb);
      auto back = assemble(c, pb);
      CHECK((back.mat() - h.mat()).cwiseAbs().maxCoeff() < 1e-10);
      auto c2 = expand(back, pb);
      CHECK((c2 - c).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  SECTION("bell projector coefficients reassemble the matrix") {
    auto pp = product_basis(pauli_basis(), pauli_basis());
    auto rho = projector(bell_pair());
    auto back = assemble(expand(rho, pp), pp);
    CHECK((back.mat() - rho.mat()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("partial transpose") {
  SECTION("factorizes on product states") {
    std::mt19937 rng(7);
    auto a = random_hermitian(2, rng);
    auto b = random_hermitian(3, rng);
    auto pt = partial_transpose(tensor(a, b), 2, 3);
    auto expected = tensor(a, HermitianOp(b.mat().transpose().eval()));
    CHECK((pt.mat() - expected.mat()).cwiseAbs().maxCoeff() < 1e-14);
  }

  SECTION("bell projector has minimum eigenvalue -1/2 after transposition") {
    auto rho = projector(bell_pair());
    auto pt = partial_transpose(rho, 2, 2);
    CHECK(min_eigenvalue(pt) == Catch::Approx(-0.5).margin(1e-12));
    CHECK(pt.trace() == Catch::Approx(rho.trace()));
  }

  SECTION("acts as transpose on the second factor of basis elements") {
    auto p = pauli_basis();
    auto g = gellmann_basis();
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 9; ++l) {
        auto s = tensor(p.elements[k], g.elements[l]);
        auto pt = partial_transpose(s, 2, 3);
        auto expected = tensor(p.elements[k],
                               HermitianOp(g.elements[l].mat().transpose().eval()));
        CHECK((pt.mat() - expected.mat()).norm() < 1e-14);
      }
  }

  SECTION("involution and trace preservation on random operators") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
      auto h = random_hermitian(6, rng);
      auto pt = partial_transpose(h, 2, 3);
      CHECK(pt.trace() == Catch::Approx(h.trace()));
      auto back = partial_transpose(pt, 2, 3);
      CHECK((back.mat() - h.mat()).norm() < 1e-14);
    }
  }

  SECTION("rejects dimension mismatch") {
    CHECK_THROWS_AS(partial_transpose(identity_op(5), 2, 3), std::invalid_argument);
  }
}

TEST_CASE("partial trace") {
  std::mt19937 rng(21);

  SECTION("drops the traced factor of a product") {
    auto a = random_hermitian(2, rng);
    CMatrix bm = qkdtest::random_density(3, rng).mat();
    auto prod = tensor(a, HermitianOp(bm));
    auto red = partial_trace(prod, {2, 3}, {1});
    CHECK((red.mat() - a.mat()).cwiseAbs().maxCoeff() < 1e-13);
  }

  SECTION("maximally entangled state reduces to I/2") {
    auto red = partial_trace(projector(bell_pair()), {2, 2}, {1});
    CHECK((red.mat() - 0.5 * CMatrix::Identity(2, 2)).norm() < 1e-14);
  }

  SECTION("preserves the trace") {
    auto h = random_hermitian(12, rng);
    CHECK(partial_trace(h, {2, 3, 2}, {2}).trace() == Catch::Approx(h.trace()));
    CHECK(partial_trace(h, {2, 3, 2}, {0, 2}).trace() == Catch::Approx(h.trace()));
  }

  SECTION("rejects inconsistent dimensions") {
    CHECK_THROWS_AS(partial_trace(identity_op(5), {2, 3}, {0}), std::invalid_argument);
  }
}

TEST_CASE("swap operator") {
  auto p = swap_operator({2, 3, 2}, 0, 2);

  SECTION("maps |0,l,1> to |1,l,0>") {
    for (int l = 0; l < 3; ++l) {
      CVector in = CVector::Zero(12);
      in(0 * 6 + l * 2 + 1) = 1.0;  // |0, l, 1>
      CVector out = p.mat() * in;
      CVector expected = CVector::Zero(12);
      expected(1 * 6 + l * 2 + 0) = 1.0;  // |1, l, 0>
      CHECK((out - expected).norm() == 0.0);
    }
  }

  SECTION("squares to the identity and is unitary") {
    CHECK((p.mat() * p.mat() - CMatrix::Identity(12, 12)).norm() == 0.0);
    CHECK((p.mat() * p.mat().adjoint() - CMatrix::Identity(12, 12)).norm() == 0.0);
  }

  SECTION("symmetric products are fixed points") {
    std::mt19937 rng(3);
    auto a = random_hermitian(2, rng);
    auto b = random_hermitian(3, rng);
    auto sym = tensor(a, b, a);
    CHECK((p.mat() * sym.mat() * p.mat() - sym.mat()).norm() < 1e-13);
  }

  SECTION("rejects unequal dimensions") {
    CHECK_THROWS_AS(swap_operator({2, 3, 2}, 0, 1), std::invalid_argument);
  }
}

TEST_CASE("real embedding") {
  SECTION("real input duplicates into diagonal blocks") {
    std::mt19937 rng(5);
    RMatrix a = RMatrix::Random(4, 4);
    a = 0.5 * (a + a.transpose().eval());
    auto h = HermitianOp(a.cast<Complex>());
    RMatrix e = real_embed(h);
    CHECK((e.topLeftCorner(4, 4) - a).norm() == 0.0);
    CHECK((e.bottomRightCorner(4, 4) - a).norm() == 0.0);
    CHECK(e.topRightCorner(4, 4).norm() == 0.0);
  }

  SECTION("sigma_y embeds with eigenvalues {-1, -1, 1, 1}") {
    RMatrix e = real_embed(HermitianOp(paulis::sigma_y()));
    Eigen::SelfAdjointEigenSolver<RMatrix> es(e, Eigen::EigenvaluesOnly);
    RVector ev = es.eigenvalues();
    CHECK(ev(0) == Catch::Approx(-1.0));
    CHECK(ev(1) == Catch::Approx(-1.0));
    CHECK(ev(2) == Catch::Approx(1.0));
    CHECK(ev(3) == Catch::Approx(1.0));
  }

  SECTION("round-trips through real_unembed") {
    std::mt19937 rng(17);
    auto h = random_hermitian(6, rng);
    auto back = real_unembed(real_embed(h));
    CHECK((back.mat() - h.mat()).norm() < 1e-14);
  }

  SECTION("positivity is preserved in both directions") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
      auto h = random_hermitian(5, rng);
      const double direct = min_eigenvalue(h);
      Eigen::SelfAdjointEigenSolver<RMatrix> es(real_embed(h), Eigen::EigenvaluesOnly);
      const double embedded = es.eigenvalues().minCoeff();
      CHECK(embedded == Catch::Approx(direct).margin(1e-10));
    }
  }
}

TEST_CASE("min_eigenvalue basics") {
  CHECK(min_eigenvalue(identity_op(4)) == Catch::Approx(1.0));
  CHECK(min_eigenvalue(zero_op(3)) == Catch::Approx(0.0).margin(1e-15));
  CHECK(min_eigenvalue(partial_transpose(projector(bell_pair()), 2, 2)) ==
        Catch::Approx(-0.5).margin(1e-12));
}

TEST_CASE("expand and assemble validate their inputs") {
  auto pb = product_basis(pauli_basis(), gellmann_basis());
  CHECK_THROWS_AS(expand(identity_op(4), pb), std::invalid_argument);
  CHECK_THROWS_AS(assemble(CoeffVector::Zero(35), pb), std::invalid_argument);
}

TEST_CASE("hermiticity is enforced at construction") {
  CMatrix bad(2, 2);
  bad << 1.0, 2.0, 3.0, 4.0;
  CHECK_THROWS_AS(HermitianOp(bad), std::invalid_argument);
  CHECK_THROWS_AS(HermitianOp(CMatrix::Zero(2, 3)), std::invalid_argument);
}
