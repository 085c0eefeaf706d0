#include "qkdverify/sdp.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace qkdverify;

namespace {

SdpProblem diag_problem(std::initializer_list<double> diag) {
  SdpProblem p;
  const Eigen::Index n = static_cast<Eigen::Index>(diag.size());
  p.F0 = RMatrix::Zero(n, n);
  Eigen::Index i = 0;
  for (double d : diag) p.F0(i, i) = d, ++i;
  p.c = RVector::Zero(0);
  return p;
}

}  // namespace

TEST_CASE("feasibility transform appends one shifted-identity variable") {
  auto base = diag_problem({1.0, 1.0});
  auto shifted = feasibility_transform(base);
  REQUIRE(shifted.Fi.size() == base.Fi.size() + 1);
  CHECK((shifted.Fi.back() - RMatrix::Identity(2, 2)).norm() == 0.0);
  CHECK(shifted.c(shifted.c.size() - 1) == 1.0);

  auto scaled = feasibility_transform(base, 0.5);
  CHECK((scaled.Fi.back() - 0.5 * RMatrix::Identity(2, 2)).norm() == 0.0);

  SdpProblem nonzero = base;
  nonzero.Fi.push_back(RMatrix::Identity(2, 2));
  nonzero.c = RVector::Ones(1);
  CHECK_THROWS_AS(feasibility_transform(nonzero), std::invalid_argument);
}

TEST_CASE("eigenvalue-shift problems solve to t* = -lambda_min(F0)") {
  SECTION("positive definite constant term") {
    auto v = check_feasibility(diag_problem({1.0, 1.0}));
    CHECK(v.decision == Feasibility::Feasible);
    CHECK(v.t_star == Catch::Approx(-1.0).margin(1e-7));
  }

  SECTION("indefinite constant term") {
    auto v = check_feasibility(diag_problem({-2.0, 1.0}));
    CHECK(v.decision == Feasibility::Infeasible);
    CHECK(v.t_star == Catch::Approx(2.0).margin(1e-7));
  }

  SECTION("dual certificate aligns with the violated direction") {
    auto v = check_feasibility(diag_problem({-0.3, 1.0}));
    CHECK(v.decision == Feasibility::Infeasible);
    CHECK(v.t_star == Catch::Approx(0.3).margin(1e-7));
    // Tr(F0 Z) = -t* at the optimum.
    RMatrix f0 = diag_problem({-0.3, 1.0}).F0;
    CHECK((f0.cwiseProduct(v.Z)).sum() == Catch::Approx(-0.3).margin(1e-6));
    CHECK(v.Z.trace() == Catch::Approx(1.0).margin(1e-7));
  }
}

TEST_CASE("transformed solve returns matching primal and dual values") {
  auto prob = feasibility_transform(diag_problem({-1.0, 3.0}));
  auto res = solve(prob);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.primal_value == Catch::Approx(1.0).margin(1e-7));
  CHECK(res.dual_value == Catch::Approx(1.0).margin(1e-7));
  CHECK(res.gap < 1e-7);
  // Z concentrates on the violated coordinate.
  CHECK(res.Z(0, 0) == Catch::Approx(1.0).margin(1e-6));
  CHECK(res.Z(1, 1) == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("solver certificates satisfy the duality identities") {
  // A feasibility problem with free directions: F0 indefinite, two
  // off-diagonal directions that cannot repair it.
  SdpProblem p;
  p.F0 = RMatrix::Zero(3, 3);
  p.F0.diagonal() << -0.4, 0.9, 0.4;
  RMatrix f1 = RMatrix::Zero(3, 3);
  f1(0, 1) = f1(1, 0) = 1.0;
  RMatrix f2 = RMatrix::Zero(3, 3);
  f2(1, 2) = f2(2, 1) = 1.0;
  p.Fi = {f1, f2};
  p.c = RVector::Zero(2);

  auto v = check_feasibility(p);
  const auto& res = v.result;
  REQUIRE(res.status == SolveStatus::Optimal);

  auto shifted = feasibility_transform(p);
  RMatrix fx = shifted.F0;
  for (size_t i = 0; i < shifted.Fi.size(); ++i) fx += res.x(i) * shifted.Fi[i];

  SECTION("weak duality residual vanishes") {
    const double lhs = shifted.c.dot(res.x) + (res.Z.cwiseProduct(shifted.F0)).sum();
    const double rhs = (res.Z.cwiseProduct(fx)).sum();
    CHECK(std::abs(lhs - rhs) < 1e-8);
    CHECK(rhs > -1e-9);
  }

  SECTION("complementary slackness") {
    CHECK((res.Z.cwiseProduct(fx)).sum() < 1e-7);
  }

  SECTION("dual feasibility") {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(res.Z, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-9);
    for (size_t i = 0; i < shifted.Fi.size(); ++i)
      CHECK(std::abs((shifted.Fi[i].cwiseProduct(res.Z)).sum() - shifted.c(i)) < 1e-8);
  }

  SECTION("strong duality at convergence") {
    CHECK(std::abs(res.primal_value - res.dual_value) < 1e-7);
  }
}

TEST_CASE("feasible problems bound every dual-feasible objective") {
  // Feasible case: Tr(F0 Z) >= -t* >= 0 for the returned certificate.
  SdpProblem p = diag_problem({0.5, 2.0});
  auto v = check_feasibility(p);
  REQUIRE(v.decision == Feasibility::Feasible);
  CHECK(v.t_star == Catch::Approx(-0.5).margin(1e-7));
  CHECK((p.F0.cwiseProduct(v.Z)).sum() >= -v.t_star - 1e-8);
}

TEST_CASE("marginal verdicts are surfaced near the boundary") {
  auto v = check_feasibility(diag_problem({0.0, 1.0}));
  CHECK(v.decision == Feasibility::Marginal);
  CHECK(std::abs(v.t_star) <= 1e-6);
}

TEST_CASE("identical inputs produce identical results") {
  SdpProblem p;
  p.F0 = RMatrix::Zero(4, 4);
  p.F0.diagonal() << -0.2, 0.7, 0.1, 1.3;
  RMatrix f1 = RMatrix::Zero(4, 4);
  f1(0, 2) = f1(2, 0) = 0.5;
  f1(1, 1) = -0.25;
  p.Fi = {f1};
  p.c = RVector::Zero(1);

  auto a = check_feasibility(p);
  auto b = check_feasibility(p);
  REQUIRE(a.result.iterations == b.result.iterations);
  CHECK(std::memcmp(a.result.x.data(), b.result.x.data(),
                    sizeof(double) * a.result.x.size()) == 0);
  CHECK(std::memcmp(a.result.Z.data(), b.result.Z.data(),
                    sizeof(double) * a.result.Z.size()) == 0);
}

TEST_CASE("input validation") {
  SdpProblem p;
  p.F0 = RMatrix::Identity(2, 2);
  p.Fi = {RMatrix::Identity(3, 3)};
  p.c = RVector::Zero(1);
  CHECK_THROWS_AS(solve(p), std::invalid_argument);
  CHECK_THROWS_AS(feasibility_transform(diag_problem({1.0}), -1.0), std::invalid_argument);
}
