#include "qkdverify/channel.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace qkdverify;

namespace {

std::vector<ProtocolSpec> grid_protocols() {
  std::vector<ProtocolSpec> out = {four_state(), six_state(), three_state(), trine(), amp()};
  for (double alpha : {0.2, 0.4}) {
    out.push_back(two_state(alpha));
    out.push_back(four_plus_two(alpha));
  }
  return out;
}

}  // namespace

TEST_CASE("collective rotation unitary") {
  CHECK((unitary_u(0.0) - CMatrix::Identity(3, 3)).norm() == 0.0);

  CVector zero3 = CVector::Unit(3, 0);
  CVector out = unitary_u(M_PI / 4) * zero3;
  CHECK(std::abs(out(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(out(1) - 1.0 / std::sqrt(2.0)) < 1e-15);

  CVector vac = CVector::Unit(3, 2);
  CHECK(((unitary_u(0.7) * vac) - vac).norm() == 0.0);

  CMatrix u = unitary_u(0.37);
  CHECK((u * u.adjoint() - CMatrix::Identity(3, 3)).norm() < 1e-15);
}

TEST_CASE("channel output is a valid state with fixed Alice marginal") {
  SECTION("noise off reproduces the embedded source") {
    auto spec = four_state();
    auto rho = apply_channel(spec, {0.0, 0.0, 0.0});
    CMatrix embed = CMatrix::Zero(3, 2);
    embed(0, 0) = embed(1, 1) = 1.0;
    CVector psi6 = tensor(CMatrix::Identity(2, 2), embed) * spec.source_state;
    CHECK((rho.mat() - projector(psi6).mat()).cwiseAbs().maxCoeff() < 1e-14);
  }

  SECTION("total loss leaves rho_A tensor the vacuum") {
    auto spec = six_state();
    auto rho = apply_channel(spec, {1.0, 0.3, 0.1});
    auto expected = tensor(alice_reduced(spec), detail::vacuum_projector());
    CHECK((rho.mat() - expected.mat()).cwiseAbs().maxCoeff() < 1e-14);
  }

  SECTION("valid state and preserved marginal over the parameter grid") {
    for (const auto& spec : grid_protocols()) {
      auto rho_a = alice_reduced(spec);
      for (double p : {0.0, 0.3, 1.0})
        for (double e : {0.0, 0.2, 1.0})
          for (double theta : {0.0, M_PI / 8}) {
            auto rho = apply_channel(spec, {p, e, theta});
            INFO(spec.name << " p=" << p << " e=" << e << " theta=" << theta);
            CHECK(rho.trace() == Catch::Approx(1.0));
            CHECK(min_eigenvalue(rho) > -1e-12);
            auto red = partial_trace(rho, {2, 3}, {1});
            CHECK((red.mat() - rho_a.mat()).cwiseAbs().maxCoeff() < 1e-12);
          }
    }
  }

  SECTION("parameter validation") {
    auto spec = four_state();
    CHECK_THROWS_AS(apply_channel(spec, {-0.1, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(apply_channel(spec, {0.0, 1.5, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(apply_channel(spec, {0.0, 0.0, 2.0}), std::invalid_argument);
  }
}

TEST_CASE("correlation data") {
  auto spec = six_state();
  auto rho = apply_channel(spec, {0.35, 0.4, M_PI / 8});
  auto data = correlations(spec, rho);

  SECTION("POVM block sums to one") {
    double total = 0;
    for (int i = 0; i < data.n_alice * data.n_bob; ++i) {
      CHECK(data.values[i] > -1e-12);
      CHECK(data.values[i] < 1.0 + 1e-12);
      total += data.values[i];
    }
    CHECK(total == Catch::Approx(1.0));
  }

  SECTION("vacuum marginal equals the loss probability exactly") {
    for (const auto& sp : grid_protocols()) {
      for (double p : {0.0, 0.17, 0.62}) {
        auto r = apply_channel(sp, {p, 0.3, 0.1});
        auto d = correlations(sp, r);
        double vac_total = 0;
        for (int i = 0; i < d.n_alice; ++i)
          vac_total += d.values[i * d.n_bob + (d.n_bob - 1)];
        INFO(sp.name);
        CHECK(vac_total == Catch::Approx(p).margin(1e-12));
      }
    }
  }

  SECTION("tomography rows are channel-independent") {
    auto quiet = correlations(spec, apply_channel(spec, {0.0, 0.0, 0.0}));
    auto noisy = correlations(spec, apply_channel(spec, {0.8, 0.9, M_PI / 8}));
    const size_t first_tomo = static_cast<size_t>(data.n_alice * data.n_bob);
    for (size_t i = first_tomo; i < quiet.values.size(); ++i)
      CHECK(quiet.values[i] == Catch::Approx(noisy.values[i]).margin(1e-12));
  }

  SECTION("dimension mismatch is rejected") {
    CHECK_THROWS_AS(correlations(spec, identity_op(4)), std::invalid_argument);
  }
}

TEST_CASE("qber anchors") {
  SECTION("noiseless channel gives zero error for every protocol") {
    for (const auto& spec : grid_protocols()) {
      auto rho = apply_channel(spec, {0.0, 0.0, 0.0});
      INFO(spec.name);
      CHECK(qber_simulated(spec, rho) < 1e-12);
      CHECK(qber_analytic(spec, 0.0, 0.0) == Catch::Approx(0.0).margin(1e-15));
    }
  }

  SECTION("four-state at e = 0.5 gives one quarter") {
    auto spec = four_state();
    CHECK(qber_analytic(spec, 0.5, 0.0) == Catch::Approx(0.25).margin(1e-12));
    auto rho = apply_channel(spec, {0.0, 0.5, 0.0});
    CHECK(qber_simulated(spec, rho) == Catch::Approx(0.25).margin(1e-9));
  }

  SECTION("six-state at e = 0.66 gives one third of 0.99") {
    auto spec = six_state();
    CHECK(qber_analytic(spec, 0.66, 0.0) == Catch::Approx(0.33).margin(1e-12));
  }

  SECTION("amp halves the depolarizing rate at theta = 0") {
    CHECK(qber_analytic(amp(), 0.292, 0.0) == Catch::Approx(0.146).margin(1e-12));
  }

  SECTION("unknown protocol is rejected") {
    ProtocolSpec fake = four_state();
    fake.name = "mystery";
    CHECK_THROWS_AS(qber_analytic(fake, 0.1, 0.0), std::invalid_argument);
  }
}

TEST_CASE("simulated and analytic QBER agree on the full grid") {
  // Loss never sifts, so the QBER must be p-independent as well.
  const double thetas[] = {0.0, M_PI / 8};
  const double es[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  const double ps[] = {0.0, 0.2, 0.4, 0.6, 0.8};
  for (const auto& spec : grid_protocols()) {
    for (double theta : thetas)
      for (double e : es) {
        const double analytic = qber_analytic(spec, e, theta);
        for (double p : ps) {
          auto rho = apply_channel(spec, {p, e, theta});
          const double sim = qber_simulated(spec, rho);
          INFO(spec.name << " e=" << e << " p=" << p << " theta=" << theta);
          CHECK(std::abs(sim - analytic) < 1e-9);
        }
      }
  }
}
