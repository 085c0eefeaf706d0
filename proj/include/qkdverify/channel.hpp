// Lossy depolarizing channel with a collective rotation, correlation-data
// generation for the verifier, and the quantum bit error rate both from
// simulation and in closed form.
//
// The channel maps the source state to
//   (1-p) [ (1-e) (I (x) U(theta)) rho_psi (I (x) U(theta))^dag
//           + (e/2) rho_A (x) I~ ]  +  p rho_A (x) |vac><vac|,
// where I~ is the identity on the qubit block of Bob's qutrit space. Loss
// lands in the vacuum outcome, which never sifts, so the QBER is
// independent of p.

#pragma once

#include "qkdverify/protocols.hpp"

namespace qkdverify {

struct ChannelParams {
  double p = 0.0;      // photon loss probability
  double e = 0.0;      // depolarizing rate
  double theta = 0.0;  // collective rotation angle, radians

  void validate() const {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("channel: p outside [0, 1]");
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("channel: e outside [0, 1]");
    if (!(theta >= 0.0 && theta <= M_PI / 4 + 1e-12))
      throw std::invalid_argument("channel: theta outside [0, pi/4]");
  }
};

/// Rotation by theta on the qubit block of the qutrit space, identity on
/// the vacuum.
inline CMatrix unitary_u(double theta) {
  CMatrix u = CMatrix::Zero(3, 3);
  u(0, 0) = std::cos(theta);
  u(0, 1) = -std::sin(theta);
  u(1, 0) = std::sin(theta);
  u(1, 1) = std::cos(theta);
  u(2, 2) = 1.0;
  return u;
}

/// State received by Alice and Bob: dim 6, unit trace, PSD, and with
/// Tr_B equal to Alice's reduced state for every parameter choice.
inline HermitianOp apply_channel(const ProtocolSpec& spec, const ChannelParams& params) {
  params.validate();

  CMatrix embed = CMatrix::Zero(3, 2);
  embed(0, 0) = 1.0;
  embed(1, 1) = 1.0;

  const CMatrix lift = tensor(CMatrix::Identity(2, 2), unitary_u(params.theta) * embed);
  const HermitianOp rotated = projector((lift * spec.source_state).eval());

  const HermitianOp rho_a = alice_reduced(spec);
  const HermitianOp depol = tensor(rho_a, detail::qutrit_block_identity());
  const HermitianOp lost = tensor(rho_a, detail::vacuum_projector());

  const double p = params.p, e = params.e;
  return (1 - p) * ((1 - e) * rotated + (e / 2) * depol) + p * lost;
}

/// Observed expectation values: one row per A_i (x) B_j and one per
/// tomography observable C_k (x) I.
struct CorrelationData {
  std::vector<HermitianOp> operators;  // dim 6
  std::vector<double> values;
  int n_alice = 0;  // POVM block layout: first n_alice * n_bob entries
  int n_bob = 0;
};

inline CorrelationData correlations(const ProtocolSpec& spec, const HermitianOp& rho) {
  if (rho.dim() != 6) throw std::invalid_argument("correlations: state must have dim 6");
  CorrelationData data;
  data.n_alice = static_cast<int>(spec.alice_povm.size());
  data.n_bob = static_cast<int>(spec.bob_povm.size());
  for (const auto& a : spec.alice_povm)
    for (const auto& b : spec.bob_povm) {
      data.operators.push_back(tensor(a, b));
      data.values.push_back(hs_inner(data.operators.back(), rho));
    }
  for (const auto& c : spec.alice_tomo) {
    data.operators.push_back(tensor(c, identity_op(3)));
    data.values.push_back(hs_inner(data.operators.back(), rho));
  }
  return data;
}

/// Error rate on the sifted key: sifted error probability over sifted
/// total probability, using the protocol's sifting rule.
inline double qber_simulated(const ProtocolSpec& spec, const HermitianOp& rho) {
  if (spec.sift_pairs.empty())
    throw std::invalid_argument("qber_simulated: protocol has no sifting rule");
  double err = 0.0, total = 0.0;
  for (const auto& pair : spec.sift_pairs) {
    const double prob =
        pair.weight * hs_inner(tensor(spec.alice_povm[pair.alice], spec.bob_povm[pair.bob]), rho);
    total += prob;
    if (pair.error) err += prob;
  }
  if (total < 1e-15) throw std::runtime_error("qber_simulated: zero sifted probability");
  return err / total;
}

/// Closed-form QBER for the named protocols under the channel above.
inline double qber_analytic(const ProtocolSpec& spec, double e, double theta) {
  const double s2 = std::sin(theta) * std::sin(theta);
  const double c2 = std::cos(theta) * std::cos(theta);

  if (spec.name == "two-state") {
    const double a2 = *spec.alpha * *spec.alpha;
    const double b2 = 1.0 - a2;
    const double gamma = 2.0 * (a2 * s2 + b2 * c2);
    return (2.0 * s2 + (1.0 - 2.0 * s2) * e) /
           (2.0 * (2.0 * b2 + (a2 - b2) * (gamma + (1.0 - gamma) * e)));
  }
  if (spec.name == "six-state") return (4.0 * s2 + (3.0 - 4.0 * s2) * e) / 6.0;
  if (spec.name == "four-state") return s2 + (1.0 - 2.0 * s2) * e / 2.0;
  if (spec.name == "four-plus-two") {
    const double a2 = *spec.alpha * *spec.alpha;
    const double b2 = 1.0 - a2;
    const double d = a2 - b2;
    return (e + (1.0 - e) * (1.0 + d * d) * s2) /
           (2.0 * (e + (1.0 - e) * (2.0 * (a2 * a2 + b2 * b2) * s2 + 4.0 * a2 * b2 * c2)));
  }
  if (spec.name == "three-state") return 0.5 * (1.0 + (1.0 - e) * (s2 - c2));
  if (spec.name == "trine")
    return (2.0 * e + 4.0 * (1.0 - e) * s2) / (3.0 + e + 2.0 * (1.0 - e) * s2);
  if (spec.name == "amp") return 0.5 * ((1.0 - e) * s2 + e);
  throw std::invalid_argument("qber_analytic: unknown protocol " + spec.name);
}

}  // namespace qkdverify
