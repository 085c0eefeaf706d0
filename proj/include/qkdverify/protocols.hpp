// Entanglement-based descriptions of single-photon QKD protocols under
// loss. Each protocol is a source state on H_2 (x) H_2, Alice's POVM plus
// a tomographically complete observable set, Bob's POVM on the qutrit
// space (|0>, |1>, |vac>) with the vacuum outcome last, and the sifting
// rule used for the error rate. Basis-choice probabilities are folded
// into the POVM weights so each POVM sums to the identity literally.
//
// Builders are pure and the resulting specs immutable, so they can be
// shared freely across threads.

#pragma once

#include "qkdverify/basis.hpp"
#include "qkdverify/operators.hpp"

#include <optional>

namespace qkdverify {

struct SignalEnsemble {
  std::vector<CVector> states;  // unit-norm qubit states
  std::vector<double> probs;    // a priori probabilities, sum to 1
};

/// One sifting entry: Alice outcome / Bob outcome kept with the given
/// announcement weight; `error` marks entries counted as bit errors.
struct SiftPair {
  int alice;
  int bob;
  double weight;
  bool error;
};

struct ProtocolSpec {
  std::string name;
  CVector source_state;                // dim 4, A (x) B ordering
  std::vector<HermitianOp> alice_povm; // dim 2, PSD, sums to I
  std::vector<HermitianOp> alice_tomo; // {sigma_x, sigma_y, sigma_z}
  std::vector<HermitianOp> bob_povm;   // dim 3, PSD, sums to I, vacuum last
  std::vector<SiftPair> sift_pairs;
  std::optional<double> alpha;
};

namespace detail {

inline CVector ket(std::initializer_list<Complex> amps) {
  CVector v(static_cast<Eigen::Index>(amps.size()));
  Eigen::Index i = 0;
  for (Complex a : amps) v(i++) = a;
  return v;
}

// Orthogonal qubit state with the first nonzero amplitude real positive.
inline CVector perp(const CVector& v) {
  CVector w(2);
  w(0) = -std::conj(v(1));
  w(1) = std::conj(v(0));
  for (Eigen::Index i = 0; i < 2; ++i)
    if (std::abs(w(i)) > 1e-12) {
      w *= std::conj(w(i)) / std::abs(w(i));
      break;
    }
  return w;
}

// Qubit operator placed in the top-left block of the qutrit space.
inline HermitianOp embed_qutrit(const HermitianOp& q) {
  CMatrix m = CMatrix::Zero(3, 3);
  m.topLeftCorner(2, 2) = q.mat();
  return HermitianOp(m);
}

inline HermitianOp vacuum_projector() {
  CMatrix m = CMatrix::Zero(3, 3);
  m(2, 2) = 1.0;
  return HermitianOp(m);
}

inline HermitianOp qutrit_block_identity() {
  CMatrix m = CMatrix::Zero(3, 3);
  m(0, 0) = m(1, 1) = 1.0;
  return HermitianOp(m);
}

inline std::vector<HermitianOp> pauli_tomography() {
  auto p = pauli_basis();
  return {p.elements[1], p.elements[2], p.elements[3]};
}

inline void validate_povm(const std::vector<HermitianOp>& povm, Eigen::Index dim,
                          const std::string& who) {
  CMatrix sum = CMatrix::Zero(dim, dim);
  for (const auto& e : povm) {
    if (e.dim() != dim) throw std::invalid_argument(who + ": POVM element dimension");
    if (min_eigenvalue(e) < -1e-10)
      throw std::invalid_argument(who + ": POVM element not positive semidefinite");
    sum += e.mat();
  }
  if ((sum - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument(who + ": POVM does not sum to the identity");
}

inline void validate(const ProtocolSpec& spec) {
  validate_povm(spec.alice_povm, 2, spec.name + " alice");
  validate_povm(spec.bob_povm, 3, spec.name + " bob");
  if (std::abs(spec.source_state.norm() - 1.0) > 1e-10)
    throw std::invalid_argument(spec.name + ": source state not normalized");
}

inline void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0 / std::sqrt(2.0)))
    throw std::invalid_argument("alpha must lie in (0, 1/sqrt(2))");
}

}  // namespace detail

/// Replace an N-state qubit ensemble by a two-qubit source. Builds
/// |psi_src> = sum_i sqrt(p_i) |i>|phi_i> on H_N (x) H_2, compresses
/// Alice's side onto the support of her reduced state with an isometry V,
/// and returns the compressed source state together with Alice's POVM
/// A_i = V^dag |i><i| V. The defining property is
///   Tr_A[(A_i (x) I) |psi><psi|] = p_i |phi_i><phi_i|.
inline std::pair<CVector, std::vector<HermitianOp>> compress_source(
    const SignalEnsemble& ensemble) {
  const int n = static_cast<int>(ensemble.states.size());
  if (n < 1 || ensemble.probs.size() != ensemble.states.size())
    throw std::invalid_argument("compress_source: malformed ensemble");
  double psum = 0;
  for (double p : ensemble.probs) psum += p;
  if (std::abs(psum - 1.0) > 1e-10)
    throw std::invalid_argument("compress_source: probabilities must sum to 1");

  CVector psi_src = CVector::Zero(2 * n);
  for (int i = 0; i < n; ++i) {
    if (std::abs(ensemble.states[i].norm() - 1.0) > 1e-10)
      throw std::invalid_argument("compress_source: signal states must be unit norm");
    psi_src.segment(2 * i, 2) = std::sqrt(ensemble.probs[i]) * ensemble.states[i];
  }

  CMatrix v;  // N x 2 isometry onto the support of Alice's reduced state
  if (n == 2) {
    v = CMatrix::Identity(2, 2);
  } else {
    CMatrix rho_a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        rho_a(i, j) = psi_src.segment(2 * i, 2).dot(psi_src.segment(2 * j, 2));
    // dot() conjugates its argument, giving <psi_j | psi_i> blocks; fix order.
    rho_a = rho_a.conjugate().eval();

    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_a);
    int rank = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (es.eigenvalues()(i) > 1e-10) ++rank;
    if (rank > 2)
      throw std::invalid_argument("compress_source: ensemble is not qubit-representable");

    v = CMatrix(n, 2);
    for (int col = 0; col < 2; ++col) {
      // Eigenvalues ascend; take the two largest, biggest first.
      CVector u = es.eigenvectors().col(n - 1 - col);
      Eigen::Index imax = 0;
      u.cwiseAbs().maxCoeff(&imax);
      u *= std::conj(u(imax)) / std::abs(u(imax));
      v.col(col) = u;
    }
  }

  CVector psi = tensor(v.adjoint(), CMatrix::Identity(2, 2)) * psi_src;
  psi.normalize();

  std::vector<HermitianOp> alice;
  alice.reserve(n);
  for (int i = 0; i < n; ++i) {
    CVector w = v.adjoint() * CVector::Unit(n, i);
    alice.push_back(projector(w));
  }
  return {psi, alice};
}

/// Two-state protocol with signals phi_i = alpha|0> + (-1)^i beta|1>.
/// Bob uses the unambiguous-exclusion POVM
/// B_j = 1/(2 beta^2) |phi_{1-j}^perp><phi_{1-j}^perp| plus an inconclusive
/// outcome and the vacuum.
inline ProtocolSpec two_state(double alpha) {
  detail::require_alpha(alpha);
  const double beta = std::sqrt(1.0 - alpha * alpha);

  ProtocolSpec spec;
  spec.name = "two-state";
  spec.alpha = alpha;

  const CVector phi0 = detail::ket({alpha, beta});
  const CVector phi1 = detail::ket({alpha, -beta});
  spec.source_state = CVector::Zero(4);
  spec.source_state.segment(0, 2) = phi0 / std::sqrt(2.0);
  spec.source_state.segment(2, 2) = phi1 / std::sqrt(2.0);

  spec.alice_povm = {projector(CVector::Unit(2, 0)), projector(CVector::Unit(2, 1))};
  spec.alice_tomo = detail::pauli_tomography();

  const double w = 1.0 / (2.0 * beta * beta);
  HermitianOp b0 = detail::embed_qutrit(w * projector(detail::perp(phi1)));
  HermitianOp b1 = detail::embed_qutrit(w * projector(detail::perp(phi0)));
  HermitianOp bnull = detail::qutrit_block_identity() - b0 - b1;
  spec.bob_povm = {b0, b1, bnull, detail::vacuum_projector()};

  spec.sift_pairs = {{0, 0, 1.0, false}, {0, 1, 1.0, true},
                     {1, 0, 1.0, true},  {1, 1, 1.0, false}};
  detail::validate(spec);
  return spec;
}

namespace detail {

inline ProtocolSpec basis_protocol(const std::string& name,
                                   const std::vector<CVector>& signals,
                                   const std::vector<CVector>& bob_states,
                                   double bob_weight,
                                   const std::vector<SiftPair>& sift) {
  ProtocolSpec spec;
  spec.name = name;

  SignalEnsemble ens;
  ens.states = signals;
  ens.probs.assign(signals.size(), 1.0 / static_cast<double>(signals.size()));
  auto [psi, alice] = compress_source(ens);
  spec.source_state = psi;
  spec.alice_povm = std::move(alice);
  spec.alice_tomo = pauli_tomography();

  for (const auto& b : bob_states)
    spec.bob_povm.push_back(embed_qutrit(bob_weight * projector(b)));
  spec.bob_povm.push_back(vacuum_projector());

  spec.sift_pairs = sift;
  validate(spec);
  return spec;
}

}  // namespace detail

/// Four-state (BB84-style) protocol: signals {|0>, |1>, |+>, |->}, Bob
/// measures Z or X with probability 1/2 each.
inline ProtocolSpec four_state() {
  const double s = 1.0 / std::sqrt(2.0);
  const CVector zero = detail::ket({1, 0});
  const CVector one = detail::ket({0, 1});
  const CVector plus = detail::ket({s, s});
  const CVector minus = detail::ket({s, -s});
  return detail::basis_protocol(
      "four-state", {zero, one, plus, minus}, {zero, one, plus, minus}, 0.5,
      {{0, 0, 1.0, false}, {0, 1, 1.0, true}, {1, 0, 1.0, true}, {1, 1, 1.0, false},
       {2, 2, 1.0, false}, {2, 3, 1.0, true}, {3, 2, 1.0, true}, {3, 3, 1.0, false}});
}

/// Six-state protocol: adds the sigma_y eigenstates; Bob picks one of
/// three bases with probability 1/3.
inline ProtocolSpec six_state() {
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i1(0, 1);
  const CVector zero = detail::ket({1, 0});
  const CVector one = detail::ket({0, 1});
  const CVector plus = detail::ket({s, s});
  const CVector minus = detail::ket({s, -s});
  const CVector yplus = detail::ket({s, i1 * s});
  const CVector yminus = detail::ket({s, -i1 * s});
  return detail::basis_protocol(
      "six-state", {zero, one, plus, minus, yplus, yminus},
      {zero, one, plus, minus, yplus, yminus}, 1.0 / 3.0,
      {{0, 0, 1.0, false}, {0, 1, 1.0, true}, {1, 0, 1.0, true}, {1, 1, 1.0, false},
       {2, 2, 1.0, false}, {2, 3, 1.0, true}, {3, 2, 1.0, true}, {3, 3, 1.0, false},
       {4, 4, 1.0, false}, {4, 5, 1.0, true}, {5, 4, 1.0, true}, {5, 5, 1.0, false}});
}

/// Three-state protocol: signals {|0>, |1>, |+>}, Bob measures as in the
/// four-state scheme.
inline ProtocolSpec three_state() {
  const double s = 1.0 / std::sqrt(2.0);
  const CVector zero = detail::ket({1, 0});
  const CVector one = detail::ket({0, 1});
  const CVector plus = detail::ket({s, s});
  const CVector minus = detail::ket({s, -s});
  return detail::basis_protocol(
      "three-state", {zero, one, plus}, {zero, one, plus, minus}, 0.5,
      {{0, 0, 1.0, false}, {0, 1, 1.0, true}, {1, 0, 1.0, true}, {1, 1, 1.0, false},
       {2, 2, 1.0, false}, {2, 3, 1.0, true}});
}

/// Trine protocol: three equiangular signals; Bob's POVM element B_i
/// excludes signal i. Alice announces a random pair containing her state,
/// so an exclusion inside the pair is conclusive: weight 1/2 for the two
/// correct exclusions, weight 1 (always an error) when the exclusion hits
/// Alice's actual state.
inline ProtocolSpec trine() {
  const double h = std::sqrt(3.0) / 2.0;
  const CVector phi0 = detail::ket({1, 0});
  const CVector phi1 = detail::ket({0.5, h});
  const CVector phi2 = detail::ket({0.5, -h});
  const CVector anti0 = detail::ket({0, 1});
  const CVector anti1 = detail::ket({h, -0.5});
  const CVector anti2 = detail::ket({h, 0.5});
  std::vector<SiftPair> sift;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      sift.push_back({i, j, i == j ? 1.0 : 0.5, i == j});
  return detail::basis_protocol("trine", {phi0, phi1, phi2}, {anti0, anti1, anti2},
                                2.0 / 3.0, sift);
}

/// Four-plus-two-state protocol: two interleaved two-state protocols (one
/// real pair, one with imaginary relative phase); Bob picks one of the two
/// exclusion POVMs at random. Conclusive outcomes of the POVM matching
/// Alice's pair sift; cross-pair outcomes are basis mismatch.
inline ProtocolSpec four_plus_two(double alpha) {
  detail::require_alpha(alpha);
  const double beta = std::sqrt(1.0 - alpha * alpha);
  const Complex i1(0, 1);

  const CVector phi0 = detail::ket({alpha, beta});
  const CVector phi1 = detail::ket({alpha, -beta});
  const CVector phib0 = detail::ket({alpha, i1 * beta});
  const CVector phib1 = detail::ket({alpha, -i1 * beta});

  ProtocolSpec spec;
  spec.name = "four-plus-two";
  spec.alpha = alpha;

  SignalEnsemble ens;
  ens.states = {phi0, phi1, phib0, phib1};
  ens.probs.assign(4, 0.25);
  auto [psi, alice] = compress_source(ens);
  spec.source_state = psi;
  spec.alice_povm = std::move(alice);
  spec.alice_tomo = detail::pauli_tomography();

  const double w = 1.0 / (2.0 * beta * beta);
  auto exclusion = [&](const CVector& a, const CVector& b) {
    HermitianOp b0 = detail::embed_qutrit(0.5 * w * projector(detail::perp(b)));
    HermitianOp b1 = detail::embed_qutrit(0.5 * w * projector(detail::perp(a)));
    HermitianOp bnull = 0.5 * detail::qutrit_block_identity() - b0 - b1;
    return std::vector<HermitianOp>{b0, b1, bnull};
  };
  auto povm1 = exclusion(phi0, phi1);
  auto povm2 = exclusion(phib0, phib1);
  spec.bob_povm = {povm1[0], povm1[1], povm1[2], povm2[0], povm2[1], povm2[2],
                   detail::vacuum_projector()};

  spec.sift_pairs = {{0, 0, 1.0, false}, {0, 1, 1.0, true},
                     {1, 0, 1.0, true},  {1, 1, 1.0, false},
                     {2, 3, 1.0, false}, {2, 4, 1.0, true},
                     {3, 3, 1.0, true},  {3, 4, 1.0, false}};
  detail::validate(spec);
  return spec;
}

/// Acin-Massar-Pironio protocol: six equatorial signals spanning the X, Y,
/// and (X+Y)/sqrt(2) bases; Bob measures in the two bases at azimuth
/// +-pi/4. Only Alice's third basis matches one of Bob's, so those events
/// form the sifted key.
inline ProtocolSpec amp() {
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i1(0, 1);
  const Complex em = std::exp(Complex(0, -M_PI / 4));  // e^{-i pi/4}
  const Complex ep = std::exp(Complex(0, M_PI / 4));

  const std::vector<CVector> signals = {
      detail::ket({s, s}),        detail::ket({s, -s}),
      detail::ket({s, i1 * s}),   detail::ket({s, -i1 * s}),
      detail::ket({s, em * s}),   detail::ket({s, -em * s})};
  const std::vector<CVector> bob = {
      detail::ket({s, em * s}), detail::ket({s, -em * s}),
      detail::ket({s, ep * s}), detail::ket({s, -ep * s})};
  return detail::basis_protocol(
      "amp", signals, bob, 0.5,
      {{4, 0, 1.0, false}, {4, 1, 1.0, true}, {5, 0, 1.0, true}, {5, 1, 1.0, false}});
}

/// The sifting rule: conclusive same-basis outcome pairs with their
/// announcement weights and error flags.
inline std::vector<SiftPair> sift_rule(const ProtocolSpec& spec) { return spec.sift_pairs; }

/// Alice's reduced state, fixed by the preparation process.
inline HermitianOp alice_reduced(const ProtocolSpec& spec) {
  return partial_trace(projector(spec.source_state), {2, 2}, {1});
}

inline const std::vector<std::string>& protocol_names() {
  static const std::vector<std::string> names = {
      "two-state", "four-state", "six-state", "three-state",
      "trine",     "four-plus-two", "amp"};
  return names;
}

inline bool protocol_needs_alpha(const std::string& name) {
  return name == "two-state" || name == "four-plus-two";
}

inline ProtocolSpec make_protocol(const std::string& name,
                                  std::optional<double> alpha = std::nullopt) {
  if (protocol_needs_alpha(name) && !alpha)
    throw std::invalid_argument(name + " requires an alpha parameter");
  if (name == "two-state") return two_state(*alpha);
  if (name == "four-state") return four_state();
  if (name == "six-state") return six_state();
  if (name == "three-state") return three_state();
  if (name == "trine") return trine();
  if (name == "four-plus-two") return four_plus_two(*alpha);
  if (name == "amp") return amp();
  throw std::invalid_argument("unknown protocol: " + name);
}

}  // namespace qkdverify
