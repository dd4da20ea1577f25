#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "bellkit/errors.hpp"
#include "bellkit/qstate.hpp"

namespace bellkit::protocols {

/// Bell basis in the order phi+, phi-, psi+, psi-.
inline std::array<CVec, 4> bell_basis()
{
  const double r = 1.0 / std::sqrt(2.0);
  std::array<CVec, 4> b;
  for (auto &v : b) v = CVec::Zero(4);
  b[0](0) = r, b[0](3) = r;
  b[1](0) = r, b[1](3) = -r;
  b[2](1) = r, b[2](2) = r;
  b[3](1) = r, b[3](2) = -r;
  return b;
}

/// U_0 = 1, U_1 = sigma_z, U_2 = sigma_x, U_3 = sigma_x sigma_z.
inline Eigen::Matrix2cd encoding_unitary(int i)
{
  switch (i) {
    case 0: return pauli(0);
    case 1: return pauli(3);
    case 2: return pauli(1);
    case 3: return pauli(1) * pauli(3);
    default: throw ValidationError("encoding index must lie in 0..3");
  }
}

/// Encoded state U_i on qubit 2 of phi+.
inline CVec dense_coding_state(int i)
{
  return kron(pauli(0), encoding_unitary(i)) * bell_basis()[0];
}

/// Bit pair (b1, b2) selects U_{b1 + 2 b2}; decoding reads the Bell outcome.
/// Returns the decoded bits and the probability of that outcome.
struct DenseCodingResult {
  std::pair<int, int> bits;
  double probability = 0;
  std::array<double, 4> outcome_probabilities{};
};

inline DenseCodingResult dense_coding_roundtrip(int b1, int b2)
{
  if ((b1 != 0 && b1 != 1) || (b2 != 0 && b2 != 1)) throw ValidationError("dense coding input must be two bits");
  const CVec s = dense_coding_state(b1 + 2 * b2);
  const auto basis = bell_basis();
  DenseCodingResult r;
  int best = 0;
  for (int k = 0; k < 4; ++k) {
    r.outcome_probabilities[k] = std::norm(basis[k].dot(s));
    if (r.outcome_probabilities[k] > r.outcome_probabilities[best]) best = k;
  }
  r.bits = {best % 2, best / 2};
  r.probability = r.outcome_probabilities[best];
  return r;
}

/// Gram matrix of the four encoded states.
inline CMat dense_coding_gram()
{
  CMat G(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) G(i, j) = dense_coding_state(i).dot(dense_coding_state(j));
  return G;
}

// ---------------------------------------------------------------------------
// Teleportation: channel phi+ on (A, B), unknown qubit E; order A, B, E.
// ---------------------------------------------------------------------------

/// Bob's correction after Alice finds Bell state `outcome` on (A, E).
inline Eigen::Matrix2cd teleport_correction(int outcome)
{
  switch (outcome) {
    case 0: return pauli(0);
    case 1: return pauli(3);
    case 2: return pauli(1);
    case 3: return pauli(1) * pauli(3);  // phase flip, then bit flip
    default: throw ValidationError("Bell outcome must lie in 0..3");
  }
}

struct TeleportBranch {
  double probability = 0;
  double fidelity = 0;
};

/// Channel `channel` is the Bell state (1 (x) U_channel) phi+ shared by A and B;
/// Bob applies U_channel^dagger after the usual correction for `outcome`.
inline TeleportBranch teleport(const StateVector &psi, int outcome, int channel = 0)
{
  if (psi.dim() != 2) throw ValidationError("teleportation input must be a qubit");
  if (outcome < 0 || outcome > 3) throw ValidationError("Bell outcome must lie in 0..3");
  if (channel < 0 || channel > 3) throw ValidationError("channel must name a Bell state 0..3");
  const CVec total = kron(bell_basis()[channel], psi.amplitudes());  // A, B, E
  const CVec bell = bell_basis()[outcome];
  CVec bob = CVec::Zero(2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int e = 0; e < 2; ++e) bob(b) += std::conj(bell(2 * a + e)) * total(4 * a + 2 * b + e);
  TeleportBranch r;
  r.probability = bob.squaredNorm();
  const CVec out = teleport_correction(outcome) * encoding_unitary(channel).adjoint() * bob / std::sqrt(r.probability);
  r.fidelity = std::norm(psi.amplitudes().dot(out));
  return r;
}

/// State of Alice's pair (A, E) after the Bell measurement, averaged over outcomes.
inline CMat sender_pair_after_measurement(const StateVector &psi)
{
  CMat rho = CMat::Zero(4, 4);
  const auto basis = bell_basis();
  for (int k = 0; k < 4; ++k) rho += teleport(psi, k).probability * basis[k] * basis[k].adjoint();
  return rho;
}

// ---------------------------------------------------------------------------
// GHZ paradox
// ---------------------------------------------------------------------------

struct GhzParadox {
  std::array<bool, 4> eigen_relations{};
  std::array<double, 4> eigenvalues{};
  double mermin_value = 0;
  double mermin_bound = 2;
  int lr_models_found = 0;  // assignments satisfying all four relations
};

/// (|000> + i |111>)/sqrt2.
inline CVec mermin_ghz()
{
  CVec v = CVec::Zero(8);
  v(0) = 1.0 / std::sqrt(2.0);
  v(7) = cplx(0, 1.0 / std::sqrt(2.0));
  return v;
}

inline GhzParadox ghz_paradox_check()
{
  GhzParadox r;
  const CVec g = mermin_ghz();
  // Observables sigma_{i} per party; 1 = x, 2 = y.
  const std::array<std::array<int, 3>, 4> ops{{{2, 1, 1}, {1, 2, 1}, {1, 1, 2}, {2, 2, 2}}};
  const std::array<int, 4> expected{1, 1, 1, -1};
  for (int t = 0; t < 4; ++t) {
    const CMat O = kron(kron(pauli(ops[t][0]), pauli(ops[t][1])), pauli(ops[t][2]));
    const CVec Og = O * g;
    r.eigenvalues[t] = g.dot(Og).real();
    r.eigen_relations[t] = (Og - expected[t] * g).cwiseAbs().maxCoeff() < tol::algebraic;
  }
  r.mermin_value = r.eigenvalues[0] + r.eigenvalues[1] + r.eigenvalues[2] - r.eigenvalues[3];
  for (int a = 0; a < 64; ++a) {
    auto v = [&](int bit) { return ((a >> bit) & 1) ? -1 : 1; };
    const int A1 = v(0), A2 = v(1), B1 = v(2), B2 = v(3), C1 = v(4), C2 = v(5);
    if (A2 * B1 * C1 == 1 && A1 * B2 * C1 == 1 && A1 * B1 * C2 == 1 && A2 * B2 * C2 == -1) ++r.lr_models_found;
  }
  return r;
}

}  // namespace bellkit::protocols
