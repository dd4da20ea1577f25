#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "bellkit/bellgen.hpp"
#include "bellkit/errors.hpp"
#include "bellkit/optimize.hpp"
#include "bellkit/parallel.hpp"
#include "bellkit/qstate.hpp"
#include "bellkit/qudit.hpp"

namespace bellkit::ccp {

// ---------------------------------------------------------------------------
// Qubit problem tied to the M-setting inequality
// ---------------------------------------------------------------------------

/// Weight normalization sum |cos(phi sums)| over all M^N setting tuples.
inline double qubit_norm(int N, int M)
{
  if (N < 2 || M < 2) throw ValidationError("qubit CCP needs N, M >= 2");
  if (std::pow(static_cast<double>(M), N) > 1e6) throw GuardError("M^N exceeds 1e6 terms");
  double s = 0.0;
  std::vector<int> ranges(N, M);
  for_each_tuple(ranges, [&](const SettingTuple &k) {
    double phi = 0.0;
    for (int n = 0; n < N; ++n) phi += msetting_angle(N, M, k[n]);
    s += std::abs(std::cos(phi));
  });
  return s;
}

enum class QubitStrategy { classical_optimal, quantum_ghz };

struct QubitCcpResult {
  int N = 0, M = 0;
  double norm = 0;
  double overlap = 0;  // (F, A)
  double success = 0;  // 1/2 (1 + (F, A))
};

inline double success_from_overlap(double overlap) { return 0.5 * (1.0 + overlap); }

/// Classical: B_LR / norm, with B_LR from brute force when the setting count
/// allows it. Quantum: GHZ correlations give sum cos^2 = M^N / 2.
inline QubitCcpResult qubit_ccp_success(int N, int M, QubitStrategy strategy, bool bruteforce = true)
{
  QubitCcpResult r;
  r.N = N;
  r.M = M;
  r.norm = qubit_norm(N, M);
  double x = 0;
  if (strategy == QubitStrategy::classical_optimal) {
    x = (bruteforce && N * M <= 20) ? lr_bound_bruteforce(msetting_inequality(N, M)) : msetting_lr_bound(N, M);
  } else {
    x = msetting_quantum_max(N, M);
  }
  r.overlap = x / r.norm;
  r.success = success_from_overlap(r.overlap);
  return r;
}

/// P_qm / P_cl.
inline double qubit_advantage_ratio(int N, int M, bool bruteforce = true)
{
  return qubit_ccp_success(N, M, QubitStrategy::quantum_ghz, bruteforce).success /
         qubit_ccp_success(N, M, QubitStrategy::classical_optimal, bruteforce).success;
}

// ---------------------------------------------------------------------------
// Qudit problem tied to the CGLMP expression
// ---------------------------------------------------------------------------

/// P[x][y][c]: probability that the answer exponents satisfy a + b = c (mod d)
/// for question bits x, y.
using SumTable = std::array<std::array<std::vector<double>, 2>, 2>;

inline int mod(int a, int d) { return ((a % d) + d) % d; }

/// Delta = sum_k (1 - 2k/(d-1)) (P(f_k^+) - P(f_k^-)).
inline double delta_from_sums(const SumTable &P, int d)
{
  double delta = 0.0;
  for (int k = 0; k < d / 2; ++k) {
    const double w = 1.0 - 2.0 * k / (d - 1);
    const double plus = 0.25 * (P[0][0][mod(k, d)] + P[0][1][mod(-k, d)] + P[1][0][mod(-k, d)] + P[1][1][mod(k + 1, d)]);
    const double minus =
        0.25 * (P[0][0][mod(-(k + 1), d)] + P[0][1][mod(k + 1, d)] + P[1][0][mod(k + 1, d)] + P[1][1][mod(-k, d)]);
    delta += w * (plus - minus);
  }
  return delta;
}

/// Deterministic local answer exponents: a[x], b[y] in Z_d.
struct DeterministicAnswers {
  std::array<int, 2> a{0, 0};
  std::array<int, 2> b{0, 0};
};

/// Classical protocol: a mixture of deterministic answer functions selected by
/// shared randomness lambda, given as weighted deterministic answers.
struct ClassicalStrategy {
  std::vector<DeterministicAnswers> branches;
  std::vector<double> weights;  // same length; sums to 1
};

/// Quantum protocol: shared state psi (index d * alice + bob); for bit x Alice
/// measures basis alice[x] and answers the exponent equal to the column index,
/// Bob likewise.
struct QuantumStrategy {
  int d = 0;
  CVec psi;
  std::array<CMat, 2> alice;
  std::array<CMat, 2> bob;
};

struct QuditCcpStrategy {
  enum class Kind { classical, quantum } kind = Kind::classical;
  ClassicalStrategy classical;
  QuantumStrategy quantum;
};

inline SumTable empty_sums(int d)
{
  SumTable P;
  for (auto &row : P)
    for (auto &v : row) v.assign(d, 0.0);
  return P;
}

inline SumTable sums_of(const ClassicalStrategy &s, int d)
{
  if (s.branches.empty() || s.branches.size() != s.weights.size()) throw ValidationError("malformed classical strategy");
  double total = 0;
  for (double w : s.weights) {
    if (w < 0) throw ValidationError("negative strategy weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("strategy weights must sum to 1");
  SumTable P = empty_sums(d);
  for (std::size_t i = 0; i < s.branches.size(); ++i)
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        const auto &br = s.branches[i];
        if (br.a[x] < 0 || br.a[x] >= d || br.b[y] < 0 || br.b[y] >= d) throw ValidationError("answer exponent out of range");
        P[x][y][mod(br.a[x] + br.b[y], d)] += s.weights[i];
      }
  return P;
}

/// Joint outcome distribution p(a, b) for measuring psi in bases A (Alice) and B (Bob).
inline CMat joint_probabilities(const CVec &psi, const CMat &A, const CMat &B)
{
  const int d = static_cast<int>(A.rows());
  CMat Psi(d, d);  // Psi(i, j) = <i j | psi>
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) Psi(i, j) = psi(d * i + j);
  const CMat amp = A.adjoint() * Psi * B.conjugate();  // amp(a, b) = <a|<b| psi>
  return amp.cwiseAbs2().cast<cplx>();
}

inline void validate(const QuantumStrategy &q)
{
  const int d = q.d;
  if (d < 2 || q.psi.size() != d * d) throw ValidationError("quantum strategy state has wrong dimension");
  if (std::abs(q.psi.squaredNorm() - 1.0) > tol::algebraic) throw ValidationError("strategy state is not normalized");
  for (const CMat *U : {&q.alice[0], &q.alice[1], &q.bob[0], &q.bob[1]})
    if (U->rows() != d || U->cols() != d || qudit::unitarity_error(*U) > 1e-9)
      throw ValidationError("measurement basis is not a d x d unitary");
}

inline SumTable sums_of(const QuantumStrategy &q)
{
  validate(q);
  const int d = q.d;
  SumTable P = empty_sums(d);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const CMat J = joint_probabilities(q.psi, q.alice[x], q.bob[y]);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) P[x][y][mod(a + b, d)] += J(a, b).real();
    }
  return P;
}

inline double qudit_ccp_delta(const QuditCcpStrategy &s, int d)
{
  if (d < 2) throw ValidationError("qudit dimension must be at least 2");
  if (s.kind == QuditCcpStrategy::Kind::classical) return delta_from_sums(sums_of(s.classical, d), d);
  if (s.quantum.d != d) throw ValidationError("strategy dimension mismatch");
  return delta_from_sums(sums_of(s.quantum), d);
}

/// Both parties always answer 1 (exponent 0).
inline QuditCcpStrategy intuitive_classical_protocol()
{
  QuditCcpStrategy s;
  s.classical.branches = {DeterministicAnswers{}};
  s.classical.weights = {1.0};
  return s;
}

/// Random mixture of `branches` deterministic answer functions; lambda drawn
/// from the counter generator.
inline ClassicalStrategy random_classical_strategy(int d, int branches, std::uint64_t seed)
{
  CounterRng rng{seed};
  ClassicalStrategy s;
  double total = 0;
  for (int i = 0; i < branches; ++i) {
    DeterministicAnswers br;
    for (int k = 0; k < 2; ++k) {
      br.a[k] = static_cast<int>(rng.bits(8 * i + k) % static_cast<std::uint64_t>(d));
      br.b[k] = static_cast<int>(rng.bits(8 * i + 2 + k) % static_cast<std::uint64_t>(d));
    }
    const double w = rng.uniform(8 * i + 4) + 1e-3;
    s.branches.push_back(br);
    s.weights.push_back(w);
    total += w;
  }
  for (double &w : s.weights) w /= total;
  return s;
}

struct SampledDelta {
  double mean = 0;
  double stderr_ = 0;
};

/// Monte Carlo run of the protocol: uniform question bits, lambda picks a
/// branch, and the random dits cancel between answer and target, so each
/// round scores +w_k for hitting f_k^+ and -w_k for f_k^-. The mean score is
/// Delta.
inline SampledDelta sample_classical_delta(const ClassicalStrategy &s, int d, std::uint64_t rounds, std::uint64_t seed)
{
  if (rounds == 0) throw ValidationError("round count must be positive");
  std::vector<double> cdf;
  double acc = 0;
  for (double w : s.weights) cdf.push_back(acc += w);
  // Score for (x, y, c = a + b) from the definition of the target functions.
  std::array<std::array<std::vector<double>, 2>, 2> score;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      score[x][y].assign(d, 0.0);
      const int sg = ((x + y) % 2 == 0) ? 1 : -1;
      for (int k = 0; k < d / 2; ++k) {
        const double w = 1.0 - 2.0 * k / (d - 1);
        score[x][y][mod(x * y + k * sg, d)] += w;
        score[x][y][mod(x * y - (k + 1) * sg, d)] -= w;
      }
    }
  CounterRng rng{seed};
  double sum = 0, sum2 = 0;
  for (std::uint64_t i = 0; i < rounds; ++i) {
    const std::uint64_t bits = rng.bits(2 * i);
    const int x = bits & 1u, y = (bits >> 1) & 1u;
    const double u = rng.uniform(2 * i + 1) * acc;
    std::size_t br = std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    if (br >= s.branches.size()) br = s.branches.size() - 1;
    const double v = score[x][y][mod(s.branches[br].a[x] + s.branches[br].b[y], d)];
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(rounds), m = sum / n;
  return {m, std::sqrt(std::max(0.0, sum2 / n - m * m) / n)};
}

// ---------------------------------------------------------------------------
// CGLMP expression (Collins form, outcomes 0..d-1)
// ---------------------------------------------------------------------------

/// coef[i][j][c]: weight of P(A_i - B_j = c mod d) in I_d.
inline std::array<std::array<std::vector<double>, 2>, 2> cglmp_coefficients(int d)
{
  std::array<std::array<std::vector<double>, 2>, 2> c;
  for (auto &row : c)
    for (auto &v : row) v.assign(d, 0.0);
  for (int k = 0; k < d / 2; ++k) {
    const double w = 1.0 - 2.0 * k / (d - 1);
    c[0][0][mod(k, d)] += w;
    c[0][0][mod(-(k + 1), d)] -= w;
    c[1][0][mod(-(k + 1), d)] += w;
    c[1][0][mod(k, d)] -= w;
    c[1][1][mod(k, d)] += w;
    c[1][1][mod(-(k + 1), d)] -= w;
    c[0][1][mod(-k, d)] += w;
    c[0][1][mod(k + 1, d)] -= w;
  }
  return c;
}

/// I_d from joint tables J[i][j](A, B).
inline double cglmp_value(const std::array<std::array<CMat, 2>, 2> &J)
{
  const int d = static_cast<int>(J[0][0].rows());
  const auto c = cglmp_coefficients(d);
  double I = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) I += c[i][j][mod(a - b, d)] * J[i][j](a, b).real();
  return I;
}

/// Collins-labelled settings: Alice A_0, A_1 and Bob B_0, B_1 as basis columns.
struct CglmpSettings {
  int d = 0;
  std::array<CMat, 2> A;
  std::array<CMat, 2> B;
};

inline double cglmp_value(const CVec &psi, const CglmpSettings &s)
{
  std::array<std::array<CMat, 2>, 2> J;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) J[i][j] = joint_probabilities(psi, s.A[i], s.B[j]);
  return cglmp_value(J);
}

/// Bases with columns |k> = d^{-1/2} sum_j e^{2 pi i j (sign k + shift)/d} e^{i theta_j} |j>.
inline CMat phased_fourier(int d, int sign, double shift, const double *theta)
{
  CMat U(d, d);
  for (int j = 0; j < d; ++j) {
    const double th = (j == 0 || theta == nullptr) ? 0.0 : theta[j - 1];
    for (int k = 0; k < d; ++k)
      U(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(d)), 2.0 * pi * j * (sign * k + shift) / d + th);
  }
  return U;
}

/// Settings from 4(d-1) phases; zero phases give the canonical settings.
inline CglmpSettings cglmp_settings(int d, const std::vector<double> &x)
{
  if (static_cast<int>(x.size()) != 4 * (d - 1)) throw ValidationError("CGLMP parameter vector has wrong size");
  CglmpSettings s;
  s.d = d;
  s.A[0] = phased_fourier(d, +1, 0.0, x.data());
  s.A[1] = phased_fourier(d, +1, 0.5, x.data() + (d - 1));
  s.B[0] = phased_fourier(d, -1, 0.25, x.data() + 2 * (d - 1));
  s.B[1] = phased_fourier(d, -1, -0.25, x.data() + 3 * (d - 1));
  return s;
}

/// Bell operator sum_{ij} sum_{a,b} c_ij(a-b) |a><a|_i (x) |b><b|_j.
inline CMat cglmp_bell_operator(const CglmpSettings &s)
{
  const int d = s.d;
  const auto c = cglmp_coefficients(d);
  CMat Bop = CMat::Zero(d * d, d * d);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const CMat U = kron(s.A[i], s.B[j]);
      CMat W = U;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) W.col(d * a + b) *= c[i][j][mod(a - b, d)];
      Bop.noalias() += W * U.adjoint();
    }
  return Bop;
}

inline CVec maximally_entangled(int d)
{
  CVec v = CVec::Zero(d * d);
  for (int j = 0; j < d; ++j) v(d * j + j) = 1.0 / std::sqrt(static_cast<double>(d));
  return v;
}

struct CglmpResult {
  int d = 0;
  double value = 0;
  std::vector<double> schmidt;  // descending
  CVec state;
  CglmpSettings settings;
  std::vector<double> params;
  bool converged = false;
  int restarts = 0;
  std::uint64_t seed = 0;
};

/// Default search: the canonical settings as the first start plus a few
/// seeded random restarts.
inline OptimizerConfig cglmp_default_config()
{
  OptimizerConfig c;
  c.restarts = 1;
  c.max_iters = 8;
  c.step_tol = 1e-5;
  return c;
}

/// Maximizes I_d over measurement phases; the state is optimal for each
/// setting choice (top eigenvector of the Bell operator), or fixed to the
/// maximally entangled state when `maximally_entangled_only` is set.
inline CglmpResult cglmp_optimize(int d, const OptimizerConfig &cfg = cglmp_default_config(),
                                  bool maximally_entangled_only = false)
{
  if (d < 3 || d > 8) throw ValidationError("CGLMP optimization supports 3 <= d <= 8");
  const CVec phi = maximally_entangled(d);
  auto objective = [&](const std::vector<double> &x) {
    const CMat Bop = cglmp_bell_operator(cglmp_settings(d, x));
    if (maximally_entangled_only) return (phi.adjoint() * Bop * phi)(0, 0).real();
    Eigen::SelfAdjointEigenSolver<CMat> es(Bop, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(d * d - 1);
  };
  const std::size_t dim = 4 * static_cast<std::size_t>(d - 1);
  const OptimizerResult best = maximize_angles(dim, objective, cfg, {std::vector<double>(dim, 0.0)});

  CglmpResult r;
  r.d = d;
  r.params = best.x;
  r.settings = cglmp_settings(d, best.x);
  r.converged = best.converged;
  r.restarts = cfg.restarts + 1;
  r.seed = cfg.seed;
  const CMat Bop = cglmp_bell_operator(r.settings);
  if (maximally_entangled_only) {
    r.state = phi;
  } else {
    Eigen::SelfAdjointEigenSolver<CMat> es(Bop);
    r.state = es.eigenvectors().col(d * d - 1);
  }
  r.value = (r.state.adjoint() * Bop * r.state)(0, 0).real();
  CMat Psi(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) Psi(i, j) = r.state(d * i + j);
  Eigen::JacobiSVD<CMat> svd(Psi);
  for (int i = 0; i < d; ++i) r.schmidt.push_back(svd.singularValues()(i));
  return r;
}

/// Quantum protocol from CGLMP settings. Bit x = 0, 1 selects A_0, A_1 and
/// bit y = 0, 1 selects B_1, B_0; Alice answers the negated outcome, so that
/// a + b = B - A.
inline QuditCcpStrategy strategy_from_cglmp(const CVec &psi, const CglmpSettings &s)
{
  const int d = s.d;
  QuditCcpStrategy st;
  st.kind = QuditCcpStrategy::Kind::quantum;
  st.quantum.d = d;
  st.quantum.psi = psi;
  for (int x = 0; x < 2; ++x) {
    CMat A(d, d);
    for (int a = 0; a < d; ++a) A.col(a) = s.A[x].col(mod(-a, d));
    st.quantum.alice[x] = A;
  }
  st.quantum.bob[0] = s.B[1];
  st.quantum.bob[1] = s.B[0];
  return st;
}

}  // namespace bellkit::ccp
