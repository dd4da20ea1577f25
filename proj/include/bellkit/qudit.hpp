#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "bellkit/errors.hpp"
#include "bellkit/qstate.hpp"

namespace bellkit::qudit {

/// alpha_d^p = exp(2 pi i p / d) with p reduced mod d first.
inline cplx alpha(int d, long long p)
{
  const long long r = ((p % d) + d) % d;
  return std::polar(1.0, 2.0 * pi * static_cast<double>(r) / d);
}

inline void require_dim(int d)
{
  if (d < 2) throw ValidationError("qudit dimension must be at least 2");
}

/// [S_kl]_{rm} = delta_{r-k, m} alpha_d^{ml}.
inline CMat s_operator(int d, int k, int l)
{
  require_dim(d);
  if (k < 0 || k >= d || l < 0 || l >= d) throw ValidationError("S_kl indices must lie in [0, d)");
  CMat S = CMat::Zero(d, d);
  for (int m = 0; m < d; ++m) S((m + k) % d, m) = alpha(d, static_cast<long long>(m) * l);
  return S;
}

/// Smallest positive [k x]_d; d for k = 0.
inline int f_of(int d, int k) { return k == 0 ? d : std::gcd(k, d); }

struct EigenSystem {
  int d = 0, k = 0, l = 0;
  int f = 0;
  CMat vectors;                  // columns are eigenvectors
  std::vector<cplx> values;      // matching eigenvalues
  std::vector<std::pair<int, int>> labels;  // (g, a) per column
  cplx phase{1.0, 0.0};          // e^{i phi}
  double residual = 0;
};

namespace detail {
inline double arg_2pi(cplx z)
{
  double a = std::arg(z);
  if (a < -1e-12) a += 2.0 * pi;
  return std::max(a, 0.0);
}
}  // namespace detail

/// Closed-form eigenbasis. Columns are sorted by eigenvalue argument in
/// [0, 2pi), ties by (a, g).
inline EigenSystem eigensystem(int d, int k, int l)
{
  require_dim(d);
  if (k < 0 || k >= d || l < 0 || l >= d) throw ValidationError("S_kl indices must lie in [0, d)");
  EigenSystem es;
  es.d = d;
  es.k = k;
  es.l = l;
  es.f = f_of(d, k);
  const int f = es.f, m = d / f;
  const long long e = (static_cast<long long>(m) * (m - 1) / 2 * k * l) % d;
  // Principal m-th root of alpha_d^e.
  es.phase = std::polar(1.0, 2.0 * pi * static_cast<double>(e) / (static_cast<double>(d) * m));

  struct Col {
    CVec v;
    cplx lambda;
    int g, a;
  };
  std::vector<Col> cols;
  cols.reserve(d);
  const double norm = 1.0 / std::sqrt(static_cast<double>(m));
  for (int a = 0; a < f; ++a)
    for (int g = 0; g < m; ++g) {
      const cplx lg0 = es.phase * alpha(d, static_cast<long long>(g) * f);
      CVec v = CVec::Zero(d);
      cplx lpow(1.0, 0.0);  // lambda_{g,0}^{-eta}
      for (int eta = 0; eta < m; ++eta) {
        const long long q = static_cast<long long>(eta) * (eta - 1) / 2 % d * k % d * l;
        v((a + static_cast<long long>(eta) * k) % d) = norm * lpow * alpha(d, q);
        lpow /= lg0;
      }
      cols.push_back({v, lg0 * alpha(d, static_cast<long long>(a) * l), g, a});
    }
  std::stable_sort(cols.begin(), cols.end(), [](const Col &x, const Col &y) {
    const double ax = detail::arg_2pi(x.lambda), ay = detail::arg_2pi(y.lambda);
    if (std::abs(ax - ay) > 1e-9) return ax < ay;
    return std::pair(x.a, x.g) < std::pair(y.a, y.g);
  });
  es.vectors = CMat(d, d);
  for (int c = 0; c < d; ++c) {
    es.vectors.col(c) = cols[c].v;
    es.values.push_back(cols[c].lambda);
    es.labels.emplace_back(cols[c].g, cols[c].a);
  }
  const CMat S = s_operator(d, k, l);
  CMat D = CMat::Zero(d, d);
  for (int c = 0; c < d; ++c) D(c, c) = es.values[c];
  es.residual = (S * es.vectors - es.vectors * D).cwiseAbs().maxCoeff();
  if (es.residual > tol::algebraic) throw std::runtime_error("eigensystem construction failed residual check");
  return es;
}

inline double unitarity_error(const CMat &U)
{
  return (U.adjoint() * U - CMat::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff();
}

/// True iff every cross overlap has modulus 1/sqrt(d).
inline bool mub_check(const CMat &B1, const CMat &B2, double tolerance = 1e-9)
{
  if (B1.rows() != B2.rows() || B1.rows() != B1.cols() || B2.rows() != B2.cols())
    throw ValidationError("bases must be square and of equal dimension");
  if (unitarity_error(B1) > tolerance || unitarity_error(B2) > tolerance) throw ValidationError("basis is not unitary");
  const double target = 1.0 / std::sqrt(static_cast<double>(B1.rows()));
  return ((B1.adjoint() * B2).cwiseAbs().array() - target).abs().maxCoeff() <= tolerance;
}

/// Fourier basis in dimension d: column j is |j>_x.
inline CMat fourier_basis(int d)
{
  require_dim(d);
  CMat F(d, d);
  for (int kap = 0; kap < d; ++kap)
    for (int j = 0; j < d; ++j) F(kap, j) = alpha(d, -static_cast<long long>(kap) * j) / std::sqrt(static_cast<double>(d));
  return F;
}

// ---------------------------------------------------------------------------
// Composite measurement plan for S_x on d = d1 d0
// ---------------------------------------------------------------------------

/// Stage 1 measures the d1 subsystem and reveals j1; the stage-2 basis on the
/// d0 subsystem is chosen from j1 and reveals j0. j = j1 + d1 j0 and the
/// basis index is kappa = d0 kappa1 + kappa0.
struct MeasurementPlan {
  int d1 = 0, d0 = 0;
  CMat stage1_basis;
  std::vector<CMat> stage2_bases;  // indexed by j1

  int dim() const { return d1 * d0; }
};

inline MeasurementPlan composite_plan(int d1, int d0)
{
  if (d1 < 2 || d0 < 2) throw ValidationError("subsystem dimensions must be at least 2");
  MeasurementPlan p;
  p.d1 = d1;
  p.d0 = d0;
  const int d = d1 * d0;
  p.stage1_basis = fourier_basis(d1);
  for (int j1 = 0; j1 < d1; ++j1) {
    CMat B(d0, d0);
    for (int k0 = 0; k0 < d0; ++k0)
      for (int j0 = 0; j0 < d0; ++j0)
        B(k0, j0) = alpha(d, -static_cast<long long>(j1 + d1 * j0) * k0) / std::sqrt(static_cast<double>(d0));
    p.stage2_bases.push_back(B);
  }
  return p;
}

/// Outcome distribution over j for the feed-forward plan.
inline std::vector<double> simulate_plan(const MeasurementPlan &plan, const StateVector &psi)
{
  const int d = plan.dim();
  if (psi.dim() != d) throw ValidationError("state dimension does not match plan");
  std::vector<double> p(d, 0.0);
  // psi as a d1 x d0 matrix: row kappa1, column kappa0.
  CMat A(plan.d1, plan.d0);
  for (int k1 = 0; k1 < plan.d1; ++k1)
    for (int k0 = 0; k0 < plan.d0; ++k0) A(k1, k0) = psi[plan.d0 * k1 + k0];
  for (int j1 = 0; j1 < plan.d1; ++j1) {
    const CVec post = A.transpose() * plan.stage1_basis.col(j1).conjugate();  // unnormalized d0 state
    for (int j0 = 0; j0 < plan.d0; ++j0) p[j1 + plan.d1 * j0] = std::norm(plan.stage2_bases[j1].col(j0).dot(post));
  }
  return p;
}

/// Direct projection onto the S_x eigenbasis.
inline std::vector<double> direct_distribution(const StateVector &psi)
{
  const CMat F = fourier_basis(psi.dim());
  std::vector<double> p(psi.dim());
  for (int j = 0; j < psi.dim(); ++j) p[j] = std::norm(F.col(j).dot(psi.amplitudes()));
  return p;
}

// ---------------------------------------------------------------------------
// Tomography from S_kl eigenbasis measurements
// ---------------------------------------------------------------------------

using OutcomeDistributions = std::map<std::pair<int, int>, std::vector<double>>;

/// Outcome probabilities in the eigensystem column order, for every (k,l) != (0,0).
inline OutcomeDistributions tomography_distributions(const DensityMatrix &rho)
{
  const int d = rho.dim();
  OutcomeDistributions out;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) {
      if (k == 0 && l == 0) continue;
      const EigenSystem es = eigensystem(d, k, l);
      std::vector<double> p(d);
      for (int j = 0; j < d; ++j) p[j] = (es.vectors.col(j).adjoint() * rho.matrix() * es.vectors.col(j))(0, 0).real();
      out[{k, l}] = p;
    }
  return out;
}

struct Tomography {
  std::map<std::pair<int, int>, cplx> s;  // s_kl = sum_j conj(lambda_j) p_j
  CMat rho;
};

/// rho = (1/d) sum s_kl S_kl with s_00 = 1.
inline Tomography tomography_coefficients(int d, const OutcomeDistributions &probs)
{
  require_dim(d);
  Tomography t;
  t.rho = CMat::Identity(d, d) / static_cast<double>(d);
  t.s[{0, 0}] = 1.0;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) {
      if (k == 0 && l == 0) continue;
      auto it = probs.find({k, l});
      if (it == probs.end() || static_cast<int>(it->second.size()) != d)
        throw ValidationError("tomography input missing an (k, l) distribution");
      const EigenSystem es = eigensystem(d, k, l);
      cplx s = 0;
      for (int j = 0; j < d; ++j) s += std::conj(es.values[j]) * it->second[j];
      t.s[{k, l}] = s;
      t.rho += s * s_operator(d, k, l) / static_cast<double>(d);
    }
  return t;
}

}  // namespace bellkit::qudit
