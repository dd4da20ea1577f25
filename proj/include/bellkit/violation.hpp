#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bellkit/bellgen.hpp"
#include "bellkit/errors.hpp"
#include "bellkit/optimize.hpp"
#include "bellkit/qstate.hpp"

namespace bellkit {

/// Orthonormal right-handed frame; columns are the local axes.
struct LocalFrame {
  Mat3 rotation = Mat3::Identity();

  bool valid() const
  {
    return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-9 &&
           std::abs(rotation.determinant() - 1.0) <= 1e-9;
  }
  Vec3 axis(int i) const { return rotation.col(i); }
};

struct ConditionResult {
  std::string condition;
  double value = 0.0;
  double bound = 1.0;
  double violation_factor = 0.0;
  std::vector<LocalFrame> frames;  // flattened in evaluation order
  std::vector<double> params;
  bool converged = true;
  int restarts = 0;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Tensor helpers on the 3^N full-correlation block
// ---------------------------------------------------------------------------

/// Re-expresses party `p` of a 3^N block in the frame R (new index i is the
/// component along column i of R).
inline std::vector<double> rotate_party(const std::vector<double> &block, int N, int p, const Mat3 &R)
{
  const std::size_t inner = ipow(3, N - 1 - p);
  const std::size_t outer = block.size() / (3 * inner);
  std::vector<double> out(block.size());
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * 3 * inner + in;
      const double t0 = block[base], t1 = block[base + inner], t2 = block[base + 2 * inner];
      for (int i = 0; i < 3; ++i) out[base + i * inner] = R(0, i) * t0 + R(1, i) * t1 + R(2, i) * t2;
    }
  return out;
}

inline CorrelationTensor rotate_tensor(const CorrelationTensor &T, const std::vector<Mat3> &R)
{
  const int N = T.parties();
  if (static_cast<int>(R.size()) != N) throw ValidationError("one rotation per party required");
  std::vector<double> v = T.values();
  for (int p = 0; p < N; ++p) {
    Eigen::Matrix4d R4 = Eigen::Matrix4d::Identity();
    R4.block<3, 3>(1, 1) = R[p];
    const std::size_t inner = ipow(4, N - 1 - p);
    const std::size_t outer = v.size() / (4 * inner);
    std::vector<double> out(v.size());
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * 4 * inner + in;
        for (int i = 0; i < 4; ++i) {
          double s = 0;
          for (int j = 0; j < 4; ++j) s += R4(j, i) * v[base + j * inner];
          out[base + i * inner] = s;
        }
      }
    v = std::move(out);
  }
  return CorrelationTensor(N, std::move(v));
}

/// Sum of the two largest eigenvalues of M^T M (= max over local frames of
/// the 2x2 block of squared correlations).
inline double two_largest_sq_singular(const Mat3 &M)
{
  Eigen::SelfAdjointEigenSolver<Mat3> es(M.transpose() * M, Eigen::EigenvaluesOnly);
  const Vec3 &ev = es.eigenvalues();  // ascending
  return ev(1) + ev(2);
}

inline Mat3 block_matrix(const std::vector<double> &b)
{
  Mat3 M;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) M(i, j) = b[3 * i + j];
  return M;
}

// ---------------------------------------------------------------------------
// Conditions
// ---------------------------------------------------------------------------

inline double horodecki_value(const CorrelationTensor &T)
{
  if (T.parties() != 2) throw ValidationError("horodecki condition needs two qubits");
  return two_largest_sq_singular(block_matrix(T.full_block()));
}

/// Max over frames of sum_{x in {1,2}^N} T_x^2. Frames of the first N-1
/// parties are searched; the last party is solved in closed form.
inline ConditionResult wwzb_sufficient(const CorrelationTensor &T, const OptimizerConfig &cfg = {})
{
  const int N = T.parties();
  if (N < 2) throw ValidationError("wwzb condition needs N >= 2");
  ConditionResult r;
  r.condition = "wwzb";
  r.restarts = cfg.restarts;
  r.seed = cfg.seed;
  const std::vector<double> block = T.full_block();

  auto eval = [&](const std::vector<double> &x, std::vector<Mat3> *frames) {
    std::vector<double> b = block;
    for (int p = 0; p < N - 1; ++p) {
      Mat3 R = euler_rotation(x[3 * p], x[3 * p + 1], x[3 * p + 2]);
      b = rotate_party(b, N, p, R);
      if (frames) frames->push_back(R);
    }
    Mat3 G = Mat3::Zero();
    const std::size_t rows = b.size() / 3;
    for (std::size_t i = 0; i < rows; ++i) {
      bool in_plane = true;
      std::size_t rest = i;
      for (int p = 0; p < N - 1; ++p, rest /= 3)
        if (rest % 3 == 2) in_plane = false;
      if (!in_plane) continue;
      Vec3 t(b[3 * i], b[3 * i + 1], b[3 * i + 2]);
      G += t * t.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(G);
    if (frames) {
      Mat3 R;
      R.col(0) = es.eigenvectors().col(2);
      R.col(1) = es.eigenvectors().col(1);
      R.col(2) = R.col(0).cross(R.col(1));
      frames->push_back(R);
    }
    return es.eigenvalues()(1) + es.eigenvalues()(2);
  };

  OptimizerResult best = maximize_angles(3 * (N - 1), [&](const std::vector<double> &x) { return eval(x, nullptr); }, cfg);
  std::vector<Mat3> frames;
  r.value = eval(best.x, &frames);
  for (const auto &R : frames) r.frames.push_back({R});
  r.params = best.x;
  r.converged = best.converged;
  r.violation_factor = std::sqrt(r.value);
  return r;
}

inline int cn_param_count(int N) { return N <= 2 ? 0 : 3 + 2 * cn_param_count(N - 1); }

namespace detail {

inline double cn_eval(const std::vector<double> &block, int N, const double *x, std::vector<Mat3> *frames)
{
  if (N == 2) return two_largest_sq_singular(block_matrix(block));
  Mat3 R = euler_rotation(x[0], x[1], x[2]);
  if (frames) frames->push_back(R);
  const int sub = cn_param_count(N - 1);
  double v = cn_eval(contract_last(block, R.col(1)), N - 1, x + 3, frames);
  v += cn_eval(contract_last(block, R.col(0)), N - 1, x + 3 + sub, frames);
  return v;
}

}  // namespace detail

/// Recursive condition C_N = [C_{N-1}]_{+2} + [C_{N-1}]'_{+1}, each branch
/// with its own frames; C_2 is solved in closed form.
inline ConditionResult cn_condition(const CorrelationTensor &T, const OptimizerConfig &cfg = {})
{
  const int N = T.parties();
  if (N < 2 || N > 6) throw ValidationError("cn condition supports 2 <= N <= 6");
  ConditionResult r;
  r.condition = "cn";
  r.restarts = cfg.restarts;
  r.seed = cfg.seed;
  const std::vector<double> block = T.full_block();
  const int dim = cn_param_count(N);
  OptimizerResult best = maximize_angles(
      dim, [&](const std::vector<double> &x) { return detail::cn_eval(block, N, x.data(), nullptr); }, cfg);
  std::vector<Mat3> frames;
  r.value = detail::cn_eval(block, N, best.x.data(), &frames);
  for (const auto &R : frames) r.frames.push_back({R});
  r.params = best.x;
  r.converged = best.converged;
  r.violation_factor = std::sqrt(r.value);
  return r;
}

struct MsViolation {
  double lhs = 0.0;
  double bound = 0.0;
  double violation_factor = 0.0;
  std::vector<Vec3> normals;  // per-party normal of the measurement plane
  bool converged = true;
};

/// Complex contraction T o (x) (e1_n + i e2_n) for in-plane axes per party.
inline cplx plane_contraction(const std::vector<double> &block, int N, const std::vector<Vec3> &e1,
                              const std::vector<Vec3> &e2)
{
  std::vector<cplx> b(block.begin(), block.end());
  for (int p = N - 1; p >= 0; --p) {
    std::vector<cplx> out(b.size() / 3);
    const cplx c0(e1[p](0), e2[p](0)), c1(e1[p](1), e2[p](1)), c2(e1[p](2), e2[p](2));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = b[3 * i] * c0 + b[3 * i + 1] * c1 + b[3 * i + 2] * c2;
    b = std::move(out);
  }
  return b[0];
}

/// lhs = (M/2)^N max over frames of sum_{I_xi} (-1)^xi T (2 xi y-indices,
/// rest x), i.e. the modulus of the in-plane complex contraction.
inline MsViolation ms_violation(const CorrelationTensor &T, int M, const OptimizerConfig &cfg = {})
{
  const int N = T.parties();
  if (N < 2 || M < 2) throw ValidationError("ms_violation needs N >= 2 and M >= 2");
  const std::vector<double> block = T.full_block();
  auto axes = [&](const std::vector<double> &x, std::vector<Vec3> &e1, std::vector<Vec3> &e2, std::vector<Vec3> *n) {
    for (int p = 0; p < N; ++p) {
      const double th = x[2 * p], ph = x[2 * p + 1];
      e1[p] = Vec3(std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph), -std::sin(th));
      e2[p] = Vec3(-std::sin(ph), std::cos(ph), 0.0);
      if (n) n->push_back(e1[p].cross(e2[p]));
    }
  };
  auto f = [&](const std::vector<double> &x) {
    std::vector<Vec3> e1(N), e2(N);
    axes(x, e1, e2, nullptr);
    return std::abs(plane_contraction(block, N, e1, e2));
  };
  // The lab xy plane for every party is a natural first start.
  std::vector<std::vector<double>> starts{std::vector<double>(2 * N, 0.0)};
  for (int p = 0; p < N; ++p) starts[0][2 * p] = pi / 2;
  OptimizerResult best = maximize_angles(2 * N, f, cfg, starts);
  MsViolation r;
  std::vector<Vec3> e1(N), e2(N);
  axes(best.x, e1, e2, &r.normals);
  r.lhs = std::pow(M / 2.0, N) * best.value;
  r.bound = msetting_lr_bound(N, M);
  r.violation_factor = r.lhs / r.bound;
  r.converged = best.converged;
  return r;
}

inline MsViolation ms_violation(const DensityMatrix &rho, int N, int M, const OptimizerConfig &cfg = {})
{
  return ms_violation(correlation_tensor(rho, N), M, cfg);
}

/// Dur-state factor with the phase-adapted operator: M^N / ((N+1) 2 B_LR).
inline double dur_violation_factor(int N, int M)
{
  return std::pow(static_cast<double>(M), N) / ((N + 1) * 2.0 * msetting_lr_bound(N, M));
}

/// Dur-state factor of the unmodified operator: cos(alpha_N) times the above.
inline double dur_violation_factor(int N, int M, double alpha_n) { return std::cos(alpha_n) * dur_violation_factor(N, M); }

/// The M-setting Bell operator sum_m c_m (x)_n (cos phi sigma_x + sin phi sigma_y).
inline CMat ms_bell_operator(int N, int M)
{
  BellInequality ineq = msetting_inequality(N, M);
  const int dim = 1 << N;
  CMat B = CMat::Zero(dim, dim);
  for (const auto &[k, c] : ineq.coefficients) {
    CMat op = CMat::Identity(1, 1);
    for (int n = 0; n < N; ++n) {
      const double phi = msetting_angle(N, M, k[n]);
      op = kron(op, spin_observable(Vec3(std::cos(phi), std::sin(phi), 0.0)));
    }
    B += c * op;
  }
  return B;
}

/// (M^N/2)(|psi+><psi+| - |psi-><psi-|).
inline CMat ms_bell_operator_ghz_form(int N, int M)
{
  const int dim = 1 << N;
  CVec p = CVec::Zero(dim), m = CVec::Zero(dim);
  p(0) = m(0) = 1.0 / std::sqrt(2.0);
  p(dim - 1) = 1.0 / std::sqrt(2.0);
  m(dim - 1) = -1.0 / std::sqrt(2.0);
  return msetting_quantum_max(N, M) * (p * p.adjoint() - m * m.adjoint());
}

// ---------------------------------------------------------------------------
// Critical visibility
// ---------------------------------------------------------------------------

struct ConditionSpec {
  enum class Kind { horodecki, wwzb, cn, msetting };
  Kind kind = Kind::cn;
  int M = 2;

  std::string name() const
  {
    switch (kind) {
      case Kind::horodecki: return "horodecki";
      case Kind::wwzb: return "wwzb";
      case Kind::cn: return "cn";
      case Kind::msetting: return "msetting(" + std::to_string(M) + ")";
    }
    return "?";
  }
};

/// Value of the chosen condition; violation means value > 1 (msetting
/// reports the violation factor).
inline double condition_value(const CorrelationTensor &T, const ConditionSpec &c, const OptimizerConfig &cfg = {})
{
  switch (c.kind) {
    case ConditionSpec::Kind::horodecki: return horodecki_value(T);
    case ConditionSpec::Kind::wwzb: return wwzb_sufficient(T, cfg).value;
    case ConditionSpec::Kind::cn: return cn_condition(T, cfg).value;
    case ConditionSpec::Kind::msetting: return ms_violation(T, c.M, cfg).violation_factor;
  }
  return 0.0;
}

/// Visibility V* at which (1-V) noise + V rho reaches the classical limit.
/// White noise scales every full correlation by V, so quadratic conditions
/// give V* = 1/sqrt(value) and the linear msetting factor gives 1/value.
inline double critical_visibility(const NamedStateSpec &spec, const ConditionSpec &c, const OptimizerConfig &cfg = {})
{
  const DensityMatrix rho = make_state(spec);
  const CorrelationTensor T = correlation_tensor(rho, spec.parties());
  const double v = condition_value(T, c, cfg);
  if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
  return c.kind == ConditionSpec::Kind::msetting ? 1.0 / v : 1.0 / std::sqrt(v);
}

}  // namespace bellkit
