#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "bellkit/errors.hpp"
#include "bellkit/tolerances.hpp"

namespace bellkit {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double pi = std::numbers::pi;

inline std::size_t ipow(std::size_t base, int exp)
{
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Pauli matrix by index: 0 = I, 1 = x, 2 = y, 3 = z.
inline Eigen::Matrix2cd pauli(int mu)
{
  const cplx I(0.0, 1.0);
  Eigen::Matrix2cd s;
  switch (mu) {
    case 0: s << 1, 0, 0, 1; break;
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -I, I, 0; break;
    case 3: s << 1, 0, 0, -1; break;
    default: throw ValidationError("pauli index out of range");
  }
  return s;
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Normalized amplitude vector.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(CVec amplitudes) : amp_(std::move(amplitudes))
  {
    if (amp_.size() == 0) throw ValidationError("empty state vector");
    if (std::abs(amp_.squaredNorm() - 1.0) > tol::algebraic)
      throw ValidationError("state vector is not normalized");
  }
  /// Normalizes the input instead of rejecting it.
  static StateVector normalized(CVec amplitudes)
  {
    double n = amplitudes.norm();
    if (n == 0.0) throw ValidationError("zero vector cannot be normalized");
    return StateVector(amplitudes / n);
  }
  /// Computational basis state |index> in dimension dim.
  static StateVector basis(int dim, int index)
  {
    if (index < 0 || index >= dim) throw ValidationError("basis index out of range");
    CVec v = CVec::Zero(dim);
    v(index) = 1.0;
    return StateVector(v);
  }

  int dim() const { return static_cast<int>(amp_.size()); }
  const CVec &amplitudes() const { return amp_; }
  cplx operator[](int i) const { return amp_(i); }

 private:
  CVec amp_;
};

/// Hermitian, positive semidefinite, unit-trace matrix.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(CMat entries, bool check = true) : m_(std::move(entries))
  {
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw ValidationError("density matrix must be square");
    if (check) validate();
  }
  static DensityMatrix pure(const StateVector &psi)
  {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
  }
  static DensityMatrix maximally_mixed(int dim)
  {
    return DensityMatrix(CMat::Identity(dim, dim) / static_cast<double>(dim));
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMat &matrix() const { return m_; }
  cplx operator()(int r, int c) const { return m_(r, c); }

  double purity() const { return (m_ * m_).trace().real(); }

  void validate() const
  {
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > tol::algebraic)
      throw ValidationError("density matrix is not Hermitian");
    if (std::abs(m_.trace() - cplx(1.0)) > tol::algebraic)
      throw ValidationError("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<CMat> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol::algebraic)
      throw ValidationError("density matrix has a negative eigenvalue");
  }

 private:
  CMat m_;
};

/// Real 3-vector on or inside the unit ball.
struct BlochVector {
  Vec3 v = Vec3::Zero();

  BlochVector() = default;
  BlochVector(double x, double y, double z) : v(x, y, z) { check_ball(); }
  explicit BlochVector(const Vec3 &u) : v(u) { check_ball(); }

  static BlochVector spherical(double theta, double phi)
  {
    return BlochVector(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
  }
  double norm() const { return v.norm(); }
  bool is_unit() const { return std::abs(v.norm() - 1.0) <= tol::algebraic; }
  void require_unit() const
  {
    if (!is_unit()) throw ValidationError("measurement setting must be a unit vector");
  }

 private:
  void check_ball() const
  {
    if (v.norm() > 1.0 + tol::algebraic) throw ValidationError("Bloch vector longer than 1");
  }
};

/// Bloch vector of a single-qubit pure state.
inline BlochVector bloch_vector(const StateVector &psi)
{
  if (psi.dim() != 2) throw ValidationError("bloch_vector needs a qubit state");
  CMat rho = psi.amplitudes() * psi.amplitudes().adjoint();
  Vec3 r;
  for (int k = 1; k <= 3; ++k) r(k - 1) = (rho * pauli(k)).trace().real();
  return BlochVector(r);
}

/// The observable m . sigma.
inline Eigen::Matrix2cd spin_observable(const Vec3 &m)
{
  return m(0) * pauli(1) + m(1) * pauli(2) + m(2) * pauli(3);
}

// ---------------------------------------------------------------------------
// Composition and reduction
// ---------------------------------------------------------------------------

inline StateVector tensor_product(const StateVector &a, const StateVector &b)
{
  CVec out(a.dim() * b.dim());
  for (int i = 0; i < a.dim(); ++i) out.segment(i * b.dim(), b.dim()) = a[i] * b.amplitudes();
  return StateVector::normalized(out);
}

inline CMat kron(const CMat &a, const CMat &b)
{
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline DensityMatrix tensor_product(const DensityMatrix &a, const DensityMatrix &b)
{
  return DensityMatrix(kron(a.matrix(), b.matrix()), false);
}

/// Keeps the subsystems listed in `keep` (any order; output follows the
/// original subsystem order). `dims` lists subsystem dimensions, first one
/// slowest.
inline DensityMatrix partial_trace(const DensityMatrix &rho, const std::vector<int> &dims,
                                   std::vector<int> keep)
{
  std::size_t total = 1;
  for (int d : dims) {
    if (d < 1) throw ValidationError("subsystem dimension must be positive");
    total *= static_cast<std::size_t>(d);
  }
  if (static_cast<std::size_t>(rho.dim()) != total) throw ValidationError("dims do not match density matrix");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  const int n = static_cast<int>(dims.size());
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw ValidationError("partial_trace index out of range");
    kept[k] = true;
  }
  int dk = 1, dt = 1;
  for (int i = 0; i < n; ++i) (kept[i] ? dk : dt) *= dims[i];

  // Split a full index into (kept, traced) indices.
  auto split = [&](std::size_t idx, int &ik, int &it) {
    std::vector<int> digits(n);
    for (int i = n - 1; i >= 0; --i) {
      digits[i] = static_cast<int>(idx % dims[i]);
      idx /= dims[i];
    }
    ik = 0;
    it = 0;
    for (int i = 0; i < n; ++i) {
      if (kept[i]) ik = ik * dims[i] + digits[i];
      else it = it * dims[i] + digits[i];
    }
  };
  std::vector<int> kidx(total), tidx(total);
  for (std::size_t i = 0; i < total; ++i) split(i, kidx[i], tidx[i]);

  CMat out = CMat::Zero(dk, dk);
  for (std::size_t r = 0; r < total; ++r)
    for (std::size_t c = 0; c < total; ++c)
      if (tidx[r] == tidx[c]) out(kidx[r], kidx[c]) += rho(static_cast<int>(r), static_cast<int>(c));
  return DensityMatrix(out, false);
}

/// Qubit convenience overload.
inline DensityMatrix partial_trace(const DensityMatrix &rho, int qubits, const std::vector<int> &keep)
{
  return partial_trace(rho, std::vector<int>(qubits, 2), keep);
}

// ---------------------------------------------------------------------------
// Correlation tensor
// ---------------------------------------------------------------------------

/// T_{mu1..muN} = Tr(rho sigma_mu1 x .. x sigma_muN), mu in {0,1,2,3}, party 1
/// slowest in the flat index.
class CorrelationTensor {
 public:
  CorrelationTensor() = default;
  CorrelationTensor(int parties, std::vector<double> values) : n_(parties), v_(std::move(values))
  {
    if (v_.size() != ipow(4, n_)) throw ValidationError("correlation tensor has wrong size");
  }

  int parties() const { return n_; }
  const std::vector<double> &values() const { return v_; }

  static std::size_t flat(const std::vector<int> &mu)
  {
    std::size_t idx = 0;
    for (int m : mu) idx = idx * 4 + static_cast<std::size_t>(m);
    return idx;
  }
  double at(const std::vector<int> &mu) const
  {
    if (static_cast<int>(mu.size()) != n_) throw ValidationError("wrong number of tensor indices");
    return v_[flat(mu)];
  }
  /// Index string over {0,x,y,z}, e.g. "xxz0".
  double at(const std::string &s) const
  {
    std::vector<int> mu;
    for (char c : s) {
      switch (c) {
        case '0': case 'I': mu.push_back(0); break;
        case 'x': case '1': mu.push_back(1); break;
        case 'y': case '2': mu.push_back(2); break;
        case 'z': case '3': mu.push_back(3); break;
        default: throw ValidationError("bad tensor index character");
      }
    }
    return at(mu);
  }

  double sum_of_squares() const
  {
    double s = 0;
    for (double x : v_) s += x * x;
    return s;
  }

  /// The 3^N block with all indices in {x,y,z}; index digit k-1 per party.
  std::vector<double> full_block() const
  {
    std::size_t m = ipow(3, n_);
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t rest = i, idx = 0, mul = 1;
      for (int p = 0; p < n_; ++p) {
        idx += (rest % 3 + 1) * mul;
        rest /= 3;
        mul *= 4;
      }
      out[i] = v_[idx];
    }
    return out;
  }

 private:
  int n_ = 0;
  std::vector<double> v_;
};

inline int qubit_count(int dim)
{
  int n = 0;
  while ((1 << n) < dim) ++n;
  if ((1 << n) != dim) throw ValidationError("dimension is not a power of two");
  return n;
}

inline CorrelationTensor correlation_tensor(const DensityMatrix &rho, int parties)
{
  if (parties < 1 || parties > max_qubits) throw GuardError("qubit count outside the supported range");
  if (rho.dim() != (1 << parties)) throw ValidationError("density matrix dimension does not match party count");
  const std::size_t dim = static_cast<std::size_t>(rho.dim());
  const std::size_t terms = ipow(4, parties);
  std::vector<double> out(terms);
  const CMat &m = rho.matrix();
  const cplx I(0.0, 1.0);
  for (std::size_t t = 0; t < terms; ++t) {
    // Pauli string as flip mask plus per-qubit phase rule.
    std::vector<int> mu(parties);
    std::size_t rest = t;
    for (int p = parties - 1; p >= 0; --p) {
      mu[p] = static_cast<int>(rest % 4);
      rest /= 4;
    }
    std::size_t flip = 0;
    for (int p = 0; p < parties; ++p)
      if (mu[p] == 1 || mu[p] == 2) flip |= std::size_t(1) << (parties - 1 - p);
    cplx acc = 0.0;
    for (std::size_t x = 0; x < dim; ++x) {
      cplx c = 1.0;
      for (int p = 0; p < parties; ++p) {
        int bit = static_cast<int>((x >> (parties - 1 - p)) & 1u);
        if (mu[p] == 2) c *= bit ? -I : I;
        else if (mu[p] == 3 && bit) c = -c;
      }
      acc += m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x ^ flip)) * c;
    }
    out[t] = acc.real();
  }
  return CorrelationTensor(parties, std::move(out));
}

/// Contracts the last index of a 3^n block with v.
inline std::vector<double> contract_last(const std::vector<double> &block, const Vec3 &v)
{
  std::vector<double> out(block.size() / 3);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = block[3 * i] * v(0) + block[3 * i + 1] * v(1) + block[3 * i + 2] * v(2);
  return out;
}

/// E = sum over k in {1,2,3}^N of T_k prod_n (m_n)_{k_n}.
inline double quantum_correlation(const CorrelationTensor &T, const std::vector<BlochVector> &settings)
{
  if (static_cast<int>(settings.size()) != T.parties()) throw ValidationError("one setting per party required");
  for (const auto &s : settings) s.require_unit();
  std::vector<double> b = T.full_block();
  for (int p = T.parties() - 1; p >= 0; --p) b = contract_last(b, settings[p].v);
  return b[0];
}

/// Tr(rho (m_1.sigma) x ... x (m_N.sigma)) evaluated on the matrix directly.
inline double direct_correlation(const DensityMatrix &rho, const std::vector<BlochVector> &settings)
{
  CMat op = CMat::Identity(1, 1);
  for (const auto &s : settings) op = kron(op, spin_observable(s.v));
  if (op.rows() != rho.dim()) throw ValidationError("setting count does not match state");
  return (rho.matrix() * op).trace().real();
}

// ---------------------------------------------------------------------------
// Named states
// ---------------------------------------------------------------------------

struct NamedStateSpec {
  enum class Kind { singlet, phi_plus, ghz_plus, ghz_minus, generalized_ghz, w, dur, wz_four_qubit, noisy };

  Kind kind = Kind::singlet;
  int n = 2;
  double alpha = 0.0;
  double visibility = 1.0;
  std::shared_ptr<const NamedStateSpec> inner;

  static NamedStateSpec of(Kind k, int n, double alpha = 0.0, double v = 1.0)
  {
    NamedStateSpec s;
    s.kind = k, s.n = n, s.alpha = alpha, s.visibility = v;
    return s;
  }
  static NamedStateSpec singlet() { return of(Kind::singlet, 2); }
  static NamedStateSpec phi_plus() { return of(Kind::phi_plus, 2); }
  static NamedStateSpec ghz_plus(int n) { return of(Kind::ghz_plus, n); }
  static NamedStateSpec ghz_minus(int n) { return of(Kind::ghz_minus, n); }
  static NamedStateSpec generalized_ghz(int n, double alpha) { return of(Kind::generalized_ghz, n, alpha); }
  static NamedStateSpec w(int n) { return of(Kind::w, n); }
  static NamedStateSpec dur(int n, double alpha_n = 0.0) { return of(Kind::dur, n, alpha_n); }
  static NamedStateSpec wz_four_qubit() { return of(Kind::wz_four_qubit, 4); }
  static NamedStateSpec noisy(const NamedStateSpec &in, double v)
  {
    NamedStateSpec s = of(Kind::noisy, in.parties(), 0.0, v);
    s.inner = std::make_shared<const NamedStateSpec>(in);
    return s;
  }

  int parties() const { return n; }

  std::string name() const
  {
    switch (kind) {
      case Kind::singlet: return "singlet";
      case Kind::phi_plus: return "phi_plus";
      case Kind::ghz_plus: return "ghz_plus";
      case Kind::ghz_minus: return "ghz_minus";
      case Kind::generalized_ghz: return "generalized_ghz";
      case Kind::w: return "w";
      case Kind::dur: return "dur";
      case Kind::wz_four_qubit: return "wz_four_qubit";
      case Kind::noisy: return "noisy(" + (inner ? inner->name() : std::string("?")) + ")";
    }
    return "?";
  }
};

namespace detail {

inline StateVector from_terms(int n, const std::vector<std::pair<std::uint32_t, cplx>> &terms)
{
  CVec v = CVec::Zero(std::size_t(1) << n);
  for (auto [idx, c] : terms) v(idx) += c;
  return StateVector::normalized(v);
}

/// Parses "0101" (party 1 first) into a basis index.
inline std::uint32_t bits(const char *s)
{
  std::uint32_t r = 0;
  for (; *s; ++s) r = (r << 1) | static_cast<std::uint32_t>(*s == '1');
  return r;
}

}  // namespace detail

inline DensityMatrix make_state(const NamedStateSpec &spec)
{
  using K = NamedStateSpec::Kind;
  const int n = spec.n;
  if (n < 1) throw ValidationError("party count must be positive");
  if (n > max_qubits) throw GuardError("qubit count exceeds the memory guard (max 10)");
  const std::uint32_t all = (n >= 32) ? 0u : ((1u << n) - 1u);
  const double s2 = 1.0 / std::sqrt(2.0);

  switch (spec.kind) {
    case K::singlet:
      return DensityMatrix::pure(detail::from_terms(2, {{0b01, s2}, {0b10, -s2}}));
    case K::phi_plus:
      return DensityMatrix::pure(detail::from_terms(2, {{0b00, s2}, {0b11, s2}}));
    case K::ghz_plus:
      return DensityMatrix::pure(detail::from_terms(n, {{0, s2}, {all, s2}}));
    case K::ghz_minus:
      return DensityMatrix::pure(detail::from_terms(n, {{0, s2}, {all, -s2}}));
    case K::generalized_ghz: {
      if (spec.alpha < -tol::algebraic || spec.alpha > pi / 4 + tol::algebraic)
        throw ValidationError("generalized GHZ angle must lie in [0, pi/4]");
      return DensityMatrix::pure(
          detail::from_terms(n, {{0, std::cos(spec.alpha)}, {all, std::sin(spec.alpha)}}));
    }
    case K::w: {
      std::vector<std::pair<std::uint32_t, cplx>> t;
      for (int p = 0; p < n; ++p) t.push_back({all & ~(1u << (n - 1 - p)), 1.0});
      return DensityMatrix::pure(detail::from_terms(n, t));
    }
    case K::dur: {
      const std::size_t dim = std::size_t(1) << n;
      CVec phi = CVec::Zero(dim);
      phi(0) = s2;
      phi(all) = s2 * std::polar(1.0, spec.alpha);
      CMat m = phi * phi.adjoint();
      for (int k = 0; k < n; ++k) {
        std::uint32_t pk = 1u << (n - 1 - k);  // z- on party k, z+ elsewhere
        m(pk, pk) += 0.5;
        m(all ^ pk, all ^ pk) += 0.5;
      }
      return DensityMatrix(m / static_cast<double>(n + 1));
    }
    case K::wz_four_qubit: {
      if (n != 4) throw ValidationError("wz_four_qubit has four parties");
      using detail::bits;
      const double a = std::sqrt(1.0 / 3.0), b = 0.5 * a;
      return DensityMatrix::pure(detail::from_terms(4, {{bits("0000"), a},
                                                        {bits("1111"), a},
                                                        {bits("0101"), b},
                                                        {bits("1010"), b},
                                                        {bits("0110"), b},
                                                        {bits("1001"), b}}));
    }
    case K::noisy: {
      if (!spec.inner) throw ValidationError("noisy state needs an inner state");
      if (spec.visibility < 0.0 || spec.visibility > 1.0) throw ValidationError("visibility must lie in [0, 1]");
      DensityMatrix in = make_state(*spec.inner);
      const int dim = in.dim();
      CMat m = (1.0 - spec.visibility) * CMat::Identity(dim, dim) / static_cast<double>(dim) +
               spec.visibility * in.matrix();
      return DensityMatrix(m);
    }
  }
  throw ValidationError("unknown state kind");
}

}  // namespace bellkit
