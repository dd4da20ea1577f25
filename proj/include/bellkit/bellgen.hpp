#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bellkit/errors.hpp"
#include "bellkit/parallel.hpp"
#include "bellkit/qstate.hpp"
#include "bellkit/tolerances.hpp"

namespace bellkit {

/// Setting tuple, one 0-based setting index per party.
using SettingTuple = std::vector<int>;

/// Correlation-function Bell inequality |sum_k c_k E_k| <= lr_bound.
struct BellInequality {
  int parties = 0;
  std::vector<int> settings;                   // M_j per party
  std::map<SettingTuple, double> coefficients;  // zero entries omitted
  double lr_bound = 0.0;
  std::string label;
  bool trivial = false;

  std::size_t correlation_dim() const
  {
    std::size_t d = 1;
    for (int m : settings) d *= static_cast<std::size_t>(m);
    return d;
  }

  /// sum_k c_k E_k for a table or any callable E(k).
  template <class Fn>
  double evaluate(Fn &&E) const
  {
    double s = 0.0;
    for (const auto &[k, c] : coefficients) s += c * E(k);
    return s;
  }

  void validate() const
  {
    if (static_cast<int>(settings.size()) != parties) throw ValidationError("settings list does not match parties");
    for (const auto &[k, c] : coefficients) {
      if (static_cast<int>(k.size()) != parties) throw ValidationError("coefficient key has wrong arity");
      for (int j = 0; j < parties; ++j)
        if (k[j] < 0 || k[j] >= settings[j]) throw ValidationError("coefficient key outside setting range");
    }
    if (!(lr_bound > 0.0)) throw ValidationError("local realistic bound must be positive");
  }
};

/// E_{k1..kN} values keyed by 0-based setting tuples.
struct CorrelationTable {
  std::map<SettingTuple, double> values;

  double at(const SettingTuple &k) const
  {
    auto it = values.find(k);
    if (it == values.end()) throw ValidationError("correlation table entry missing");
    return it->second;
  }
  void validate() const
  {
    for (const auto &[k, e] : values)
      if (std::abs(e) > 1.0 + 1e-9) throw ValidationError("correlation outside [-1, 1]");
  }
};

/// Calls fn(tuple) for every tuple in the product of ranges, last index fastest.
inline void for_each_tuple(const std::vector<int> &ranges, const std::function<void(const SettingTuple &)> &fn)
{
  SettingTuple k(ranges.size(), 0);
  for (int r : ranges)
    if (r <= 0) return;
  while (true) {
    fn(k);
    int j = static_cast<int>(k.size()) - 1;
    while (j >= 0 && ++k[j] == ranges[j]) k[j--] = 0;
    if (j < 0) break;
  }
}

/// Table of local-realistic correlations E_k = prod_j I_j(k_j).
inline CorrelationTable deterministic_table(const std::vector<std::vector<int>> &outcomes)
{
  std::vector<int> ranges;
  for (const auto &o : outcomes) ranges.push_back(static_cast<int>(o.size()));
  CorrelationTable t;
  for_each_tuple(ranges, [&](const SettingTuple &k) {
    double p = 1.0;
    for (std::size_t j = 0; j < k.size(); ++j) p *= outcomes[j][k[j]];
    t.values[k] = p;
  });
  return t;
}

// ---------------------------------------------------------------------------
// Two-setting family
// ---------------------------------------------------------------------------

/// sum over s in {+-1}^N of |sum_k prod_j s_j^{k_j} E_k|, k_j in {0,1}.
inline double wwzb_lhs(const CorrelationTable &E, int parties)
{
  if (parties < 1) throw ValidationError("party count must be positive");
  const std::size_t n_terms = std::size_t(1) << parties;
  std::vector<double> e(n_terms);
  for (std::size_t m = 0; m < n_terms; ++m) {
    SettingTuple k(parties);
    for (int j = 0; j < parties; ++j) k[j] = static_cast<int>((m >> (parties - 1 - j)) & 1u);
    e[m] = E.at(k);
  }
  double total = 0.0;
  for (std::size_t s = 0; s < n_terms; ++s) {
    double inner = 0.0;
    for (std::size_t m = 0; m < n_terms; ++m) {
      // s bit set means s_j = -1; the sign is (-1)^{popcount(s & k)}.
      inner += (std::popcount(s & m) % 2 ? -1.0 : 1.0) * e[m];
    }
    total += std::abs(inner);
  }
  return total;
}

/// A +-1 valued function of N signs, stored as a bitmask over the 2^N inputs.
/// Input index bit (N-1-j) set means s_j = -1. Mask bit set means S = -1.
struct SignFunction {
  int parties = 2;
  std::uint64_t table = 0;

  static SignFunction from(int parties, const std::function<double(const std::vector<int> &)> &fn)
  {
    if (parties < 1 || parties > 6) throw ValidationError("sign functions support 1..6 parties");
    SignFunction f{parties, 0};
    for (std::uint64_t x = 0; x < (1ULL << parties); ++x) {
      double v = fn(f.signs(x));
      if (std::abs(std::abs(v) - 1.0) > 1e-9) throw ValidationError("sign function must take values +-1");
      if (v < 0) f.table |= (1ULL << x);
    }
    return f;
  }
  /// S = 1/2 (1 + s1 + s2 - s1 s2).
  static SignFunction chsh()
  {
    return from(2, [](const std::vector<int> &s) { return 0.5 * (1 + s[0] + s[1] - s[0] * s[1]); });
  }

  std::vector<int> signs(std::uint64_t x) const
  {
    std::vector<int> s(parties);
    for (int j = 0; j < parties; ++j) s[j] = ((x >> (parties - 1 - j)) & 1u) ? -1 : 1;
    return s;
  }
  int operator()(std::uint64_t x) const { return ((table >> x) & 1u) ? -1 : 1; }
  int operator()(const std::vector<int> &s) const
  {
    std::uint64_t x = 0;
    for (int j = 0; j < parties; ++j) x = (x << 1) | (s[j] < 0 ? 1u : 0u);
    return (*this)(x);
  }

  /// True when S(s) = prod_j g_j(s_j) with g_j in {1, -1, s, -s}.
  bool factorable() const
  {
    const std::uint64_t n_in = 1ULL << parties;
    // Choose g_j up to a global sign: each g_j is 1 or s_j; compare against +-S.
    for (std::uint64_t choice = 0; choice < (1ULL << parties); ++choice) {
      bool plus = true, minus = true;
      for (std::uint64_t x = 0; x < n_in; ++x) {
        int v = (std::popcount(x & choice) % 2) ? -1 : 1;
        if (v != (*this)(x)) plus = false;
        if (-v != (*this)(x)) minus = false;
      }
      if (plus || minus) return true;
    }
    return false;
  }
};

/// c_k = sum_s S(s) prod_j s_j^{k_j}; bound 2^N.
inline BellInequality sign_function_inequality(const SignFunction &S)
{
  const int N = S.parties;
  const std::uint64_t n_in = 1ULL << N;
  BellInequality ineq;
  ineq.parties = N;
  ineq.settings.assign(N, 2);
  ineq.lr_bound = static_cast<double>(n_in);
  for (std::uint64_t m = 0; m < n_in; ++m) {
    double c = 0.0;
    for (std::uint64_t x = 0; x < n_in; ++x) c += S(x) * ((std::popcount(x & m) % 2) ? -1.0 : 1.0);
    if (c != 0.0) {
      SettingTuple k(N);
      for (int j = 0; j < N; ++j) k[j] = static_cast<int>((m >> (N - 1 - j)) & 1u);
      ineq.coefficients[k] = c;
    }
  }
  ineq.trivial = S.factorable();
  ineq.label = "sign-function";
  return ineq;
}

/// Visits all 2^(2^N) sign functions; exhaustive only up to N = 4.
inline void for_each_sign_function(int parties, const std::function<void(const SignFunction &)> &fn)
{
  if (parties < 1 || parties > 4) throw GuardError("sign-function enumeration supports N <= 4");
  const std::uint64_t count = 1ULL << (1u << parties);
  for (std::uint64_t t = 0; t < count; ++t) fn(SignFunction{parties, t});
}

// ---------------------------------------------------------------------------
// Recursive multisetting family 2^{N-1} x 2^{N-1} x 2^{N-2} x ... x 2
// ---------------------------------------------------------------------------

/// Full setting structure for N parties: [2^{N-1}, 2^{N-1}, 2^{N-2}, ..., 2].
inline std::vector<int> multisetting_full_structure(int parties)
{
  if (parties < 2) throw ValidationError("multisetting family needs N >= 2");
  std::vector<int> s(parties);
  s[0] = 1 << (parties - 1);
  for (int j = 1; j < parties; ++j) s[j] = 1 << (parties - j);
  return s;
}

inline int multisetting_node_count(int parties) { return parties <= 2 ? 1 : 1 + 2 * multisetting_node_count(parties - 1); }

namespace detail {

using Poly = std::map<SettingTuple, double>;

// Builds the expansion of G_N for the full structure. `node` walks the
// pre-order list of sign functions.
inline Poly multisetting_poly(int N, const std::vector<SignFunction> &signs, std::size_t &node)
{
  const SignFunction &S = signs.at(node++);
  // Coefficients of (first, second) x (setting 0, setting 1) of the last two
  // factors: sum_s S(s) s1^a s2^b.
  double c[2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double acc = 0;
      for (std::uint64_t x = 0; x < 4; ++x) {
        auto s = S.signs(x);
        acc += S(x) * (a ? s[0] : 1) * (b ? s[1] : 1);
      }
      c[a][b] = acc;
    }
  Poly out;
  if (N == 2) {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        if (c[a][b] != 0) out[{a, b}] += c[a][b];
    return out;
  }
  Poly g = multisetting_poly(N - 1, signs, node);
  Poly gp = multisetting_poly(N - 1, signs, node);
  std::vector<int> sub = multisetting_full_structure(N - 1);
  for (int b = 0; b < 2; ++b) {
    for (const auto &[k, v] : g) {
      if (c[0][b] == 0) continue;
      SettingTuple kk = k;
      kk.push_back(b);
      out[kk] += c[0][b] * v;
    }
    for (const auto &[k, v] : gp) {
      if (c[1][b] == 0) continue;
      SettingTuple kk = k;
      for (int j = 0; j < N - 1; ++j) kk[j] += sub[j];
      kk.push_back(b);
      out[kk] += c[1][b] * v;
    }
  }
  return out;
}

}  // namespace detail

/// Generating inequality of the multisetting family for `structure`.
/// `structure` is the full 2^{N-1} x ... x 2 shape or a reduction of it in
/// which the first settings of a party are identified (settings 1..r merge
/// into 1, later ones shift down). `sign_choices` lists one two-party sign
/// function per recursion node in pre-order; empty means all CHSH.
inline BellInequality multisetting_generate(const std::vector<int> &structure,
                                            std::vector<SignFunction> sign_choices = {})
{
  const int N = static_cast<int>(structure.size());
  if (N < 2 || N > 6) throw ValidationError("unsupported structure: party count must be 2..6");
  std::vector<int> full = multisetting_full_structure(N);
  for (int j = 0; j < N; ++j)
    if (structure[j] < 1 || structure[j] > full[j])
      throw ValidationError("unsupported structure: setting counts must not exceed the full family");
  const int nodes = multisetting_node_count(N);
  if (sign_choices.empty()) sign_choices.assign(nodes, SignFunction::chsh());
  if (static_cast<int>(sign_choices.size()) != nodes) throw ValidationError("one sign function per recursion node required");
  for (const auto &s : sign_choices)
    if (s.parties != 2) throw ValidationError("recursion nodes use two-argument sign functions");

  std::size_t node = 0;
  detail::Poly poly = detail::multisetting_poly(N, sign_choices, node);
  const double norm = static_cast<double>(1 << (N - 1));

  BellInequality ineq;
  ineq.parties = N;
  ineq.settings = structure;
  for (const auto &[k, v] : poly) {
    SettingTuple kk(N);
    for (int j = 0; j < N; ++j) kk[j] = std::max(0, k[j] - (full[j] - structure[j]));
    ineq.coefficients[kk] += v / norm;
  }
  for (auto it = ineq.coefficients.begin(); it != ineq.coefficients.end();)
    it = (std::abs(it->second) < 1e-12) ? ineq.coefficients.erase(it) : std::next(it);
  ineq.lr_bound = norm;
  std::string lab;
  for (int j = 0; j < N; ++j) lab += (j ? "x" : "") + std::to_string(structure[j]);
  ineq.label = "multisetting " + lab;
  return ineq;
}

// ---------------------------------------------------------------------------
// Arbitrary number of settings
// ---------------------------------------------------------------------------

/// eta = [M+1]_2 [N]_2 + 1.
inline int msetting_eta(int N, int M) { return ((M + 1) % 2) * (N % 2) + 1; }

/// phi^n_m = (pi/M) m + (pi/2MN) eta.
inline double msetting_angle(int N, int M, int m) { return pi / M * m + pi / (2.0 * M * N) * msetting_eta(N, M); }

/// B_LR(N,M) = sin(pi/2M)^{-N} cos(pi/2M).
inline double msetting_lr_bound(int N, int M)
{
  return std::pow(std::sin(pi / (2.0 * M)), -N) * std::cos(pi / (2.0 * M));
}

/// Quantum maximum M^N / 2 attained by the GHZ states.
inline double msetting_quantum_max(int N, int M) { return std::pow(static_cast<double>(M), N) / 2.0; }

/// V(N,M) = (M sin(pi/2M))^N / (2 cos(pi/2M)).
inline double msetting_violation_factor(int N, int M)
{
  return std::pow(M * std::sin(pi / (2.0 * M)), N) / (2.0 * std::cos(pi / (2.0 * M)));
}

inline BellInequality msetting_inequality(int N, int M)
{
  if (N < 2 || M < 2) throw ValidationError("msetting inequality needs N >= 2 and M >= 2");
  if (std::pow(static_cast<double>(M), N) > 1e6) throw GuardError("M^N exceeds 10^6 coefficients");
  BellInequality ineq;
  ineq.parties = N;
  ineq.settings.assign(N, M);
  for_each_tuple(ineq.settings, [&](const SettingTuple &k) {
    double arg = 0.0;
    for (int m : k) arg += msetting_angle(N, M, m);
    ineq.coefficients[k] = std::cos(arg);
  });
  ineq.lr_bound = msetting_lr_bound(N, M);
  ineq.label = "msetting N=" + std::to_string(N) + " M=" + std::to_string(M);
  return ineq;
}

// ---------------------------------------------------------------------------
// Brute-force bound and tightness
// ---------------------------------------------------------------------------

/// Max over deterministic local assignments of sum_k c_k prod_j I_j(k_j).
/// The last party is optimized in closed form (each of its settings picks
/// the sign of its partial sum).
inline double lr_bound_bruteforce(const BellInequality &ineq)
{
  ineq.validate();
  const int N = ineq.parties;
  int total = 0;
  for (int m : ineq.settings) total += m;
  if (total > 20) throw GuardError("brute force limited to 20 settings in total");
  const int last_m = ineq.settings.back();
  const int free_bits = total - last_m;

  struct Term {
    std::vector<int> bit;  // global bit index per party (first N-1)
    int last;
    double c;
  };
  std::vector<int> offset(N, 0);
  for (int j = 1; j < N; ++j) offset[j] = offset[j - 1] + ineq.settings[j - 1];
  std::vector<Term> terms;
  for (const auto &[k, c] : ineq.coefficients) {
    Term t{{}, k[N - 1], c};
    for (int j = 0; j < N - 1; ++j) t.bit.push_back(offset[j] + k[j]);
    terms.push_back(std::move(t));
  }

  const std::uint64_t count = 1ULL << free_bits;
  const std::size_t chunks = std::min<std::uint64_t>(count, 64);
  std::vector<double> best(chunks, -1e300);
  parallel_for(chunks, [&](std::size_t ch) {
    std::vector<double> partial(last_m);
    for (std::uint64_t a = ch; a < count; a += chunks) {
      std::fill(partial.begin(), partial.end(), 0.0);
      for (const auto &t : terms) {
        int parity = 0;
        for (int b : t.bit) parity ^= static_cast<int>((a >> b) & 1u);
        partial[t.last] += parity ? -t.c : t.c;
      }
      double v = 0.0;
      for (double p : partial) v += std::abs(p);
      best[ch] = std::max(best[ch], v);
    }
  });
  return *std::max_element(best.begin(), best.end());
}

/// Rank of a set of real row vectors by Gaussian elimination.
inline int matrix_rank(std::vector<std::vector<double>> rows, double pivot_tol = tol::rank_pivot)
{
  if (rows.empty()) return 0;
  const std::size_t cols = rows[0].size();
  int rank = 0;
  for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows.size()); ++c) {
    std::size_t piv = rank;
    for (std::size_t r = rank; r < rows.size(); ++r)
      if (std::abs(rows[r][c]) > std::abs(rows[piv][c])) piv = r;
    if (std::abs(rows[piv][c]) <= pivot_tol) continue;
    std::swap(rows[piv], rows[rank]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == static_cast<std::size_t>(rank)) continue;
      double f = rows[r][c] / rows[rank][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < cols; ++k) rows[r][k] -= f * rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

struct TightnessResult {
  bool is_tight = false;
  int saturating_rank = 0;
  int ambient_dim = 0;
  int distinct_vertices = 0;
  int saturating_plus = 0;   // vertices with value +lr_bound
  int saturating_minus = 0;  // vertices with value -lr_bound
};

/// Facet test: the vertices of the correlation polytope that saturate the
/// bound must span the full correlation space.
inline TightnessResult tightness_check(const BellInequality &ineq)
{
  ineq.validate();
  const std::size_t D = ineq.correlation_dim();
  if (D > 64) throw GuardError("tightness check limited to 64 correlation terms");
  int total = 0;
  for (int m : ineq.settings) total += m;
  if (total > 24) throw GuardError("too many settings for vertex enumeration");

  const int N = ineq.parties;
  std::vector<int> offset(N, 0);
  for (int j = 1; j < N; ++j) offset[j] = offset[j - 1] + ineq.settings[j - 1];
  std::vector<SettingTuple> keys;
  for_each_tuple(ineq.settings, [&](const SettingTuple &k) { keys.push_back(k); });

  // Vertex vectors as sign masks over the D correlation slots.
  std::map<std::vector<std::int8_t>, double> vertices;
  for (std::uint64_t a = 0; a < (1ULL << total); ++a) {
    std::vector<std::int8_t> v(D);
    double val = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      int parity = 0;
      for (int j = 0; j < N; ++j) parity ^= static_cast<int>((a >> (offset[j] + keys[i][j])) & 1u);
      v[i] = parity ? -1 : 1;
    }
    if (vertices.count(v)) continue;
    for (std::size_t i = 0; i < D; ++i) {
      auto it = ineq.coefficients.find(keys[i]);
      if (it != ineq.coefficients.end()) val += it->second * v[i];
    }
    vertices.emplace(std::move(v), val);
  }

  TightnessResult r;
  r.ambient_dim = static_cast<int>(D);
  r.distinct_vertices = static_cast<int>(vertices.size());
  std::vector<std::vector<double>> sat;
  for (const auto &[v, val] : vertices) {
    if (std::abs(val - ineq.lr_bound) <= tol::coefficient) {
      ++r.saturating_plus;
      sat.emplace_back(v.begin(), v.end());
    } else if (std::abs(val + ineq.lr_bound) <= tol::coefficient) {
      ++r.saturating_minus;
    }
  }
  r.saturating_rank = matrix_rank(sat);
  r.is_tight = r.saturating_rank == static_cast<int>(D);
  return r;
}

/// Correlation table of a quantum state for per-party lists of settings.
inline CorrelationTable quantum_table(const CorrelationTensor &T, const std::vector<std::vector<BlochVector>> &settings)
{
  std::vector<int> ranges;
  for (const auto &s : settings) ranges.push_back(static_cast<int>(s.size()));
  CorrelationTable t;
  for_each_tuple(ranges, [&](const SettingTuple &k) {
    std::vector<BlochVector> m;
    for (std::size_t j = 0; j < k.size(); ++j) m.push_back(settings[j][k[j]]);
    t.values[k] = quantum_correlation(T, m);
  });
  return t;
}

}  // namespace bellkit
