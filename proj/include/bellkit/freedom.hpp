#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <functional>
#include <vector>

#include "bellkit/errors.hpp"
#include "bellkit/parallel.hpp"
#include "bellkit/qstate.hpp"
#include "bellkit/violation.hpp"

namespace bellkit::freedom {

/// P(X = Y | k l), indexed [k][l] with 0-based settings.
using ChshTable = std::array<std::array<double, 2>, 2>;

inline void validate_table(const ChshTable &t)
{
  for (const auto &row : t)
    for (double p : row)
      if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) throw ValidationError("probability outside [0, 1]");
}

/// P11 + P12 + P21 - P22.
inline double chsh_expression(const ChshTable &t) { return t[0][0] + t[0][1] + t[1][0] - t[1][1]; }

inline ChshTable table_from_correlations(double E11, double E12, double E21, double E22)
{
  return {{{(1 + E11) / 2, (1 + E12) / 2}, {(1 + E21) / 2, (1 + E22) / 2}}};
}

/// Quantum-maximal table, S = 1 + sqrt(2).
inline ChshTable quantum_maximal_table()
{
  const double r = 1.0 / std::sqrt(2.0);
  return table_from_correlations(r, r, r, -r);
}

/// Source that knows the settings: coincidence except anticoincidence on (2,2).
inline ChshTable source_knows_settings_table() { return {{{1.0, 1.0}, {1.0, 0.0}}}; }

/// Deterministic outcome pair (X, Y) sent for each setting pair by the same
/// source; its correlation-form CHSH reaches 4.
inline std::array<std::array<std::array<int, 2>, 2>, 2> source_knows_settings_strategy()
{
  std::array<std::array<std::array<int, 2>, 2>, 2> s{};
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) s[k][l] = (k == 1 && l == 1) ? std::array<int, 2>{1, -1} : std::array<int, 2>{1, 1};
  return s;
}

struct FreedomReport {
  ChshTable delta{};
  double delta_chsh = 0;
  double delta_uniform_signed = 0;
  double delta_uniform_positive = 0;
  double s_measured = 0;
  double s_model = 0;
  double adapted_bound = 2;
};

/// Delta_kl = measured - model and the derived measures.
inline FreedomReport delta_measures(const ChshTable &measured, const ChshTable &model)
{
  validate_table(measured);
  validate_table(model);
  FreedomReport r;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) r.delta[k][l] = measured[k][l] - model[k][l];
  r.delta_chsh = r.delta[0][0] + r.delta[0][1] + r.delta[1][0] - r.delta[1][1];
  r.delta_uniform_signed = r.delta_chsh / 4.0;
  r.delta_uniform_positive = r.delta_chsh / 2.0;
  r.s_measured = chsh_expression(measured);
  r.s_model = chsh_expression(model);
  r.adapted_bound = 2.0 + r.delta_chsh;
  return r;
}

/// Minimal lack of freedom needed to explain `measured` with a model that
/// saturates the CHSH bound 2.
inline FreedomReport minimal_delta(const ChshTable &measured)
{
  validate_table(measured);
  FreedomReport r;
  r.s_measured = chsh_expression(measured);
  r.s_model = 2.0;
  r.delta_chsh = r.s_measured - 2.0;
  r.delta_uniform_signed = r.delta_chsh / 4.0;
  r.delta_uniform_positive = r.delta_chsh / 2.0;
  r.adapted_bound = r.s_measured;
  const std::array<std::array<double, 2>, 2> sign{{{1, 1}, {1, -1}}};
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) r.delta[k][l] = sign[k][l] * r.delta_uniform_signed;
  return r;
}

// ---------------------------------------------------------------------------
// Mermin with freedom
// ---------------------------------------------------------------------------

/// S(k) = sin(sum_j k_j pi/2) with 0-based setting labels k_j in {0, 1}.
inline int mermin_sign(unsigned mask)
{
  switch (std::popcount(mask) % 4) {
    case 1: return 1;
    case 3: return -1;
    default: return 0;
  }
}

struct MerminFreedom {
  int N = 0;
  double B = 0;
  double M_qm = 0;
  double delta_merm_min = 0;
  double delta_N = 0;
};

inline MerminFreedom mermin_freedom(int N)
{
  if (N < 2) throw ValidationError("Mermin freedom needs N >= 2");
  MerminFreedom r;
  r.N = N;
  // 2^(N/2) sin(N pi/4) is an integer; round away the floating-point residue.
  const double hs = std::round(std::pow(2.0, N / 2.0) * std::sin(N * pi / 4.0));
  r.B = 0.5 * (std::ldexp(1.0, N / 2) + hs) + 0.0;
  r.M_qm = 0.5 * (std::ldexp(1.0, N - 1) + hs);
  r.delta_merm_min = std::ldexp(1.0, N - 2) - std::ldexp(1.0, (N - 2) / 2);
  r.delta_N = 0.5 - std::ldexp(1.0, -((N + 1) / 2));
  return r;
}

/// sum_k S(k) P(prod X = 1 | k) for P given per setting mask (bit j = party j).
inline double mermin_expression(int N, const std::function<double(unsigned)> &P)
{
  double m = 0;
  for (unsigned k = 0; k < (1u << N); ++k) m += mermin_sign(k) * P(k);
  return m;
}

/// Exhaustive local realistic maximum over the 2^{2N} outcome assignments.
inline double mermin_lr_bruteforce(int N)
{
  if (N < 2 || N > 10) throw GuardError("Mermin brute force limited to 2 <= N <= 10");
  double best = -1e300;
  for (std::uint32_t a = 0; a < (1u << (2 * N)); ++a) {
    const double m = mermin_expression(N, [&](unsigned k) {
      int prod = 1;
      for (int j = 0; j < N; ++j) {
        const int bit = (a >> (2 * j + ((k >> j) & 1u))) & 1u;
        prod *= bit ? -1 : 1;
      }
      return prod == 1 ? 1.0 : 0.0;
    });
    best = std::max(best, m);
  }
  return best;
}

/// GHZ value with equatorial settings phi_{j,k} = k pi/2 + theta, scanned over
/// theta. E = cos(sum phi) for the GHZ state.
inline double mermin_ghz_value(int N, int grid = 4096)
{
  double best = -1e300;
  for (int g = 0; g < grid; ++g) {
    const double theta = 2.0 * pi * g / grid;
    best = std::max(best, mermin_expression(N, [&](unsigned k) {
      const double phi = std::popcount(k) * pi / 2.0 + N * theta;
      return 0.5 * (1.0 + std::cos(phi));
    }));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Eavesdropping: individual attack on one half of phi+
// ---------------------------------------------------------------------------

struct EveCurves {
  double S_AB = 0;
  double S_AE = 0;
  double S_BE = 0;
};

/// (|000> + cos phi |110> + sin phi |101>)/sqrt2, order A, B, E.
inline StateVector eve_attack_state(double phi)
{
  CVec v = CVec::Zero(8);
  const double r = 1.0 / std::sqrt(2.0);
  v(0b000) = r;
  v(0b110) = r * std::cos(phi);
  v(0b101) = r * std::sin(phi);
  return StateVector::normalized(v);
}

inline EveCurves eve_attack_curves(double phi)
{
  if (phi < -1e-12 || phi > pi / 2 + 1e-12) throw ValidationError("attack angle must lie in [0, pi/2]");
  const DensityMatrix rho = DensityMatrix::pure(eve_attack_state(phi));
  auto S = [&](std::vector<int> keep) {
    return 2.0 * std::sqrt(horodecki_value(correlation_tensor(partial_trace(rho, 3, keep), 2)));
  };
  return {S({0, 1}), S({0, 2}), S({1, 2})};
}

// ---------------------------------------------------------------------------
// Leaking laboratories
// ---------------------------------------------------------------------------

/// Binary entropy in bits.
inline double binary_entropy(double p)
{
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

inline double cos2_pi8() { return std::pow(std::cos(pi / 8.0), 2); }
inline double sin2_pi8() { return std::pow(std::sin(pi / 8.0), 2); }

inline double leak_S(double Q) { return 3.0 * Q + (1.0 - Q) / 7.0 * (5.0 + 4.0 * cos2_pi8()); }
inline double leak_D(double Q) { return (1.0 - Q) / 7.0 * (2.5 + 2.0 * sin2_pi8()); }
inline double leak_D0() { return 0.5 * (1.0 - 1.0 / std::sqrt(2.0)); }

inline constexpr double S_classical = 2.0;
inline const double S_quantum = 1.0 + std::sqrt(2.0);
inline constexpr double S_logical = 3.0;

struct LeakReport {
  double Q = 0, S = 0, D = 0;
  double I_AB = 0, I_AE = 0, I_BE = 0, I_BE_tilde = 0;
  bool chsh_violated = false;
  bool looks_secure = false;
  bool actually_secure = false;
};

inline LeakReport leak_analysis(double Q)
{
  if (!(Q >= 0.125 - 1e-12 && Q <= 1.0 + 1e-12)) throw ValidationError("setting knowledge Q must lie in [1/8, 1]");
  LeakReport r;
  r.Q = Q;
  r.S = leak_S(Q);
  r.D = leak_D(Q);
  r.I_AB = 1.0 - binary_entropy(r.D);
  r.I_BE_tilde = 1.0 - binary_entropy(0.5 + std::sqrt(std::max(0.0, r.D - r.D * r.D)));
  r.I_AE = 3.0 / 7.0 + 4.0 / 7.0 * Q;
  r.I_BE = 1.0 - (1.0 - Q) / 7.0 * (2.0 + 4.0 * binary_entropy(cos2_pi8()));
  r.chsh_violated = r.S > S_classical;
  r.looks_secure = r.D < leak_D0();
  r.actually_secure = r.I_AB > std::min(r.I_AE, r.I_BE);
  return r;
}

/// Bisection for a monotone predicate crossing on [lo, hi]; returns the
/// crossing point within tol.
template <class Fn>
double bisect(Fn &&g, double lo, double hi, double tol_x = 1e-6)
{
  double glo = g(lo);
  if (glo * g(hi) > 0) throw ValidationError("bisection bracket does not contain a root");
  while (hi - lo > tol_x) {
    const double mid = 0.5 * (lo + hi), gm = g(mid);
    if ((gm > 0) == (glo > 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct LeakThresholds {
  double Q_cl = 0;  // S = 2
  double Q_0 = 0;   // D = D0
  double Q_qm = 0;  // S = 1 + sqrt 2
};

inline LeakThresholds leak_thresholds()
{
  LeakThresholds t;
  t.Q_cl = bisect([](double q) { return leak_S(q) - S_classical; }, 0.125, 1.0);
  t.Q_0 = bisect([](double q) { return leak_D(q) - leak_D0(); }, 0.125, 1.0);
  t.Q_qm = bisect([](double q) { return leak_S(q) - S_quantum; }, 0.125, 1.0);
  return t;
}

}  // namespace bellkit::freedom
