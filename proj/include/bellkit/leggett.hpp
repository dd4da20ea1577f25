#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bellkit/errors.hpp"
#include "bellkit/parallel.hpp"
#include "bellkit/qstate.hpp"

namespace bellkit::leggett {

inline double deg(double radians) { return radians * 180.0 / pi; }
inline double rad(double degrees) { return degrees * pi / 180.0; }

inline void require_unit(const Vec3 &v, const char *what)
{
  if (std::abs(v.norm() - 1.0) > tol::algebraic) throw ValidationError(std::string(what) + " must be a unit vector");
}

/// |a.b + u.a| <= 1 - v.b and |a.b - u.a| <= 1 + v.b.
inline bool model_valid(const Vec3 &u, const Vec3 &v, const Vec3 &a, const Vec3 &b)
{
  const double ab = a.dot(b), ua = u.dot(a), vb = v.dot(b);
  const double eps = 1e-12;
  return std::abs(ab + ua) <= 1.0 - vb + eps && std::abs(ab - ua) <= 1.0 + vb + eps;
}

struct Thresholds {
  double lambda_a, x1, x2;
};

inline Thresholds thresholds(const Vec3 &u, const Vec3 &v, const Vec3 &a, const Vec3 &b)
{
  const double ab = a.dot(b), ua = u.dot(a), vb = v.dot(b);
  return {0.5 * (1.0 + ua), 0.25 * (1.0 + ua - vb + ab), 0.25 * (3.0 + ua + vb + ab)};
}

struct Outcome {
  int A = 0;
  int B = 0;
  bool in_model = true;
};

/// A = +1 iff lambda <= lambda_A; B = +1 iff lambda in [x1, x2].
inline Outcome model_outcomes(const Vec3 &u, const Vec3 &v, const Vec3 &a, const Vec3 &b, double lambda)
{
  if (lambda < 0.0 || lambda > 1.0) throw ValidationError("lambda must lie in [0, 1]");
  const Thresholds t = thresholds(u, v, a, b);
  Outcome o;
  o.A = lambda <= t.lambda_a ? 1 : -1;
  o.B = (lambda >= t.x1 && lambda <= t.x2) ? 1 : -1;
  o.in_model = model_valid(u, v, a, b);
  return o;
}

struct SampleStats {
  std::uint64_t n = 0;
  double mean_A = 0, mean_B = 0, mean_AB = 0;
  double stderr_A = 0, stderr_B = 0, stderr_AB = 0;
  bool valid_plus = true;   // subensemble (u, -u)
  bool valid_minus = true;  // subensemble (-u, u)
};

/// Mixed antipodal source: a fair bit picks u or -u for Alice, Bob gets the
/// opposite polarization; lambda is uniform on [0, 1]. Counter ranges are
/// split into fixed blocks so the result is independent of the thread count.
inline SampleStats simulate_correlations(const Vec3 &u, const Vec3 &a, const Vec3 &b, std::uint64_t n,
                                         std::uint64_t seed)
{
  require_unit(u, "polarization");
  require_unit(a, "setting a");
  require_unit(b, "setting b");
  if (n == 0) throw ValidationError("sample count must be positive");
  SampleStats s;
  s.n = n;
  s.valid_plus = model_valid(u, -u, a, b);
  s.valid_minus = model_valid(-u, u, a, b);
  const Thresholds tp = thresholds(u, -u, a, b), tm = thresholds(-u, u, a, b);
  const CounterRng rng{seed};

  constexpr std::uint64_t block = 1 << 16;
  const std::uint64_t blocks = (n + block - 1) / block;
  std::vector<std::array<std::int64_t, 3>> sums(blocks);
  parallel_for(blocks, [&](std::size_t bi) {
    std::array<std::int64_t, 3> acc{0, 0, 0};
    const std::uint64_t lo = bi * block, hi = std::min(n, lo + block);
    for (std::uint64_t i = lo; i < hi; ++i) {
      const std::uint64_t bits = rng.bits(2 * i);
      const double lambda = rng.uniform(2 * i + 1);
      const Thresholds &t = (bits & 1u) ? tm : tp;
      const int A = lambda <= t.lambda_a ? 1 : -1;
      const int B = (lambda >= t.x1 && lambda <= t.x2) ? 1 : -1;
      acc[0] += A;
      acc[1] += B;
      acc[2] += A * B;
    }
    sums[bi] = acc;
  });
  std::array<std::int64_t, 3> tot{0, 0, 0};
  for (const auto &x : sums)
    for (int k = 0; k < 3; ++k) tot[k] += x[k];
  const double dn = static_cast<double>(n);
  s.mean_A = tot[0] / dn;
  s.mean_B = tot[1] / dn;
  s.mean_AB = tot[2] / dn;
  auto se = [&](double m) { return std::sqrt(std::max(0.0, 1.0 - m * m) / dn); };
  s.stderr_A = se(s.mean_A);
  s.stderr_B = se(s.mean_B);
  s.stderr_AB = se(s.mean_AB);
  return s;
}

// ---------------------------------------------------------------------------
// Inequalities
// ---------------------------------------------------------------------------

/// 4 - (4/pi)|sin(phi/2)|.
inline double nlhv_bound(double phi) { return 4.0 - 4.0 / pi * std::abs(std::sin(phi / 2.0)); }

/// Singlet value with visibility V: 2 V (1 + cos phi).
inline double nlhv_quantum(double phi, double V = 1.0) { return 2.0 * V * (1.0 + std::cos(phi)); }

struct ValueBound {
  double value = 0;
  double bound = 0;
  bool violated() const { return value > bound; }
};

/// |E_1(phi) + E_2(0)| + |E_3(phi) + E_4(0)|: the first and third entries are
/// the averaged correlations at difference angle phi, the others the
/// perfect-correlation pairs.
inline ValueBound s_nlhv(const std::array<double, 4> &E, double phi)
{
  return {std::abs(E[0] + E[1]) + std::abs(E[2] + E[3]), nlhv_bound(phi)};
}

/// Golden-section maximization of a unimodal function on [lo, hi].
template <class Fn>
double golden_max(Fn &&f, double lo, double hi, double tol_x)
{
  constexpr double invphi = 0.6180339887498949;
  double c = hi - invphi * (hi - lo), d = lo + invphi * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > tol_x) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invphi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invphi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

/// Printed CHSH companion settings for angle phi.
struct ChshSettings {
  Vec3 a1, a2, b1, b2, b3;
};

inline ChshSettings chsh_settings(double phi)
{
  return {Vec3(1, 0, 0), Vec3(0, 0, 1), Vec3(std::cos(phi), 0, -std::sin(phi)), Vec3(0, std::sin(phi), std::cos(phi)),
          Vec3(0, 0, 1)};
}

/// |E11 + E12 - E21 + E22|.
inline double chsh_value(double E11, double E12, double E21, double E22) { return std::abs(E11 + E12 - E21 + E22); }

/// CHSH of the singlet (E = -V a.b) at the printed settings.
inline double chsh_at_settings(double phi, double V = 1.0)
{
  const ChshSettings s = chsh_settings(phi);
  auto E = [&](const Vec3 &a, const Vec3 &b) { return -V * a.dot(b); };
  return chsh_value(E(s.a1, s.b1), E(s.a1, s.b2), E(s.a2, s.b1), E(s.a2, s.b2));
}

struct NlhvThresholds {
  double phi_star = 0;  // radians
  double bound = 0;
  double quantum = 0;
  double v_nlhv = 0;
  double chsh_value = 0;
  double v_chsh = 0;
};

/// phi* maximizes quantum/bound on (0, 90 deg); visibilities are the ratios.
inline NlhvThresholds nlhv_visibility_thresholds()
{
  NlhvThresholds r;
  r.phi_star = golden_max([](double p) { return nlhv_quantum(p) / nlhv_bound(p); }, 1e-6, pi / 2, 1e-10);
  r.bound = nlhv_bound(r.phi_star);
  r.quantum = nlhv_quantum(r.phi_star);
  r.v_nlhv = r.bound / r.quantum;
  r.chsh_value = chsh_at_settings(r.phi_star);
  r.v_chsh = 2.0 / r.chsh_value;
  return r;
}

/// Correlation values reported for the experiment.
struct MeasuredCorrelations {
  double E_a1b1 = -0.9298;
  double E_a2b2 = -0.942;
  double E_a2b3 = -0.9902;
  double E_a1b2 = 0.0374;
  double E_a2b1 = 0.3436;
};

/// S_NLHV = |E(a1,b1) + E(a2,b3)| + |E(a2,b2) + E(a2,b3)|.
inline double measured_s_nlhv(const MeasuredCorrelations &m = {})
{
  return s_nlhv({m.E_a1b1, m.E_a2b3, m.E_a2b2, m.E_a2b3}, 0.0).value;
}

inline double measured_s_chsh(const MeasuredCorrelations &m = {})
{
  return chsh_value(m.E_a1b1, m.E_a1b2, m.E_a2b1, m.E_a2b2);
}

// ---------------------------------------------------------------------------
// Inequality without the rotational-invariance assumption
// ---------------------------------------------------------------------------

struct RiFreeTerm {
  int a, b;  // 1-based setting labels
};

struct RiFreeResult {
  double value = 0;
  double bound = 0;
  std::array<Vec3, 3> a;
  std::array<Vec3, 7> b;
  std::array<RiFreeTerm, 8> terms;  // two moduli of four terms each
};

inline double ri_free_bound(double phi) { return 8.0 - 2.0 * std::abs(std::sin(phi / 2.0)); }
inline double ri_free_quantum(double phi, double V = 1.0) { return 4.0 * V * (std::cos(phi) + 1.0); }

/// |E11 + E22 + E15 + E26| + |E23 + E34 + E26 + E37| for the singlet with
/// visibility V at the printed settings.
inline RiFreeResult ri_free_inequality(double phi, double V = 1.0)
{
  if (!(phi > 0.0 && phi < pi + 1e-12)) throw ValidationError("phi must lie in (0, pi]");
  RiFreeResult r;
  r.a = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  const double c = std::cos(phi), s = std::sin(phi);
  r.b = {Vec3(c, s, 0), Vec3(-s, c, 0), Vec3(0, c, -s), Vec3(0, s, c), r.a[0], r.a[1], r.a[2]};
  r.terms = {RiFreeTerm{1, 1}, {2, 2}, {1, 5}, {2, 6}, {2, 3}, {3, 4}, {2, 6}, {3, 7}};
  auto E = [&](const RiFreeTerm &t) { return -V * r.a[t.a - 1].dot(r.b[t.b - 1]); };
  double m1 = 0, m2 = 0;
  for (int i = 0; i < 4; ++i) m1 += E(r.terms[i]);
  for (int i = 4; i < 8; ++i) m2 += E(r.terms[i]);
  r.value = std::abs(m1) + std::abs(m2);
  r.bound = ri_free_bound(phi);
  return r;
}

/// phi maximizing quantum/bound.
inline double ri_free_phi_opt()
{
  return golden_max([](double p) { return ri_free_quantum(p) / ri_free_bound(p); }, 1e-6, pi / 2, 1e-10);
}

/// 2 |1 + sin^2(phi/2)(sin theta - 1)|.
inline double orthogonal_plane_chsh(double theta, double phi)
{
  const double s = std::sin(phi / 2.0);
  return 2.0 * std::abs(1.0 + s * s * (std::sin(theta) - 1.0));
}

/// Same quantity from the singlet correlations at a1 = b1 = x,
/// a2 = (sin theta, 0, cos theta), b2 = (cos phi, sin phi, 0).
inline double orthogonal_plane_chsh_direct(double theta, double phi)
{
  const Vec3 a1(1, 0, 0), b1(1, 0, 0), a2(std::sin(theta), 0, std::cos(theta)), b2(std::cos(phi), std::sin(phi), 0);
  auto E = [](const Vec3 &a, const Vec3 &b) { return -a.dot(b); };
  return std::abs(E(a1, b1) + E(a1, b2) + E(a2, b1) - E(a2, b2));
}

}  // namespace bellkit::leggett
