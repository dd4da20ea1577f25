#include <gtest/gtest.h>

#include "bellkit/bellgen.hpp"
#include "bellkit/freedom.hpp"

using namespace bellkit;
using namespace bellkit::freedom;

// Oracle: enumerate all deterministic local strategies for the probability
// form of CHSH; the maximum is 2.
TEST(Freedom, ProbabilityChshClassicalMaximum)
{
  double best = 0;
  for (int m = 0; m < 16; ++m) {
    ChshTable t;
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) t[k][l] = ((m >> k) & 1) == ((m >> (2 + l)) & 1) ? 1.0 : 0.0;
    best = std::max(best, chsh_expression(t));
  }
  EXPECT_DOUBLE_EQ(best, 2.0);
  EXPECT_NEAR(chsh_expression(quantum_maximal_table()), 1.0 + std::sqrt(2.0), 1e-12);
}

TEST(Freedom, SourceKnowsSettingsReachesAlgebraicLimit)
{
  EXPECT_DOUBLE_EQ(chsh_expression(source_knows_settings_table()), 3.0);
  const auto s = source_knows_settings_strategy();
  double corr = 0;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) corr += (k == 1 && l == 1 ? -1 : 1) * s[k][l][0] * s[k][l][1];
  EXPECT_DOUBLE_EQ(corr, 4.0);
}

TEST(Freedom, DeltaMeasuresAreConsistent)
{
  const auto r = delta_measures(quantum_maximal_table(), table_from_correlations(1, 1, 1, 1));
  EXPECT_NEAR(r.delta_chsh, r.s_measured - r.s_model, 1e-12);
  EXPECT_NEAR(r.adapted_bound, 2.0 + r.delta_chsh, 1e-12);
  EXPECT_THROW(delta_measures({{{1.5, 0}, {0, 0}}}, quantum_maximal_table()), ValidationError);
}

// B(N) from the closed form equals exhaustive search, and the GHZ optimum equals M_qm.
TEST(Freedom, MerminClosedFormsAgainstBruteForce)
{
  for (int n = 2; n <= 8; ++n) {
    const auto m = mermin_freedom(n);
    EXPECT_NEAR(mermin_lr_bruteforce(n), m.B, 1e-9) << n;
    EXPECT_NEAR(mermin_ghz_value(n), m.M_qm, 1e-6) << n;
    EXPECT_NEAR(m.delta_merm_min, m.M_qm - m.B, 1e-9) << n;
  }
}

TEST(Freedom, DeltaNIsMonotoneAndBelowHalf)
{
  double prev = -1;
  for (int n = 2; n <= 16; ++n) {
    const double d = mermin_freedom(n).delta_N;
    EXPECT_GE(d, prev);
    EXPECT_LT(d, 0.5);
    prev = d;
  }
}

TEST(Freedom, EveCurvesSumRule)
{
  for (double p = 0; p <= pi / 2 + 1e-12; p += pi / 40) {
    const auto c = eve_attack_curves(p);
    EXPECT_NEAR(c.S_AB * c.S_AB + c.S_AE * c.S_AE, 8.0, 1e-9);
    EXPECT_LE(c.S_BE, 2.0 + 1e-9);
  }
  EXPECT_NEAR(eve_attack_curves(0).S_AB, 2.0 * std::sqrt(2.0), 1e-12);
  EXPECT_THROW(eve_attack_curves(2.0), ValidationError);
}

TEST(Freedom, LeakEndpoints)
{
  // Q = 1: Eve knows every setting, S = 3 and D = 0.
  const auto r = leak_analysis(1.0);
  EXPECT_NEAR(r.S, 3.0, 1e-12);
  EXPECT_NEAR(r.D, 0.0, 1e-12);
  EXPECT_NEAR(r.I_AE, 1.0, 1e-12);
  EXPECT_THROW(leak_analysis(0.1), ValidationError);
  EXPECT_NEAR(binary_entropy(0.5), 1.0, 1e-15);
  EXPECT_EQ(binary_entropy(0.0), 0.0);
}

TEST(Freedom, LeakThresholdsSolveTheirEquations)
{
  const auto t = leak_thresholds();
  EXPECT_NEAR(leak_S(t.Q_cl), 2.0, 1e-5);
  EXPECT_NEAR(leak_D(t.Q_0), leak_D0(), 1e-5);
  EXPECT_NEAR(leak_S(t.Q_qm), 1.0 + std::sqrt(2.0), 1e-5);
  EXPECT_LT(t.Q_cl, t.Q_0);
  EXPECT_LT(t.Q_0, t.Q_qm);
}

TEST(Freedom, LeakInformationOrdering)
{
  for (double Q = 0.125; Q <= 1.0 + 1e-12; Q += 0.0125) {
    const auto r = leak_analysis(Q);
    for (double I : {r.I_AB, r.I_AE, r.I_BE, r.I_BE_tilde}) {
      EXPECT_GE(I, -1e-12);
      EXPECT_LE(I, 1.0 + 1e-12);
    }
    EXPECT_LE(r.I_BE, r.I_AE + 1e-12);
    if (Q < 1.0 - 1e-9) EXPECT_LT(r.I_AB, r.I_BE) << Q;
  }
  const auto one = leak_analysis(1.0);
  EXPECT_NEAR(one.I_AB, one.I_BE, 1e-12);
  EXPECT_NEAR(one.I_BE, one.I_AE, 1e-12);
}

TEST(Freedom, LeakCurvesAreAffine)
{
  for (double Q = 0.2; Q < 0.95; Q += 0.1) {
    EXPECT_NEAR(leak_S(Q + 0.05) - leak_S(Q), leak_S(0.3) - leak_S(0.25), 1e-12);
    EXPECT_NEAR(leak_D(Q + 0.05) - leak_D(Q), leak_D(0.3) - leak_D(0.25), 1e-12);
  }
  EXPECT_NEAR(leak_D(1.0), 0.0, 1e-15);
  EXPECT_NEAR(leak_S(1.0), 3.0, 1e-12);
}

TEST(Freedom, BinaryEntropySymmetric)
{
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.5), 1.0, 1e-15);
  for (double p = 0.01; p < 1.0; p += 0.01) EXPECT_NEAR(binary_entropy(p), binary_entropy(1.0 - p), 1e-14);
}
