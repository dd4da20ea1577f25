#include <gtest/gtest.h>

#include "bellkit/bellgen.hpp"
#include "bellkit/ccp.hpp"
#include "bellkit/violation.hpp"
#include "test_util.hpp"

using namespace bellkit;
using namespace bellkit::ccp;

// Classical success equals B_LR / norm; closed-form bound and brute force agree.
TEST(Ccp, QubitClassicalUsesLrBound)
{
  for (auto [n, m] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {2, 3}, {4, 3}}) {
    const auto bf = qubit_ccp_success(n, m, QubitStrategy::classical_optimal, true);
    const auto cf = qubit_ccp_success(n, m, QubitStrategy::classical_optimal, false);
    EXPECT_NEAR(bf.success, cf.success, 1e-9);
    EXPECT_GT(qubit_advantage_ratio(n, m), 1.0);
  }
}

TEST(Ccp, CglmpClassicalBoundIsTwo)
{
  // Deterministic strategies: exhaustive over d^4 answer tuples for d = 3, 4.
  for (int d = 3; d <= 4; ++d) {
    double best = -1e9;
    for (int code = 0; code < d * d * d * d; ++code) {
      ClassicalStrategy s;
      DeterministicAnswers a;
      a.a = {code % d, (code / d) % d};
      a.b = {(code / d / d) % d, (code / d / d / d) % d};
      s.branches = {a};
      s.weights = {1.0};
      QuditCcpStrategy q;
      q.classical = s;
      best = std::max(best, 4.0 * qudit_ccp_delta(q, d));
    }
    EXPECT_NEAR(best, 2.0, 1e-12) << d;
  }
}

TEST(Ccp, DeltaIsQuarterCglmp)
{
  for (int d = 3; d <= 5; ++d) {
    std::vector<double> x(4 * (d - 1));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.37 * static_cast<double>(i + 1);
    const CglmpSettings s = cglmp_settings(d, x);
    const CVec psi = testutil::random_state(d * d, 50 + d).amplitudes();
    EXPECT_NEAR(qudit_ccp_delta({QuditCcpStrategy::Kind::quantum, {}, strategy_from_cglmp(psi, s).quantum}, d),
                cglmp_value(psi, s) / 4.0, 1e-10);
  }
}

TEST(Ccp, BellOperatorExpectation)
{
  const int d = 3;
  std::vector<double> x(4 * (d - 1), 0.0);
  const CglmpSettings s = cglmp_settings(d, x);
  const CVec psi = maximally_entangled(d);
  EXPECT_NEAR((psi.adjoint() * cglmp_bell_operator(s) * psi)(0, 0).real(), cglmp_value(psi, s), 1e-10);
}

TEST(Ccp, SampledDeltaMatchesExact)
{
  const auto s = random_classical_strategy(5, 6, 9);
  QuditCcpStrategy q;
  q.classical = s;
  const auto mc = sample_classical_delta(s, 5, 200000, 3);
  EXPECT_LT(std::abs(mc.mean - qudit_ccp_delta(q, 5)), 4.0 * mc.stderr_ + 1e-12);
}

TEST(Ccp, Errors)
{
  ClassicalStrategy bad;
  bad.branches = {DeterministicAnswers{}};
  bad.weights = {0.5};
  QuditCcpStrategy q;
  q.classical = bad;
  EXPECT_THROW(qudit_ccp_delta(q, 3), ValidationError);
  EXPECT_THROW(cglmp_optimize(9), ValidationError);
  EXPECT_THROW(qubit_norm(10, 5), GuardError);
}

TEST(Ccp, SuccessProbabilityInRange)
{
  for (int n = 2; n <= 4; ++n)
    for (int m = 2; m <= 4; ++m)
      for (auto st : {QubitStrategy::classical_optimal, QubitStrategy::quantum_ghz}) {
        const double p = qubit_ccp_success(n, m, st).success;
        EXPECT_GE(p, 0.5);
        EXPECT_LE(p, 1.0);
      }
}

// The overlap ratio is the violation factor of the M-setting inequality on GHZ.
TEST(Ccp, OverlapRatioIsViolationFactor)
{
  OptimizerConfig cfg;
  cfg.restarts = 8;
  for (int n = 2; n <= 4; ++n)
    for (int m = 2; m <= 4; ++m) {
      const double ratio = qubit_ccp_success(n, m, QubitStrategy::quantum_ghz).overlap /
                           qubit_ccp_success(n, m, QubitStrategy::classical_optimal).overlap;
      const auto v = ms_violation(make_state(NamedStateSpec::ghz_plus(n)), n, m, cfg);
      EXPECT_NEAR(ratio, v.violation_factor, 1e-6) << n << " " << m;
    }
}

TEST(Ccp, MaximallyEntangledBelowOptimum)
{
  const auto me = cglmp_optimize(3, cglmp_default_config(), true);
  const auto opt = cglmp_optimize(3);
  EXPECT_GT(me.value, 2.0);
  EXPECT_LT(me.value, opt.value - 1e-3);
  QuditCcpStrategy q = intuitive_classical_protocol();
  EXPECT_NEAR(qudit_ccp_delta(q, 3), 0.5, 1e-12);
}
