#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "survctl/error.hpp"
#include "survctl/simulator.hpp"
#include "survctl/solver.hpp"

using namespace survctl;

namespace {

const DriftBudget kUnit{0.0, 1.0};

std::vector<double> phi_for(const Policy& p, std::vector<double> x) {
  PathState s(x);
  std::vector<double> phi(x.size(), -1.0);
  allocate(p, s, kUnit, phi);
  return phi;
}

SimConfig small_config() {
  SimConfig c;
  c.x0 = {0.5, 1.0};
  c.dt = 1e-2;
  c.horizon = 5.0;
  c.paths = 400;
  c.seed = 11;
  return c;
}

}  // namespace

TEST(Allocate, Policies) {
  EXPECT_EQ(phi_for(Laggard{}, {0.3, 0.1, 0.7}), (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(phi_for(Laggard{}, {0.4, 0.4}), (std::vector<double>{1, 0}));
  EXPECT_EQ(phi_for(Laggard{}, {0.0, 0.9, 0.4}), (std::vector<double>{0, 0, 1}));
  EXPECT_EQ(phi_for(Uniform{}, {0.0, 0.9, 0.4}), (std::vector<double>{0, 0.5, 0.5}));
  EXPECT_EQ(phi_for(Fixed{1}, {0.5, 0.9}), (std::vector<double>{0, 1}));
  EXPECT_EQ(phi_for(Fixed{1}, {0.5, 0.0}), (std::vector<double>{0, 0}));
  EXPECT_EQ(phi_for(ConstantSplit{{0.25, 0.75}}, {0.0, 2.0}), (std::vector<double>{0, 0.75}));
}

TEST(Allocate, GridFeedbackFollowsFieldAndFallsBack) {
  const ValueGrid v = solve_recursive(2, ValueKind::kAllSurvive, kUnit, 33).top();
  const Policy p = make_grid_feedback(v);
  EXPECT_EQ(phi_for(p, {0.2, 3.0}), (std::vector<double>{1, 0}));
  EXPECT_EQ(phi_for(p, {3.0, 0.2}), (std::vector<double>{0, 1}));
  EXPECT_EQ(phi_for(p, {0.0, 0.2}), (std::vector<double>{0, 1}));
}

TEST(Step, AbsorptionIsPermanent) {
  PathState s(std::vector<double>{0.05, 1.0});
  const std::vector<double> down{-10.0, 0.0};
  step(s, Laggard{}, kUnit, 1e-2, down);
  EXPECT_EQ(s.x[0], 0.0);
  EXPECT_FALSE(s.alive[0]);
  const std::vector<double> up{50.0, 0.0};
  step(s, Laggard{}, kUnit, 1e-2, up);
  EXPECT_EQ(s.x[0], 0.0);
  EXPECT_FALSE(s.alive[0]);
  EXPECT_NEAR(s.x[1], 1.0 + 1e-2, 1e-15);  // budget moved to the survivor
}

TEST(Step, BridgeAbsorbsNearZero) {
  PathState a(std::vector<double>{0.01});
  const std::vector<double> still{0.0};
  const std::vector<double> lucky{0.999}, coin{0.5};
  step(a, Uniform{}, kUnit, 1e-2, still, lucky);  // crossing probability exp(-0.04)
  EXPECT_TRUE(a.alive[0]);
  PathState b(std::vector<double>{0.01});
  step(b, Uniform{}, kUnit, 1e-2, still, coin);
  EXPECT_FALSE(b.alive[0]);
  EXPECT_EQ(b.x[0], 0.0);
  PathState far(std::vector<double>{2.0});
  const std::vector<double> tiny{1e-300};
  step(far, Uniform{}, kUnit, 1e-2, still, tiny);
  EXPECT_TRUE(far.alive[0]);
}

TEST(RunPath, DeterministicPerIndex) {
  const SimConfig c = small_config();
  for (std::uint64_t i : {0u, 7u, 399u}) {
    const PathOutcome a = run_path(c, Laggard{}, i);
    const PathOutcome b = run_path(c, Laggard{}, i);
    EXPECT_EQ(a.payoff, b.payoff);
    EXPECT_EQ(a.truncated, b.truncated);
  }
}

TEST(Estimate, ThreadCountDoesNotChangeResult) {
  SimConfig c = small_config();
  c.payoff = Payoff::kSurvivorCount;
  const SimEstimate one = estimate(c, Uniform{});
  c.threads = 4;
  const SimEstimate four = estimate(c, Uniform{});
  EXPECT_EQ(one.mean, four.mean);
  EXPECT_EQ(one.std_error, four.std_error);
  EXPECT_EQ(one.truncated_fraction, four.truncated_fraction);
}

TEST(Estimate, OneDimensionalMatchesClosedForm) {
  SimConfig c;
  c.x0 = {0.25};
  c.dt = 1e-3;
  c.horizon = 30.0;
  c.paths = 20000;
  c.seed = 2;
  const SimEstimate e = estimate(c, Laggard{});
  EXPECT_NEAR(e.mean, survival_h(0.25), 3.0 * e.std_error + 0.005);
}

TEST(Estimate, BarrierEstimatorStopsAtBarrier) {
  SimConfig c = small_config();
  c.estimator = Estimator::kDualBarrier;
  c.barrier = 2.0;
  c.horizon = 200.0;
  const SimEstimate e = estimate(c, Laggard{});
  EXPECT_EQ(e.mode, Estimator::kDualBarrier);
  EXPECT_GT(e.mean, 0.2);
  EXPECT_LT(e.mean, 0.8);
}

TEST(Schedule, MonotoneInHorizonUnderCommonNumbers) {
  SimConfig c = small_config();
  const std::vector<double> horizons{0.5, 1.0, 2.0, 4.0};
  const std::vector<SimEstimate> s = horizon_schedule(c, Uniform{}, horizons);
  ASSERT_EQ(s.size(), 4u);
  for (std::size_t k = 0; k + 1 < s.size(); ++k) EXPECT_GE(s[k].mean, s[k + 1].mean);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto outcomes = run_path_schedule(c, Uniform{}, i, horizons);
    for (std::size_t k = 0; k + 1 < outcomes.size(); ++k) EXPECT_GE(outcomes[k].payoff, outcomes[k + 1].payoff);
  }
  const std::vector<double> bad{2.0, 1.0};
  EXPECT_THROW(horizon_schedule(c, Uniform{}, bad), Error);
}

TEST(Config, Validation) {
  const auto code = [](SimConfig c, Policy p = Laggard{}) {
    try {
      estimate(c, p);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  SimConfig c = small_config();
  c.estimator = Estimator::kDualBarrier;
  EXPECT_EQ(code(c), ErrorCode::kConfig);
  c.barrier = 3.0;
  c.payoff = Payoff::kSurvivorCount;
  EXPECT_EQ(code(c), ErrorCode::kConfig);
  c = small_config();
  c.dt = 0.0;
  EXPECT_EQ(code(c), ErrorCode::kConfig);
  c = small_config();
  EXPECT_EQ(code(c, Fixed{2}), ErrorCode::kConfig);
  EXPECT_EQ(code(c, ConstantSplit{{0.9, 0.9}}), ErrorCode::kConfig);

  const ValueGrid g3 = solve_recursive(1, ValueKind::kAllSurvive, kUnit, 17).top();
  EXPECT_EQ(code(c, make_grid_feedback(g3)), ErrorCode::kProvenance);
}

TEST(Policy, DescribeParseRoundTrip) {
  for (const std::string d : {"laggard", "uniform", "fixed:2", "split:0.25,0.75"}) {
    EXPECT_EQ(describe(parse_policy(d)), d);
  }
  EXPECT_THROW(parse_policy("fixed:0"), Error);
  EXPECT_THROW(parse_policy("fixed:x"), Error);
  EXPECT_THROW(parse_policy("grid:abc"), Error);
  EXPECT_THROW(parse_policy("greedy"), Error);
  EXPECT_EQ(parse_payoff("count"), Payoff::kSurvivorCount);
  EXPECT_EQ(parse_estimator("barrier"), Estimator::kDualBarrier);
  EXPECT_EQ(parse_crossing("discrete"), Crossing::kDiscrete);
  EXPECT_THROW(parse_crossing("exact"), Error);
}

TEST(Summarize, MeanStderrAndInterval) {
  const std::vector<double> p{1, 0, 1, 1, 0, 1, 1, 1};
  const SimEstimate e = summarize(p, 2, Estimator::kHorizonTruncation, 5.0);
  const double mean = 0.75;
  const double var = (6 * 0.0625 + 2 * 0.5625) / 7.0;
  EXPECT_DOUBLE_EQ(e.mean, mean);
  EXPECT_NEAR(e.std_error, std::sqrt(var / 8.0), 1e-15);
  EXPECT_NEAR(e.ci_lo, mean - 1.96 * e.std_error, 1e-15);
  EXPECT_NEAR(e.ci_hi, mean + 1.96 * e.std_error, 1e-15);
  EXPECT_DOUBLE_EQ(e.truncated_fraction, 0.25);
  const nlohmann::json j = e.to_json();
  for (const char* key : {"mean", "stderr", "ci95", "paths", "truncated_fraction", "mode", "horizon"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}
