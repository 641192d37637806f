#include <gtest/gtest.h>

#include "survctl/error.hpp"
#include "survctl/solver.hpp"
#include "survctl/verifier.hpp"

using namespace survctl;

namespace {

const DriftBudget kZero{0.0, 1.0};

const RecursiveSolution& v2() {
  static const RecursiveSolution s = solve_recursive(2, ValueKind::kAllSurvive, kZero, 65);
  return s;
}

const RecursiveSolution& u2() {
  static const RecursiveSolution s = solve_recursive(2, ValueKind::kSurvivorCount, kZero, 65);
  return s;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no survctl::Error thrown";
  return ErrorCode::kIo;
}

ValueGrid relabel(const ValueGrid& g, ValueKind kind) {
  GridSpec spec = g.spec();
  spec.kind = kind;
  return ValueGrid(spec, std::vector<double>(g.values().begin(), g.values().end()));
}

}  // namespace

TEST(BasicCheck, PassesOnSolvedGrids) {
  for (const RecursiveSolution* s : {&v2(), &u2()}) {
    const CheckReport r = check_bounds_symmetry_monotonicity(s->top());
    EXPECT_TRUE(r.passed) << r.to_json().dump(2);
    EXPECT_GE(r.margin, 0.0);
    EXPECT_TRUE(r.locations.empty());
  }
  const CheckReport one = check_bounds_symmetry_monotonicity(v2().grids.front());
  EXPECT_TRUE(one.passed);
}

TEST(BasicCheck, AsymmetricPerturbationFails) {
  const ValueGrid& g = v2().top();
  std::vector<double> values(g.values().begin(), g.values().end());
  const std::size_t node = g.spec().linear({20, 40, 0, 0});
  values[node] += 0.1;
  const CheckReport r = check_bounds_symmetry_monotonicity(ValueGrid(g.spec(), values));
  EXPECT_FALSE(r.passed);
  EXPECT_LT(r.margin, 0.0);
  ASSERT_FALSE(r.locations.empty());
  EXPECT_LE(r.locations.size(), kMaxLocations);
}

TEST(BasicCheck, ValueAboveCapFails) {
  const ValueGrid& g = v2().top();
  std::vector<double> values(g.values().begin(), g.values().end());
  for (double& v : values) v = std::min(1.0, v * 1.5 + 0.01);
  EXPECT_FALSE(check_bounds_symmetry_monotonicity(ValueGrid(g.spec(), values)).passed);
}

TEST(ConjectureV, HoldsOnSolvedGrid) {
  const CheckReport r = check_conjecture_v(v2().top());
  EXPECT_TRUE(r.passed) << r.to_json().dump(2);
  EXPECT_EQ(r.metadata["grid"]["kind"], "V");
}

TEST(ConjectureV, Guards) {
  EXPECT_EQ(code_of([] { check_conjecture_v(u2().top()); }), ErrorCode::kKind);
  EXPECT_EQ(code_of([] { check_conjecture_v(v2().grids.front()); }), ErrorCode::kDomain);
}

TEST(CounterexampleU, FoundOnSolvedGrid) {
  const CheckReport r = check_counterexample_u(u2().top());
  EXPECT_TRUE(r.passed) << r.to_json().dump(2);
  EXPECT_FALSE(r.locations.empty());
  EXPECT_TRUE(r.details.contains("threshold_reached"));
}

TEST(CounterexampleU, AllSurviveValuesRelabelledAsCountFail) {
  const CheckReport r = check_counterexample_u(relabel(v2().top(), ValueKind::kSurvivorCount));
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(code_of([] { check_counterexample_u(v2().top()); }), ErrorCode::kKind);
}

TEST(Lifting, ProvenanceMismatch) {
  const ValueGrid other = solve_recursive(2, ValueKind::kSurvivorCount, kZero, 33).top();
  const ValueGrid& lower = u2().grids.front();
  EXPECT_EQ(code_of([&] { check_lifting(lower, other); }), ErrorCode::kProvenance);
  EXPECT_EQ(code_of([&] { check_lifting(u2().top(), u2().top()); }), ErrorCode::kProvenance);
  const ValueGrid shifted = solve_recursive(2, ValueKind::kSurvivorCount, {0.5, 1.0}, 65).top();
  EXPECT_EQ(code_of([&] { check_lifting(lower, shifted); }), ErrorCode::kProvenance);
}

TEST(Lifting, OneToTwoRuns) {
  const CheckReport r = check_lifting(u2().grids.front(), u2().top());
  EXPECT_EQ(r.name, "lifting");
  EXPECT_TRUE(r.details.contains("trace"));
}

TEST(McVsPde, PointDimensionMustMatch) {
  McVsPdeOptions opt;
  opt.points = {{1.0, 1.0, 1.0}};
  opt.simulation.paths = 10;
  EXPECT_EQ(code_of([&] { check_mc_vs_pde(v2().top(), opt); }), ErrorCode::kConfig);
  opt.points.clear();
  EXPECT_EQ(code_of([&] { check_mc_vs_pde(v2().top(), opt); }), ErrorCode::kConfig);
}

TEST(Reports, JsonShapeAndTable) {
  std::vector<CheckReport> reports{check_bounds_symmetry_monotonicity(v2().top()),
                                   check_counterexample_u(u2().top())};
  const nlohmann::json j = reports_to_json(reports);
  ASSERT_TRUE(j.is_array());
  for (const auto& r : j) {
    for (const char* key : {"check", "status", "margin", "tolerance", "locations", "metadata", "details"}) {
      EXPECT_TRUE(r.contains(key)) << key;
    }
  }
  EXPECT_EQ(j[0]["metadata"]["grid"]["payload_sha256"], grid_provenance(v2().top())["payload_sha256"]);
  const std::string table = summary_table(reports);
  EXPECT_NE(table.find("PASS"), std::string::npos);
  EXPECT_NE(table.find("counterexample-u"), std::string::npos);
}

TEST(Reports, RerunIsIdentical) {
  const std::string a = check_counterexample_u(u2().top()).to_json().dump();
  const std::string b = check_counterexample_u(u2().top()).to_json().dump();
  EXPECT_EQ(a, b);
}
