#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "survctl/closed_forms.hpp"
#include "survctl/error.hpp"
#include "survctl/grid.hpp"
#include "survctl/solver.hpp"

using namespace survctl;

namespace {

// Reference values computed with mpmath at 30 digits.
constexpr double kH1 = 0.864664716763387308106;
constexpr double kHQuarter = 0.393469340287366576396;
constexpr double kV2At11 = 0.593994150290161924318;
constexpr double kV2At05_3 = 0.601923175406239177665;
constexpr double kV2At2_03 = 0.391033057672291327134;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no survctl::Error thrown";
  return ErrorCode::kIo;
}

}  // namespace

TEST(SurvivalH, MatchesReferenceValues) {
  EXPECT_NEAR(survival_h(1.0), kH1, 1e-15);
  EXPECT_NEAR(survival_h(0.25), kHQuarter, 1e-15);
  EXPECT_EQ(survival_h(0.0), 0.0);
  EXPECT_EQ(survival_h(kInf), 1.0);
}

TEST(SurvivalH, StrictlyIncreasingBelowOne) {
  double prev = -1.0;
  for (double z = 0.0; z < 15.0; z += 0.01) {
    const double h = survival_h(z);
    EXPECT_GT(h, prev);
    EXPECT_LT(h, 1.0);
    prev = h;
  }
}

TEST(SurvivalH, RejectsNegativeArgument) {
  EXPECT_EQ(code_of([] { survival_h(-0.1); }), ErrorCode::kDomain);
}

TEST(Value1d, UsesPushedRate) {
  EXPECT_NEAR(value_1d(1.0, {0.0, 1.0}), kH1, 1e-15);
  EXPECT_NEAR(value_1d(1.0, {0.5, 1.0}), 1.0 - std::exp(-3.0), 1e-15);
  EXPECT_NEAR(value_1d(2.0, {-0.5, 1.0}), kH1, 1e-15);
  // b + a <= 0: nobody survives forever.
  EXPECT_EQ(value_1d(3.0, DriftBudget::for_simulator(-1.2, 1.0)), 0.0);
  EXPECT_EQ(value_1d(kInf, {0.0, 1.0}), 1.0);
}

TEST(DriftBudget, SolverRegimeRejectsNegativeDrift) {
  EXPECT_EQ(code_of([] { DriftBudget::for_solver(-0.2); }), ErrorCode::kRegime);
  EXPECT_NO_THROW(DriftBudget::for_solver(0.0));
  EXPECT_NO_THROW(DriftBudget::for_simulator(-0.6));
}

TEST(McKeanShepp, ReferenceValues) {
  EXPECT_NEAR(mckean_shepp_v2(1.0, 1.0), kV2At11, 1e-15);
  EXPECT_NEAR(mckean_shepp_v2(0.5, 3.0), kV2At05_3, 1e-15);
  EXPECT_NEAR(mckean_shepp_v2(2.0, 0.3), kV2At2_03, 1e-15);
  EXPECT_EQ(mckean_shepp_v2(0.0, 4.0), 0.0);
}

TEST(McKeanShepp, SymmetricAndBelowProductBound) {
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; ++j) {
      const double x1 = 5.0 * i / 99.0, x2 = 5.0 * j / 99.0;
      EXPECT_EQ(mckean_shepp_v2(x1, x2), mckean_shepp_v2(x2, x1));
      EXPECT_LE(mckean_shepp_v2(x1, x2), survival_h(x1) * survival_h(x2) + 1e-15);
    }
  }
}

TEST(Compactify, RoundTripOverWideRange) {
  for (double e = -6.0; e <= 6.0; e += 0.05) {
    const double x = std::pow(10.0, e);
    // 1 - y cancels, so the relative error grows like eps * (1 + x).
    EXPECT_NEAR(decompactify(compactify(x)), x, 4e-16 * x * (2.0 + x));
  }
  EXPECT_EQ(compactify(kInf), 1.0);
  EXPECT_EQ(decompactify(1.0), kInf);
  EXPECT_EQ(compactify(0.0), 0.0);
}

TEST(Compactify, PointFormsAndValidation) {
  const CompactPoint y = compactify(OrthantPoint({1.0, kInf, 0.0}));
  EXPECT_DOUBLE_EQ(y[0], 0.5);
  EXPECT_EQ(y[1], 1.0);
  EXPECT_EQ(y[2], 0.0);
  EXPECT_THROW(OrthantPoint({-1.0}), Error);
  EXPECT_THROW(CompactPoint({1.5}), Error);
}

TEST(CompactCoefficients, Formulas) {
  const CompactCoefficients c = compact_coefficients(CompactPoint({0.25, 0.5}), {0.5, 1.0});
  EXPECT_DOUBLE_EQ(c.diffusion[0], std::pow(0.75, 4));
  EXPECT_DOUBLE_EQ(c.drift[1], 0.25 * (0.5 - 0.5));
  EXPECT_DOUBLE_EQ(c.control[0], 0.5625);
}

// gamma_i(y) * d/dy_i (phi o f)(y) equals (d phi / d x_i)(f(y)).
TEST(CompactCoefficients, GammaTurnsCompactDerivativeIntoOriginal) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const auto phi = [](double x1, double x2) { return std::sin(x1) * std::exp(-0.3 * x2) + x1 * x2; };
  const auto dphi1 = [](double x1, double x2) { return std::cos(x1) * std::exp(-0.3 * x2) + x2; };
  const auto dphi2 = [](double x1, double x2) { return -0.3 * std::sin(x1) * std::exp(-0.3 * x2) + x1; };
  for (int t = 0; t < 10; ++t) {
    const double y1 = u(rng), y2 = u(rng), h = 1e-6;
    const auto g = [&](double a, double b) { return phi(decompactify(a), decompactify(b)); };
    const double dy1 = (g(y1 + h, y2) - g(y1 - h, y2)) / (2 * h);
    const double dy2 = (g(y1, y2 + h) - g(y1, y2 - h)) / (2 * h);
    const double x1 = decompactify(y1), x2 = decompactify(y2);
    EXPECT_NEAR(control_coefficient(y1) * dy1, dphi1(x1, x2), 1e-6 * (1 + std::abs(dphi1(x1, x2))));
    EXPECT_NEAR(control_coefficient(y2) * dy2, dphi2(x1, x2), 1e-6 * (1 + std::abs(dphi2(x1, x2))));
  }
}

TEST(BoundaryData, RangesAndKindGuards) {
  const DriftBudget p{0.0, 1.0};
  const RecursiveSolution v = solve_recursive(2, ValueKind::kAllSurvive, p, 33);
  const RecursiveSolution u = solve_recursive(2, ValueKind::kSurvivorCount, p, 33);
  BoundaryOracle vo = v.oracle();
  vo.push(v.top());
  BoundaryOracle uo = u.oracle();
  uo.push(u.top());

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> y{unit(rng), unit(rng), unit(rng)};
    y[t % 3] = (t % 2) ? 1.0 : 0.0;
    const double gv = boundary_g_v(CompactPoint(y), vo);
    const double gu = boundary_g_u(CompactPoint(y), uo);
    EXPECT_GE(gv, 0.0);
    EXPECT_LE(gv, 1.0);
    EXPECT_GE(gu, 0.0);
    EXPECT_LE(gu, 3.0);
  }
  EXPECT_EQ(code_of([&] { boundary_g_v(CompactPoint({0.5, 0.0, 0.5}), uo); }), ErrorCode::kKind);
  EXPECT_EQ(code_of([&] { boundary_g_v(CompactPoint({0.5, 0.5, 0.5}), vo); }), ErrorCode::kDomain);
}

// Approaching the edge {y1 = 0, y2 = 1} of the 3-cube from its two faces:
// the face values must merge as the distance to the edge shrinks.
TEST(BoundaryData, ContinuousAcrossEdges) {
  for (ValueKind kind : {ValueKind::kAllSurvive, ValueKind::kSurvivorCount}) {
    const RecursiveSolution s = solve_recursive(2, kind, {0.0, 1.0}, 65);
    BoundaryOracle o = s.oracle();
    o.push(s.top());
    const auto g = [&](std::vector<double> y) {
      return kind == ValueKind::kAllSurvive ? boundary_g_v(CompactPoint(std::move(y)), o)
                                            : boundary_g_u(CompactPoint(std::move(y)), o);
    };
    double previous = kInf;
    for (double d : {0.25, 0.125, 0.0625, 0.03125}) {
      const double gap = std::abs(g({d, 1.0, 0.4}) - g({0.0, 1.0 - d, 0.4}));
      EXPECT_LE(gap, previous) << kind_label(kind) << " d=" << d;
      previous = gap;
    }
    EXPECT_LT(previous, 0.1) << kind_label(kind);
  }
}
