#pragma once

// Exact one- and two-dimensional survival values, the coordinatewise
// compactification of the orthant onto the unit cube, and the coefficients of
// the HJB operator written in compact coordinates.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace survctl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Model parameters: drift b applied to every coordinate and the total
/// allocation budget a shared across coordinates.
struct DriftBudget {
  double drift = 0.0;
  double budget = 1.0;

  /// Rejects b < 0 (the PDE route only covers nonnegative drift) and a <= 0.
  static DriftBudget for_solver(double drift, double budget = 1.0);
  /// Accepts any real drift; still requires a positive budget.
  static DriftBudget for_simulator(double drift, double budget = 1.0);

  /// Effective single-coordinate drift when one unit receives the full budget.
  double pushed_rate() const { return drift + budget; }

  friend bool operator==(const DriftBudget&, const DriftBudget&) = default;
};

/// Point of the closed orthant; +inf is a legal coordinate.
class OrthantPoint {
 public:
  OrthantPoint() = default;
  explicit OrthantPoint(std::vector<double> x);

  std::size_t size() const { return x_.size(); }
  double operator[](std::size_t i) const { return x_[i]; }
  std::span<const double> coords() const { return x_; }

 private:
  std::vector<double> x_;
};

/// Point of the closed unit cube [0,1]^n.
class CompactPoint {
 public:
  CompactPoint() = default;
  explicit CompactPoint(std::vector<double> y);

  std::size_t size() const { return y_.size(); }
  double operator[](std::size_t i) const { return y_[i]; }
  std::span<const double> coords() const { return y_; }

 private:
  std::vector<double> y_;
};

/// H(z) = 1 - exp(-2z): survival probability of a unit-drift Brownian motion
/// started at z. H(inf) = 1.
double survival_h(double z);

/// One-coordinate value V^1 = U^1 = H((b + a)^+ z).
double value_1d(double z, const DriftBudget& params);

/// Explicit all-survive value for two coordinates, zero drift, unit budget.
double mckean_shepp_v2(double x1, double x2);

/// x -> x / (1 + x), with inf -> 1.
double compactify(double x);
/// y -> y / (1 - y), with 1 -> inf.
double decompactify(double y);

CompactPoint compactify(const OrthantPoint& x);
OrthantPoint decompactify(const CompactPoint& y);

/// Coefficients of the compact-coordinate operator
///   1/2 sum a_i u_ii + sum beta_i u_i + budget * max(0, max_k gamma_k u_k).
struct CompactCoefficients {
  std::vector<double> diffusion;  // a_i = (1 - y_i)^4
  std::vector<double> drift;      // beta_i = (1 - y_i)^2 (b - (1 - y_i))
  std::vector<double> control;    // gamma_i = (1 - y_i)^2
};

CompactCoefficients compact_coefficients(const CompactPoint& y,
                                         const DriftBudget& params);

// Scalar forms used in the solver's inner loops.
inline double diffusion_coefficient(double y) {
  const double r = 1.0 - y;
  return r * r * r * r;
}
inline double drift_coefficient(double y, double drift) {
  const double r = 1.0 - y;
  return r * r * (drift - r);
}
inline double control_coefficient(double y) {
  const double r = 1.0 - y;
  return r * r;
}

}  // namespace survctl
