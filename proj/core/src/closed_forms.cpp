#include "survctl/closed_forms.hpp"

#include <algorithm>
#include <string>

#include "survctl/error.hpp"

namespace survctl {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kRegime: return "regime";
    case ErrorCode::kDependency: return "dependency";
    case ErrorCode::kConvergence: return "convergence";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kKind: return "kind";
    case ErrorCode::kProvenance: return "provenance";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

DriftBudget DriftBudget::for_solver(double drift, double budget) {
  if (!std::isfinite(drift) || drift < 0.0) {
    throw Error(ErrorCode::kRegime,
                "drift b = " + std::to_string(drift) +
                    " is outside the solver regime: the HJB solver requires a "
                    "nonnegative drift (no trace at infinity is identified for b < 0)");
  }
  return for_simulator(drift, budget);
}

DriftBudget DriftBudget::for_simulator(double drift, double budget) {
  if (!std::isfinite(drift)) throw Error(ErrorCode::kDomain, "drift must be finite");
  if (!(budget > 0.0) || !std::isfinite(budget)) {
    throw Error(ErrorCode::kDomain, "budget must be a positive finite number");
  }
  return DriftBudget{drift, budget};
}

OrthantPoint::OrthantPoint(std::vector<double> x) : x_(std::move(x)) {
  for (double v : x_) {
    if (!(v >= 0.0)) throw Error(ErrorCode::kDomain, "orthant coordinates must be >= 0");
  }
}

CompactPoint::CompactPoint(std::vector<double> y) : y_(std::move(y)) {
  for (double v : y_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kDomain, "compact coordinates must lie in [0, 1]");
    }
  }
}

double survival_h(double z) {
  if (!(z >= 0.0)) throw Error(ErrorCode::kDomain, "survival_h requires z >= 0");
  if (std::isinf(z)) return 1.0;
  return -std::expm1(-2.0 * z);
}

double value_1d(double z, const DriftBudget& params) {
  if (!(z >= 0.0)) throw Error(ErrorCode::kDomain, "value_1d requires z >= 0");
  const double rate = std::max(params.pushed_rate(), 0.0);
  // A coordinate with no net drift is absorbed almost surely, even from far away.
  if (rate == 0.0) return 0.0;
  return survival_h(rate * z);
}

double mckean_shepp_v2(double x1, double x2) {
  if (!(x1 >= 0.0) || !(x2 >= 0.0)) {
    throw Error(ErrorCode::kDomain, "mckean_shepp_v2 requires nonnegative arguments");
  }
  const double lo = std::min(x1, x2);
  if (std::isinf(lo)) return 1.0;
  const double sum = x1 + x2;
  return -std::expm1(-2.0 * lo) - 2.0 * lo * std::exp(-sum);
}

double compactify(double x) {
  if (!(x >= 0.0)) throw Error(ErrorCode::kDomain, "compactify requires x >= 0");
  if (std::isinf(x)) return 1.0;
  return x / (1.0 + x);
}

double decompactify(double y) {
  if (!(y >= 0.0 && y <= 1.0)) throw Error(ErrorCode::kDomain, "decompactify requires y in [0,1]");
  if (y == 1.0) return kInf;
  return y / (1.0 - y);
}

CompactPoint compactify(const OrthantPoint& x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = compactify(x[i]);
  return CompactPoint(std::move(y));
}

OrthantPoint decompactify(const CompactPoint& y) {
  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = decompactify(y[i]);
  return OrthantPoint(std::move(x));
}

CompactCoefficients compact_coefficients(const CompactPoint& y,
                                         const DriftBudget& params) {
  CompactCoefficients c;
  c.diffusion.reserve(y.size());
  c.drift.reserve(y.size());
  c.control.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    c.diffusion.push_back(diffusion_coefficient(y[i]));
    c.drift.push_back(drift_coefficient(y[i], params.drift));
    c.control.push_back(control_coefficient(y[i]));
  }
  return c;
}

}  // namespace survctl
