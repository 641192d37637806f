#include "survctl/grid.hpp"

#include <algorithm>
#include <cmath>

#include "survctl/error.hpp"

namespace survctl {

const char* kind_label(ValueKind kind) {
  return kind == ValueKind::kAllSurvive ? "V" : "U";
}

ValueKind parse_kind(const std::string& label) {
  if (label == "V" || label == "v") return ValueKind::kAllSurvive;
  if (label == "U" || label == "u") return ValueKind::kSurvivorCount;
  throw Error(ErrorCode::kConfig, "unknown value kind '" + label + "' (expected V or U)");
}

void GridSpec::validate() const {
  if (dim < 1 || dim > kMaxDim) {
    throw Error(ErrorCode::kConfig, "grid dimension must be in [1, " +
                                        std::to_string(kMaxDim) + "]");
  }
  if (nodes < 17 || nodes % 2 == 0) {
    throw Error(ErrorCode::kConfig, "nodes per axis must be odd and >= 17, got " +
                                        std::to_string(nodes));
  }
  // Re-run the solver-side parameter checks.
  DriftBudget::for_solver(params.drift, params.budget);
  // Refuse grids that cannot fit in memory alongside the Krylov work vectors.
  if (std::pow(static_cast<double>(nodes), dim) > 6.0e7) {
    throw Error(ErrorCode::kConfig, "grid too large: " + std::to_string(nodes) + "^" +
                                        std::to_string(dim) + " nodes");
  }
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int k = 0; k < dim; ++k) s *= static_cast<std::size_t>(nodes);
  return s;
}

std::size_t GridSpec::stride(int axis) const {
  std::size_t s = 1;
  for (int k = axis + 1; k < dim; ++k) s *= static_cast<std::size_t>(nodes);
  return s;
}

std::size_t GridSpec::linear(const NodeIndex& idx) const {
  std::size_t lin = 0;
  for (int k = 0; k < dim; ++k) lin = lin * nodes + static_cast<std::size_t>(idx[k]);
  return lin;
}

NodeIndex GridSpec::unravel(std::size_t lin) const {
  NodeIndex idx{};
  for (int k = dim - 1; k >= 0; --k) {
    idx[k] = static_cast<int>(lin % nodes);
    lin /= nodes;
  }
  return idx;
}

bool GridSpec::is_boundary(const NodeIndex& idx) const {
  for (int k = 0; k < dim; ++k) {
    if (idx[k] == 0 || idx[k] == nodes - 1) return true;
  }
  return false;
}

double GridSpec::value_cap() const {
  return kind == ValueKind::kAllSurvive ? 1.0 : static_cast<double>(dim);
}

ValueGrid::ValueGrid(GridSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
  if (values_.size() != spec_.size()) {
    throw Error(ErrorCode::kFormat, "value array has " + std::to_string(values_.size()) +
                                        " entries, grid needs " +
                                        std::to_string(spec_.size()));
  }
}

double ValueGrid::interpolate(std::span<const double> y) const {
  const int n = spec_.dim;
  if (static_cast<int>(y.size()) != n) {
    throw Error(ErrorCode::kDomain, "interpolation point has wrong dimension");
  }
  const int m = spec_.nodes;
  std::array<int, kMaxDim> base{};
  std::array<double, kMaxDim> frac{};
  for (int k = 0; k < n; ++k) {
    if (!(y[k] >= 0.0 && y[k] <= 1.0)) {
      throw Error(ErrorCode::kDomain, "interpolation point outside [0,1]^n");
    }
    const double s = y[k] * (m - 1);
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 0, m - 2);
    base[k] = i;
    frac[k] = s - i;
  }
  double acc = 0.0;
  for (unsigned corner = 0; corner < (1u << n); ++corner) {
    double w = 1.0;
    NodeIndex idx{};
    for (int k = 0; k < n; ++k) {
      const bool up = (corner >> k) & 1u;
      idx[k] = base[k] + (up ? 1 : 0);
      w *= up ? frac[k] : 1.0 - frac[k];
    }
    if (w != 0.0) acc += w * at(idx);
  }
  return acc;
}

BoundaryOracle::BoundaryOracle(ValueKind kind, DriftBudget params, int nodes)
    : kind_(kind), params_(params), nodes_(nodes) {}

void BoundaryOracle::push(ValueGrid grid) {
  const GridSpec& s = grid.spec();
  if (s.kind != kind_ || s.nodes != nodes_ || !(s.params == params_)) {
    throw Error(ErrorCode::kProvenance,
                "boundary grid does not match oracle (kind, b, a, m)");
  }
  if (s.dim != max_dimension() + 1) {
    throw Error(ErrorCode::kDependency, "boundary grids must be pushed in dimension order");
  }
  grids_.push_back(std::move(grid));
}

const ValueGrid& BoundaryOracle::grid(int dim) const {
  if (dim < 1 || dim > max_dimension()) {
    throw Error(ErrorCode::kDependency,
                "no " + std::string(kind_label(kind_)) + "-grid of dimension " +
                    std::to_string(dim) + " in boundary oracle");
  }
  return grids_[dim - 1];
}

double BoundaryOracle::lower_value(std::span<const double> y) const {
  const int dim = static_cast<int>(y.size());
  if (dim == 0) return kind_ == ValueKind::kAllSurvive ? 1.0 : 0.0;
  if (dim == 1) return value_1d(decompactify(y[0]), params_);
  return grid(dim).interpolate(y);
}

double BoundaryOracle::node_value(const GridSpec& spec, const NodeIndex& idx) const {
  const int top = spec.nodes - 1;
  NodeIndex rest{};
  int r = 0;
  int at_infinity = 0;
  for (int k = 0; k < spec.dim; ++k) {
    if (idx[k] == 0) {
      if (kind_ == ValueKind::kAllSurvive) return 0.0;
      continue;  // absorbed coordinate leaves the system
    }
    if (idx[k] == top) {
      ++at_infinity;
      continue;
    }
    rest[r++] = idx[k];
  }
  if (r == spec.dim) {
    throw Error(ErrorCode::kDomain, "node_value called at an interior node");
  }
  double lower;
  if (r == 0) {
    lower = kind_ == ValueKind::kAllSurvive ? 1.0 : 0.0;
  } else {
    lower = grid(r).at(rest);
  }
  return kind_ == ValueKind::kAllSurvive ? lower : at_infinity + lower;
}

namespace {

bool on_boundary(const CompactPoint& y) {
  for (double v : y.coords()) {
    if (v == 0.0 || v == 1.0) return true;
  }
  return false;
}

}  // namespace

double boundary_g_v(const CompactPoint& y, const BoundaryOracle& lower) {
  if (lower.kind() != ValueKind::kAllSurvive) {
    throw Error(ErrorCode::kKind, "boundary_g_v needs an oracle of V-grids");
  }
  if (!on_boundary(y)) throw Error(ErrorCode::kDomain, "point is not on the cube boundary");
  std::vector<double> rest;
  for (double v : y.coords()) {
    if (v == 0.0) return 0.0;
    if (v != 1.0) rest.push_back(v);
  }
  return lower.lower_value(rest);
}

double boundary_g_u(const CompactPoint& y, const BoundaryOracle& lower) {
  if (lower.kind() != ValueKind::kSurvivorCount) {
    throw Error(ErrorCode::kKind, "boundary_g_u needs an oracle of U-grids");
  }
  if (!on_boundary(y)) throw Error(ErrorCode::kDomain, "point is not on the cube boundary");
  std::vector<double> rest;
  int at_infinity = 0;
  for (double v : y.coords()) {
    if (v == 1.0) {
      ++at_infinity;
    } else if (v != 0.0) {
      rest.push_back(v);
    }
  }
  return at_infinity + lower.lower_value(rest);
}

}  // namespace survctl
