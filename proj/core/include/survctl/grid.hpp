#pragma once

// Uniform tensor grids on the compact cube [0,1]^n and the recursive
// lower-dimensional data that supplies Dirichlet values on the cube faces.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "survctl/closed_forms.hpp"

namespace survctl {

inline constexpr int kMaxDim = 4;

/// V: probability that every coordinate survives. U: expected survivor count.
enum class ValueKind { kAllSurvive, kSurvivorCount };

const char* kind_label(ValueKind kind);  // "V" / "U"
ValueKind parse_kind(const std::string& label);

using NodeIndex = std::array<int, kMaxDim>;

struct GridSpec {
  int dim = 1;
  int nodes = 17;  // per axis, odd so that y = 0.5 is a node
  ValueKind kind = ValueKind::kAllSurvive;
  DriftBudget params;

  /// Throws on dim outside [1, kMaxDim], nodes < 17 or even, or b < 0.
  void validate() const;

  double spacing() const { return 1.0 / (nodes - 1); }
  std::size_t size() const;
  std::size_t stride(int axis) const;
  double coordinate(int i) const { return static_cast<double>(i) / (nodes - 1); }

  std::size_t linear(const NodeIndex& idx) const;
  NodeIndex unravel(std::size_t linear) const;
  bool is_boundary(const NodeIndex& idx) const;

  /// Upper bound on the value range: 1 for V, n for U.
  double value_cap() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

class ValueGrid {
 public:
  ValueGrid() = default;
  ValueGrid(GridSpec spec, std::vector<double> values);

  const GridSpec& spec() const { return spec_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }

  double at(const NodeIndex& idx) const { return values_[spec_.linear(idx)]; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Multilinear interpolation at a compact point of matching dimension.
  double interpolate(std::span<const double> y) const;

  // Solver diagnostics carried with the grid.
  double residual = 0.0;
  int iterations = 0;
  double tolerance = 0.0;

 private:
  GridSpec spec_;
  std::vector<double> values_;
};

/// Per-node coordinate (0-based) receiving the full budget; kIdle where no
/// coordinate is pushed (boundary nodes, or the clamped zero control).
struct PolicyField {
  static constexpr std::int8_t kIdle = -1;
  GridSpec spec;
  std::vector<std::int8_t> index;

  std::int8_t at(const NodeIndex& idx) const { return index[spec.linear(idx)]; }
};

/// Original-coordinate partials, node-major: partials[node * dim + axis].
struct GradientField {
  GridSpec spec;
  std::vector<double> partials;

  double at(std::size_t node, int axis) const {
    return partials[node * static_cast<std::size_t>(spec.dim) + axis];
  }
};

/// Solved grids for dimensions 1..n-1 at identical (kind, b, a, m).
class BoundaryOracle {
 public:
  BoundaryOracle(ValueKind kind, DriftBudget params, int nodes);

  ValueKind kind() const { return kind_; }
  const DriftBudget& params() const { return params_; }
  int nodes() const { return nodes_; }
  int max_dimension() const { return static_cast<int>(grids_.size()); }

  /// Appends the grid of the next dimension; (kind, params, m) must match.
  void push(ValueGrid grid);
  const ValueGrid& grid(int dim) const;

  /// Value of the dim-dimensional function at interior compact coordinates.
  /// dim = 0 yields the empty-system convention (1 for V, 0 for U);
  /// dim = 1 uses the closed form; higher dims interpolate stored grids.
  double lower_value(std::span<const double> y) const;

  /// Exact Dirichlet value at a boundary node of an n-dimensional grid with
  /// the same m. Faces are classified by index, never by float comparison.
  double node_value(const GridSpec& spec, const NodeIndex& idx) const;

 private:
  ValueKind kind_;
  DriftBudget params_;
  int nodes_;
  std::vector<ValueGrid> grids_;
};

/// Dirichlet data G for the all-survive problem at a boundary point.
double boundary_g_v(const CompactPoint& y, const BoundaryOracle& lower);
/// Dirichlet data G-hat for the survivor-count problem at a boundary point.
double boundary_g_u(const CompactPoint& y, const BoundaryOracle& lower);

}  // namespace survctl
