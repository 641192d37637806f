#pragma once

// Monotone finite-difference solver for the compact-coordinate HJB equation
//
//   1/2 sum a_i(y) u_ii + sum beta_i(y) u_i + a * max(0, max_k gamma_k(y) u_k) = 0
//
// on (0,1)^n, with Dirichlet data on the cube faces taken from the recursive
// lower-dimensional solutions.

#include <array>
#include <vector>

#include "survctl/grid.hpp"

namespace survctl {

enum class InnerSolver {
  kKrylov,  // BiCGSTAB preconditioned by a structured incomplete LU
  kSweeps,  // fixed count of alternating lexicographic Gauss-Seidel sweeps
};

struct SolverOptions {
  double tolerance = 1e-8;  // outer sup-norm change between policy iterations
  int max_outer = 200;
  InnerSolver inner = InnerSolver::kKrylov;
  int sweeps_per_outer = 50;
  double inner_tolerance = 1e-12;  // Krylov sup-norm of the normalized residual
  int max_inner = 4000;
  unsigned threads = 1;
};

/// Unnormalized five/seven-point coefficients of one node equation:
///   center * u + sum_k (minus[k] * u[-e_k] + plus[k] * u[+e_k]) = 0.
struct NodeStencil {
  double center = 0.0;
  std::array<double, kMaxDim> minus{};
  std::array<double, kMaxDim> plus{};
};

/// Upwind stencil at an interior node with the budget assigned to `control`
/// (0-based axis) or to nobody (PolicyField::kIdle). Second derivatives are
/// centered; first derivatives use the neighbor the total drift points at, so
/// every off-diagonal coefficient is nonnegative.
NodeStencil discretize(const GridSpec& spec, const NodeIndex& idx, int control);

struct Solution {
  ValueGrid grid;
  PolicyField policy;
};

/// Howard policy iteration for one dimension given the lower-dimensional
/// boundary data. Throws ConvergenceError after max_outer iterations.
Solution solve(const GridSpec& spec, const BoundaryOracle& oracle,
               const SolverOptions& options = {});

/// Value of a fixed feedback policy: solves the linear equation with the
/// budget frozen to `policy` at every interior node (no maximization).
ValueGrid evaluate_policy(const GridSpec& spec, const BoundaryOracle& oracle,
                          const PolicyField& policy, const SolverOptions& options = {});

/// Push-the-laggard feedback on the grid: the smallest coordinate, lowest
/// index on ties.
PolicyField laggard_policy(const GridSpec& spec);

struct RecursiveSolution {
  std::vector<ValueGrid> grids;  // dimensions 1..n
  PolicyField policy;            // top dimension

  const ValueGrid& top() const { return grids.back(); }
  /// Oracle holding dimensions 1..n-1 (the Dirichlet data of the top grid).
  BoundaryOracle oracle() const;
};

/// Solves dimensions 1..n in order; dimension 1 is the closed form sampled on
/// the grid (no PDE iterations).
RecursiveSolution solve_recursive(int n, ValueKind kind, const DriftBudget& params,
                                  int nodes, const SolverOptions& options = {});

/// Closed-form one-dimensional grid (V^1 = U^1).
ValueGrid closed_form_grid(ValueKind kind, const DriftBudget& params, int nodes);

/// Sup over interior nodes of |max_c (L_c u)| / |center_c*|: the size of the
/// Jacobi update the optimal-control equation would still make.
double hjb_residual(const ValueGrid& grid);

/// Original-coordinate partials: gamma_i(y) times the centered difference in
/// y_i, one-sided second order on faces.
GradientField gradient(const ValueGrid& grid);

/// Per-interior-node argmax of the original-coordinate partials. Partials
/// within tie_tolerance of the maximum count as ties and go to the smallest
/// index; nodes whose partials are all <= 0 are idle.
PolicyField extract_policy(const ValueGrid& grid, double tie_tolerance = 1e-8);

}  // namespace survctl
