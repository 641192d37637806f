#include "survctl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "parallel.hpp"
#include "survctl/error.hpp"

namespace survctl {

namespace {

// Coefficients depend on a single coordinate, so one table serves every axis.
struct AxisTable {
  std::vector<double> half_diffusion;  // a(y) / (2 h^2)
  std::vector<double> drift;           // beta(y) / h
  std::vector<double> control;         // budget * gamma(y) / h
};

AxisTable make_axis_table(const GridSpec& spec) {
  const int m = spec.nodes;
  const double h = spec.spacing();
  AxisTable t;
  t.half_diffusion.resize(m);
  t.drift.resize(m);
  t.control.resize(m);
  for (int i = 0; i < m; ++i) {
    const double y = spec.coordinate(i);
    t.half_diffusion[i] = 0.5 * diffusion_coefficient(y) / (h * h);
    t.drift[i] = drift_coefficient(y, spec.params.drift) / h;
    t.control[i] = spec.params.budget * control_coefficient(y) / h;
  }
  return t;
}

// Upwind contribution of a scaled drift d: d+ (u+ - u) + d- (u- - u).
inline double upwind(double d, double up, double down, double center) {
  return d > 0.0 ? d * (up - center) : -d * (down - center);
}

void advance(NodeIndex& idx, int dim, int nodes) {
  for (int k = dim - 1; k >= 0; --k) {
    if (++idx[k] < nodes) return;
    idx[k] = 0;
  }
}

bool interior(const NodeIndex& idx, int dim, int nodes) {
  for (int k = 0; k < dim; ++k) {
    if (idx[k] == 0 || idx[k] == nodes - 1) return false;
  }
  return true;
}

struct NodeEval {
  int control;    // best control, PolicyField::kIdle for none
  double value;   // max_c (L_c u) at the node
  double center;  // |diagonal| of the optimal stencil
};

class Discretization {
 public:
  explicit Discretization(const GridSpec& spec)
      : spec_(spec), table_(make_axis_table(spec)), strides_{} {
    for (int k = 0; k < spec.dim; ++k) strides_[k] = spec.stride(k);
  }

  const GridSpec& spec() const { return spec_; }
  const AxisTable& table() const { return table_; }
  std::size_t stride(int k) const { return strides_[k]; }

  // Evaluates every control at one interior node. Coordinates are preferred
  // over idling, and lower indices over higher, on exact ties.
  NodeEval evaluate(std::span<const double> u, std::size_t i, const NodeIndex& idx) const {
    const int n = spec_.dim;
    const double uc = u[i];
    double base = 0.0;
    double base_center = 0.0;
    std::array<double, kMaxDim> up{}, down{};
    for (int k = 0; k < n; ++k) {
      const int ik = idx[k];
      up[k] = u[i + strides_[k]];
      down[k] = u[i - strides_[k]];
      const double hd = table_.half_diffusion[ik];
      const double beta = table_.drift[ik];
      base += hd * (up[k] + down[k] - 2.0 * uc) + upwind(beta, up[k], down[k], uc);
      base_center += 2.0 * hd + std::abs(beta);
    }
    int best = PolicyField::kIdle;
    double best_gain = 0.0;
    double best_center = base_center;
    for (int k = 0; k < n; ++k) {
      const int ik = idx[k];
      const double beta = table_.drift[ik];
      const double pushed = beta + table_.control[ik];
      const double gain = upwind(pushed, up[k], down[k], uc) - upwind(beta, up[k], down[k], uc);
      if (best == PolicyField::kIdle || gain > best_gain) {
        best = k;
        best_gain = gain;
        best_center = base_center - std::abs(beta) + std::abs(pushed);
      }
    }
    if (best_gain < 0.0) {
      // Every push loses against allocating nothing.
      best = PolicyField::kIdle;
      best_gain = 0.0;
      best_center = base_center;
    }
    return {best, base + best_gain, best_center};
  }

  NodeStencil stencil(const NodeIndex& idx, int control) const {
    NodeStencil s;
    for (int k = 0; k < spec_.dim; ++k) {
      const int ik = idx[k];
      const double hd = table_.half_diffusion[ik];
      double d = table_.drift[ik];
      if (k == control) d += table_.control[ik];
      s.minus[k] = hd + (d < 0.0 ? -d : 0.0);
      s.plus[k] = hd + (d > 0.0 ? d : 0.0);
      s.center -= s.minus[k] + s.plus[k];
    }
    return s;
  }

 private:
  GridSpec spec_;
  AxisTable table_;
  std::array<std::size_t, kMaxDim> strides_;
};

// Frozen-policy linear system in normalized form: u_i - sum_nb w_nb u_nb = 0
// on interior rows, identity on boundary rows.
class FrozenSystem {
 public:
  explicit FrozenSystem(const Discretization& disc)
      : disc_(disc), n_(disc.spec().dim), size_(disc.spec().size()) {
    for (int k = 0; k < n_; ++k) {
      minus_[k].assign(size_, 0.0);
      plus_[k].assign(size_, 0.0);
    }
    interior_.assign(size_, 0);
    const int m = disc.spec().nodes;
    NodeIndex idx{};
    for (std::size_t i = 0; i < size_; ++i, advance(idx, n_, m)) {
      interior_[i] = interior(idx, n_, m) ? 1 : 0;
    }
  }

  void assemble(const std::vector<std::int8_t>& policy, unsigned threads) {
    const int m = disc_.spec().nodes;
    detail::parallel_for(size_, threads, [&](std::size_t begin, std::size_t end) {
      NodeIndex idx = disc_.spec().unravel(begin);
      for (std::size_t i = begin; i < end; ++i, advance(idx, n_, m)) {
        if (!interior_[i]) continue;
        const NodeStencil s = disc_.stencil(idx, policy[i]);
        const double inv = -1.0 / s.center;
        for (int k = 0; k < n_; ++k) {
          minus_[k][i] = s.minus[k] * inv;
          plus_[k][i] = s.plus[k] * inv;
        }
      }
    });
  }

  // r = b - A x, zero on boundary rows.
  void residual(std::span<const double> x, std::span<double> r, unsigned threads) const {
    detail::parallel_for(size_, threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        if (!interior_[i]) {
          r[i] = 0.0;
          continue;
        }
        double acc = -x[i];
        for (int k = 0; k < n_; ++k) {
          const std::size_t s = disc_.stride(k);
          acc += minus_[k][i] * x[i - s] + plus_[k][i] * x[i + s];
        }
        r[i] = acc;
      }
    });
  }

  // out = A x for vectors vanishing on boundary rows.
  void apply(std::span<const double> x, std::span<double> out, unsigned threads) const {
    detail::parallel_for(size_, threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        if (!interior_[i]) {
          out[i] = x[i];
          continue;
        }
        double acc = x[i];
        for (int k = 0; k < n_; ++k) {
          const std::size_t s = disc_.stride(k);
          acc -= minus_[k][i] * x[i - s] + plus_[k][i] * x[i + s];
        }
        out[i] = acc;
      }
    });
  }

  // Diagonal of the D-ILU(0) factorization M = (D - L) D^-1 (D - U).
  void factor() {
    diag_.assign(size_, 1.0);
    for (std::size_t i = 0; i < size_; ++i) {
      if (!interior_[i]) continue;
      double d = 1.0;
      for (int k = 0; k < n_; ++k) {
        const std::size_t j = i - disc_.stride(k);
        // A(i,j) = -minus_k(i), A(j,i) = -plus_k(j)
        d -= minus_[k][i] * plus_[k][j] / diag_[j];
      }
      diag_[i] = d;
    }
  }

  void precondition(std::span<const double> r, std::span<double> z) const {
    // Forward: (D - L) v = r.
    for (std::size_t i = 0; i < size_; ++i) {
      if (!interior_[i]) {
        z[i] = r[i];
        continue;
      }
      double acc = r[i];
      for (int k = 0; k < n_; ++k) acc += minus_[k][i] * z[i - disc_.stride(k)];
      z[i] = acc / diag_[i];
    }
    // Backward: (D - U) z = D v.
    for (std::size_t i = size_; i-- > 0;) {
      if (!interior_[i]) continue;
      double acc = 0.0;
      for (int k = 0; k < n_; ++k) acc += plus_[k][i] * z[i + disc_.stride(k)];
      z[i] += acc / diag_[i];
    }
  }

  void sweep(std::span<double> u, bool reverse) const {
    auto relax = [&](std::size_t i) {
      if (!interior_[i]) return;
      double acc = 0.0;
      for (int k = 0; k < n_; ++k) {
        const std::size_t s = disc_.stride(k);
        acc += minus_[k][i] * u[i - s] + plus_[k][i] * u[i + s];
      }
      u[i] = acc;
    };
    if (!reverse) {
      for (std::size_t i = 0; i < size_; ++i) relax(i);
    } else {
      for (std::size_t i = size_; i-- > 0;) relax(i);
    }
  }

  std::size_t size() const { return size_; }

 private:
  const Discretization& disc_;
  int n_;
  std::size_t size_;
  std::array<std::vector<double>, kMaxDim> minus_;
  std::array<std::vector<double>, kMaxDim> plus_;
  std::vector<std::uint8_t> interior_;
  std::vector<double> diag_;
};

// Blocked summation in a fixed order.
double dot(std::span<const double> a, std::span<const double> b) {
  constexpr std::size_t kBlock = 1 << 12;
  double total = 0.0;
  for (std::size_t start = 0; start < a.size(); start += kBlock) {
    const std::size_t end = std::min(a.size(), start + kBlock);
    double partial = 0.0;
    for (std::size_t i = start; i < end; ++i) partial += a[i] * b[i];
    total += partial;
  }
  return total;
}

double sup_norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

// Right-preconditioned BiCGSTAB. Returns false on breakdown or iteration cap.
bool bicgstab(const FrozenSystem& sys, std::vector<double>& x, const SolverOptions& opt) {
  const std::size_t n = sys.size();
  const unsigned th = opt.threads;
  std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n), y(n), z(n);
  sys.residual(x, r, th);
  if (sup_norm(r) <= opt.inner_tolerance) return true;
  rhat = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  for (int it = 0; it < opt.max_inner; ++it) {
    const double rho_new = dot(rhat, r);
    if (rho_new == 0.0 || !std::isfinite(rho_new)) return false;
    const double beta = (rho_new / rho) * (alpha / omega);
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    sys.precondition(p, y);
    sys.apply(y, v, th);
    const double denom = dot(rhat, v);
    if (denom == 0.0 || !std::isfinite(denom)) return false;
    alpha = rho_new / denom;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (sup_norm(s) <= opt.inner_tolerance) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * y[i];
      return true;
    }
    sys.precondition(s, z);
    sys.apply(z, t, th);
    const double tt = dot(t, t);
    if (tt == 0.0) return false;
    omega = dot(t, s) / tt;
    if (omega == 0.0 || !std::isfinite(omega)) return false;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * y[i] + omega * z[i];
      r[i] = s[i] - omega * t[i];
    }
    rho = rho_new;
    if (sup_norm(r) <= opt.inner_tolerance) {
      // Recompute the true residual to guard against drift in the recurrence.
      sys.residual(x, r, th);
      if (sup_norm(r) <= opt.inner_tolerance) return true;
    }
  }
  return false;
}

std::vector<std::int8_t> improve_policy(const Discretization& disc, std::span<const double> u,
                                        unsigned threads) {
  const GridSpec& spec = disc.spec();
  std::vector<std::int8_t> policy(spec.size(), PolicyField::kIdle);
  detail::parallel_for(spec.size(), threads, [&](std::size_t begin, std::size_t end) {
    NodeIndex idx = spec.unravel(begin);
    for (std::size_t i = begin; i < end; ++i, advance(idx, spec.dim, spec.nodes)) {
      if (!interior(idx, spec.dim, spec.nodes)) continue;
      policy[i] = static_cast<std::int8_t>(disc.evaluate(u, i, idx).control);
    }
  });
  return policy;
}

double residual_of(const Discretization& disc, std::span<const double> u) {
  const GridSpec& spec = disc.spec();
  double worst = 0.0;
  NodeIndex idx{};
  for (std::size_t i = 0; i < spec.size(); ++i, advance(idx, spec.dim, spec.nodes)) {
    if (!interior(idx, spec.dim, spec.nodes)) continue;
    const NodeEval e = disc.evaluate(u, i, idx);
    worst = std::max(worst, std::abs(e.value) / e.center);
  }
  return worst;
}

// The discrete maximum principle keeps the exact solution inside the range
// of the boundary data; this removes the last-bit overshoot of the linear solve.
void project_to_range(const GridSpec& spec, std::vector<double>& u) {
  const double cap = spec.value_cap();
  for (double& v : u) v = std::clamp(v, 0.0, cap);
}

std::vector<double> initial_values(const GridSpec& spec, const BoundaryOracle& oracle) {
  std::vector<double> u(spec.size());
  const double rate = spec.params.pushed_rate();
  NodeIndex idx{};
  for (std::size_t i = 0; i < spec.size(); ++i, advance(idx, spec.dim, spec.nodes)) {
    if (spec.is_boundary(idx)) {
      u[i] = oracle.node_value(spec, idx);
      continue;
    }
    // Product / sum of one-coordinate survival values bounds V / U from above.
    double acc = spec.kind == ValueKind::kAllSurvive ? 1.0 : 0.0;
    for (int k = 0; k < spec.dim; ++k) {
      const double h = survival_h(rate * decompactify(spec.coordinate(idx[k])));
      acc = spec.kind == ValueKind::kAllSurvive ? acc * h : acc + h;
    }
    u[i] = acc;
  }
  return u;
}

}  // namespace

NodeStencil discretize(const GridSpec& spec, const NodeIndex& idx, int control) {
  spec.validate();
  if (!interior(idx, spec.dim, spec.nodes)) {
    throw Error(ErrorCode::kDomain, "discretize is defined at interior nodes only");
  }
  return Discretization(spec).stencil(idx, control);
}

Solution solve(const GridSpec& spec, const BoundaryOracle& oracle, const SolverOptions& options) {
  spec.validate();
  if (oracle.kind() != spec.kind || oracle.nodes() != spec.nodes ||
      !(oracle.params() == spec.params)) {
    throw Error(ErrorCode::kProvenance, "boundary oracle does not match grid (kind, b, a, m)");
  }
  if (oracle.max_dimension() < spec.dim - 1) {
    throw Error(ErrorCode::kDependency,
                "boundary oracle lacks dimension " + std::to_string(spec.dim - 1));
  }
  SolverOptions opt = options;
  opt.threads = detail::resolve_threads(opt.threads);

  const Discretization disc(spec);
  FrozenSystem system(disc);
  std::vector<double> u = initial_values(spec, oracle);
  std::vector<std::int8_t> policy = improve_policy(disc, u, opt.threads);
  std::vector<double> previous;

  double change = std::numeric_limits<double>::infinity();
  for (int outer = 1; outer <= opt.max_outer; ++outer) {
    previous = u;
    system.assemble(policy, opt.threads);
    bool solved = false;
    if (opt.inner == InnerSolver::kKrylov) {
      system.factor();
      solved = bicgstab(system, u, opt);
      if (!solved) u = previous;
    }
    if (!solved) {
      for (int sweep = 0; sweep < opt.sweeps_per_outer; ++sweep) {
        system.sweep(u, sweep % 2 == 1);
      }
    }
    change = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      change = std::max(change, std::abs(u[i] - previous[i]));
    }
    std::vector<std::int8_t> next = improve_policy(disc, u, opt.threads);
    const bool stable = solved && next == policy;
    policy = std::move(next);
    if (stable || change < opt.tolerance) {
      project_to_range(spec, u);
      Solution out{ValueGrid(spec, std::move(u)), PolicyField{spec, std::move(policy)}};
      out.grid.iterations = outer;
      out.grid.tolerance = opt.tolerance;
      out.grid.residual = residual_of(disc, out.grid.values());
      return out;
    }
  }
  std::ostringstream msg;
  msg << "policy iteration did not converge in " << opt.max_outer
      << " outer iterations (last sup-norm change " << change << ")";
  throw ConvergenceError(msg.str(), change, opt.max_outer);
}

ValueGrid evaluate_policy(const GridSpec& spec, const BoundaryOracle& oracle,
                          const PolicyField& policy, const SolverOptions& options) {
  spec.validate();
  if (!(policy.spec == spec)) {
    throw Error(ErrorCode::kProvenance, "policy field does not match grid");
  }
  SolverOptions opt = options;
  opt.threads = detail::resolve_threads(opt.threads);
  const Discretization disc(spec);
  FrozenSystem system(disc);
  std::vector<double> u = initial_values(spec, oracle);
  system.assemble(policy.index, opt.threads);
  system.factor();
  int outer = 1;
  if (!bicgstab(system, u, opt)) {
    // Fall back to plain sweeps until the sup-norm change settles.
    for (; outer <= opt.max_outer; ++outer) {
      const std::vector<double> previous = u;
      for (int sweep = 0; sweep < opt.sweeps_per_outer; ++sweep) system.sweep(u, sweep % 2 == 1);
      double change = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) change = std::max(change, std::abs(u[i] - previous[i]));
      if (change < opt.tolerance) break;
    }
  }
  project_to_range(spec, u);
  ValueGrid grid(spec, std::move(u));
  grid.iterations = outer;
  grid.tolerance = opt.tolerance;
  return grid;
}

PolicyField laggard_policy(const GridSpec& spec) {
  PolicyField out{spec, std::vector<std::int8_t>(spec.size(), PolicyField::kIdle)};
  NodeIndex idx{};
  for (std::size_t i = 0; i < spec.size(); ++i, advance(idx, spec.dim, spec.nodes)) {
    if (!interior(idx, spec.dim, spec.nodes)) continue;
    int best = 0;
    for (int k = 1; k < spec.dim; ++k) {
      if (idx[k] < idx[best]) best = k;
    }
    out.index[i] = static_cast<std::int8_t>(best);
  }
  return out;
}

ValueGrid closed_form_grid(ValueKind kind, const DriftBudget& params, int nodes) {
  GridSpec spec{1, nodes, kind, params};
  spec.validate();
  std::vector<double> values(spec.size());
  for (int i = 0; i < nodes; ++i) values[i] = value_1d(decompactify(spec.coordinate(i)), params);
  ValueGrid grid(spec, std::move(values));
  grid.iterations = 0;
  grid.residual = 0.0;
  return grid;
}

BoundaryOracle RecursiveSolution::oracle() const {
  const GridSpec& s = top().spec();
  BoundaryOracle o(s.kind, s.params, s.nodes);
  for (std::size_t d = 0; d + 1 < grids.size(); ++d) o.push(grids[d]);
  return o;
}

RecursiveSolution solve_recursive(int n, ValueKind kind, const DriftBudget& params, int nodes,
                                  const SolverOptions& options) {
  GridSpec top{n, nodes, kind, params};
  top.validate();
  RecursiveSolution out;
  BoundaryOracle oracle(kind, params, nodes);
  ValueGrid first = closed_form_grid(kind, params, nodes);
  first.tolerance = options.tolerance;
  out.grids.push_back(first);
  if (n == 1) {
    PolicyField policy{first.spec(), std::vector<std::int8_t>(first.spec().size(), 0)};
    policy.index.front() = PolicyField::kIdle;
    policy.index.back() = PolicyField::kIdle;
    out.policy = std::move(policy);
    return out;
  }
  oracle.push(first);
  for (int d = 2; d <= n; ++d) {
    Solution s = solve(GridSpec{d, nodes, kind, params}, oracle, options);
    out.grids.push_back(s.grid);
    if (d < n) {
      oracle.push(std::move(s.grid));
    } else {
      out.policy = std::move(s.policy);
    }
  }
  return out;
}

double hjb_residual(const ValueGrid& grid) {
  return residual_of(Discretization(grid.spec()), grid.values());
}

GradientField gradient(const ValueGrid& grid) {
  const GridSpec& spec = grid.spec();
  const int n = spec.dim;
  const int m = spec.nodes;
  const double h = spec.spacing();
  GradientField out{spec, std::vector<double>(spec.size() * n, 0.0)};
  std::vector<double> gamma(m);
  for (int i = 0; i < m; ++i) gamma[i] = control_coefficient(spec.coordinate(i));
  auto u = grid.values();
  NodeIndex idx{};
  for (std::size_t i = 0; i < spec.size(); ++i, advance(idx, n, m)) {
    for (int k = 0; k < n; ++k) {
      const std::size_t s = spec.stride(k);
      double dy;
      if (idx[k] == 0) {
        dy = (-3.0 * u[i] + 4.0 * u[i + s] - u[i + 2 * s]) / (2.0 * h);
      } else if (idx[k] == m - 1) {
        dy = (3.0 * u[i] - 4.0 * u[i - s] + u[i - 2 * s]) / (2.0 * h);
      } else {
        dy = (u[i + s] - u[i - s]) / (2.0 * h);
      }
      out.partials[i * n + k] = gamma[idx[k]] * dy;
    }
  }
  return out;
}

PolicyField extract_policy(const ValueGrid& grid, double tie_tolerance) {
  const GridSpec& spec = grid.spec();
  const GradientField g = gradient(grid);
  PolicyField out{spec, std::vector<std::int8_t>(spec.size(), PolicyField::kIdle)};
  NodeIndex idx{};
  for (std::size_t i = 0; i < spec.size(); ++i, advance(idx, spec.dim, spec.nodes)) {
    if (!interior(idx, spec.dim, spec.nodes)) continue;
    double best = g.at(i, 0);
    for (int k = 1; k < spec.dim; ++k) best = std::max(best, g.at(i, k));
    if (best <= 0.0) continue;
    for (int k = 0; k < spec.dim; ++k) {
      if (g.at(i, k) >= best - tie_tolerance) {
        out.index[i] = static_cast<std::int8_t>(k);
        break;
      }
    }
  }
  return out;
}

}  // namespace survctl
