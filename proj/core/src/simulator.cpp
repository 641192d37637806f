#include "survctl/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "parallel.hpp"
#include "survctl/error.hpp"
#include "survctl/grid_io.hpp"
#include "survctl/solver.hpp"

namespace survctl {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Each path owns an independent stream keyed by (seed, path_index); draws are
// consumed n per step in coordinate order, absorbed coordinates included.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path_index) {
  return splitmix64(seed ^ splitmix64(path_index));
}

template <class P>
void allocate_impl(const P& policy, const PathState& s, const DriftBudget& params,
                   std::span<double> phi);

template <>
void allocate_impl(const Laggard&, const PathState& s, const DriftBudget& params,
                   std::span<double> phi) {
  std::fill(phi.begin(), phi.end(), 0.0);
  int best = -1;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (s.alive[i] && (best < 0 || s.x[i] < s.x[best])) best = static_cast<int>(i);
  }
  if (best >= 0) phi[best] = params.budget;
}

template <>
void allocate_impl(const Uniform&, const PathState& s, const DriftBudget& params,
                   std::span<double> phi) {
  const int alive = s.alive_count();
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    phi[i] = (s.alive[i] && alive > 0) ? params.budget / alive : 0.0;
  }
}

template <>
void allocate_impl(const Fixed& policy, const PathState& s, const DriftBudget& params,
                   std::span<double> phi) {
  std::fill(phi.begin(), phi.end(), 0.0);
  if (s.alive[policy.coordinate]) phi[policy.coordinate] = params.budget;
}

template <>
void allocate_impl(const ConstantSplit& policy, const PathState& s, const DriftBudget&,
                   std::span<double> phi) {
  for (std::size_t i = 0; i < s.x.size(); ++i) phi[i] = s.alive[i] ? policy.weights[i] : 0.0;
}

template <>
void allocate_impl(const GridFeedback& policy, const PathState& s, const DriftBudget& params,
                   std::span<double> phi) {
  const GridSpec& spec = policy.field->spec;
  if (s.alive_count() < spec.dim) {
    allocate_impl(Laggard{}, s, params, phi);
    return;
  }
  std::fill(phi.begin(), phi.end(), 0.0);
  const int m = spec.nodes;
  NodeIndex idx{};
  for (int k = 0; k < spec.dim; ++k) {
    const double y = s.x[k] / (1.0 + s.x[k]);
    const long i = std::lround(y * (m - 1));
    idx[k] = static_cast<int>(std::clamp<long>(i, 1, m - 2));
  }
  const int chosen = policy.field->at(idx);
  if (chosen != PolicyField::kIdle) phi[chosen] = params.budget;
}

// exp(-40) is about 4e-18; smaller crossing probabilities count as zero.
constexpr double kBridgeCutoff = 40.0;

void advance(PathState& s, std::span<const double> phi, double drift, double dt, double sqdt,
             std::span<const double> noise, std::span<const double> bridge) {
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (!s.alive[i]) continue;
    const double before = s.x[i];
    const double after = before + (drift + phi[i]) * dt + sqdt * noise[i];
    bool absorbed = after <= 0.0;
    if (!absorbed && !bridge.empty()) {
      const double e = 2.0 * before * after / dt;
      absorbed = e < kBridgeCutoff && bridge[i] < std::exp(-e);
    }
    if (absorbed) {
      s.x[i] = 0.0;
      s.alive[i] = 0;
    } else {
      s.x[i] = after;
    }
  }
}

struct Termination {
  bool done = false;
  double payoff = 0.0;
};

class PathRunner {
 public:
  PathRunner(const SimConfig& cfg, std::span<const long> checkpoints)
      : cfg_(cfg), checkpoints_(checkpoints) {}

  template <class P>
  void run(const P& policy, std::uint64_t path_index, std::span<PathOutcome> out) const {
    const std::size_t n = cfg_.x0.size();
    PathState state(cfg_.x0);
    const bool bridged = cfg_.crossing == Crossing::kBridge;
    std::vector<double> phi(n), noise(n), bridge(bridged ? n : 0);
    boost::random::mt19937_64 rng(path_seed(cfg_.seed, path_index));
    boost::random::normal_distribution<double> normal;
    boost::random::uniform_01<double> uniform;
    const double sqdt = std::sqrt(cfg_.dt);

    std::size_t next = 0;
    auto finish = [&](double payoff) {
      for (; next < checkpoints_.size(); ++next) out[next] = {payoff, false};
    };
    if (const Termination t = terminal(state); t.done) {
      finish(t.payoff);
      return;
    }
    for (long steps = 1; next < checkpoints_.size(); ++steps) {
      for (std::size_t i = 0; i < n; ++i) noise[i] = normal(rng);
      for (double& u : bridge) u = uniform(rng);
      allocate_impl(policy, state, cfg_.params, phi);
      assert(std::accumulate(phi.begin(), phi.end(), 0.0) <= cfg_.params.budget + 1e-12);
      advance(state, phi, cfg_.params.drift, cfg_.dt, sqdt, noise, bridge);
      if (const Termination t = terminal(state); t.done) {
        finish(t.payoff);
        return;
      }
      while (next < checkpoints_.size() && checkpoints_[next] == steps) {
        out[next++] = {running_payoff(state), true};
      }
    }
  }

 private:
  Termination terminal(const PathState& s) const {
    const int alive = s.alive_count();
    if (cfg_.payoff == Payoff::kAllSurvive) {
      if (alive < static_cast<int>(s.x.size())) return {true, 0.0};
      if (cfg_.estimator == Estimator::kDualBarrier) {
        const double lo = *std::min_element(s.x.begin(), s.x.end());
        if (lo >= *cfg_.barrier) return {true, 1.0};
      }
      return {};
    }
    if (alive == 0) return {true, 0.0};
    return {};
  }

  double running_payoff(const PathState& s) const {
    return cfg_.payoff == Payoff::kAllSurvive ? 1.0 : static_cast<double>(s.alive_count());
  }

  const SimConfig& cfg_;
  std::span<const long> checkpoints_;
};

long steps_for(double horizon, double dt) {
  return std::max(1L, static_cast<long>(std::ceil(horizon / dt - 1e-9)));
}

void check_policy(const Policy& policy, const SimConfig& cfg) {
  const int n = cfg.dim();
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Fixed>) {
          if (p.coordinate < 0 || p.coordinate >= n) {
            throw Error(ErrorCode::kConfig, "fixed policy coordinate out of range");
          }
        } else if constexpr (std::is_same_v<T, ConstantSplit>) {
          if (static_cast<int>(p.weights.size()) != n) {
            throw Error(ErrorCode::kConfig, "split policy needs one weight per coordinate");
          }
          double total = 0.0;
          for (double w : p.weights) {
            if (!(w >= 0.0)) throw Error(ErrorCode::kConfig, "split weights must be >= 0");
            total += w;
          }
          if (total > cfg.params.budget + 1e-12) {
            throw Error(ErrorCode::kConfig, "split weights exceed the budget");
          }
        } else if constexpr (std::is_same_v<T, GridFeedback>) {
          if (!p.grid || !p.field) throw Error(ErrorCode::kConfig, "grid policy without a grid");
          const GridSpec& s = p.grid->spec();
          if (s.dim != n) {
            throw Error(ErrorCode::kProvenance, "grid policy has dimension " + std::to_string(s.dim) +
                                                    " but x0 has " + std::to_string(n));
          }
          if (!(s.params == cfg.params)) {
            throw Error(ErrorCode::kProvenance,
                        "grid policy was solved for different (b, budget) than the simulation");
          }
        }
      },
      policy);
}

std::vector<long> checkpoints_for(const SimConfig& cfg, std::span<const double> horizons) {
  if (horizons.empty()) throw Error(ErrorCode::kConfig, "no horizons given");
  std::vector<long> out;
  double previous = 0.0;
  for (double h : horizons) {
    if (!(h > previous)) throw Error(ErrorCode::kConfig, "horizons must be strictly increasing and > 0");
    if (h < cfg.dt) throw Error(ErrorCode::kConfig, "horizon shorter than dt");
    previous = h;
    out.push_back(steps_for(h, cfg.dt));
  }
  return out;
}

}  // namespace

PathState::PathState(std::span<const double> x0) : x(x0.begin(), x0.end()), alive(x0.size()) {
  for (std::size_t i = 0; i < x.size(); ++i) alive[i] = x[i] > 0.0 ? 1 : 0;
}

int PathState::alive_count() const {
  return static_cast<int>(std::count(alive.begin(), alive.end(), std::uint8_t{1}));
}

GridFeedback make_grid_feedback(ValueGrid grid) {
  GridFeedback out;
  out.source = payload_sha256(grid.values());
  out.field = std::make_shared<const PolicyField>(extract_policy(grid));
  out.grid = std::make_shared<const ValueGrid>(std::move(grid));
  return out;
}

std::string describe(const Policy& policy) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Laggard>) {
          return "laggard";
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return "uniform";
        } else if constexpr (std::is_same_v<T, Fixed>) {
          return "fixed:" + std::to_string(p.coordinate + 1);
        } else if constexpr (std::is_same_v<T, ConstantSplit>) {
          std::ostringstream out;
          out << "split:";
          for (std::size_t i = 0; i < p.weights.size(); ++i) out << (i ? "," : "") << p.weights[i];
          return out.str();
        } else {
          return "grid:" + p.source;
        }
      },
      policy);
}

Policy parse_policy(const std::string& d) {
  if (d == "laggard") return Laggard{};
  if (d == "uniform") return Uniform{};
  const auto colon = d.find(':');
  const std::string head = d.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : d.substr(colon + 1);
  try {
    if (head == "fixed" && !tail.empty()) {
      std::size_t used = 0;
      const int i = std::stoi(tail, &used);
      if (used != tail.size() || i < 1) throw std::invalid_argument(tail);
      return Fixed{i - 1};
    }
    if (head == "split" && !tail.empty()) {
      ConstantSplit s;
      std::stringstream ss(tail);
      std::string item;
      while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        s.weights.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      }
      return s;
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kConfig, "malformed policy '" + d + "'");
  }
  if (head == "grid") {
    throw Error(ErrorCode::kConfig, "grid policies must be built from a loaded grid");
  }
  throw Error(ErrorCode::kConfig,
              "unknown policy '" + d + "' (laggard, uniform, fixed:I, grid:PATH, split:w1,...)");
}

const char* payoff_label(Payoff p) { return p == Payoff::kAllSurvive ? "all" : "count"; }
const char* estimator_label(Estimator e) {
  return e == Estimator::kHorizonTruncation ? "horizon" : "barrier";
}
const char* crossing_label(Crossing c) { return c == Crossing::kBridge ? "bridge" : "discrete"; }
Crossing parse_crossing(const std::string& s) {
  if (s == "bridge") return Crossing::kBridge;
  if (s == "discrete") return Crossing::kDiscrete;
  throw Error(ErrorCode::kConfig, "unknown crossing test '" + s + "' (bridge, discrete)");
}
Payoff parse_payoff(const std::string& s) {
  if (s == "all") return Payoff::kAllSurvive;
  if (s == "count") return Payoff::kSurvivorCount;
  throw Error(ErrorCode::kConfig, "unknown payoff '" + s + "' (all, count)");
}
Estimator parse_estimator(const std::string& s) {
  if (s == "horizon") return Estimator::kHorizonTruncation;
  if (s == "barrier") return Estimator::kDualBarrier;
  throw Error(ErrorCode::kConfig, "unknown estimator '" + s + "' (horizon, barrier)");
}

void SimConfig::validate() const {
  if (x0.empty()) throw Error(ErrorCode::kConfig, "x0 must have at least one coordinate");
  for (double v : x0) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::kConfig, "x0 must be finite and >= 0");
  }
  DriftBudget::for_simulator(params.drift, params.budget);
  if (!(dt > 0.0)) throw Error(ErrorCode::kConfig, "dt must be > 0");
  if (!(horizon > 0.0) || dt > horizon) throw Error(ErrorCode::kConfig, "need 0 < dt <= horizon");
  if (paths < 1) throw Error(ErrorCode::kConfig, "paths must be >= 1");
  if (barrier && !(*barrier > 0.0)) throw Error(ErrorCode::kConfig, "barrier must be > 0");
  if (estimator == Estimator::kDualBarrier) {
    if (!barrier) throw Error(ErrorCode::kConfig, "barrier estimator needs --barrier");
    if (payoff != Payoff::kAllSurvive) {
      throw Error(ErrorCode::kConfig,
                  "barrier estimator is only sound for the all-survive payoff; use --estimator horizon");
    }
  }
}

nlohmann::json SimConfig::to_json() const {
  return nlohmann::json{
      {"x0", x0},
      {"b", params.drift},
      {"budget", params.budget},
      {"dt", dt},
      {"horizon", horizon},
      {"barrier", barrier ? nlohmann::json(*barrier) : nlohmann::json(nullptr)},
      {"paths", paths},
      {"seed", seed},
      {"payoff", payoff_label(payoff)},
      {"estimator", estimator_label(estimator)},
      {"crossing", crossing_label(crossing)},
  };
}

nlohmann::json SimEstimate::to_json() const {
  return nlohmann::json{
      {"mean", mean},
      {"stderr", std_error},
      {"ci95", {ci_lo, ci_hi}},
      {"paths", paths},
      {"truncated_fraction", truncated_fraction},
      {"mode", estimator_label(mode)},
      {"horizon", horizon},
  };
}

void allocate(const Policy& policy, const PathState& state, const DriftBudget& params,
              std::span<double> phi) {
  std::visit([&](const auto& p) { allocate_impl(p, state, params, phi); }, policy);
}

void step(PathState& state, const Policy& policy, const DriftBudget& params, double dt,
          std::span<const double> noise, std::span<const double> bridge) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kDomain, "dt must be > 0");
  if (noise.size() != state.x.size() || (!bridge.empty() && bridge.size() != state.x.size())) {
    throw Error(ErrorCode::kDomain, "need one draw per coordinate");
  }
  std::vector<double> phi(state.x.size());
  allocate(policy, state, params, phi);
  advance(state, phi, params.drift, dt, std::sqrt(dt), noise, bridge);
}

std::vector<PathOutcome> run_path_schedule(const SimConfig& config, const Policy& policy,
                                           std::uint64_t path_index,
                                           std::span<const double> horizons) {
  config.validate();
  check_policy(policy, config);
  const std::vector<long> checkpoints = checkpoints_for(config, horizons);
  std::vector<PathOutcome> out(checkpoints.size());
  const PathRunner runner(config, checkpoints);
  std::visit([&](const auto& p) { runner.run(p, path_index, out); }, policy);
  return out;
}

PathOutcome run_path(const SimConfig& config, const Policy& policy, std::uint64_t path_index) {
  const double h[] = {config.horizon};
  return run_path_schedule(config, policy, path_index, h).front();
}

SimEstimate summarize(std::span<const double> payoffs, std::uint64_t truncated, Estimator mode,
                      double horizon) {
  SimEstimate e;
  e.paths = payoffs.size();
  e.mode = mode;
  e.horizon = horizon;
  if (payoffs.empty()) return e;
  double sum = 0.0;
  for (double p : payoffs) sum += p;
  e.mean = sum / static_cast<double>(payoffs.size());
  double ss = 0.0;
  for (double p : payoffs) ss += (p - e.mean) * (p - e.mean);
  const double var = payoffs.size() > 1 ? ss / static_cast<double>(payoffs.size() - 1) : 0.0;
  e.std_error = std::sqrt(var / static_cast<double>(payoffs.size()));
  e.ci_lo = e.mean - 1.96 * e.std_error;
  e.ci_hi = e.mean + 1.96 * e.std_error;
  e.truncated_fraction = static_cast<double>(truncated) / static_cast<double>(payoffs.size());
  return e;
}

std::vector<SimEstimate> horizon_schedule(const SimConfig& config, const Policy& policy,
                                          std::span<const double> horizons) {
  config.validate();
  check_policy(policy, config);
  if (config.paths < 2) throw Error(ErrorCode::kConfig, "estimates need at least 2 paths");
  const std::vector<long> checkpoints = checkpoints_for(config, horizons);
  const std::size_t h = checkpoints.size();
  const std::size_t paths = config.paths;
  std::vector<PathOutcome> outcomes(paths * h);
  const PathRunner runner(config, checkpoints);
  const unsigned threads = detail::resolve_threads(config.threads);
  detail::parallel_for(paths, threads, [&](std::size_t begin, std::size_t end) {
    std::visit(
        [&](const auto& p) {
          for (std::size_t i = begin; i < end; ++i) {
            runner.run(p, i, std::span<PathOutcome>(outcomes).subspan(i * h, h));
          }
        },
        policy);
  });
  std::vector<SimEstimate> out;
  std::vector<double> payoffs(paths);
  for (std::size_t j = 0; j < h; ++j) {
    std::uint64_t truncated = 0;
    for (std::size_t i = 0; i < paths; ++i) {
      payoffs[i] = outcomes[i * h + j].payoff;
      truncated += outcomes[i * h + j].truncated ? 1 : 0;
    }
    out.push_back(summarize(payoffs, truncated, config.estimator, horizons[j]));
  }
  return out;
}

SimEstimate estimate(const SimConfig& config, const Policy& policy) {
  const double h[] = {config.horizon};
  return horizon_schedule(config, policy, h).front();
}

}  // namespace survctl
