#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "common.hpp"
#include "survctl/closed_forms.hpp"
#include "survctl/grid_io.hpp"
#include "survctl/solver.hpp"

namespace survctl::cli {

namespace {

struct ExportArgs {
  std::string grid;
  std::vector<std::string> slices;
  std::string what = "value";
  std::string coords = "orthant";
  std::string out;
};

// "2=1.5" or "x2=1.5" -> fixed node on axis 1 (0-based).
std::pair<int, int> parse_slice(const std::string& text, const GridSpec& spec, bool compact) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw Error(ErrorCode::kConfig, "slice '" + text + "' is not axis=value");
  std::string axis_text = text.substr(0, eq);
  if (!axis_text.empty() && (axis_text[0] == 'x' || axis_text[0] == 'y')) axis_text.erase(0, 1);
  const double axis_value = parse_double(axis_text, "slice axis");
  const int axis = static_cast<int>(axis_value) - 1;
  if (axis_value != std::floor(axis_value) || axis < 0 || axis >= spec.dim) {
    throw Error(ErrorCode::kConfig, "slice axis in '" + text + "' is not between 1 and " + std::to_string(spec.dim));
  }
  const double v = parse_double(text.substr(eq + 1), "slice value");
  const bool inside = compact ? (v >= 0.0 && v <= 1.0) : v >= 0.0;
  if (!inside) throw Error(ErrorCode::kDomain, "slice '" + text + "' lies outside the grid");
  const double y = compact ? v : compactify(v);
  const int node = static_cast<int>(std::lround(y * (spec.nodes - 1)));
  const double snapped = spec.coordinate(node);
  if (std::abs(snapped - y) > 1e-12) {
    std::cerr << "slice " << text << " snapped to node " << node << " ("
              << (compact ? snapped : decompactify(snapped)) << ")\n";
  }
  return {axis, node};
}

std::string number(double v) {
  if (std::isinf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run_export(const ExportArgs& a) {
  if (a.grid.empty()) throw Error(ErrorCode::kConfig, "export needs --grid PATH");
  const ValueGrid grid = load_grid(a.grid);
  const GridSpec& spec = grid.spec();
  const bool compact = a.coords == "compact";

  std::array<int, kMaxDim> fixed;
  fixed.fill(-1);
  for (const auto& s : a.slices) {
    const auto [axis, node] = parse_slice(s, spec, compact);
    fixed[axis] = node;
  }

  GradientField grad;
  PolicyField policy;
  if (a.what == "gradient") grad = gradient(grid);
  if (a.what == "policy") policy = extract_policy(grid);

  std::ostringstream csv;
  const char prefix = compact ? 'y' : 'x';
  for (int k = 0; k < spec.dim; ++k) csv << prefix << k + 1 << ',';
  if (a.what == "value") {
    csv << kind_label(spec.kind) << "\n";
  } else if (a.what == "gradient") {
    for (int k = 0; k < spec.dim; ++k) csv << "d" << k + 1 << (k + 1 < spec.dim ? "," : "\n");
  } else {
    csv << "policy\n";
  }

  for (std::size_t node = 0; node < spec.size(); ++node) {
    const NodeIndex idx = spec.unravel(node);
    bool keep = true;
    for (int k = 0; k < spec.dim; ++k) keep = keep && (fixed[k] < 0 || fixed[k] == idx[k]);
    if (!keep) continue;
    for (int k = 0; k < spec.dim; ++k) {
      const double y = spec.coordinate(idx[k]);
      csv << number(compact ? y : decompactify(y)) << ',';
    }
    if (a.what == "value") {
      csv << number(grid[node]) << "\n";
    } else if (a.what == "gradient") {
      for (int k = 0; k < spec.dim; ++k) csv << number(grad.at(node, k)) << (k + 1 < spec.dim ? "," : "\n");
    } else {
      // 1-based coordinate index, 0 where nobody is pushed.
      csv << policy.index[node] + 1 << "\n";
    }
  }

  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    write_text(a.out, csv.str());
  }
  return kOk;
}

}  // namespace

Command make_export(CLI::App& parent) {
  auto a = std::make_shared<ExportArgs>();
  Command c;
  CLI::App* app = parent.add_subcommand("export", "Write a grid slice as CSV");
  app->add_option("--grid", a->grid, "Grid file (meta, payload or stem)");
  app->add_option("--slice", a->slices, "Fix an axis, e.g. 2=1.0 (1-based); repeatable");
  app->add_option("--what", a->what, "value | gradient | policy")
      ->check(CLI::IsMember({"value", "gradient", "policy"}))
      ->capture_default_str();
  app->add_option("--coords", a->coords, "orthant | compact")
      ->check(CLI::IsMember({"orthant", "compact"}))
      ->capture_default_str();
  app->add_option("--out", a->out, "CSV file (default stdout)");
  app->add_option("--config", *c.config, "JSON file with defaults for these flags");
  c.app = app;
  c.run = [a] { return run_export(*a); };
  return c;
}

}  // namespace survctl::cli
