#include "common.hpp"

#include <charconv>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

namespace survctl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kFormat:
    case ErrorCode::kDependency:
      return kArtifact;
    case ErrorCode::kConvergence:
      return kCheckFailed;
    default:
      return kUsage;
  }
}

fs::path output_root() {
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
  return "runs";
}

namespace {

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw Error(ErrorCode::kConfig, "config values must be strings, numbers, booleans or arrays");
}

}  // namespace

void apply_json_config(CLI::App& app, const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config file " + file.string());
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, "config file " + file.string() + " is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw Error(ErrorCode::kConfig, "config file must hold a JSON object");

  for (const auto& [key, value] : cfg.items()) {
    if (key == "config") continue;
    CLI::Option* opt = app.get_option_no_throw("--" + key);
    if (!opt) throw Error(ErrorCode::kConfig, "unknown key '" + key + "' in " + file.string());
    if (opt->count() > 0) continue;  // the command line wins
    if (value.is_array()) {
      if (opt->get_items_expected_max() > 1) {
        for (const auto& item : value) opt->add_result(scalar_text(item));
      } else {
        std::string joined;
        for (const auto& item : value) joined += (joined.empty() ? "" : ",") + scalar_text(item);
        opt->add_result(joined);
      }
    } else {
      opt->add_result(scalar_text(value));
    }
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw Error(ErrorCode::kConfig, "config key '" + key + "': " + e.what());
    }
  }
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::kConfig, "cannot parse '" + text + "' as a number for " + what);
  }
  return v;
}

std::vector<double> parse_doubles(const std::string& csv, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, what));
  if (out.empty()) throw Error(ErrorCode::kConfig, what + " needs at least one value");
  return out;
}

std::vector<std::vector<double>> parse_points(const std::string& text) {
  std::vector<std::vector<double>> out;
  std::stringstream ss(text);
  std::string point;
  while (std::getline(ss, point, ';')) out.push_back(parse_doubles(point, "--points"));
  return out;
}

void write_text(const fs::path& file, const std::string& text) {
  std::error_code ec;
  if (file.has_parent_path()) fs::create_directories(file.parent_path(), ec);
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + file.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "short write to " + file.string());
}

void write_json(const fs::path& file, const json& value) { write_text(file, value.dump(2) + "\n"); }

void write_timing(const fs::path& dir, const std::string& command, const Stopwatch& watch,
                  unsigned threads) {
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  write_json(dir / "timing.json", json{{"command", command},
                                       {"wall_seconds", watch.seconds()},
                                       {"finished_at", stamp},
                                       {"threads", threads}});
}

}  // namespace survctl::cli
