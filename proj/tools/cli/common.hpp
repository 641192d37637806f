#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "survctl/error.hpp"

namespace survctl::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputRootEnv = "SURVCTL_OUTPUT_ROOT";

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kArtifact = 3 };

int exit_code_for(ErrorCode code);

/// $SURVCTL_OUTPUT_ROOT, or "runs" in the working directory.
std::filesystem::path output_root();

/// Fills options of `app` that were not given on the command line from a
/// flat JSON object keyed by long flag names without dashes. Arrays are
/// joined with ',' for single-valued options.
void apply_json_config(CLI::App& app, const std::filesystem::path& file);

std::vector<double> parse_doubles(const std::string& csv, const std::string& what);
double parse_double(const std::string& text, const std::string& what);
/// "1,1;0.5,3" -> {{1,1},{0.5,3}}
std::vector<std::vector<double>> parse_points(const std::string& text);

void write_json(const std::filesystem::path& file, const nlohmann::json& value);
void write_text(const std::filesystem::path& file, const std::string& text);

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Wall-clock facts kept out of the deterministic artifacts.
void write_timing(const std::filesystem::path& dir, const std::string& command,
                  const Stopwatch& watch, unsigned threads);

}  // namespace survctl::cli
