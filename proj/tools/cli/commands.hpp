#pragma once

#include <functional>
#include <memory>
#include <string>

#include <CLI11.hpp>

namespace survctl::cli {

struct Command {
  CLI::App* app = nullptr;
  // --config FILE, applied after parsing; shared so the option binding survives copies
  std::shared_ptr<std::string> config = std::make_shared<std::string>();
  std::function<int()> run;
};

Command make_solve(CLI::App& parent);
Command make_simulate(CLI::App& parent);
Command make_verify(CLI::App& parent);
Command make_export(CLI::App& parent);

}  // namespace survctl::cli
