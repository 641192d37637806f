#include <iostream>
#include <vector>

#include "commands.hpp"
#include "common.hpp"

using namespace survctl;
using namespace survctl::cli;

int main(int argc, char** argv) {
  CLI::App app{"Survival control: HJB grids, Monte Carlo estimates and structural checks"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::vector<Command> commands{make_solve(app), make_simulate(app), make_verify(app), make_export(app)};

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    for (Command& c : commands) {
      if (!c.app->parsed()) continue;
      if (!c.config->empty()) apply_json_config(*c.app, *c.config);
      return c.run();
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kUsage;
}
