#include <cstdio>

#include "common.hpp"

int main(int argc, char** argv) {
  using namespace drive::cli;
  CLI::App app{"drive: real-time frame enhancement pipeline and driving-study tools"};
  app.require_subcommand(1, 1);
  app.fallthrough(false);

  add_run(app);
  add_replay(app);
  add_bench(app);
  add_eval(app);
  add_sample(app);
  add_worker_mock(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  return exit_status();
}
