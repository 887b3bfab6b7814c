#include <cstdio>
#include <string>
#include <vector>

#include "commands.hpp"
#include "spoofkit/error.hpp"

int main(int argc, char** argv) {
  using namespace spoofkit;
  cli::Context ctx;
  ctx.argv.assign(argv, argv + argc);

  CLI::App app{"Anti-spoofing toolkit: manifests, augmentation, linear probes, EER, fusion and t-SNE"};
  app.set_version_flag("--version", SPOOFKIT_VERSION);
  app.require_subcommand(1);
  app.add_option("--log-level", ctx.log_level, "debug, info, warn, error or off")
      ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}))
      ->capture_default_str();
  app.add_option("--threads", ctx.threads, "Worker threads (default: $SPOOFKIT_THREADS or all cores)");
  app.add_option("--record-dir", ctx.record_dir, "Directory for the run record (default: beside the outputs)");

  cli::register_data_commands(app, ctx);
  cli::register_model_commands(app, ctx);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
