#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "run_record.hpp"
#include "spoofkit/probe.hpp"

namespace spoofkit::cli {

struct Context {
  std::vector<std::string> argv;
  std::optional<std::filesystem::path> record_dir;
  std::string log_level = "info";
  std::size_t threads = 0;

  /// Applies the global flags; every subcommand calls this first.
  void begin() const;

  RunRecord record(const std::string& command) const {
    RunRecord r(command, argv);
    if (record_dir) r.set_directory(*record_dir);
    return r;
  }
};

void register_data_commands(CLI::App& app, Context& ctx);
void register_model_commands(CLI::App& app, Context& ctx);

/// Splits "name=path" arguments, rejecting empty halves and repeated names.
std::vector<std::pair<std::string, std::filesystem::path>> named_paths(const std::vector<std::string>& args,
                                                                        const std::string& flag);

/// Training flags shared by train, fuse and benchmark: a preset plus overrides.
struct TrainOptions {
  std::string preset = "probe";
  std::optional<double> learning_rate;
  std::optional<double> warmup_ratio;
  std::optional<std::uint32_t> epochs;
  std::optional<std::uint32_t> batch_size;
  std::optional<double> inv_reg_c;
  bool minibatch = false;
  bool standardize = false;
  bool no_polish = false;
  std::uint64_t seed = 0;

  void add_to(CLI::App* cmd);
  TrainConfig resolve() const;
};

nlohmann::json to_json(const TrainConfig& config);

}  // namespace spoofkit::cli
