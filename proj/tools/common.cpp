#include <set>

#include "commands.hpp"
#include "spoofkit/error.hpp"
#include "spoofkit/log.hpp"
#include "spoofkit/parallel.hpp"
#include "spoofkit/rng.hpp"

namespace spoofkit::cli {

void Context::begin() const {
  log::Level level;
  if (log::parse_level(log_level, level)) log::set_level(level);
  if (threads > 0) set_thread_count(threads);
}

std::vector<std::pair<std::string, std::filesystem::path>> named_paths(const std::vector<std::string>& args,
                                                                        const std::string& flag) {
  std::vector<std::pair<std::string, std::filesystem::path>> out;
  std::set<std::string> seen;
  for (const auto& a : args) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == a.size()) {
      throw Error(Errc::invalid_argument, flag + " expects NAME=PATH, got '" + a + "'");
    }
    std::string name = a.substr(0, eq);
    if (!seen.insert(name).second) throw Error(Errc::duplicate_id, flag + " name '" + name + "' given twice");
    out.emplace_back(std::move(name), a.substr(eq + 1));
  }
  return out;
}

void TrainOptions::add_to(CLI::App* cmd) {
  cmd->add_option("--preset", preset, "Training preset: probe or finetune-recipe")
      ->check(CLI::IsMember({"probe", "finetune-recipe"}))
      ->capture_default_str();
  cmd->add_option("--lr", learning_rate, "Peak learning rate");
  cmd->add_option("--warmup", warmup_ratio, "Warmup fraction of all steps");
  cmd->add_option("--epochs", epochs, "Passes over the training data");
  cmd->add_option("--batch-size", batch_size, "Mini-batch size (implies --minibatch)");
  cmd->add_option("--C", inv_reg_c, "Inverse L2 strength");
  cmd->add_flag("--minibatch", minibatch, "Use mini-batches even for the probe preset");
  cmd->add_flag("--standardize", standardize, "Z-score features before fitting");
  cmd->add_flag("--no-polish", no_polish, "Skip the L-BFGS refinement after Adam");
  cmd->add_option("--seed", seed, "Seed; the trainer uses derive_seed(seed, \"train\")")->capture_default_str();
}

TrainConfig TrainOptions::resolve() const {
  TrainConfig c = *preset_config(preset);
  if (learning_rate) c.learning_rate = *learning_rate;
  if (warmup_ratio) c.warmup_ratio = *warmup_ratio;
  if (epochs) c.epochs = *epochs;
  if (batch_size) c.batch_size = *batch_size;
  if (inv_reg_c) c.inv_reg_c = *inv_reg_c;
  if (minibatch || batch_size) c.full_batch = false;
  c.standardize = standardize;
  c.polish = !no_polish;
  c.seed = derive_seed(seed, "train");
  c.validate();
  return c;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"warmup_ratio", c.warmup_ratio},
          {"epochs", c.epochs},               {"batch_size", c.batch_size},
          {"full_batch", c.full_batch},       {"seed", c.seed},
          {"C", c.inv_reg_c},                 {"standardize", c.standardize},
          {"polish", c.polish},               {"polish_max_iterations", c.polish_max_iterations}};
}

}  // namespace spoofkit::cli
