#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace spoofkit::cli {

/// Hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

/// Collects the resolved configuration and every file a subcommand writes,
/// then stores both as run_<command>.json next to the outputs.
class RunRecord {
 public:
  RunRecord(std::string command, std::vector<std::string> argv);

  nlohmann::json& config() { return config_; }
  /// Registers a file that has just been written.
  void artifact(const std::filesystem::path& path);
  /// Where the record goes; defaults to the directory of the first artifact.
  void set_directory(std::filesystem::path dir) { dir_ = std::move(dir); }

  /// Writes the record and returns its path (nullopt when nothing to anchor it).
  std::optional<std::filesystem::path> write() const;

 private:
  std::string command_;
  std::vector<std::string> argv_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json artifacts_ = nlohmann::json::array();
  std::optional<std::filesystem::path> dir_;
  std::optional<std::filesystem::path> first_;
};

}  // namespace spoofkit::cli
