#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "spoofkit/error.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("spoofkit_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Runs f and returns the Errc of the spoofkit::Error it throws; fails the
/// check if nothing (or something else) is thrown.
template <typename F>
spoofkit::Errc error_code_of(F&& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const spoofkit::Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  throw std::runtime_error("expected spoofkit::Error was not thrown");
}

}  // namespace testing
