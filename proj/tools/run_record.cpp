#include "run_record.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "spoofkit/error.hpp"
#include "spoofkit/text.hpp"

namespace spoofkit::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::io, "SHA-256 initialisation failed");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 15];
  }
  return hex;
}

RunRecord::RunRecord(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)), argv_(std::move(argv)) {}

void RunRecord::artifact(const std::filesystem::path& path) {
  if (!first_) first_ = path;
  artifacts_.push_back({{"path", path.string()},
                        {"bytes", std::filesystem::file_size(path)},
                        {"sha256", sha256_file(path)}});
}

std::optional<std::filesystem::path> RunRecord::write() const {
  std::filesystem::path dir;
  if (dir_) dir = *dir_;
  else if (first_) dir = first_->parent_path();
  else return std::nullopt;
  if (dir.empty()) dir = ".";
  std::filesystem::create_directories(dir);

  nlohmann::json record = {{"tool", "spoofkit"},
                           {"version", SPOOFKIT_VERSION},
                           {"command", command_},
                           {"argv", argv_},
                           {"config", config_},
                           {"artifacts", artifacts_}};
  const auto path = dir / ("run_" + command_ + ".json");
  text::write_file(path, record.dump(2) + "\n");
  return path;
}

}  // namespace spoofkit::cli
