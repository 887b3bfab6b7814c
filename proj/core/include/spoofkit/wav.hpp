#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spoofkit {

/// Mono audio in double precision. Nominal range is [-1, 1]; values outside
/// are clipped only when written as PCM16.
struct AudioBuffer {
  std::vector<double> samples;
  std::uint32_t sample_rate = 16000;
};

/// 16-bit PCM mono RIFF/WAVE. Other encodings are rejected.
AudioBuffer decode_wav(std::string_view bytes);
std::string encode_wav(const AudioBuffer& audio);

AudioBuffer read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);

}  // namespace spoofkit
