#include "spoofkit/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "spoofkit/error.hpp"
#include "spoofkit/text.hpp"

namespace spoofkit {
namespace {

std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
std::uint16_t le16(const unsigned char* p) { return std::uint16_t(p[0] | p[1] << 8); }

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

AudioBuffer decode_wav(std::string_view bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw Error(Errc::bad_magic, "not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  AudioBuffer audio;
  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const std::uint32_t size = le32(p + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > n) throw Error(Errc::truncated, "WAV chunk runs past end of file");
    if (std::memcmp(p + pos, "fmt ", 4) == 0) {
      if (size < 16) throw Error(Errc::parse, "WAV fmt chunk too short");
      const std::uint16_t format = le16(p + body);
      const std::uint16_t channels = le16(p + body + 2);
      audio.sample_rate = le32(p + body + 4);
      const std::uint16_t bits = le16(p + body + 14);
      if (format != 1 || bits != 16) throw Error(Errc::parse, "only 16-bit PCM WAV is supported");
      if (channels != 1) throw Error(Errc::parse, "only mono WAV is supported");
      if (audio.sample_rate == 0) throw Error(Errc::parse, "WAV sample rate is zero");
      have_fmt = true;
    } else if (std::memcmp(p + pos, "data", 4) == 0) {
      if (!have_fmt) throw Error(Errc::parse, "WAV data chunk precedes fmt chunk");
      const std::size_t count = size / 2;
      audio.samples.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        auto s = static_cast<std::int16_t>(le16(p + body + 2 * i));
        audio.samples[i] = static_cast<double>(s) / 32768.0;
      }
      return audio;
    }
    pos = body + size + (size & 1);
  }
  throw Error(Errc::truncated, "WAV file has no data chunk");
}

std::string encode_wav(const AudioBuffer& audio) {
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, audio.sample_rate);
  put32(out, audio.sample_rate * 2);
  put16(out, 2);
  put16(out, 16);
  out += "data";
  put32(out, data_bytes);
  for (double v : audio.samples) {
    const double scaled = std::nearbyint(std::clamp(v, -1.0, 1.0) * 32768.0);
    const auto s = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put16(out, static_cast<std::uint16_t>(s));
  }
  return out;
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  try {
    return decode_wav(text::read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
  text::write_file(path, encode_wav(audio));
}

}  // namespace spoofkit
