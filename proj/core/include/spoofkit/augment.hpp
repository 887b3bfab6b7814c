#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "spoofkit/manifest.hpp"
#include "spoofkit/wav.hpp"

namespace spoofkit {

struct AugmentPolicy {
  double snr_db = 25.0;
  double bonafide_fraction = 0.5;
  /// Impulse response for reverberation; the bundled synthetic IR when unset.
  std::optional<std::filesystem::path> ir_path;
  std::uint64_t seed = 0;
};

/// Adds zero-mean Gaussian noise scaled so that the realized noise power is
/// exactly P_signal / 10^(snr_db/10), with power taken over the whole buffer.
AudioBuffer add_white_noise(const AudioBuffer& audio, double snr_db, std::uint64_t seed);

/// Full linear convolution of `signal` with `ir`, truncated to signal length.
std::vector<double> convolve_truncated(std::span<const double> signal, std::span<const double> ir);

/// convolve_truncated followed by rescaling to the input's peak amplitude.
AudioBuffer reverberate(const AudioBuffer& audio, const AudioBuffer& ir);

/// Exponentially decaying Gaussian burst, 0.3 s long, unit peak.
AudioBuffer synthetic_impulse_response(std::uint32_t sample_rate, std::uint64_t seed = 0x5eed);

/// Tags round(fraction * #bonafide) randomly chosen bonafide entries with one
/// of {noise, reverb} (fair coin each). Spoof entries are never modified.
Manifest apply_policy(const Manifest& manifest, const AugmentPolicy& policy);

/// "dir/a.wav" -> "dir/a.noise.wav".
std::string augmented_path(const std::string& audio_path, Augmentation kind);

/// Mean of squared samples.
double signal_power(std::span<const double> samples);

}  // namespace spoofkit
