#include "spoofkit/augment.hpp"

#include <algorithm>
#include <cmath>

#include "spoofkit/error.hpp"
#include "spoofkit/rng.hpp"

namespace spoofkit {

double signal_power(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return acc / static_cast<double>(samples.size());
}

AudioBuffer add_white_noise(const AudioBuffer& audio, double snr_db, std::uint64_t seed) {
  if (audio.samples.empty()) throw Error(Errc::invalid_argument, "empty audio buffer");
  if (!std::isfinite(snr_db)) throw Error(Errc::invalid_argument, "snr_db must be finite");
  const double p_signal = signal_power(audio.samples);
  if (p_signal <= 0.0) throw Error(Errc::invalid_argument, "signal power is zero; SNR undefined");

  Rng rng(seed);
  std::vector<double> noise(audio.samples.size());
  for (auto& v : noise) v = rng.normal();
  double mean = 0.0;
  for (double v : noise) mean += v;
  mean /= static_cast<double>(noise.size());
  for (auto& v : noise) v -= mean;
  double p_noise = signal_power(noise);
  if (p_noise <= 0.0) {
    // single-sample buffer: centering removed all energy
    noise.assign(noise.size(), 1.0);
    p_noise = 1.0;
  }
  const double target = p_signal / std::pow(10.0, snr_db / 10.0);
  const double gain = std::sqrt(target / p_noise);

  AudioBuffer out = audio;
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += gain * noise[i];
  return out;
}

std::vector<double> convolve_truncated(std::span<const double> signal, std::span<const double> ir) {
  std::vector<double> out(signal.size(), 0.0);
  for (std::size_t n = 0; n < signal.size(); ++n) {
    const std::size_t kmax = std::min(ir.size(), n + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k < kmax; ++k) acc += ir[k] * signal[n - k];
    out[n] = acc;
  }
  return out;
}

namespace {

double peak(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

AudioBuffer reverberate(const AudioBuffer& audio, const AudioBuffer& ir) {
  if (ir.samples.empty()) throw Error(Errc::invalid_argument, "impulse response is empty");
  if (audio.sample_rate != ir.sample_rate) {
    throw Error(Errc::sample_rate_mismatch, "audio at " + std::to_string(audio.sample_rate) +
                                                " Hz, impulse response at " +
                                                std::to_string(ir.sample_rate) + " Hz");
  }
  AudioBuffer out;
  out.sample_rate = audio.sample_rate;
  out.samples = convolve_truncated(audio.samples, ir.samples);
  const double in_peak = peak(audio.samples);
  const double out_peak = peak(out.samples);
  if (out_peak > 0.0 && in_peak != out_peak) {
    const double scale = in_peak / out_peak;
    for (auto& v : out.samples) v *= scale;
  }
  return out;
}

AudioBuffer synthetic_impulse_response(std::uint32_t sample_rate, std::uint64_t seed) {
  AudioBuffer ir;
  ir.sample_rate = sample_rate;
  const auto length = static_cast<std::size_t>(std::lround(0.3 * sample_rate));
  ir.samples.resize(std::max<std::size_t>(length, 1));
  Rng rng(seed);
  // RT60 of 0.3 s: amplitude falls 60 dB over the burst.
  const double decay = std::log(1000.0) / (0.3 * sample_rate);
  for (std::size_t i = 1; i < ir.samples.size(); ++i) {
    ir.samples[i] = rng.normal() * std::exp(-decay * static_cast<double>(i));
  }
  // Unit direct path; the diffuse tail peaks at half of it.
  const double tail = peak(ir.samples);
  if (tail > 0.0) {
    for (auto& v : ir.samples) v *= 0.5 / tail;
  }
  ir.samples[0] = 1.0;
  return ir;
}

Manifest apply_policy(const Manifest& manifest, const AugmentPolicy& policy) {
  if (!(policy.bonafide_fraction >= 0.0 && policy.bonafide_fraction <= 1.0)) {
    throw Error(Errc::invalid_argument, "bonafide_fraction must lie in [0, 1]");
  }
  std::vector<std::size_t> bona;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (manifest[i].label == Label::bonafide) bona.push_back(i);
  }
  const auto want = static_cast<std::size_t>(
      std::llround(policy.bonafide_fraction * static_cast<double>(bona.size())));

  Manifest out = manifest;
  Rng rng(policy.seed);
  for (std::size_t k : rng.sample_indices(bona.size(), want)) {
    out[bona[k]].augmentation = rng.uniform_index(2) == 0 ? Augmentation::noise : Augmentation::reverb;
  }
  return out;
}

std::string augmented_path(const std::string& audio_path, Augmentation kind) {
  std::string stem = audio_path;
  if (stem.size() >= 4 && stem.compare(stem.size() - 4, 4, ".wav") == 0) stem.resize(stem.size() - 4);
  return stem + "." + std::string(to_string(kind)) + ".wav";
}

}  // namespace spoofkit
