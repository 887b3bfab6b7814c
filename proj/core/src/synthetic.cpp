#include "spoofkit/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "spoofkit/error.hpp"
#include "spoofkit/probe.hpp"
#include "spoofkit/rng.hpp"

namespace spoofkit::synthetic {

Manifest pool(Source source, std::size_t bonafide, std::size_t attacks, std::size_t per_attack,
              const std::string& prefix) {
  Manifest out;
  out.reserve(bonafide + attacks * per_attack);
  std::size_t serial = 0;
  auto add = [&](Label label, std::string attack) {
    char id[32];
    std::snprintf(id, sizeof(id), "_%07zu", serial++);
    ManifestEntry e;
    e.trial_id = prefix + id;
    e.audio_path = prefix + "/" + e.trial_id + ".wav";
    e.label = label;
    e.attack_id = std::move(attack);
    e.source = source;
    out.push_back(std::move(e));
  };
  for (std::size_t i = 0; i < bonafide; ++i) add(Label::bonafide, "-");
  for (std::size_t a = 0; a < attacks; ++a) {
    char name[32];
    std::snprintf(name, sizeof(name), "A%02zu", a + 1);
    for (std::size_t i = 0; i < per_attack; ++i) add(Label::spoof, name);
  }
  return out;
}

EmbeddingStore class_store(const Manifest& manifest, std::uint32_t dim, double gap_sigma,
                           std::uint64_t seed, std::uint32_t frames) {
  if (dim == 0 || frames == 0) throw Error(Errc::invalid_argument, "dim and frames must be positive");
  EmbeddingStore store(dim);
  Rng rng(seed);
  const double frame_scale = std::sqrt(static_cast<double>(frames));
  for (const auto& e : manifest) {
    const double shift = e.label == Label::bonafide ? gap_sigma / 2.0 : -gap_sigma / 2.0;
    EmbeddingRecord r{e.trial_id, frames, dim, std::vector<float>(std::size_t(frames) * dim)};
    // Frame noise scaled so that the frame mean has unit variance.
    for (auto& v : r.data) v = static_cast<float>(shift + frame_scale * rng.normal());
    store.add(std::move(r));
  }
  return store;
}

double dprime_for_eer(double eer) {
  if (!(eer > 0.0 && eer < 0.5)) throw Error(Errc::invalid_argument, "eer must lie in (0, 0.5)");
  // Phi(-d/2) = eer  <=>  0.5 * erfc(d / (2 sqrt 2)) = eer; erfc is monotone.
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(mid / (2.0 * std::numbers::sqrt2)) > eer) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

Scores detector_scores(const Manifest& manifest, double dprime, std::uint64_t seed) {
  Rng rng(seed);
  Scores out;
  out.reserve(manifest.size());
  for (const auto& e : manifest) {
    const double mean = e.label == Label::bonafide ? dprime / 2.0 : -dprime / 2.0;
    out.push_back({e.trial_id, sigmoid(mean + rng.normal())});
  }
  return out;
}

AudioBuffer tone(double hz, double seconds, std::uint32_t sample_rate, double amplitude) {
  AudioBuffer a;
  a.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(seconds * sample_rate));
  a.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / sample_rate);
  }
  return a;
}

}  // namespace spoofkit::synthetic
