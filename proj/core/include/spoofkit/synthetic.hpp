#pragma once

#include <cstdint>
#include <string>

#include "spoofkit/embedding.hpp"
#include "spoofkit/manifest.hpp"
#include "spoofkit/metrics.hpp"
#include "spoofkit/wav.hpp"

namespace spoofkit::synthetic {

/// Pool with `bonafide` genuine trials and `per_attack` spoofs for each of
/// `attacks` attacks named A01, A02, ... Trial ids are "<prefix>_<n>" and audio
/// paths "<prefix>/<trial_id>.wav".
Manifest pool(Source source, std::size_t bonafide, std::size_t attacks, std::size_t per_attack,
              const std::string& prefix);

/// Unit-variance Gaussian features whose class means differ by
/// `gap_sigma` standard deviations in every dimension (bonafide shifted
/// up). `frames` > 1 writes framewise records whose frame mean carries the
/// class signal.
EmbeddingStore class_store(const Manifest& manifest, std::uint32_t dim, double gap_sigma,
                           std::uint64_t seed, std::uint32_t frames = 1);

/// d' separation of two unit Gaussians with the given equal error rate.
double dprime_for_eer(double eer);

/// Probabilities of a detector whose bonafide and spoof logits are unit
/// Gaussians `dprime` apart, i.e. population EER = Phi(-dprime / 2).
Scores detector_scores(const Manifest& manifest, double dprime, std::uint64_t seed);

/// Sine tone at `hz` with peak `amplitude`.
AudioBuffer tone(double hz, double seconds, std::uint32_t sample_rate, double amplitude = 0.5);

}  // namespace spoofkit::synthetic
