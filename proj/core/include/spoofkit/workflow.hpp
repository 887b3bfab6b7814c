#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spoofkit/augment.hpp"
#include "spoofkit/embedding.hpp"
#include "spoofkit/manifest.hpp"
#include "spoofkit/metrics.hpp"
#include "spoofkit/probe.hpp"

namespace spoofkit {

struct NamedStore {
  std::string name;
  EmbeddingStore store;
};

struct BenchmarkRow {
  std::string system;
  std::uint32_t dim = 0;
  double eer = 0.0;
  Scores dev_scores;
};

/// Linear-probe benchmark: for each system, train on the train manifest, score
/// the dev manifest, report dev EER. Inputs are validated for every system
/// before any training starts. Rows are sorted by decreasing EER (worst
/// first), ties kept in input order.
std::vector<BenchmarkRow> run_benchmark(const Manifest& train, const Manifest& dev,
                                        std::span<const NamedStore> systems, const TrainConfig& config);

std::string format_benchmark_tsv(const std::vector<BenchmarkRow>& rows);
std::string format_benchmark_table(const std::vector<BenchmarkRow>& rows);

/// Store restricted to the manifest's trials, in manifest order.
EmbeddingStore select(const EmbeddingStore& store, const Manifest& manifest);

/// Renders the audio for every entry tagged noise/reverb and points its
/// audio_path at the new file (written beside the original). Noise seeds are
/// derive_seed(policy.seed, "noise/<trial_id>").
Manifest render_augmentations(const Manifest& tagged, const std::filesystem::path& audio_root,
                              const AugmentPolicy& policy);

struct PipelineOptions {
  MixRecipe recipe;
  std::map<Source, Manifest> pools;
  AugmentPolicy policy;
  /// When set, overrides recipe.seed and policy.seed with
  /// derive_seed(seed, "mix") and derive_seed(seed, "augment").
  std::optional<std::uint64_t> seed;
  /// Audio is rendered only when set.
  std::optional<std::filesystem::path> audio_root;
  std::filesystem::path out_dir;
};

struct PipelineResult {
  Manifest manifest;
  std::filesystem::path manifest_path;
};

/// mix -> apply_policy -> (render audio) -> write out_dir/manifest.tsv.
/// A `.partial` marker exists in out_dir while the run is in progress and is
/// left behind on failure. Errors name the failing stage.
PipelineResult run_pipeline(const PipelineOptions& options);

}  // namespace spoofkit
