#include "spoofkit/workflow.hpp"

#include <algorithm>
#include <cstdio>

#include "spoofkit/error.hpp"
#include "spoofkit/log.hpp"
#include "spoofkit/parallel.hpp"
#include "spoofkit/rng.hpp"
#include "spoofkit/text.hpp"

namespace spoofkit {

EmbeddingStore select(const EmbeddingStore& store, const Manifest& manifest) {
  EmbeddingStore out(store.dim());
  for (const auto& e : manifest) {
    const auto* rec = store.find(e.trial_id);
    if (!rec) throw Error(Errc::missing_trial, "trial '" + e.trial_id + "' absent from store");
    out.add(*rec);
  }
  return out;
}

std::vector<BenchmarkRow> run_benchmark(const Manifest& train, const Manifest& dev,
                                        std::span<const NamedStore> systems, const TrainConfig& config) {
  config.validate();
  if (systems.empty()) throw Error(Errc::invalid_argument, "no systems to benchmark");
  for (const auto& s : systems) {
    if (!s.store.pooled()) throw Error(Errc::invalid_argument, "system '" + s.name + "': store is not pooled");
    for (const Manifest* m : {&train, &dev}) {
      std::size_t missing = 0;
      for (const auto& e : *m) missing += s.store.find(e.trial_id) == nullptr;
      if (missing) {
        throw Error(Errc::missing_trial, "system '" + s.name + "': " + std::to_string(missing) +
                                             " trials of the " + (m == &train ? "train" : "dev") +
                                             " manifest are absent from its store");
      }
    }
  }

  std::vector<BenchmarkRow> rows;
  for (const auto& s : systems) {
    log::info("benchmark: training probe for '" + s.name + "'");
    ProbeModel model = train_probe(s.store, train, config);
    Scores dev_scores = score(model, select(s.store, dev));
    BenchmarkRow row{s.name, s.store.dim(), eer(attach_labels(dev_scores, dev)), std::move(dev_scores)};
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.eer > b.eer; });
  return rows;
}

std::string format_benchmark_tsv(const std::vector<BenchmarkRow>& rows) {
  std::string out = "rank\tsystem\tfeat_dim\teer_percent\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += std::to_string(i + 1) + "\t" + rows[i].system + "\t" + std::to_string(rows[i].dim) + "\t" +
           format_percent(rows[i].eer) + "\n";
  }
  return out;
}

std::string format_benchmark_table(const std::vector<BenchmarkRow>& rows) {
  std::size_t w = 6;
  for (const auto& r : rows) w = std::max(w, r.system.size());
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%4s  %-*s  %8s  %7s\n", "#", static_cast<int>(w), "System", "feat dim", "EER[%]");
  out += buf;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%4zu  %-*s  %8u  %7s\n", i + 1, static_cast<int>(w), rows[i].system.c_str(),
                  rows[i].dim, format_percent(rows[i].eer).c_str());
    out += buf;
  }
  return out;
}

Manifest render_augmentations(const Manifest& tagged, const std::filesystem::path& audio_root,
                              const AugmentPolicy& policy) {
  std::vector<std::size_t> work;
  for (std::size_t i = 0; i < tagged.size(); ++i) {
    if (tagged[i].augmentation != Augmentation::none) work.push_back(i);
  }
  std::optional<AudioBuffer> user_ir;
  if (policy.ir_path) user_ir = read_wav(*policy.ir_path);

  Manifest out = tagged;
  parallel_for(work.size(), [&](std::size_t begin, std::size_t end) {
    std::optional<AudioBuffer> bundled_ir;
    for (std::size_t w = begin; w < end; ++w) {
      ManifestEntry& e = out[work[w]];
      const AudioBuffer audio = read_wav(audio_root / e.audio_path);
      AudioBuffer result;
      if (e.augmentation == Augmentation::noise) {
        result = add_white_noise(audio, policy.snr_db, derive_seed(policy.seed, "noise/" + e.trial_id));
      } else {
        const AudioBuffer* ir = user_ir ? &*user_ir : nullptr;
        if (!ir) {
          if (!bundled_ir || bundled_ir->sample_rate != audio.sample_rate) {
            bundled_ir = synthetic_impulse_response(audio.sample_rate);
          }
          ir = &*bundled_ir;
        }
        result = reverberate(audio, *ir);
      }
      e.audio_path = augmented_path(e.audio_path, e.augmentation);
      write_wav(audio_root / e.audio_path, result);
    }
  });
  return out;
}

namespace {

template <typename F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage '") + name + "': " + e.what());
  }
}

}  // namespace

PipelineResult run_pipeline(const PipelineOptions& options) {
  namespace fs = std::filesystem;
  fs::create_directories(options.out_dir);
  const fs::path marker = options.out_dir / ".partial";
  text::write_file(marker, "");

  MixRecipe recipe = options.recipe;
  AugmentPolicy policy = options.policy;
  if (options.seed) {
    recipe.seed = derive_seed(*options.seed, "mix");
    policy.seed = derive_seed(*options.seed, "augment");
  }

  Manifest mixed = stage("mix", [&] { return mix(recipe, options.pools); });
  Manifest tagged = stage("policy", [&] { return apply_policy(mixed, policy); });
  if (options.audio_root) {
    tagged = stage("augment", [&] { return render_augmentations(tagged, *options.audio_root, policy); });
  }
  PipelineResult result;
  result.manifest_path = options.out_dir / "manifest.tsv";
  stage("write", [&] {
    write_manifest(result.manifest_path, tagged);
    return 0;
  });
  result.manifest = std::move(tagged);
  fs::remove(marker);
  return result;
}

}  // namespace spoofkit
