// manifest, augment, pool, pipeline and synth subcommands.

#include <cstdio>
#include <memory>

#include "commands.hpp"
#include "spoofkit/augment.hpp"
#include "spoofkit/embedding.hpp"
#include "spoofkit/error.hpp"
#include "spoofkit/log.hpp"
#include "spoofkit/manifest.hpp"
#include "spoofkit/rng.hpp"
#include "spoofkit/synthetic.hpp"
#include "spoofkit/text.hpp"
#include "spoofkit/workflow.hpp"

namespace spoofkit::cli {
namespace {

namespace fs = std::filesystem;

Source source_arg(const std::string& token) {
  auto s = parse_source(token);
  if (!s) throw Error(Errc::invalid_argument, "unknown source '" + token + "'");
  return *s;
}

std::map<Source, Manifest> load_pools(const std::vector<std::string>& args, nlohmann::json& cfg) {
  std::map<Source, Manifest> pools;
  for (const auto& [name, path] : named_paths(args, "--pool")) {
    pools[source_arg(name)] = read_manifest(path);
    cfg["pools"][name] = path.string();
  }
  return pools;
}

struct RecipeOptions {
  std::optional<std::string> preset;
  std::optional<fs::path> file;
  std::vector<std::string> counts;
  std::optional<double> ratio;

  void add_to(CLI::App* cmd) {
    auto* p = cmd->add_option("--preset", preset, "Built-in recipe")->check(CLI::IsMember(preset_names()));
    auto* f = cmd->add_option("--recipe", file, "Recipe file (key = value lines)")->check(CLI::ExistingFile);
    p->excludes(f);
    cmd->add_option("--count", counts, "Override a source count, e.g. ITW=2000");
    cmd->add_option("--ratio", ratio, "Spoof-per-bonafide ratio for the ASV5 draw");
  }

  MixRecipe resolve() const {
    MixRecipe r;
    if (preset) r = *preset_recipe(*preset);
    else if (file) r = parse_recipe(text::read_file(*file));
    else throw Error(Errc::invalid_argument, "give --preset or --recipe");
    for (const auto& c : counts) {
      const auto eq = c.find('=');
      std::uint64_t n = 0;
      if (eq == std::string::npos || !text::parse_u64(std::string_view(c).substr(eq + 1), n)) {
        throw Error(Errc::invalid_argument, "--count expects SOURCE=N, got '" + c + "'");
      }
      r.counts[source_arg(c.substr(0, eq))] = n;
    }
    if (ratio) r.class_ratio = *ratio;
    return r;
  }
};

nlohmann::json recipe_json(const MixRecipe& r) {
  nlohmann::json j;
  for (const auto& [src, n] : r.counts) j["counts"][std::string(to_string(src))] = n;
  j["ratio"] = r.class_ratio ? nlohmann::json(*r.class_ratio) : nlohmann::json(nullptr);
  j["seed"] = r.seed;
  return j;
}

nlohmann::json policy_json(const AugmentPolicy& p) {
  return {{"snr_db", p.snr_db},
          {"bonafide_fraction", p.bonafide_fraction},
          {"ir", p.ir_path ? nlohmann::json(p.ir_path->string()) : nlohmann::json("bundled")},
          {"seed", p.seed}};
}

struct PolicyOptions {
  double snr_db = 25.0;
  double fraction = 0.5;
  std::optional<fs::path> ir;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--snr", snr_db, "White-noise SNR in dB")->capture_default_str();
    cmd->add_option("--fraction", fraction, "Fraction of bonafide trials to augment")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--ir", ir, "Impulse-response WAV (default: bundled synthetic room)")->check(CLI::ExistingFile);
  }
  AugmentPolicy resolve(std::uint64_t seed) const {
    AugmentPolicy p;
    p.snr_db = snr_db;
    p.bonafide_fraction = fraction;
    p.ir_path = ir;
    p.seed = derive_seed(seed, "augment");
    return p;
  }
};

std::string count_summary(const Manifest& m) {
  std::size_t bona = 0;
  for (const auto& e : m) bona += e.label == Label::bonafide;
  return std::to_string(m.size()) + " trials (" + std::to_string(bona) + " bonafide, " +
         std::to_string(m.size() - bona) + " spoof)";
}

void finish(const RunRecord& rec) {
  if (auto p = rec.write()) log::info("run record: " + p->string());
}

void add_manifest(CLI::App& app, Context& ctx) {
  auto* manifest = app.add_subcommand("manifest", "Sample or mix trial manifests");
  manifest->require_subcommand(1);

  {
    struct Opts {
      fs::path in, out;
      std::size_t total = 0;
      double ratio = 8.0;
      std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = manifest->add_subcommand("sample", "Class- and attack-stratified subset of one manifest");
    cmd->add_option("--in", o->in, "Input manifest")->required()->check(CLI::ExistingFile);
    cmd->add_option("--total", o->total, "Number of trials to draw")->required();
    cmd->add_option("--ratio", o->ratio, "Spoof per bonafide")->capture_default_str();
    cmd->add_option("--seed", o->seed, "Seed; sampling uses derive_seed(seed, \"sample\")")->capture_default_str();
    cmd->add_option("--out", o->out, "Output manifest")->required();
    cmd->callback([o, &ctx] {
      ctx.begin();
      auto rec = ctx.record("manifest-sample");
      rec.config() = {{"in", o->in.string()}, {"total", o->total}, {"ratio", o->ratio},
                      {"seed", o->seed}, {"sample_seed", derive_seed(o->seed, "sample")}};
      const Manifest m = stratified_sample(read_manifest(o->in), o->total, o->ratio, derive_seed(o->seed, "sample"));
      write_manifest(o->out, m);
      rec.artifact(o->out);
      finish(rec);
      std::printf("%s\n", count_summary(m).c_str());
    });
  }
  {
    struct Opts {
      RecipeOptions recipe;
      std::vector<std::string> pools;
      std::optional<std::uint64_t> seed;
      fs::path out;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = manifest->add_subcommand("mix", "Draw a multi-source training set from a recipe");
    o->recipe.add_to(cmd);
    cmd->add_option("--pool", o->pools, "Source pool manifest, e.g. ASV5=pools/asv5.tsv")->required();
    cmd->add_option("--seed", o->seed, "Seed; overrides the recipe seed with derive_seed(seed, \"mix\")");
    cmd->add_option("--out", o->out, "Output manifest")->required();
    cmd->callback([o, &ctx] {
      ctx.begin();
      auto rec = ctx.record("manifest-mix");
      MixRecipe recipe = o->recipe.resolve();
      if (o->seed) recipe.seed = derive_seed(*o->seed, "mix");
      auto pools = load_pools(o->pools, rec.config());
      rec.config()["recipe"] = recipe_json(recipe);
      const Manifest m = mix(recipe, pools);
      write_manifest(o->out, m);
      rec.artifact(o->out);
      finish(rec);
      std::printf("%s\n", count_summary(m).c_str());
    });
  }
}

void add_augment(CLI::App& app, Context& ctx) {
  struct Opts {
    fs::path manifest, out;
    std::optional<fs::path> audio_root;
    PolicyOptions policy;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("augment", "Tag bonafide trials for noise/reverb and render the audio");
  cmd->add_option("--manifest", o->manifest, "Input manifest")->required()->check(CLI::ExistingFile);
  o->policy.add_to(cmd);
  cmd->add_option("--audio-root", o->audio_root, "Directory that audio_path entries are relative to; "
                                                 "without it only the manifest is tagged");
  cmd->add_option("--seed", o->seed, "Seed; the policy uses derive_seed(seed, \"augment\")")->capture_default_str();
  cmd->add_option("--out", o->out, "Output manifest")->required();
  cmd->callback([o, &ctx] {
    ctx.begin();
    auto rec = ctx.record("augment");
    const AugmentPolicy policy = o->policy.resolve(o->seed);
    rec.config() = {{"manifest", o->manifest.string()}, {"policy", policy_json(policy)}, {"seed", o->seed},
                    {"audio_root", o->audio_root ? nlohmann::json(o->audio_root->string()) : nlohmann::json(nullptr)}};
    Manifest tagged = apply_policy(read_manifest(o->manifest), policy);
    if (o->audio_root) {
      tagged = render_augmentations(tagged, *o->audio_root, policy);
      for (const auto& e : tagged)
        if (e.augmentation != Augmentation::none) rec.artifact(*o->audio_root / e.audio_path);
    }
    write_manifest(o->out, tagged);
    rec.artifact(o->out);
    if (!ctx.record_dir) rec.set_directory(o->out.parent_path());
    finish(rec);
    std::size_t noise = 0, reverb = 0;
    for (const auto& e : tagged) {
      noise += e.augmentation == Augmentation::noise;
      reverb += e.augmentation == Augmentation::reverb;
    }
    std::printf("%zu noise, %zu reverb of %zu trials\n", noise, reverb, tagged.size());
  });
}

void add_pool(CLI::App& app, Context& ctx) {
  struct Opts {
    fs::path in, out;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("pool", "Average-pool framewise embeddings over time");
  cmd->add_option("--in", o->in, "Framewise SPB1 store")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out, "Pooled SPB1 store")->required();
  cmd->callback([o, &ctx] {
    ctx.begin();
    auto rec = ctx.record("pool");
    rec.config() = {{"in", o->in.string()}};
    const EmbeddingStore pooled = average_pool(read_store(o->in));
    write_store(o->out, pooled);
    rec.artifact(o->out);
    finish(rec);
    std::printf("%zu records, dim %u\n", pooled.size(), pooled.dim());
  });
}

void add_pipeline(CLI::App& app, Context& ctx) {
  struct Opts {
    RecipeOptions recipe;
    std::vector<std::string> pools;
    PolicyOptions policy;
    std::uint64_t seed = 0;
    std::optional<fs::path> audio_root;
    fs::path out_dir;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("pipeline", "mix -> augment policy -> (render audio) -> manifest");
  o->recipe.add_to(cmd);
  cmd->add_option("--pool", o->pools, "Source pool manifest, e.g. ASV5=pools/asv5.tsv")->required();
  o->policy.add_to(cmd);
  cmd->add_option("--seed", o->seed, "Master seed; stages use derive_seed(seed, \"mix\"|\"augment\")")
      ->capture_default_str();
  cmd->add_option("--audio-root", o->audio_root, "Render augmented audio under this directory");
  cmd->add_option("--out-dir", o->out_dir, "Output directory")->required();
  cmd->callback([o, &ctx] {
    ctx.begin();
    auto rec = ctx.record("pipeline");
    rec.set_directory(ctx.record_dir.value_or(o->out_dir));
    PipelineOptions opt;
    opt.recipe = o->recipe.resolve();
    opt.pools = load_pools(o->pools, rec.config());
    opt.policy = o->policy.resolve(0);
    opt.seed = o->seed;
    opt.audio_root = o->audio_root;
    opt.out_dir = o->out_dir;
    MixRecipe resolved = opt.recipe;
    resolved.seed = derive_seed(o->seed, "mix");
    AugmentPolicy policy = opt.policy;
    policy.seed = derive_seed(o->seed, "augment");
    rec.config()["recipe"] = recipe_json(resolved);
    rec.config()["policy"] = policy_json(policy);
    rec.config()["seed"] = o->seed;
    const PipelineResult r = run_pipeline(opt);
    if (o->audio_root) {
      for (const auto& e : r.manifest)
        if (e.augmentation != Augmentation::none) rec.artifact(*o->audio_root / e.audio_path);
    }
    rec.artifact(r.manifest_path);
    finish(rec);
    std::printf("%s -> %s\n", count_summary(r.manifest).c_str(), r.manifest_path.string().c_str());
  });
}

void add_synth(CLI::App& app, Context& ctx) {
  auto* synth = app.add_subcommand("synth", "Synthetic pools, stores and scores for demos and tests");
  synth->require_subcommand(1);
  {
    struct Opts {
      std::string source = "ASV5", prefix;
      std::size_t bonafide = 0, attacks = 0, per_attack = 0;
      fs::path out;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = synth->add_subcommand("pool", "Manifest with numbered bonafide and per-attack spoof trials");
    cmd->add_option("--source", o->source, "Source corpus tag")->capture_default_str();
    cmd->add_option("--bonafide", o->bonafide, "Bonafide trials")->required();
    cmd->add_option("--attacks", o->attacks, "Number of attacks A01..")->required();
    cmd->add_option("--per-attack", o->per_attack, "Spoof trials per attack")->required();
    cmd->add_option("--prefix", o->prefix, "Trial id prefix")->required();
    cmd->add_option("--out", o->out, "Output manifest")->required();
    cmd->callback([o, &ctx] {
      ctx.begin();
      auto rec = ctx.record("synth-pool");
      rec.config() = {{"source", o->source}, {"bonafide", o->bonafide}, {"attacks", o->attacks},
                      {"per_attack", o->per_attack}, {"prefix", o->prefix}};
      const Manifest m = synthetic::pool(source_arg(o->source), o->bonafide, o->attacks, o->per_attack, o->prefix);
      write_manifest(o->out, m);
      rec.artifact(o->out);
      finish(rec);
      std::printf("%s\n", count_summary(m).c_str());
    });
  }
  {
    struct Opts {
      std::vector<fs::path> manifests;
      std::uint32_t dim = 8, frames = 1;
      double gap = 1.0;
      std::uint64_t seed = 0;
      fs::path out;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = synth->add_subcommand("store", "Gaussian class embeddings with a controlled mean gap");
    cmd->add_option("--manifest", o->manifests, "Manifests whose trials get embeddings")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--dim", o->dim, "Embedding dimension")->capture_default_str();
    cmd->add_option("--gap", o->gap, "Class mean gap in standard deviations per dimension")->capture_default_str();
    cmd->add_option("--frames", o->frames, "Frames per record (1 = pooled)")->capture_default_str();
    cmd->add_option("--seed", o->seed, "Seed")->capture_default_str();
    cmd->add_option("--out", o->out, "Output SPB1 store")->required();
    cmd->callback([o, &ctx] {
      ctx.begin();
      auto rec = ctx.record("synth-store");
      Manifest all;
      for (const auto& p : o->manifests) {
        auto m = read_manifest(p);
        all.insert(all.end(), m.begin(), m.end());
        rec.config()["manifests"].push_back(p.string());
      }
      rec.config().update({{"dim", o->dim}, {"gap_sigma", o->gap}, {"frames", o->frames}, {"seed", o->seed}});
      write_store(o->out, synthetic::class_store(all, o->dim, o->gap, o->seed, o->frames));
      rec.artifact(o->out);
      finish(rec);
    });
  }
  {
    struct Opts {
      fs::path manifest, out;
      std::optional<double> eer;
      double dprime = 0.0;
      std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = synth->add_subcommand("scores", "Detector probabilities with a target population EER");
    cmd->add_option("--manifest", o->manifest, "Trials to score")->required()->check(CLI::ExistingFile);
    cmd->add_option("--eer", o->eer, "Target EER in (0, 0.5); omit for a chance-level detector");
    cmd->add_option("--seed", o->seed, "Seed")->capture_default_str();
    cmd->add_option("--out", o->out, "Output score file")->required();
    cmd->callback([o, &ctx] {
      ctx.begin();
      auto rec = ctx.record("synth-scores");
      const double dprime = o->eer ? synthetic::dprime_for_eer(*o->eer) : 0.0;
      rec.config() = {{"manifest", o->manifest.string()}, {"dprime", dprime}, {"seed", o->seed}};
      write_scores(o->out, synthetic::detector_scores(read_manifest(o->manifest), dprime, o->seed));
      rec.artifact(o->out);
      finish(rec);
    });
  }
}

}  // namespace

void register_data_commands(CLI::App& app, Context& ctx) {
  add_manifest(app, ctx);
  add_augment(app, ctx);
  add_pool(app, ctx);
  add_pipeline(app, ctx);
  add_synth(app, ctx);
}

}  // namespace spoofkit::cli
