// train, score, eer, fuse, tsne and benchmark subcommands.

#include <cstdio>
#include <memory>
#include <set>

#include "commands.hpp"
#include "spoofkit/embedding.hpp"
#include "spoofkit/error.hpp"
#include "spoofkit/fusion.hpp"
#include "spoofkit/log.hpp"
#include "spoofkit/manifest.hpp"
#include "spoofkit/metrics.hpp"
#include "spoofkit/probe.hpp"
#include "spoofkit/projection.hpp"
#include "spoofkit/rng.hpp"
#include "spoofkit/text.hpp"
#include "spoofkit/workflow.hpp"

namespace spoofkit::cli {
namespace {

namespace fs = std::filesystem;

void finish(const RunRecord& rec) {
  if (auto p = rec.write()) log::info("run record: " + p->string());
}

std::vector<SystemScores> load_systems(const std::vector<std::string>& args, const std::string& flag,
                                       nlohmann::json& cfg) {
  std::vector<SystemScores> out;
  for (const auto& [name, path] : named_paths(args, flag)) {
    out.push_back({name, read_scores(path)});
    cfg[flag.substr(2)][name] = path.string();
  }
  return out;
}

void add_train(CLI::App& app, Context& ctx) {
  struct Opts {
    fs::path store, manifest, out;
    TrainOptions train;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("train", "Fit a logistic-regression probe on pooled embeddings");
  cmd->add_option("--store", o->store, "Pooled SPB1 store")->required()->check(CLI::ExistingFile);
  cmd->add_option("--manifest", o->manifest, "Training trials and labels")->required()->check(CLI::ExistingFile);
  o->train.add_to(cmd);
  cmd->add_option("--out", o->out, "Output SPM1 model")->required();
  cmd->callback([o, &ctx] {
    ctx.begin();
    auto rec = ctx.record("train");
    const TrainConfig cfg = o->train.resolve();
    rec.config() = {{"store", o->store.string()}, {"manifest", o->manifest.string()},
                    {"preset", o->train.preset}, {"train", to_json(cfg)}};
    double loss = 0.0;
    const ProbeModel model = train_probe(read_store(o->store), read_manifest(o->manifest), cfg, &loss);
    write_model(o->out, model);
    rec.artifact(o->out);
    rec.config()["final_loss"] = loss;
    finish(rec);
    std::printf("dim %zu, final regularized loss %s\n", model.weights.size(), text::format_double(loss).c_str());
  });
}

void add_score(CLI::App& app, Context& ctx) {
  struct Opts {
    fs::path model, store, out;
    std::optional<fs::path> manifest;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("score", "Score every record of a pooled store with a probe");
  cmd->add_option("--model", o->model, "SPM1 model")->required()->check(CLI::ExistingFile);
  cmd->add_option("--store", o->store, "Pooled SPB1 store")->required()->check(CLI::ExistingFile);
  cmd->add_option("--manifest", o->manifest, "Score only these trials, in manifest order")->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out, "Output score file")->required();
  cmd->callback([o, &ctx] {
    ctx.begin();
    auto rec = ctx.record("score");
    rec.config() = {{"model", o->model.string()}, {"store", o->store.string()},
                    {"manifest", o->manifest ? nlohmann::json(o->manifest->string()) : nlohmann::json(nullptr)}};
    EmbeddingStore store = read_store(o->store);
    if (o->manifest) store = select(store, read_manifest(*o->manifest));
    const Scores s = score(read_model(o->model), store);
    write_scores(o->out, s);
    rec.artifact(o->out);
    finish(rec);
    std::printf("%zu trials scored\n", s.size());
  });
}

void add_eer(CLI::App& app, Context& ctx) {
  struct Opts {
    fs::path scores, manifest;
    std::optional<fs::path> out;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("eer", "Equal error rate of a score file against manifest labels");
  cmd->add_option("--scores", o->scores, "Score file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--manifest", o->manifest, "Labels")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out, "Also write the result as key = value lines");
  cmd->callback([o, &ctx] {
    ctx.begin();
    auto rec = ctx.record("eer");
    rec.config() = {{"scores", o->scores.string()}, {"manifest", o->manifest.string()}};
    const ScoreSet set = attach_labels(read_scores(o->scores), read_manifest(o->manifest));
    const double e = eer(set);
    std::printf("EER %s%% (%zu bonafide, %zu spoof)\n", format_percent(e).c_str(), set.count(Label::bonafide),
                set.count(Label::spoof));
    if (o->out) {
      text::write_file(*o->out, "eer = " + text::format_double(e) + "\neer_percent = " + format_percent(e) +
                                    "\nbonafide = " + std::to_string(set.count(Label::bonafide)) +
                                    "\nspoof = " + std::to_string(set.count(Label::spoof)) + "\n");
      rec.artifact(*o->out);
    }
    finish(rec);
  });
}

void add_fuse(CLI::App& app, Context& ctx) {
  auto* fuse = app.add_subcommand("fuse", "Late fusion of several systems' probabilities");
  fuse->require_subcommand(1);
  {
    struct Opts {
      std::vector<std::string> systems;
      fs::path manifest, out;
      bool logit = false;
      TrainOptions train;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = fuse->add_subcommand("train", "Learn fusion weights");
    cmd->add_option("--system", o->systems, "System score file, e.g. wavlm=dev_scores.tsv")->required();
    cmd->add_option("--manifest", o->manifest, "Labels of the fusion training trials")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_flag("--logit", o->logit, "Fuse logits instead of probabilities");
    o->train.add_to(cmd);
    cmd->add_option("--out", o->out, "Output fusion model")->required();
    cmd->callback([o, &ctx] {
      ctx.begin();
      auto rec = ctx.record("fuse-train");
      const TrainConfig cfg = o->train.resolve();
      auto systems = load_systems(o->systems, "--system", rec.config());
      rec.config().update({{"manifest", o->manifest.string()}, {"logit_inputs", o->logit}, {"train", to_json(cfg)}});
      const Manifest m = read_manifest(o->manifest);
      const AlignedScores aligned = align(systems);
      const FusionModel model = train_fusion(aligned, labels_for(aligned.trial_ids, m), cfg, o->logit);
      write_fusion(o->out, model);
      rec.artifact(o->out);
      finish(rec);
      std::fputs(serialize_fusion(model).c_str(), stdout);
    });
  }
  {
    struct Opts {
      fs::path model, out;
      std::vector<std::string> systems;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = fuse->add_subcommand("apply", "Fuse score files with a trained model");
    cmd->add_option("--model", o->model, "Fusion model")->required()->check(CLI::ExistingFile);
    cmd->add_option("--system", o->systems, "System score file, e.g. wavlm=eval_scores.tsv")->required();
    cmd->add_option("--out", o->out, "Fused score file")->required();
    cmd->callback([o, &ctx] {
      ctx.begin();
      auto rec = ctx.record("fuse-apply");
      rec.config()["model"] = o->model.string();
      auto systems = load_systems(o->systems, "--system", rec.config());
      const Scores fused = apply_fusion(read_fusion(o->model), systems);
      write_scores(o->out, fused);
      rec.artifact(o->out);
      finish(rec);
      std::printf("%zu trials fused\n", fused.size());
    });
  }
  {
    struct Opts {
      std::vector<std::string> train_systems, eval_systems;
      fs::path train_manifest, eval_manifest, out;
      bool all_subsets = false, logit = false;
      TrainOptions train;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = fuse->add_subcommand("ablate", "EER of the anchored fusion subsets");
    cmd->add_option("--train-system", o->train_systems, "Training scores per system, NAME=PATH")->required();
    cmd->add_option("--eval-system", o->eval_systems, "Evaluation scores per system, same order")->required();
    cmd->add_option("--train-manifest", o->train_manifest, "Fusion training labels")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--eval-manifest", o->eval_manifest, "Evaluation labels")->required()->check(CLI::ExistingFile);
    cmd->add_flag("--all-subsets", o->all_subsets, "Append every remaining non-empty subset");
    cmd->add_flag("--logit", o->logit, "Fuse logits instead of probabilities");
    o->train.add_to(cmd);
    cmd->add_option("--out", o->out, "Output TSV table")->required();
    cmd->callback([o, &ctx] {
      ctx.begin();
      auto rec = ctx.record("fuse-ablate");
      const TrainConfig cfg = o->train.resolve();
      auto train = load_systems(o->train_systems, "--train-system", rec.config());
      auto eval = load_systems(o->eval_systems, "--eval-system", rec.config());
      rec.config().update({{"train_manifest", o->train_manifest.string()},
                           {"eval_manifest", o->eval_manifest.string()},
                           {"all_subsets", o->all_subsets},
                           {"logit_inputs", o->logit},
                           {"train", to_json(cfg)}});
      const auto rows = ablation_grid(train, read_manifest(o->train_manifest), eval, read_manifest(o->eval_manifest),
                                      cfg, o->all_subsets, o->logit);
      std::vector<std::string> ids;
      for (const auto& s : train) ids.push_back(s.system_id);
      text::write_file(o->out, format_ablation_tsv(rows, ids));
      rec.artifact(o->out);
      finish(rec);
      std::fputs(format_ablation_table(rows, ids).c_str(), stdout);
    });
  }
}

void add_tsne(CLI::App& app, Context& ctx) {
  struct Opts {
    fs::path store, out;
    std::vector<std::string> manifests;
    std::optional<std::size_t> sample;
    std::optional<fs::path> svg;
    std::string title;
    TsneConfig tsne;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("tsne", "Exact 2-D t-SNE of pooled embeddings");
  cmd->add_option("--store", o->store, "Pooled SPB1 store")->required()->check(CLI::ExistingFile);
  cmd->add_option("--manifest", o->manifests,
                  "NAME=PATH; points are grouped as NAME/label (default: every record, one group)");
  cmd->add_option("--sample", o->sample, "Random subset size");
  cmd->add_option("--perplexity", o->tsne.perplexity, "Target perplexity")->capture_default_str();
  cmd->add_option("--iterations", o->tsne.iterations, "Gradient steps")->capture_default_str();
  cmd->add_option("--lr", o->tsne.learning_rate, "Learning rate")->capture_default_str();
  cmd->add_option("--exaggeration", o->tsne.early_exaggeration, "Early exaggeration factor")->capture_default_str();
  cmd->add_option("--exaggeration-iterations", o->tsne.exaggeration_iterations, "Exaggerated steps")
      ->capture_default_str();
  cmd->add_option("--seed", o->seed, "Seed; subset uses derive_seed(seed, \"subsample\"), layout "
                                     "derive_seed(seed, \"tsne\")")
      ->capture_default_str();
  cmd->add_option("--out", o->out, "Output coordinates TSV")->required();
  cmd->add_option("--svg", o->svg, "Also write a scatter plot");
  cmd->add_option("--title", o->title, "Plot title");
  cmd->callback([o, &ctx] {
    ctx.begin();
    auto rec = ctx.record("tsne");
    const EmbeddingStore store = read_store(o->store);
    std::vector<std::string> ids, groups, order;
    if (o->manifests.empty()) {
      for (const auto& r : store.records()) ids.push_back(r.trial_id), groups.push_back("all");
      order.push_back("all");
    } else {
      std::set<std::string> seen;
      for (const auto& [name, path] : named_paths(o->manifests, "--manifest")) {
        rec.config()["manifests"][name] = path.string();
        order.push_back(name + "/bonafide");
        order.push_back(name + "/spoof");
        for (const auto& e : read_manifest(path)) {
          if (!seen.insert(e.trial_id).second) {
            throw Error(Errc::duplicate_id, "trial '" + e.trial_id + "' appears in more than one manifest");
          }
          ids.push_back(e.trial_id);
          groups.push_back(name + "/" + std::string(to_string(e.label)));
        }
      }
    }
    if (o->sample && *o->sample < ids.size()) {
      Rng rng(derive_seed(o->seed, "subsample"));
      std::vector<std::string> sid, sgroup;
      for (std::size_t i : rng.sample_indices(ids.size(), *o->sample)) {
        sid.push_back(ids[i]);
        sgroup.push_back(groups[i]);
      }
      ids = std::move(sid);
      groups = std::move(sgroup);
    }
    EmbeddingStore subset(store.dim());
    for (const auto& id : ids) {
      const auto* r = store.find(id);
      if (!r) throw Error(Errc::missing_trial, "trial '" + id + "' absent from store");
      subset.add(*r);
    }
    TsneConfig cfg = o->tsne;
    cfg.seed = derive_seed(o->seed, "tsne");
    rec.config().update({{"store", o->store.string()},
                         {"points", ids.size()},
                         {"sample", o->sample ? nlohmann::json(*o->sample) : nlohmann::json(nullptr)},
                         {"perplexity", cfg.perplexity},
                         {"iterations", cfg.iterations},
                         {"learning_rate", cfg.learning_rate},
                         {"early_exaggeration", cfg.early_exaggeration},
                         {"exaggeration_iterations", cfg.exaggeration_iterations},
                         {"momentum", {cfg.initial_momentum, cfg.final_momentum}},
                         {"momentum_switch_iteration", cfg.momentum_switch_iteration},
                         {"seed", o->seed},
                         {"layout_seed", cfg.seed}});
    const TsneResult r = tsne(subset, cfg);
    text::write_file(o->out, serialize_coordinates(ids, r.coordinates));
    rec.artifact(o->out);
    if (o->svg) {
      text::write_file(*o->svg, render_svg(r.coordinates, groups, order, o->title));
      rec.artifact(*o->svg);
    }
    rec.config()["final_kl"] = r.kl_history.back().second;
    finish(rec);
    std::printf("%zu points, final KL %s\n", ids.size(), text::format_double(r.kl_history.back().second).c_str());
  });
}

void add_benchmark(CLI::App& app, Context& ctx) {
  struct Opts {
    fs::path train, dev, out;
    std::vector<std::string> stores;
    std::optional<fs::path> scores_dir;
    TrainOptions train_opts;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("benchmark", "Linear-probe EER of several embedding stores");
  cmd->add_option("--train", o->train, "Training manifest")->required()->check(CLI::ExistingFile);
  cmd->add_option("--dev", o->dev, "Evaluation manifest")->required()->check(CLI::ExistingFile);
  cmd->add_option("--store", o->stores, "Pooled store per system, NAME=PATH")->required();
  cmd->add_option("--scores-dir", o->scores_dir, "Write <system>.scores.tsv dev scores here");
  o->train_opts.add_to(cmd);
  cmd->add_option("--out", o->out, "Output TSV report")->required();
  cmd->callback([o, &ctx] {
    ctx.begin();
    auto rec = ctx.record("benchmark");
    const TrainConfig cfg = o->train_opts.resolve();
    std::vector<NamedStore> stores;
    for (const auto& [name, path] : named_paths(o->stores, "--store")) {
      stores.push_back({name, read_store(path)});
      rec.config()["stores"][name] = path.string();
    }
    rec.config().update({{"train", o->train.string()}, {"dev", o->dev.string()},
                         {"preset", o->train_opts.preset}, {"train_config", to_json(cfg)}});
    const auto rows = run_benchmark(read_manifest(o->train), read_manifest(o->dev), stores, cfg);
    text::write_file(o->out, format_benchmark_tsv(rows));
    rec.artifact(o->out);
    if (o->scores_dir) {
      for (const auto& r : rows) {
        const auto path = *o->scores_dir / (r.system + ".scores.tsv");
        write_scores(path, r.dev_scores);
        rec.artifact(path);
      }
    }
    finish(rec);
    std::fputs(format_benchmark_table(rows).c_str(), stdout);
  });
}

}  // namespace

void register_model_commands(CLI::App& app, Context& ctx) {
  add_train(app, ctx);
  add_score(app, ctx);
  add_eer(app, ctx);
  add_fuse(app, ctx);
  add_tsne(app, ctx);
  add_benchmark(app, ctx);
}

}  // namespace spoofkit::cli
