#include <doctest.h>

#include <filesystem>

#include "spoofkit/error.hpp"
#include "spoofkit/synthetic.hpp"
#include "spoofkit/text.hpp"
#include "spoofkit/wav.hpp"
#include "spoofkit/workflow.hpp"
#include "support.hpp"

using namespace spoofkit;
using testing::error_code_of;
namespace fs = std::filesystem;

namespace {

struct Split {
  Manifest train, dev, all;
};

Split make_split() {
  Split s;
  s.train = synthetic::pool(Source::ASV5, 100, 4, 50, "tr");
  s.dev = synthetic::pool(Source::ASV5, 100, 4, 50, "dv");
  s.all = s.train;
  s.all.insert(s.all.end(), s.dev.begin(), s.dev.end());
  return s;
}

std::map<Source, Manifest> small_pools() {
  return {{Source::ASV5, synthetic::pool(Source::ASV5, 20, 3, 20, "asv5")},
          {Source::ITW, synthetic::pool(Source::ITW, 10, 1, 10, "itw")}};
}

MixRecipe small_recipe() {
  MixRecipe r;
  r.counts = {{Source::ASV5, 36}, {Source::ITW, 6}};
  r.class_ratio = 8.0;
  r.seed = 3;
  return r;
}

}  // namespace

TEST_CASE("benchmark ranks systems worst first") {
  auto s = make_split();
  std::vector<NamedStore> systems{{"weak", synthetic::class_store(s.all, 8, 0.2, 1)},
                                  {"strong", synthetic::class_store(s.all, 8, 2.0, 2)}};
  auto rows = run_benchmark(s.train, s.dev, systems, *preset_config("probe"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].system == "weak");
  CHECK(rows[1].system == "strong");
  CHECK(rows[0].eer > rows[1].eer);
  CHECK(rows[1].dev_scores.size() == s.dev.size());
  CHECK(rows[1].dim == 8);

  auto again = run_benchmark(s.train, s.dev, systems, *preset_config("probe"));
  CHECK(again[0].eer == rows[0].eer);
  CHECK(again[1].dev_scores == rows[1].dev_scores);

  auto tsv = format_benchmark_tsv(rows);
  CHECK(tsv.rfind("rank\tsystem\tfeat_dim\teer_percent\n1\tweak\t8\t", 0) == 0);
  auto table = format_benchmark_table(rows);
  CHECK(table.find("strong") != std::string::npos);
}

TEST_CASE("benchmark validates every store before training") {
  auto s = make_split();
  auto partial = synthetic::class_store(s.train, 4, 1.0, 5);  // no dev trials
  std::vector<NamedStore> systems{{"ok", synthetic::class_store(s.all, 4, 1.0, 6)}, {"partial", partial}};
  std::string msg;
  CHECK(error_code_of([&] { run_benchmark(s.train, s.dev, systems, TrainConfig{}); }, &msg) == Errc::missing_trial);
  CHECK(msg.find("partial") != std::string::npos);
  CHECK(msg.find("dev") != std::string::npos);

  std::vector<NamedStore> framewise{{"fw", synthetic::class_store(s.all, 4, 1.0, 6, 3)}};
  CHECK(error_code_of([&] { run_benchmark(s.train, s.dev, framewise, TrainConfig{}); }) == Errc::invalid_argument);
  std::vector<NamedStore> none;
  CHECK(error_code_of([&] { run_benchmark(s.train, s.dev, none, TrainConfig{}); }) == Errc::invalid_argument);
}

TEST_CASE("select keeps manifest order") {
  auto m = synthetic::pool(Source::ASV5, 3, 1, 3, "sel");
  auto store = synthetic::class_store(m, 2, 1.0, 1);
  Manifest picked{m[4], m[0]};
  auto sub = select(store, picked);
  REQUIRE(sub.size() == 2);
  CHECK(sub[0].trial_id == m[4].trial_id);
  CHECK(sub[1].trial_id == m[0].trial_id);
  Manifest ghost{m[0]};
  ghost[0].trial_id = "ghost";
  CHECK(error_code_of([&] { select(store, ghost); }) == Errc::missing_trial);
}

TEST_CASE("pipeline writes a manifest and is reproducible") {
  testing::TempDir dir("pipe");
  PipelineOptions opt;
  opt.recipe = small_recipe();
  opt.pools = small_pools();
  opt.seed = 99;
  opt.out_dir = dir / "run1";
  auto r1 = run_pipeline(opt);
  CHECK(r1.manifest.size() == 42);
  CHECK(fs::exists(r1.manifest_path));
  CHECK_FALSE(fs::exists(opt.out_dir / ".partial"));
  CHECK(read_manifest(r1.manifest_path) == r1.manifest);
  std::size_t augmented = 0;
  for (const auto& e : r1.manifest) {
    if (e.augmentation != Augmentation::none) {
      CHECK(e.label == Label::bonafide);
      ++augmented;
    }
  }
  CHECK(augmented > 0);

  opt.out_dir = dir / "run2";
  auto r2 = run_pipeline(opt);
  CHECK(text::read_file(r1.manifest_path) == text::read_file(r2.manifest_path));

  opt.seed = 100;
  opt.out_dir = dir / "run3";
  CHECK_FALSE(run_pipeline(opt).manifest == r1.manifest);
}

TEST_CASE("pipeline failure names the stage and leaves the marker") {
  testing::TempDir dir("pipefail");
  PipelineOptions opt;
  opt.recipe = small_recipe();
  opt.recipe.counts[Source::ITW] = 500;
  opt.pools = small_pools();
  opt.out_dir = dir / "out";
  std::string msg;
  CHECK(error_code_of([&] { run_pipeline(opt); }, &msg) == Errc::insufficient_data);
  CHECK(msg.find("stage 'mix'") != std::string::npos);
  CHECK(fs::exists(opt.out_dir / ".partial"));
  CHECK_FALSE(fs::exists(opt.out_dir / "manifest.tsv"));
}

TEST_CASE("pipeline renders augmented audio") {
  testing::TempDir dir("pipeaudio");
  PipelineOptions opt;
  opt.recipe = small_recipe();
  opt.pools = small_pools();
  opt.out_dir = dir / "out";
  opt.audio_root = dir / "audio";
  for (const auto& [src, pool] : opt.pools)
    for (const auto& e : pool) {
      fs::create_directories((*opt.audio_root / e.audio_path).parent_path());
      write_wav(*opt.audio_root / e.audio_path, synthetic::tone(440, 0.05, 16000));
    }
  auto r = run_pipeline(opt);
  std::size_t rendered = 0;
  for (const auto& e : r.manifest) {
    CHECK(fs::exists(*opt.audio_root / e.audio_path));
    if (e.augmentation == Augmentation::none) continue;
    ++rendered;
    CHECK(e.audio_path.find(std::string(".") + std::string(to_string(e.augmentation)) + ".wav") != std::string::npos);
    auto audio = read_wav(*opt.audio_root / e.audio_path);
    CHECK(audio.samples.size() == 800);
  }
  CHECK(rendered > 0);

  // Missing source audio fails in the augment stage.
  fs::remove_all(*opt.audio_root);
  opt.out_dir = dir / "out2";
  std::string msg;
  CHECK_THROWS(run_pipeline(opt));
  try {
    run_pipeline(opt);
  } catch (const Error& e) {
    msg = e.what();
  }
  CHECK(msg.find("stage 'augment'") != std::string::npos);
}
