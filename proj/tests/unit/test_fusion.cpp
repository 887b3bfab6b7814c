#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spoofkit/error.hpp"
#include "spoofkit/fusion.hpp"
#include "spoofkit/log.hpp"
#include "spoofkit/rng.hpp"
#include "spoofkit/synthetic.hpp"
#include "support.hpp"

using namespace spoofkit;
using testing::error_code_of;

namespace {

Scores random_scores(const Manifest& m, std::uint64_t seed) {
  Rng rng(seed);
  Scores s;
  for (const auto& e : m) s.push_back({e.trial_id, rng.uniform01()});
  return s;
}

Scores perfect_scores(const Manifest& m, std::uint64_t seed) {
  Rng rng(seed);
  Scores s;
  for (const auto& e : m) s.push_back({e.trial_id, (e.label == Label::bonafide ? 0.6 : 0.0) + 0.4 * rng.uniform01()});
  return s;
}

std::vector<std::string> order_of(Scores s) {
  std::stable_sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.score < b.score; });
  std::vector<std::string> ids;
  for (const auto& t : s) ids.push_back(t.trial_id);
  return ids;
}

Scores sorted_by_id(Scores s) {
  std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.trial_id < b.trial_id; });
  return s;
}

struct LogCapture {
  std::vector<std::string> lines;
  LogCapture() {
    log::set_sink([this](log::Level, std::string_view msg) { lines.emplace_back(msg); });
  }
  ~LogCapture() { log::set_sink(nullptr); }
};

}  // namespace

TEST_CASE("apply_fusion examples") {
  std::vector<SystemScores> sys{{"a", {{"t1", 0.8}, {"t2", 0.1}}}, {"b", {{"t1", 0.4}, {"t2", 0.3}}}};
  FusionModel m{{"a", "b"}, {1.0, 0.0}, 0.0, false};
  auto out = apply_fusion(m, sys);
  REQUIRE(out.size() == 2);
  CHECK(out[0].trial_id == "t1");
  CHECK(out[0].score == sigmoid(0.8));
  CHECK(out[1].score == sigmoid(0.1));

  FusionModel zero{{"a", "b"}, {0.0, 0.0}, 0.0, false};
  for (const auto& s : apply_fusion(zero, sys)) CHECK(s.score == 0.5);

  FusionModel hand{{"a", "b"}, {2.0, -1.0}, 0.5, false};
  CHECK(apply_fusion(hand, sys)[0].score == doctest::Approx(0.8455347349164652).epsilon(1e-15));

  FusionModel other{{"a", "c"}, {1.0, 1.0}, 0.0, false};
  CHECK(error_code_of([&] { apply_fusion(other, sys); }) == Errc::invalid_argument);
  std::vector<SystemScores> one{sys[0]};
  CHECK(error_code_of([&] { apply_fusion(m, one); }) == Errc::invalid_argument);
}

TEST_CASE("align: shape, ordering and coverage errors") {
  std::vector<SystemScores> sys{{"a", {{"z", 0.1}, {"x", 0.2}, {"y", 0.3}}},
                                {"b", {{"x", 0.5}, {"y", 0.6}, {"z", 0.7}}}};
  auto al = align(sys);
  CHECK(al.values.rows == 3);
  CHECK(al.values.cols == 2);
  CHECK(al.trial_ids == std::vector<std::string>{"x", "y", "z"});
  CHECK(al.system_ids == std::vector<std::string>{"a", "b"});
  CHECK(al.values(0, 0) == 0.2);
  CHECK(al.values(2, 1) == 0.7);

  auto missing = sys;
  missing[1].scores.pop_back();
  std::string msg;
  CHECK(error_code_of([&] { align(missing); }, &msg) == Errc::missing_trial);
  CHECK(msg.find("z") != std::string::npos);

  auto dup = sys;
  dup[1].system_id = "a";
  CHECK(error_code_of([&] { align(dup); }) == Errc::duplicate_id);
}

TEST_CASE("align on four systems over 27000 trials") {
  auto m = synthetic::pool(Source::ASV5, 3000, 8, 3000, "big");
  REQUIRE(m.size() == 27000);
  std::vector<SystemScores> sys;
  for (int k = 0; k < 4; ++k) sys.push_back({"s" + std::to_string(k), random_scores(m, k)});
  auto al = align(sys);
  CHECK(al.values.rows == 27000);
  CHECK(al.values.cols == 4);
  CHECK(al.system_ids == std::vector<std::string>{"s0", "s1", "s2", "s3"});
}

TEST_CASE("perfect plus random system") {
  auto m = synthetic::pool(Source::ASV5, 100, 4, 50, "pr");
  std::vector<SystemScores> sys{{"perfect", perfect_scores(m, 1)}, {"random", random_scores(m, 2)}};
  auto al = align(sys);
  auto model = train_fusion(al, labels_for(al.trial_ids, m), *preset_config("probe"));
  CHECK(std::abs(model.weights[0]) > std::abs(model.weights[1]));
  CHECK(eer(attach_labels(apply_fusion(model, sys), m)) == 0.0);
}

TEST_CASE("duplicate systems keep the single-system ranking") {
  auto m = synthetic::pool(Source::ASV5, 60, 3, 40, "du");
  auto s = synthetic::detector_scores(m, 1.5, 9);
  std::vector<SystemScores> sys{{"a", s}, {"b", s}};
  auto al = align(sys);
  auto model = train_fusion(al, labels_for(al.trial_ids, m), *preset_config("probe"));
  CHECK(model.weights[0] + model.weights[1] > 0);
  CHECK(order_of(apply_fusion(model, sys)) == order_of(sorted_by_id(s)));
}

TEST_CASE("single-system fusion preserves EER and warns") {
  auto m = synthetic::pool(Source::ASV5, 80, 2, 60, "ss");
  auto s = synthetic::detector_scores(m, 2.0, 4);
  std::vector<SystemScores> sys{{"only", s}};
  LogCapture cap;
  auto al = align(sys);
  auto model = train_fusion(al, labels_for(al.trial_ids, m), *preset_config("probe"));
  CHECK_FALSE(cap.lines.empty());
  CHECK(model.weights[0] > 0);
  CHECK(eer(attach_labels(apply_fusion(model, sys), m)) == eer(attach_labels(s, m)));
}

TEST_CASE("constant column warns but trains") {
  auto m = synthetic::pool(Source::ASV5, 30, 2, 20, "cc");
  Scores flat;
  for (const auto& e : m) flat.push_back({e.trial_id, 0.5});
  std::vector<SystemScores> sys{{"good", perfect_scores(m, 3)}, {"flat", flat}};
  LogCapture cap;
  auto al = align(sys);
  FusionModel model;
  CHECK_NOTHROW(model = train_fusion(al, labels_for(al.trial_ids, m), *preset_config("probe")));
  bool named = false;
  for (const auto& l : cap.lines) named |= l.find("flat") != std::string::npos;
  CHECK(named);
  CHECK(std::isfinite(model.bias));
}

TEST_CASE("fusion single-class labels are an error") {
  auto m = synthetic::pool(Source::ASV5, 5, 1, 5, "sc");
  std::vector<SystemScores> sys{{"a", random_scores(m, 1)}, {"b", random_scores(m, 2)}};
  auto al = align(sys);
  std::vector<double> y(al.trial_ids.size(), 1.0);
  CHECK(error_code_of([&] { train_fusion(al, y, TrainConfig{}); }) == Errc::single_class);
}

TEST_CASE("permuting systems with their weights leaves the output unchanged") {
  auto m = synthetic::pool(Source::ASV5, 20, 2, 10, "pm");
  std::vector<SystemScores> sys{{"a", random_scores(m, 1)}, {"b", random_scores(m, 2)}, {"c", random_scores(m, 3)}};
  FusionModel model{{"a", "b", "c"}, {1.5, -0.5, 0.25}, 0.1, false};
  FusionModel permuted{{"c", "a", "b"}, {0.25, 1.5, -0.5}, 0.1, false};
  std::vector<SystemScores> rev{sys[2], sys[1], sys[0]};
  const auto ref = apply_fusion(model, sys);
  CHECK(apply_fusion(permuted, sys) == ref);
  CHECK(apply_fusion(model, rev) == ref);
  CHECK(apply_fusion(permuted, rev) == ref);
}

TEST_CASE("one-hot weights reproduce that system's ordering") {
  auto m = synthetic::pool(Source::ASV5, 40, 2, 20, "oh");
  std::vector<SystemScores> sys{{"a", random_scores(m, 5)}, {"b", random_scores(m, 6)}};
  FusionModel onehot{{"a", "b"}, {0.0, 3.0}, -1.0, false};
  CHECK(order_of(apply_fusion(onehot, sys)) == order_of(sorted_by_id(sys[1].scores)));
}

TEST_CASE("logit-space fusion option") {
  std::vector<SystemScores> sys{{"a", {{"t", 0.8}}}};
  FusionModel m{{"a"}, {1.0}, 0.0, true};
  CHECK(apply_fusion(m, sys)[0].score == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("ablation grid shapes") {
  auto train_m = synthetic::pool(Source::ASV5, 80, 4, 40, "tr");
  auto eval_m = synthetic::pool(Source::ASV5, 80, 4, 40, "ev");
  const double dprimes[] = {1.0, 3.0, 2.0, 0.5};
  std::vector<SystemScores> train, eval;
  for (int k = 0; k < 4; ++k) {
    const std::string id = "sys" + std::to_string(k);
    train.push_back({id, synthetic::detector_scores(train_m, dprimes[k], 10 + k)});
    eval.push_back({id, synthetic::detector_scores(eval_m, dprimes[k], 20 + k)});
  }
  const auto cfg = *preset_config("probe");

  std::vector<SystemScores> t1{train[1]}, e1{eval[1]};
  auto one = ablation_grid(t1, train_m, e1, eval_m, cfg);
  REQUIRE(one.size() == 1);
  CHECK(one[0].eer == eer(attach_labels(eval[1].scores, eval_m)));

  auto rows = ablation_grid(train, train_m, eval, eval_m, cfg);
  REQUIRE(rows.size() == 6);
  const std::string best = rows[0].systems[0];
  CHECK(best == "sys1");
  CHECK(rows[0].systems.size() == 1);
  for (int r = 1; r <= 3; ++r) {
    CHECK(rows[r].systems.size() == 2);
    CHECK(rows[r].systems[0] == best);
  }
  CHECK(rows[4].systems.size() == 3);
  CHECK(rows[4].systems == std::vector<std::string>{"sys1", "sys2", "sys0"});
  CHECK(rows[5].systems.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.eer >= 0.0);
    CHECK(r.eer <= 1.0);
  }

  auto all = ablation_grid(train, train_m, eval, eval_m, cfg, true);
  CHECK(all.size() == 15);
  for (std::size_t i = 0; i < 6; ++i) CHECK(all[i].systems == rows[i].systems);

  std::vector<std::string> ids{"sys0", "sys1", "sys2", "sys3"};
  auto tsv = format_ablation_tsv(rows, ids);
  CHECK(tsv.rfind("row\tsys0\tsys1\tsys2\tsys3\teer_percent\n", 0) == 0);
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 7);
  CHECK(tsv.find("\n1\t0\t1\t0\t0\t") != std::string::npos);
  auto table = format_ablation_table(rows, ids);
  CHECK(std::count(table.begin(), table.end(), '\n') == 7);

  std::swap(eval[0], eval[1]);
  CHECK(error_code_of([&] { ablation_grid(train, train_m, eval, eval_m, cfg); }) == Errc::invalid_argument);
}

TEST_CASE("fusion model file round-trip") {
  FusionModel m{{"wavlm_a", "wavlm-b", "w.c"}, {1.25, -0.003, 1e-17}, -2.5, false};
  auto text = serialize_fusion(m);
  CHECK(text == "wavlm_a = 1.25\nwavlm-b = -0.003\nw.c = 1e-17\nbias = -2.5\n");
  CHECK(parse_fusion(text) == m);
  m.logit_inputs = true;
  CHECK(parse_fusion(serialize_fusion(m)) == m);
  CHECK(parse_fusion("# comment\n\na = 1\nbias = 0\n").weights == std::vector<double>{1.0});

  CHECK(error_code_of([] { parse_fusion("a = 1\n"); }) == Errc::parse);
  CHECK(error_code_of([] { parse_fusion("bias = 1\n"); }) == Errc::parse);
  CHECK(error_code_of([] { parse_fusion("a 1\nbias = 0\n"); }) == Errc::parse);
  CHECK(error_code_of([] { parse_fusion("a = x\nbias = 0\n"); }) == Errc::parse);
  CHECK(error_code_of([] { parse_fusion("a = 1\na = 2\nbias = 0\n"); }) == Errc::duplicate_id);

  testing::TempDir dir("fusion");
  write_fusion(dir / "f.txt", m);
  CHECK(read_fusion(dir / "f.txt") == m);
}
