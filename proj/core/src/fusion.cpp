#include "spoofkit/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <unordered_map>

#include "spoofkit/error.hpp"
#include "spoofkit/log.hpp"
#include "spoofkit/text.hpp"

namespace spoofkit {
namespace {

double to_logit(double p) {
  const double q = std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  return std::log(q) - std::log1p(-q);
}

}  // namespace

AlignedScores align(std::span<const SystemScores> systems) {
  if (systems.empty()) throw Error(Errc::invalid_argument, "no systems to align");
  AlignedScores out;
  for (const auto& s : systems) out.system_ids.push_back(s.system_id);
  {
    std::set<std::string> ids(out.system_ids.begin(), out.system_ids.end());
    if (ids.size() != out.system_ids.size()) throw Error(Errc::duplicate_id, "system ids are not unique");
  }

  std::set<std::string> universe;
  for (const auto& s : systems)
    for (const auto& t : s.scores) universe.insert(t.trial_id);
  out.trial_ids.assign(universe.begin(), universe.end());

  std::unordered_map<std::string_view, std::size_t> row;
  for (std::size_t i = 0; i < out.trial_ids.size(); ++i) row.emplace(out.trial_ids[i], i);

  out.values = DenseMatrix(out.trial_ids.size(), systems.size(), NAN);
  std::string problems;
  for (std::size_t c = 0; c < systems.size(); ++c) {
    std::vector<bool> seen(out.trial_ids.size(), false);
    for (const auto& t : systems[c].scores) {
      const std::size_t r = row.at(t.trial_id);
      if (seen[r]) throw Error(Errc::duplicate_id, "system '" + systems[c].system_id + "' scores '" + t.trial_id + "' twice");
      seen[r] = true;
      out.values(r, c) = t.score;
    }
    std::size_t missing = 0;
    std::string first;
    for (std::size_t r = 0; r < seen.size(); ++r) {
      if (seen[r]) continue;
      if (missing < 5) first += " " + out.trial_ids[r];
      ++missing;
    }
    if (missing > 0) {
      problems += "\n  system '" + systems[c].system_id + "' lacks " + std::to_string(missing) +
                  " trial(s):" + first;
    }
  }
  if (!problems.empty()) throw Error(Errc::missing_trial, "score sets cover different trials" + problems);
  return out;
}

std::vector<double> labels_for(std::span<const std::string> trial_ids, const Manifest& manifest) {
  std::unordered_map<std::string_view, Label> labels;
  for (const auto& e : manifest) labels.emplace(e.trial_id, e.label);
  std::vector<double> y;
  y.reserve(trial_ids.size());
  for (const auto& id : trial_ids) {
    auto it = labels.find(id);
    if (it == labels.end()) throw Error(Errc::missing_trial, "trial '" + id + "' not in manifest");
    y.push_back(it->second == Label::bonafide ? 1.0 : 0.0);
  }
  return y;
}

FusionModel train_fusion(const AlignedScores& aligned, std::span<const double> labels,
                         const TrainConfig& config, bool logit_inputs) {
  const std::size_t n = aligned.values.rows, k = aligned.values.cols;
  if (labels.size() != n) throw Error(Errc::dim_mismatch, "label count does not match trials");
  if (k < 2) log::warn("fusion trained on a single system");

  DenseMatrix x = aligned.values;
  if (logit_inputs) {
    for (auto& v : x.data) v = to_logit(v);
  }
  for (std::size_t c = 0; c < k; ++c) {
    bool constant = true;
    for (std::size_t r = 1; r < n && constant; ++r) constant = x(r, c) == x(0, c);
    if (constant) log::warn("system '" + aligned.system_ids[c] + "' is constant across all trials");
  }
  FitResult fit = fit_logistic(x, labels, config);
  return FusionModel{aligned.system_ids, std::move(fit.weights), fit.bias, logit_inputs};
}

Scores apply_fusion(const FusionModel& model, std::span<const SystemScores> systems) {
  if (model.weights.size() != model.system_ids.size()) {
    throw Error(Errc::dim_mismatch, "fusion model has mismatched weights and system ids");
  }
  // Reorder the inputs to the model's system order.
  std::vector<SystemScores> ordered;
  for (const auto& id : model.system_ids) {
    auto it = std::find_if(systems.begin(), systems.end(),
                           [&](const SystemScores& s) { return s.system_id == id; });
    if (it == systems.end()) throw Error(Errc::invalid_argument, "missing scores for system '" + id + "'");
    ordered.push_back(*it);
  }
  if (systems.size() != model.system_ids.size()) {
    throw Error(Errc::invalid_argument, "got " + std::to_string(systems.size()) +
                                            " systems, model expects " +
                                            std::to_string(model.system_ids.size()));
  }
  AlignedScores aligned = align(ordered);
  // Sum in system-id order so that permuting the model does not change rounding.
  std::vector<std::size_t> sum_order(model.system_ids.size());
  std::iota(sum_order.begin(), sum_order.end(), std::size_t{0});
  std::sort(sum_order.begin(), sum_order.end(),
            [&](std::size_t a, std::size_t b) { return model.system_ids[a] < model.system_ids[b]; });
  Scores out;
  out.reserve(aligned.trial_ids.size());
  for (std::size_t r = 0; r < aligned.trial_ids.size(); ++r) {
    double z = model.bias;
    for (std::size_t c : sum_order) {
      const double p = aligned.values(r, c);
      z += model.weights[c] * (model.logit_inputs ? to_logit(p) : p);
    }
    out.push_back({aligned.trial_ids[r], sigmoid(z)});
  }
  return out;
}

namespace {

double subset_eer(std::span<const SystemScores> train, const Manifest& train_manifest,
                  std::span<const SystemScores> eval, const Manifest& eval_manifest,
                  const std::vector<std::size_t>& members, const TrainConfig& config, bool logit_inputs) {
  std::vector<SystemScores> tr, ev;
  for (std::size_t m : members) {
    tr.push_back(train[m]);
    ev.push_back(eval[m]);
  }
  AlignedScores aligned = align(tr);
  auto y = labels_for(aligned.trial_ids, train_manifest);
  FusionModel model = train_fusion(aligned, y, config, logit_inputs);
  return eer(attach_labels(apply_fusion(model, ev), eval_manifest));
}

}  // namespace

std::vector<AblationRow> ablation_grid(std::span<const SystemScores> train,
                                       const Manifest& train_manifest,
                                       std::span<const SystemScores> eval,
                                       const Manifest& eval_manifest, const TrainConfig& config,
                                       bool all_subsets, bool logit_inputs) {
  const std::size_t n = train.size();
  if (n == 0) throw Error(Errc::invalid_argument, "ablation needs at least one system");
  if (eval.size() != n) throw Error(Errc::invalid_argument, "train and eval system lists differ in length");
  for (std::size_t i = 0; i < n; ++i) {
    if (train[i].system_id != eval[i].system_id) {
      throw Error(Errc::invalid_argument, "system order differs between train and eval lists");
    }
  }

  std::vector<double> solo(n);
  for (std::size_t i = 0; i < n; ++i) solo[i] = eer(attach_labels(eval[i].scores, eval_manifest));
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (solo[i] < solo[best]) best = i;
  }

  std::vector<std::vector<std::size_t>> family;
  family.push_back({best});
  for (std::size_t i = 0; i < n; ++i) {
    if (i != best) family.push_back({best, i});
  }
  std::vector<std::size_t> peers;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != best) peers.push_back(i);
  }
  std::stable_sort(peers.begin(), peers.end(), [&](std::size_t a, std::size_t b) { return solo[a] < solo[b]; });
  for (std::size_t k = 2; k < n; ++k) {
    std::vector<std::size_t> members{best};
    members.insert(members.end(), peers.begin(), peers.begin() + static_cast<std::ptrdiff_t>(k));
    family.push_back(std::move(members));
  }
  if (all_subsets && n < 63) {
    std::set<std::vector<std::size_t>> present;
    for (auto m : family) {
      std::sort(m.begin(), m.end());
      present.insert(m);
    }
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (std::uint64_t{1} << i)) members.push_back(i);
      }
      if (!present.count(members)) family.push_back(std::move(members));
    }
  }

  std::vector<AblationRow> rows;
  for (const auto& members : family) {
    AblationRow row;
    for (std::size_t m : members) row.systems.push_back(train[m].system_id);
    row.eer = members.size() == 1
                  ? solo[members[0]]
                  : subset_eer(train, train_manifest, eval, eval_manifest, members, config, logit_inputs);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_ablation_tsv(const std::vector<AblationRow>& rows,
                                 std::span<const std::string> system_ids) {
  std::string out = "row";
  for (const auto& id : system_ids) out += "\t" + id;
  out += "\teer_percent\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += std::to_string(r + 1);
    for (const auto& id : system_ids) {
      bool in = std::find(rows[r].systems.begin(), rows[r].systems.end(), id) != rows[r].systems.end();
      out += in ? "\t1" : "\t0";
    }
    out += "\t" + format_percent(rows[r].eer) + "\n";
  }
  return out;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows,
                                  std::span<const std::string> system_ids) {
  std::vector<std::size_t> width;
  for (const auto& id : system_ids) width.push_back(std::max<std::size_t>(id.size(), 1));
  std::string out = "  #";
  for (std::size_t c = 0; c < system_ids.size(); ++c) {
    out += "  " + std::string(width[c] - system_ids[c].size(), ' ') + system_ids[c];
  }
  out += "  EER[%]\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    char num[16];
    std::snprintf(num, sizeof(num), "%3zu", r + 1);
    out += num;
    for (std::size_t c = 0; c < system_ids.size(); ++c) {
      bool in = std::find(rows[r].systems.begin(), rows[r].systems.end(), system_ids[c]) != rows[r].systems.end();
      out += "  " + std::string(width[c] - 1, ' ') + (in ? "x" : ".");
    }
    const std::string e = format_percent(rows[r].eer);
    out += "  " + std::string(e.size() < 6 ? 6 - e.size() : 0, ' ') + e + "\n";
  }
  return out;
}

std::string serialize_fusion(const FusionModel& model) {
  std::string out;
  for (std::size_t i = 0; i < model.system_ids.size(); ++i) {
    out += model.system_ids[i] + " = " + text::format_double(model.weights[i]) + "\n";
  }
  out += "bias = " + text::format_double(model.bias) + "\n";
  if (model.logit_inputs) out += "input = logit\n";
  return out;
}

FusionModel parse_fusion(std::string_view content) {
  FusionModel m;
  bool have_bias = false;
  std::size_t line_no = 0;
  for (auto raw : text::lines(content)) {
    ++line_no;
    auto line = text::trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto where = "fusion line " + std::to_string(line_no) + ": ";
    auto eq = line.rfind('=');
    if (eq == std::string_view::npos) throw Error(Errc::parse, where + "expected key = value");
    auto key = text::trim(line.substr(0, eq));
    auto value = text::trim(line.substr(eq + 1));
    if (key.empty()) throw Error(Errc::parse, where + "empty key");
    if (key == "input") {
      if (value == "logit") m.logit_inputs = true;
      else if (value == "probability") m.logit_inputs = false;
      else throw Error(Errc::parse, where + "input must be 'logit' or 'probability'");
      continue;
    }
    double v = 0;
    if (!text::parse_double(value, v) || !std::isfinite(v)) throw Error(Errc::parse, where + "bad number");
    if (key == "bias") {
      m.bias = v;
      have_bias = true;
    } else {
      if (std::find(m.system_ids.begin(), m.system_ids.end(), key) != m.system_ids.end()) {
        throw Error(Errc::duplicate_id, where + "system '" + std::string(key) + "' listed twice");
      }
      m.system_ids.emplace_back(key);
      m.weights.push_back(v);
    }
  }
  if (!have_bias) throw Error(Errc::parse, "fusion model has no bias line");
  if (m.system_ids.empty()) throw Error(Errc::parse, "fusion model lists no systems");
  return m;
}

FusionModel read_fusion(const std::filesystem::path& path) {
  try {
    return parse_fusion(text::read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_fusion(const std::filesystem::path& path, const FusionModel& model) {
  text::write_file(path, serialize_fusion(model));
}

}  // namespace spoofkit
