#include "spoofkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "spoofkit/error.hpp"
#include "spoofkit/text.hpp"

namespace spoofkit {

void ScoreSet::validate() const {
  std::unordered_set<std::string_view> seen;
  for (const auto& e : entries) {
    if (!std::isfinite(e.score)) throw Error(Errc::non_finite, "score of '" + e.trial_id + "' is not finite");
    if (!seen.insert(e.trial_id).second) throw Error(Errc::duplicate_id, "trial '" + e.trial_id + "' scored twice");
  }
}

std::size_t ScoreSet::count(Label label) const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(),
                                                [&](const ScoredTrial& e) { return e.label == label; }));
}

ScoreSet attach_labels(const Scores& scores, const Manifest& manifest) {
  std::unordered_map<std::string_view, Label> labels;
  labels.reserve(manifest.size());
  for (const auto& e : manifest) labels.emplace(e.trial_id, e.label);
  ScoreSet out;
  out.entries.reserve(scores.size());
  for (const auto& s : scores) {
    auto it = labels.find(s.trial_id);
    if (it == labels.end()) throw Error(Errc::missing_trial, "scored trial '" + s.trial_id + "' not in manifest");
    out.entries.push_back({s.trial_id, s.score, it->second});
  }
  out.validate();
  return out;
}

namespace {

struct Counts {
  std::size_t bona = 0;
  std::size_t spoof = 0;
};

void require_both(std::size_t bona, std::size_t spoof) {
  if (bona == 0 || spoof == 0) {
    throw Error(Errc::single_class, "scores contain " + std::to_string(bona) + " bonafide and " +
                                        std::to_string(spoof) + " spoof trials; both are required");
  }
}

std::vector<RocPoint> roc_from(std::vector<std::pair<double, bool>> scored) {
  // scored: (score, is_bonafide)
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Counts total;
  for (const auto& [_, bona] : scored) (bona ? total.bona : total.spoof)++;
  require_both(total.bona, total.spoof);

  const double nb = static_cast<double>(total.bona);
  const double ns = static_cast<double>(total.spoof);
  std::vector<RocPoint> roc;
  roc.push_back({-INFINITY, 1.0, 0.0});
  // below = trials with score strictly below the current threshold
  Counts below;
  std::size_t i = 0;
  while (i < scored.size()) {
    const double t = scored[i].first;
    roc.push_back({t, static_cast<double>(total.spoof - below.spoof) / ns,
                   static_cast<double>(below.bona) / nb});
    while (i < scored.size() && scored[i].first == t) {
      (scored[i].second ? below.bona : below.spoof)++;
      ++i;
    }
  }
  roc.push_back({INFINITY, 0.0, 1.0});
  return roc;
}

double eer_from_roc(const std::vector<RocPoint>& roc) {
  // fpr - fnr is non-increasing along the threshold axis: find the sign change.
  for (std::size_t k = 0; k + 1 < roc.size(); ++k) {
    const double d0 = roc[k].fpr - roc[k].fnr;
    const double d1 = roc[k + 1].fpr - roc[k + 1].fnr;
    if (d0 == 0.0) return roc[k].fpr;
    if (d0 > 0.0 && d1 <= 0.0) {
      if (d1 == 0.0) return roc[k + 1].fpr;
      const double a = d0 / (d0 - d1);
      return roc[k].fpr + a * (roc[k + 1].fpr - roc[k].fpr);
    }
  }
  return roc.back().fpr;
}

}  // namespace

std::vector<RocPoint> roc_curve(const ScoreSet& scores) {
  scores.validate();
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(scores.entries.size());
  for (const auto& e : scores.entries) scored.emplace_back(e.score, e.label == Label::bonafide);
  return roc_from(std::move(scored));
}

double eer(const ScoreSet& scores) { return eer_from_roc(roc_curve(scores)); }

double eer(std::span<const double> bonafide_scores, std::span<const double> spoof_scores) {
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(bonafide_scores.size() + spoof_scores.size());
  for (double s : bonafide_scores) scored.emplace_back(s, true);
  for (double s : spoof_scores) scored.emplace_back(s, false);
  for (const auto& [s, _] : scored) {
    if (!std::isfinite(s)) throw Error(Errc::non_finite, "non-finite score");
  }
  return eer_from_roc(roc_from(std::move(scored)));
}

std::string format_percent(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * rate);
  return buf;
}

Scores parse_scores(std::string_view content) {
  Scores out;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  for (auto line : text::lines(content)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = text::split(line, '\t');
    const auto where = "score line " + std::to_string(line_no) + ": ";
    if (fields.size() != 2) throw Error(Errc::parse, where + "expected trial_id<TAB>score");
    TrialScore s;
    s.trial_id = std::string(fields[0]);
    if (!text::parse_double(fields[1], s.score)) {
      throw Error(Errc::parse, where + "bad score '" + std::string(fields[1]) + "'");
    }
    if (!std::isfinite(s.score)) throw Error(Errc::non_finite, where + "score is not finite");
    if (!seen.insert(s.trial_id).second) throw Error(Errc::duplicate_id, where + "duplicate trial '" + s.trial_id + "'");
    out.push_back(std::move(s));
  }
  return out;
}

std::string serialize_scores(const Scores& scores) {
  std::string out;
  for (const auto& s : scores) {
    out += s.trial_id;
    out += '\t';
    out += text::format_double(s.score);
    out += '\n';
  }
  return out;
}

Scores read_scores(const std::filesystem::path& path) {
  try {
    return parse_scores(text::read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_scores(const std::filesystem::path& path, const Scores& scores) {
  text::write_file(path, serialize_scores(scores));
}

}  // namespace spoofkit
