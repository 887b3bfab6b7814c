#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spoofkit/manifest.hpp"

namespace spoofkit {

/// Unlabelled detection score for one trial; higher means more bonafide.
struct TrialScore {
  std::string trial_id;
  double score = 0.0;

  friend bool operator==(const TrialScore&, const TrialScore&) = default;
};
using Scores = std::vector<TrialScore>;

struct ScoredTrial {
  std::string trial_id;
  double score = 0.0;
  Label label = Label::bonafide;
};

struct ScoreSet {
  std::vector<ScoredTrial> entries;

  /// Throws on duplicate ids or non-finite scores.
  void validate() const;
  std::size_t count(Label label) const;
};

/// Joins labels from the manifest. Every scored trial must be present there.
ScoreSet attach_labels(const Scores& scores, const Manifest& manifest);

/// Operating point: bonafide is accepted iff score >= threshold.
/// fpr = spoof accepted / spoof, fnr = bonafide rejected / bonafide.
struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
};

/// Points at -inf, every distinct score (ascending), and +inf.
std::vector<RocPoint> roc_curve(const ScoreSet& scores);

/// Equal error rate, linearly interpolated between the two ROC points that
/// straddle fpr == fnr. All-tied scores give exactly 0.5.
double eer(const ScoreSet& scores);
double eer(std::span<const double> bonafide_scores, std::span<const double> spoof_scores);

/// "12.34": percentage with two decimals.
std::string format_percent(double rate);

/// Score file: one `trial_id<TAB>score` line per trial, no header.
Scores parse_scores(std::string_view content);
std::string serialize_scores(const Scores& scores);
Scores read_scores(const std::filesystem::path& path);
void write_scores(const std::filesystem::path& path, const Scores& scores);

}  // namespace spoofkit
