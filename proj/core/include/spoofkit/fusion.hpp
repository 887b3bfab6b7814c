#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spoofkit/manifest.hpp"
#include "spoofkit/matrix.hpp"
#include "spoofkit/metrics.hpp"
#include "spoofkit/probe.hpp"

namespace spoofkit {

/// Output of one detection system.
struct SystemScores {
  std::string system_id;
  Scores scores;
};

/// Late-fusion logistic regression: fused = sigmoid(bias + sum_i w_i * p_i).
/// Weights are sign-unconstrained. With logit_inputs, p_i is replaced by
/// logit(p_i) before weighting.
struct FusionModel {
  std::vector<std::string> system_ids;
  std::vector<double> weights;
  double bias = 0.0;
  bool logit_inputs = false;

  friend bool operator==(const FusionModel&, const FusionModel&) = default;
};

/// Trials x systems matrix with rows in sorted trial_id order and columns in
/// input order.
struct AlignedScores {
  std::vector<std::string> system_ids;
  std::vector<std::string> trial_ids;
  DenseMatrix values;
};

/// Every system must score exactly the same trial set; no imputation.
AlignedScores align(std::span<const SystemScores> systems);

/// 1 for bonafide, 0 for spoof, in trial_ids order.
std::vector<double> labels_for(std::span<const std::string> trial_ids, const Manifest& manifest);

/// Constant columns and single-system input are logged as warnings.
FusionModel train_fusion(const AlignedScores& aligned, std::span<const double> labels,
                         const TrainConfig& config, bool logit_inputs = false);

/// Fused scores in sorted trial_id order.
Scores apply_fusion(const FusionModel& model, std::span<const SystemScores> systems);

struct AblationRow {
  std::vector<std::string> systems;
  double eer = 0.0;
};

/// Anchored subset family: the best single system (lowest eval EER), the best
/// paired with each other system in input order, then the best plus its top-k
/// peers (by solo eval EER) for k = 2 .. n-1, ending with all systems. With
/// all_subsets, every remaining non-empty subset follows in mask order.
std::vector<AblationRow> ablation_grid(std::span<const SystemScores> train,
                                       const Manifest& train_manifest,
                                       std::span<const SystemScores> eval,
                                       const Manifest& eval_manifest, const TrainConfig& config,
                                       bool all_subsets = false, bool logit_inputs = false);

std::string format_ablation_tsv(const std::vector<AblationRow>& rows,
                                std::span<const std::string> system_ids);
std::string format_ablation_table(const std::vector<AblationRow>& rows,
                                  std::span<const std::string> system_ids);

/// Text format: `<system_id> = <weight>` per system in order, then
/// `bias = <value>`, plus `input = logit` when logit_inputs is set. `#`
/// comments and blank lines are ignored; "bias" and "input" are reserved.
std::string serialize_fusion(const FusionModel& model);
FusionModel parse_fusion(std::string_view content);
FusionModel read_fusion(const std::filesystem::path& path);
void write_fusion(const std::filesystem::path& path, const FusionModel& model);

}  // namespace spoofkit
