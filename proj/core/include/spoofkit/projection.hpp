#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spoofkit/embedding.hpp"
#include "spoofkit/matrix.hpp"

namespace spoofkit {

struct TsneConfig {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch_iteration = 250;
  std::uint64_t seed = 0;
  /// Record KL(P||Q) every this many iterations (0 disables); the final
  /// iteration is always recorded.
  std::size_t kl_every = 50;
};

inline constexpr std::size_t kTsneMaxPoints = 5000;
inline constexpr double kPerplexityTolerance = 1e-5;
inline constexpr std::size_t kMaxBisectionSteps = 200;

DenseMatrix squared_distances(const DenseMatrix& points);

/// Row-conditional Gaussian affinities. Each row's bandwidth is bisected until
/// exp(entropy) equals `perplexity` within kPerplexityTolerance; rows sum to 1
/// with a zero diagonal. Rows whose off-diagonal distances are all equal are
/// uniform regardless of the target.
DenseMatrix perplexity_calibration(const DenseMatrix& sq_distances, double perplexity);

/// exp(Shannon entropy) of one probability row, skipping index `self`.
double row_perplexity(std::span<const double> row, std::size_t self);

/// (P + P^T) normalized to unit total mass.
DenseMatrix symmetrize_affinities(const DenseMatrix& conditional);

/// Symmetric joint affinities for the given points.
DenseMatrix joint_affinities(const DenseMatrix& points, double perplexity);

/// KL(P || Q) for Student-t affinities Q of the embedding `y`.
double kl_divergence(const DenseMatrix& joint_p, const DenseMatrix& y);

struct TsneResult {
  DenseMatrix coordinates;  // n x 2
  std::vector<std::pair<std::size_t, double>> kl_history;  // (iteration, KL)
};

TsneResult tsne(const DenseMatrix& points, const TsneConfig& config);
/// Pooled stores only.
TsneResult tsne(const EmbeddingStore& store, const TsneConfig& config);

/// Scatter plot with one colour per group and a legend of the non-empty
/// groups in `group_order`. Output bytes depend only on the inputs.
std::string render_svg(const DenseMatrix& coordinates, std::span<const std::string> groups,
                       std::span<const std::string> group_order, const std::string& title = "");

/// `trial_id<TAB>x<TAB>y` per point.
std::string serialize_coordinates(std::span<const std::string> trial_ids, const DenseMatrix& coordinates);

}  // namespace spoofkit
