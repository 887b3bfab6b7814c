#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spoofkit/embedding.hpp"
#include "spoofkit/manifest.hpp"
#include "spoofkit/matrix.hpp"
#include "spoofkit/metrics.hpp"

namespace spoofkit {

/// Linear classifier: score = sigmoid(weights . x + bias) = P(bonafide).
/// inv_reg_c is the inverse L2 strength C.
struct ProbeModel {
  std::vector<double> weights;
  double bias = 0.0;
  double inv_reg_c = 1e3;

  friend bool operator==(const ProbeModel&, const ProbeModel&) = default;
};

struct TrainConfig {
  double learning_rate = 1e-2;
  double warmup_ratio = 0.1;
  std::uint32_t epochs = 200;
  std::uint32_t batch_size = 8;
  /// Ignore batch_size and take one step per epoch over all rows.
  bool full_batch = true;
  std::uint64_t seed = 0;
  double inv_reg_c = 1e3;
  /// Z-score features before fitting; folded back into raw-feature weights.
  bool standardize = false;
  /// Run L-BFGS from the Adam solution until the objective stops improving.
  bool polish = true;
  std::size_t polish_max_iterations = 20000;

  void validate() const;
};

/// "probe": lr 1e-2, 200 full-batch epochs. "finetune-recipe": lr 3e-5,
/// warmup 0.1, 5 epochs, batch 8.
std::optional<TrainConfig> preset_config(std::string_view name);

double sigmoid(double z) noexcept;

/// Mean binary cross-entropy of clipped probabilities plus
/// ||w||^2 / (2 C n). Labels are 1 for bonafide, 0 for spoof.
double bce_loss(std::span<const double> probabilities, std::span<const double> labels,
                const ProbeModel& model);

inline constexpr double kProbabilityEpsilon = 1e-12;

/// Linear warmup from 0 to base_lr over round(warmup_ratio * total_steps)
/// steps, then linear decay to 0 at total_steps.
double lr_schedule(std::size_t step, std::size_t total_steps, double warmup_ratio, double base_lr);

/// Regularized logistic objective over parameters [w_0..w_{D-1}, b]:
///   (1/n) sum softplus(z_i) - y_i z_i  +  ||w||^2 / (2 C n),  z_i = w.x_i + b
class LogisticObjective {
 public:
  LogisticObjective(const DenseMatrix& features, std::span<const double> labels, double inv_reg_c);

  std::size_t parameter_count() const { return features_.cols + 1; }
  double value(std::span<const double> params) const;
  double value_and_gradient(std::span<const double> params, std::span<double> gradient) const;
  /// Gradient of the objective restricted to `rows` (penalty kept at full-data scale).
  void batch_gradient(std::span<const double> params, std::span<const std::size_t> rows,
                      std::span<double> gradient) const;

 private:
  const DenseMatrix& features_;
  std::span<const double> labels_;
  double inv_reg_c_;
};

struct FitResult {
  std::vector<double> weights;
  double bias = 0.0;
  /// Final regularized objective on the (unstandardized) training data.
  double loss = 0.0;
  std::size_t adam_steps = 0;
  std::size_t polish_iterations = 0;
};

/// Fits the logistic objective. Labels must contain both 0 and 1.
FitResult fit_logistic(const DenseMatrix& features, std::span<const double> labels,
                       const TrainConfig& config);

/// Trains on the manifest's trials looked up in a pooled store.
ProbeModel train_probe(const EmbeddingStore& store, const Manifest& manifest,
                       const TrainConfig& config, double* final_loss = nullptr);

/// One score per record in store order.
Scores score(const ProbeModel& model, const EmbeddingStore& store);

// SPM1 layout (little-endian): "SPM1" | u32 D | f64 bias | f64 C | D x f64 weights
std::string encode_model(const ProbeModel& model);
ProbeModel decode_model(std::string_view bytes);
ProbeModel read_model(const std::filesystem::path& path);
void write_model(const std::filesystem::path& path, const ProbeModel& model);

}  // namespace spoofkit
