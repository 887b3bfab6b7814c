#include "spoofkit/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <numeric>

#include "spoofkit/error.hpp"
#include "spoofkit/parallel.hpp"
#include "spoofkit/rng.hpp"
#include "spoofkit/text.hpp"

namespace spoofkit {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(Errc::invalid_argument, "learning_rate must be > 0");
  if (!(warmup_ratio >= 0.0 && warmup_ratio <= 1.0)) {
    throw Error(Errc::invalid_argument, "warmup_ratio must lie in [0, 1]");
  }
  if (epochs < 1) throw Error(Errc::invalid_argument, "epochs must be >= 1");
  if (batch_size < 1) throw Error(Errc::invalid_argument, "batch_size must be >= 1");
  if (!(inv_reg_c > 0.0) || !std::isfinite(inv_reg_c)) {
    throw Error(Errc::invalid_argument, "C must be positive and finite");
  }
}

std::optional<TrainConfig> preset_config(std::string_view name) {
  TrainConfig c;
  if (name == "probe") {
    c.learning_rate = 1e-2;
    c.epochs = 200;
    c.full_batch = true;
    return c;
  }
  if (name == "finetune-recipe") {
    c.learning_rate = 3e-5;
    c.warmup_ratio = 0.1;
    c.epochs = 5;
    c.batch_size = 8;
    c.full_batch = false;
    return c;
  }
  return std::nullopt;
}

double sigmoid(double z) noexcept {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

}  // namespace

double bce_loss(std::span<const double> probabilities, std::span<const double> labels,
                const ProbeModel& model) {
  if (probabilities.size() != labels.size()) {
    throw Error(Errc::invalid_argument, "probabilities and labels differ in length");
  }
  if (probabilities.empty()) throw Error(Errc::invalid_argument, "empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = std::clamp(probabilities[i], kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
    sum -= labels[i] * std::log(p) + (1.0 - labels[i]) * std::log1p(-p);
  }
  const double n = static_cast<double>(probabilities.size());
  return sum / n + squared_norm(model.weights) / (2.0 * model.inv_reg_c * n);
}

double lr_schedule(std::size_t step, std::size_t total_steps, double warmup_ratio, double base_lr) {
  if (total_steps == 0 || step >= total_steps) return 0.0;
  const auto warmup = static_cast<std::size_t>(std::llround(warmup_ratio * static_cast<double>(total_steps)));
  if (step < warmup) return base_lr * static_cast<double>(step) / static_cast<double>(warmup);
  return base_lr * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warmup);
}

LogisticObjective::LogisticObjective(const DenseMatrix& features, std::span<const double> labels,
                                     double inv_reg_c)
    : features_(features), labels_(labels), inv_reg_c_(inv_reg_c) {
  if (labels.size() != features.rows) {
    throw Error(Errc::dim_mismatch, "label count does not match feature rows");
  }
}

double LogisticObjective::value(std::span<const double> params) const {
  const std::size_t d = features_.cols;
  auto w = params.first(d);
  const double b = params[d];
  double sum = 0.0;
  for (std::size_t i = 0; i < features_.rows; ++i) {
    const double z = dot(w, features_.row(i)) + b;
    sum += softplus(z) - labels_[i] * z;
  }
  const double n = static_cast<double>(features_.rows);
  return sum / n + squared_norm(w) / (2.0 * inv_reg_c_ * n);
}

double LogisticObjective::value_and_gradient(std::span<const double> params,
                                             std::span<double> gradient) const {
  const std::size_t d = features_.cols;
  auto w = params.first(d);
  const double b = params[d];
  std::fill(gradient.begin(), gradient.end(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < features_.rows; ++i) {
    auto x = features_.row(i);
    const double z = dot(w, x) + b;
    sum += softplus(z) - labels_[i] * z;
    const double r = sigmoid(z) - labels_[i];
    for (std::size_t k = 0; k < d; ++k) gradient[k] += r * x[k];
    gradient[d] += r;
  }
  const double n = static_cast<double>(features_.rows);
  const double reg = 1.0 / (inv_reg_c_ * n);
  for (std::size_t k = 0; k < d; ++k) gradient[k] = gradient[k] / n + reg * w[k];
  gradient[d] /= n;
  return sum / n + squared_norm(w) * reg / 2.0;
}

void LogisticObjective::batch_gradient(std::span<const double> params,
                                       std::span<const std::size_t> rows,
                                       std::span<double> gradient) const {
  const std::size_t d = features_.cols;
  auto w = params.first(d);
  const double b = params[d];
  std::fill(gradient.begin(), gradient.end(), 0.0);
  for (std::size_t i : rows) {
    auto x = features_.row(i);
    const double r = sigmoid(dot(w, x) + b) - labels_[i];
    for (std::size_t k = 0; k < d; ++k) gradient[k] += r * x[k];
    gradient[d] += r;
  }
  const double m = static_cast<double>(rows.size());
  const double reg = 1.0 / (inv_reg_c_ * static_cast<double>(features_.rows));
  for (std::size_t k = 0; k < d; ++k) gradient[k] = gradient[k] / m + reg * w[k];
  gradient[d] /= m;
}

namespace {

void adam(const LogisticObjective& objective, std::size_t rows, const TrainConfig& config,
          std::vector<double>& params, std::size_t& steps_taken) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const std::size_t p = params.size();
  const std::size_t batch = config.full_batch ? rows : std::min<std::size_t>(config.batch_size, rows);
  const std::size_t per_epoch = (rows + batch - 1) / batch;
  const std::size_t total = per_epoch * config.epochs;

  std::vector<double> m(p, 0.0), v(p, 0.0), g(p);
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed);
  std::size_t step = 0;
  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (!config.full_batch) rng.shuffle(order);
    for (std::size_t start = 0; start < rows; start += batch) {
      const std::size_t end = std::min(rows, start + batch);
      objective.batch_gradient(params, std::span(order).subspan(start, end - start), g);
      const double lr = lr_schedule(step, total, config.warmup_ratio, config.learning_rate);
      ++step;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t k = 0; k < p; ++k) {
        m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
        v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
        params[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
      }
    }
  }
  steps_taken = step;
}

// Limited-memory BFGS with Armijo backtracking. Stops when the gradient
// vanishes or no step can decrease the objective at double precision.
std::size_t lbfgs(const LogisticObjective& objective, std::vector<double>& x, std::size_t max_iter) {
  constexpr std::size_t memory = 10;
  constexpr double c1 = 1e-4;
  const std::size_t p = x.size();
  std::vector<double> g(p), d(p), x_new(p), g_new(p), alpha(memory);
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  double f = objective.value_and_gradient(x, g);
  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax <= 1e-14) break;

    // two-loop recursion: d = -H g
    for (std::size_t k = 0; k < p; ++k) d[k] = -g[k];
    const std::size_t h = s_hist.size();
    for (std::size_t j = h; j-- > 0;) {
      alpha[j] = rho_hist[j] * dot(s_hist[j], d);
      for (std::size_t k = 0; k < p; ++k) d[k] -= alpha[j] * y_hist[j][k];
    }
    double gamma = 1.0;
    if (h > 0) gamma = dot(s_hist[h - 1], y_hist[h - 1]) / squared_norm(y_hist[h - 1]);
    else gamma = 1.0 / std::max(1.0, std::sqrt(squared_norm(g)));
    for (auto& v : d) v *= gamma;
    for (std::size_t j = 0; j < h; ++j) {
      const double beta = rho_hist[j] * dot(y_hist[j], d);
      for (std::size_t k = 0; k < p; ++k) d[k] += (alpha[j] - beta) * s_hist[j][k];
    }

    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      // lost descent direction: restart from steepest descent
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t k = 0; k < p; ++k) d[k] = -g[k];
      slope = dot(g, d);
    }

    double step = 1.0;
    double f_new = f;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t k = 0; k < p; ++k) x_new[k] = x[k] + step * d[k];
      f_new = objective.value_and_gradient(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || f_new >= f) {
      if (accepted) {
        x.swap(x_new);
        g.swap(g_new);
      }
      break;
    }

    std::vector<double> s(p), y(p);
    for (std::size_t k = 0; k < p; ++k) {
      s[k] = x_new[k] - x[k];
      y[k] = g_new[k] - g[k];
    }
    const double sy = dot(s, y);
    if (sy > 1e-300) {
      if (s_hist.size() == memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
  }
  return iter;
}

}  // namespace

FitResult fit_logistic(const DenseMatrix& features, std::span<const double> labels,
                       const TrainConfig& config) {
  config.validate();
  if (features.rows == 0 || features.cols == 0) throw Error(Errc::insufficient_data, "no training data");
  bool has_pos = false, has_neg = false;
  for (double y : labels) {
    if (y == 1.0) has_pos = true;
    else if (y == 0.0) has_neg = true;
    else throw Error(Errc::invalid_argument, "labels must be 0 or 1");
  }
  if (!has_pos || !has_neg) throw Error(Errc::single_class, "training data contains a single class");

  const std::size_t d = features.cols;
  std::vector<double> mean(d, 0.0), scale(d, 1.0);
  DenseMatrix standardized;
  const DenseMatrix* x = &features;
  if (config.standardize) {
    const double n = static_cast<double>(features.rows);
    for (std::size_t i = 0; i < features.rows; ++i)
      for (std::size_t k = 0; k < d; ++k) mean[k] += features(i, k);
    for (auto& m : mean) m /= n;
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < features.rows; ++i)
      for (std::size_t k = 0; k < d; ++k) var[k] += (features(i, k) - mean[k]) * (features(i, k) - mean[k]);
    for (std::size_t k = 0; k < d; ++k) {
      const double sd = std::sqrt(var[k] / n);
      scale[k] = sd > 0.0 ? sd : 1.0;
    }
    standardized = features;
    for (std::size_t i = 0; i < features.rows; ++i)
      for (std::size_t k = 0; k < d; ++k) standardized(i, k) = (features(i, k) - mean[k]) / scale[k];
    x = &standardized;
  }

  LogisticObjective objective(*x, labels, config.inv_reg_c);
  std::vector<double> params(d + 1, 0.0);
  FitResult result;
  adam(objective, x->rows, config, params, result.adam_steps);
  if (config.polish) result.polish_iterations = lbfgs(objective, params, config.polish_max_iterations);

  result.weights.assign(d, 0.0);
  result.bias = params[d];
  for (std::size_t k = 0; k < d; ++k) {
    result.weights[k] = params[k] / scale[k];
    result.bias -= result.weights[k] * mean[k];
  }
  if (config.standardize) {
    LogisticObjective raw(features, labels, config.inv_reg_c);
    std::vector<double> folded(result.weights);
    folded.push_back(result.bias);
    result.loss = raw.value(folded);
  } else {
    result.loss = objective.value(params);
  }
  return result;
}

namespace {

void gather(const EmbeddingStore& store, const Manifest& manifest, DenseMatrix& x,
            std::vector<double>& y) {
  if (!store.pooled()) {
    throw Error(Errc::invalid_argument, "store is not pooled (frames > 1); run `pool` first");
  }
  const std::size_t d = store.dim();
  x = DenseMatrix(manifest.size(), d);
  y.assign(manifest.size(), 0.0);
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto* rec = store.find(manifest[i].trial_id);
    if (!rec) {
      missing.push_back(manifest[i].trial_id);
      continue;
    }
    for (std::size_t k = 0; k < d; ++k) x(i, k) = rec->data[k];
    y[i] = manifest[i].label == Label::bonafide ? 1.0 : 0.0;
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 5); ++i) list += " " + missing[i];
    throw Error(Errc::missing_trial, std::to_string(missing.size()) +
                                         " manifest trials absent from store:" + list);
  }
}

}  // namespace

ProbeModel train_probe(const EmbeddingStore& store, const Manifest& manifest,
                       const TrainConfig& config, double* final_loss) {
  if (store.dim() == 0) throw Error(Errc::dim_mismatch, "store has no dimension");
  DenseMatrix x;
  std::vector<double> y;
  gather(store, manifest, x, y);
  FitResult fit = fit_logistic(x, y, config);
  if (final_loss) *final_loss = fit.loss;
  return ProbeModel{std::move(fit.weights), fit.bias, config.inv_reg_c};
}

Scores score(const ProbeModel& model, const EmbeddingStore& store) {
  if (model.weights.size() != store.dim()) {
    throw Error(Errc::dim_mismatch, "model dim " + std::to_string(model.weights.size()) +
                                        " != store dim " + std::to_string(store.dim()));
  }
  if (!store.pooled()) throw Error(Errc::invalid_argument, "store is not pooled");
  Scores out(store.size());
  parallel_for(store.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& rec = store[i];
      double z = model.bias;
      for (std::size_t k = 0; k < rec.dim; ++k) z += model.weights[k] * rec.data[k];
      out[i] = TrialScore{rec.trial_id, sigmoid(z)};
    }
  });
  return out;
}

namespace {

constexpr char kModelMagic[4] = {'S', 'P', 'M', '1'};

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

std::string encode_model(const ProbeModel& model) {
  std::string out(kModelMagic, 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.weights.size()));
  put<double>(out, model.bias);
  put<double>(out, model.inv_reg_c);
  for (double w : model.weights) put<double>(out, w);
  return out;
}

ProbeModel decode_model(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kModelMagic, 4) != 0) {
    throw Error(Errc::bad_magic, "not an SPM1 probe model");
  }
  if (bytes.size() < 24) throw Error(Errc::truncated, "SPM1 header is truncated");
  std::uint32_t d;
  ProbeModel m;
  std::memcpy(&d, bytes.data() + 4, 4);
  std::memcpy(&m.bias, bytes.data() + 8, 8);
  std::memcpy(&m.inv_reg_c, bytes.data() + 16, 8);
  const std::size_t need = 24 + std::size_t(d) * 8;
  if (bytes.size() < need) throw Error(Errc::truncated, "SPM1 weights are truncated");
  if (bytes.size() > need) throw Error(Errc::dim_mismatch, "SPM1 file longer than its declared dim");
  m.weights.resize(d);
  std::memcpy(m.weights.data(), bytes.data() + 24, std::size_t(d) * 8);
  for (double w : m.weights) {
    if (!std::isfinite(w)) throw Error(Errc::non_finite, "SPM1 weight is not finite");
  }
  return m;
}

ProbeModel read_model(const std::filesystem::path& path) {
  try {
    return decode_model(text::read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_model(const std::filesystem::path& path, const ProbeModel& model) {
  text::write_file(path, encode_model(model));
}

}  // namespace spoofkit
