#include "spoofkit/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "spoofkit/error.hpp"
#include "spoofkit/parallel.hpp"
#include "spoofkit/rng.hpp"
#include "spoofkit/text.hpp"

namespace spoofkit {

DenseMatrix squared_distances(const DenseMatrix& points) {
  const std::size_t n = points.rows;
  DenseMatrix d(n, n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto a = points.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        auto b = points.row(j);
        double s = 0.0;
        for (std::size_t k = 0; k < points.cols; ++k) {
          const double diff = a[k] - b[k];
          s += diff * diff;
        }
        d(i, j) = s;
      }
    }
  });
  return d;
}

double row_perplexity(std::span<const double> row, std::size_t self) {
  double h = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j == self || row[j] <= 0.0) continue;
    h -= row[j] * std::log(row[j]);
  }
  return std::exp(h);
}

namespace {

// Fills `out` with exp(-beta * (d - d_min)) normalized; returns the entropy.
double gaussian_row(std::span<const double> dist, std::size_t self, double d_min, double beta,
                    std::span<double> out) {
  double sum = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    out[j] = j == self ? 0.0 : std::exp(-beta * (dist[j] - d_min));
    sum += out[j];
  }
  double weighted = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    if (j == self) continue;
    out[j] /= sum;
    weighted += out[j] * (dist[j] - d_min);
  }
  return std::log(sum) + beta * weighted;
}

}  // namespace

DenseMatrix perplexity_calibration(const DenseMatrix& sq_distances, double perplexity) {
  const std::size_t n = sq_distances.rows;
  if (sq_distances.cols != n) throw Error(Errc::dim_mismatch, "distance matrix is not square");
  if (n < 2) throw Error(Errc::insufficient_data, "need at least two points");
  if (!(perplexity >= 1.0) || !std::isfinite(perplexity)) {
    throw Error(Errc::invalid_argument, "perplexity must be >= 1");
  }
  const double target = std::log(perplexity);
  DenseMatrix p(n, n);
  std::vector<std::size_t> failed_rows(n, 0);

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto dist = sq_distances.row(i);
      auto out = p.row(i);
      double d_min = std::numeric_limits<double>::infinity();
      double d_max = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        d_min = std::min(d_min, dist[j]);
        d_max = std::max(d_max, dist[j]);
      }
      if (d_max - d_min <= 0.0) {
        gaussian_row(dist, i, d_min, 1.0, out);  // entropy is beta-independent
        continue;
      }
      // Entropy falls monotonically in beta; bisect in log space.
      double lo = 0.0, hi = std::numeric_limits<double>::infinity();
      double beta = 1.0 / (d_max - d_min);
      bool converged = false;
      for (std::size_t step = 0; step < kMaxBisectionSteps; ++step) {
        const double h = gaussian_row(dist, i, d_min, beta, out);
        if (std::abs(std::exp(h) - perplexity) <= kPerplexityTolerance) {
          converged = true;
          break;
        }
        if (h > target) {
          lo = beta;
          beta = std::isinf(hi) ? beta * 2.0 : std::sqrt(lo * hi);
        } else {
          hi = beta;
          beta = lo == 0.0 ? beta / 2.0 : std::sqrt(lo * hi);
        }
      }
      if (!converged) failed_rows[i] = 1;
    }
  });

  for (std::size_t i = 0; i < n; ++i) {
    if (failed_rows[i]) {
      throw Error(Errc::convergence, "perplexity search did not converge for row " + std::to_string(i) +
                                         " after " + std::to_string(kMaxBisectionSteps) + " steps");
    }
  }
  return p;
}

DenseMatrix symmetrize_affinities(const DenseMatrix& conditional) {
  const std::size_t n = conditional.rows;
  DenseMatrix p(n, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      p(i, j) = conditional(i, j) + conditional(j, i);
      total += p(i, j);
    }
  }
  for (auto& v : p.data) v /= total;
  return p;
}

DenseMatrix joint_affinities(const DenseMatrix& points, double perplexity) {
  return symmetrize_affinities(perplexity_calibration(squared_distances(points), perplexity));
}

namespace {

// Student-t numerators 1 / (1 + |y_i - y_j|^2) with zero diagonal; returns
// their total, summed row by row in index order.
double student_t(const DenseMatrix& y, DenseMatrix& num) {
  const std::size_t n = y.rows;
  std::vector<double> row_sums(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) {
          num(i, j) = 0.0;
          continue;
        }
        const double dx = y(i, 0) - y(j, 0);
        const double dy = y(i, 1) - y(j, 1);
        num(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
        s += num(i, j);
      }
      row_sums[i] = s;
    }
  });
  double total = 0.0;
  for (double s : row_sums) total += s;
  return total;
}

double kl_from(const DenseMatrix& p, const DenseMatrix& num, double num_total) {
  const std::size_t n = p.rows;
  std::vector<double> rows(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || p(i, j) <= 0.0) continue;
        const double q = std::max(num(i, j) / num_total, std::numeric_limits<double>::min());
        s += p(i, j) * std::log(p(i, j) / q);
      }
      rows[i] = s;
    }
  });
  double total = 0.0;
  for (double s : rows) total += s;
  return total;
}

}  // namespace

double kl_divergence(const DenseMatrix& joint_p, const DenseMatrix& y) {
  DenseMatrix num(y.rows, y.rows);
  const double total = student_t(y, num);
  return kl_from(joint_p, num, total);
}

TsneResult tsne(const DenseMatrix& points, const TsneConfig& config) {
  const std::size_t n = points.rows;
  if (n < 10) throw Error(Errc::insufficient_data, "t-SNE needs at least 10 points, got " + std::to_string(n));
  if (n > kTsneMaxPoints) {
    throw Error(Errc::invalid_argument, "exact t-SNE is limited to " + std::to_string(kTsneMaxPoints) +
                                            " points, got " + std::to_string(n) + "; subsample first");
  }
  if (!(config.perplexity * 3.0 < static_cast<double>(n))) {
    throw Error(Errc::invalid_argument, "perplexity must be below n/3");
  }
  if (config.iterations < 1) throw Error(Errc::invalid_argument, "iterations must be >= 1");

  const DenseMatrix dist = squared_distances(points);
  const DenseMatrix p = symmetrize_affinities(perplexity_calibration(dist, config.perplexity));

  TsneResult result;
  DenseMatrix& y = result.coordinates;
  y = DenseMatrix(n, 2);
  Rng rng(config.seed);
  for (auto& v : y.data) v = 1e-4 * rng.normal();
  // Coincident inputs start together; their gradients then stay equal.
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (dist(i, j) == 0.0) {
        y(i, 0) = y(j, 0);
        y(i, 1) = y(j, 1);
        break;
      }
    }
  }

  DenseMatrix update(n, 2), gains(n, 2, 1.0), grad(n, 2), num(n, n);
  for (std::size_t iter = 0; iter < config.iterations; ++iter) {
    const double exaggeration = iter < config.exaggeration_iterations ? config.early_exaggeration : 1.0;
    const double momentum = iter < config.momentum_switch_iteration ? config.initial_momentum : config.final_momentum;

    const double num_total = student_t(y, num);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        double gx = 0.0, gy = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          const double mult = (exaggeration * p(i, j) - num(i, j) / num_total) * num(i, j);
          gx += mult * (y(i, 0) - y(j, 0));
          gy += mult * (y(i, 1) - y(j, 1));
        }
        grad(i, 0) = 4.0 * gx;
        grad(i, 1) = 4.0 * gy;
      }
    });

    for (std::size_t k = 0; k < y.data.size(); ++k) {
      const bool same_sign = (grad.data[k] > 0.0) == (update.data[k] > 0.0);
      gains.data[k] = same_sign ? std::max(gains.data[k] * 0.8, 0.01) : gains.data[k] + 0.2;
      update.data[k] = momentum * update.data[k] - config.learning_rate * gains.data[k] * grad.data[k];
      y.data[k] += update.data[k];
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y(i, 0);
      my += y(i, 1);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y(i, 0) -= mx;
      y(i, 1) -= my;
    }

    const bool last = iter + 1 == config.iterations;
    if (last || (config.kl_every > 0 && (iter + 1) % config.kl_every == 0)) {
      result.kl_history.emplace_back(iter + 1, kl_divergence(p, y));
    }
  }
  return result;
}

TsneResult tsne(const EmbeddingStore& store, const TsneConfig& config) {
  if (!store.pooled()) throw Error(Errc::invalid_argument, "t-SNE needs a pooled store");
  DenseMatrix x(store.size(), store.dim());
  for (std::size_t i = 0; i < store.size(); ++i)
    for (std::size_t k = 0; k < store.dim(); ++k) x(i, k) = store[i].data[k];
  return tsne(x, config);
}

namespace {

constexpr const char* kPalette[] = {"#d62728", "#2ca02c", "#9467bd", "#000000", "#1f77b4",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f", "#17becf"};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const DenseMatrix& coordinates, std::span<const std::string> groups,
                       std::span<const std::string> group_order, const std::string& title) {
  if (coordinates.rows != groups.size()) {
    throw Error(Errc::dim_mismatch, std::to_string(coordinates.rows) + " coordinates but " +
                                        std::to_string(groups.size()) + " group labels");
  }
  if (coordinates.rows > 0 && coordinates.cols != 2) throw Error(Errc::dim_mismatch, "coordinates must be n x 2");
  for (const auto& g : groups) {
    if (std::find(group_order.begin(), group_order.end(), g) == group_order.end()) {
      throw Error(Errc::invalid_argument, "group '" + g + "' missing from the legend order");
    }
  }

  constexpr double size = 640.0, margin = 40.0, legend_w = 180.0;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (coordinates.rows > 0) {
    xmin = xmax = coordinates(0, 0);
    ymin = ymax = coordinates(0, 1);
    for (std::size_t i = 1; i < coordinates.rows; ++i) {
      xmin = std::min(xmin, coordinates(i, 0));
      xmax = std::max(xmax, coordinates(i, 0));
      ymin = std::min(ymin, coordinates(i, 1));
      ymax = std::max(ymax, coordinates(i, 1));
    }
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double scale = (size - 2 * margin) / span;

  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.0f %.0f\">\n",
                size + legend_w, size, size + legend_w, size);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">",
                  size / 2);
    out += buf + escape_xml(title) + "</text>\n";
  }

  std::vector<std::string> legend;
  for (std::size_t g = 0; g < group_order.size(); ++g) {
    const bool used = std::find(groups.begin(), groups.end(), group_order[g]) != groups.end();
    if (!used) continue;
    const char* colour = kPalette[g % std::size(kPalette)];
    out += "<g class=\"group\" fill=\"" + std::string(colour) + "\" fill-opacity=\"0.7\">\n";
    for (std::size_t i = 0; i < coordinates.rows; ++i) {
      if (groups[i] != group_order[g]) continue;
      const double px = margin + (coordinates(i, 0) - xmin) * scale;
      const double py = size - margin - (coordinates(i, 1) - ymin) * scale;
      std::snprintf(buf, sizeof(buf), "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\"/>\n", px, py);
      out += buf;
    }
    out += "</g>\n";
    legend.push_back(colour);
    legend.push_back(group_order[g]);
  }

  out += "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"13\">\n";
  for (std::size_t k = 0; k < legend.size(); k += 2) {
    const double ly = margin + 22.0 * static_cast<double>(k / 2);
    std::snprintf(buf, sizeof(buf), "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"5\" fill=\"%s\"/>", size + 10, ly,
                  legend[k].c_str());
    out += buf;
    std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%.1f\">", size + 22, ly + 4);
    out += buf + escape_xml(legend[k + 1]) + "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

std::string serialize_coordinates(std::span<const std::string> trial_ids, const DenseMatrix& coordinates) {
  if (trial_ids.size() != coordinates.rows) throw Error(Errc::dim_mismatch, "ids and coordinates differ in count");
  std::string out;
  for (std::size_t i = 0; i < trial_ids.size(); ++i) {
    out += trial_ids[i] + "\t" + text::format_double(coordinates(i, 0)) + "\t" +
           text::format_double(coordinates(i, 1)) + "\n";
  }
  return out;
}

}  // namespace spoofkit
