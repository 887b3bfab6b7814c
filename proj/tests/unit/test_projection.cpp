#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spoofkit/error.hpp"
#include "spoofkit/parallel.hpp"
#include "spoofkit/projection.hpp"
#include "spoofkit/rng.hpp"
#include "support.hpp"

using namespace spoofkit;
using testing::error_code_of;

namespace {

DenseMatrix gaussian_points(std::uint64_t seed, std::size_t n, std::size_t d, double scale = 1.0) {
  Rng rng(seed);
  DenseMatrix x(n, d);
  for (auto& v : x.data) v = scale * rng.normal();
  return x;
}

/// Two clusters of n/2 points each, centres `gap` apart on the first axis.
DenseMatrix two_clusters(std::uint64_t seed, std::size_t n, std::size_t d, double spread, double gap) {
  auto x = gaussian_points(seed, n, d, spread);
  for (std::size_t i = n / 2; i < n; ++i) x(i, 0) += gap;
  return x;
}

double kl_at(const TsneResult& r, std::size_t iter) {
  for (const auto& [it, kl] : r.kl_history)
    if (it == iter) return kl;
  FAIL("iteration not recorded");
  return 0;
}

struct ThreadGuard {
  std::size_t saved = thread_count();
  ~ThreadGuard() { set_thread_count(saved); }
};

}  // namespace

TEST_CASE("equidistant points give uniform affinities") {
  // Regular tetrahedron vertices in 3-D.
  DenseMatrix x(4, 3);
  const double v[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 3; ++k) x(i, k) = v[i][k];
  auto p = perplexity_calibration(squared_distances(x), 3.0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(p(i, j) == doctest::Approx(i == j ? 0.0 : 1.0 / 3.0).epsilon(1e-12));
  // Equal distances make every bandwidth uniform, even for an unreachable target.
  auto q = perplexity_calibration(squared_distances(x), 2.0);
  CHECK(q(0, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("within-cluster affinities dominate for well separated clusters") {
  auto x = two_clusters(3, 40, 5, 1.0, 100.0);
  auto p = perplexity_calibration(squared_distances(x), 5.0);
  for (std::size_t i = 0; i < 40; ++i) {
    double within = 0, across = 0;
    for (std::size_t j = 0; j < 40; ++j) ((i < 20) == (j < 20) ? within : across) += p(i, j);
    CHECK(within > 100 * across);
  }
}

TEST_CASE("calibrated rows meet the perplexity target") {
  auto x = gaussian_points(4, 200, 10);
  for (double perp : {5.0, 30.0, 60.0}) {
    auto p = perplexity_calibration(squared_distances(x), perp);
    for (std::size_t i = 0; i < x.rows; ++i) {
      double sum = 0;
      for (double v : p.row(i)) sum += v;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p(i, i) == 0.0);
      CHECK(std::abs(row_perplexity(p.row(i), i) - perp) <= 1e-5);
    }
  }
}

TEST_CASE("joint affinities are symmetric, non-negative and normalized") {
  auto x = gaussian_points(5, 150, 8);
  auto p = joint_affinities(x, 20.0);
  double total = 0;
  for (std::size_t i = 0; i < p.rows; ++i)
    for (std::size_t j = 0; j < p.cols; ++j) {
      CHECK(p(i, j) >= 0.0);
      CHECK(std::abs(p(i, j) - p(j, i)) <= 1e-12);
      total += p(i, j);
    }
  CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("calibration reports the failing row") {
  // Five points cannot reach perplexity 10: at most 4 neighbours exist.
  DenseMatrix x(5, 1);
  for (std::size_t i = 0; i < 5; ++i) x(i, 0) = double(i * i);
  std::string msg;
  CHECK(error_code_of([&] { perplexity_calibration(squared_distances(x), 10.0); }, &msg) == Errc::convergence);
  CHECK(msg.find("row 0") != std::string::npos);
}

TEST_CASE("t-SNE keeps two clusters apart") {
  auto x = two_clusters(6, 100, 2, 1.0, 30.0);
  TsneConfig cfg;
  cfg.perplexity = 15;
  auto r = tsne(x, cfg);
  std::vector<std::pair<double, double>> pts;
  std::vector<int> lab;
  for (std::size_t i = 0; i < 100; ++i) {
    pts.emplace_back(r.coordinates(i, 0), r.coordinates(i, 1));
    lab.push_back(i < 50 ? 0 : 1);
  }
  CHECK(oracle::silhouette(pts, lab) > 0.5);
}

TEST_CASE("t-SNE output is centred and KL decreases after exaggeration") {
  auto x = gaussian_points(7, 10, 4);
  TsneConfig cfg;
  cfg.perplexity = 3;
  auto r = tsne(x, cfg);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    mx += r.coordinates(i, 0);
    my += r.coordinates(i, 1);
  }
  CHECK(std::abs(mx) < 1e-9);
  CHECK(std::abs(my) < 1e-9);
  CHECK(kl_at(r, 1000) <= kl_at(r, 250));
  CHECK(r.kl_history.back().first == 1000);
}

TEST_CASE("duplicate points land together") {
  auto x = gaussian_points(8, 30, 3);
  for (std::size_t k = 0; k < 3; ++k) x(1, k) = x(0, k);
  TsneConfig cfg;
  cfg.perplexity = 5;
  auto r = tsne(x, cfg);
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (std::size_t i = 0; i < 30; ++i) {
    xmin = std::min(xmin, r.coordinates(i, 0));
    xmax = std::max(xmax, r.coordinates(i, 0));
    ymin = std::min(ymin, r.coordinates(i, 1));
    ymax = std::max(ymax, r.coordinates(i, 1));
  }
  const double spread = std::max(xmax - xmin, ymax - ymin);
  const double d = std::hypot(r.coordinates(0, 0) - r.coordinates(1, 0), r.coordinates(0, 1) - r.coordinates(1, 1));
  CHECK(d < 1e-3 * spread);
}

TEST_CASE("small learning rate gives monotone KL at the end") {
  auto x = gaussian_points(9, 40, 5);
  TsneConfig cfg;
  cfg.perplexity = 8;
  cfg.learning_rate = 10;
  cfg.kl_every = 1;
  auto r = tsne(x, cfg);
  const auto& h = r.kl_history;
  REQUIRE(h.size() == 1000);
  for (std::size_t k = h.size() - 100; k < h.size(); ++k) CHECK(h[k].second <= h[k - 1].second + 1e-12);
}

TEST_CASE("orthogonal input transforms leave the output unchanged") {
  auto x = gaussian_points(10, 60, 6);
  TsneConfig cfg;
  cfg.perplexity = 10;
  cfg.seed = 42;
  const auto base = tsne(x, cfg).coordinates;

  // Reflections through coordinate hyperplanes are exact in floating point.
  auto flipped = x;
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t k = 0; k < x.cols; k += 2) flipped(i, k) = -flipped(i, k);
  CHECK(tsne(flipped, cfg).coordinates == base);

  // Quarter-turn rotation in the plane.
  auto planar = gaussian_points(11, 40, 2);
  auto turned = planar;
  for (std::size_t i = 0; i < planar.rows; ++i) {
    turned(i, 0) = -planar(i, 1);
    turned(i, 1) = planar(i, 0);
  }
  cfg.perplexity = 8;
  CHECK(tsne(turned, cfg).coordinates == tsne(planar, cfg).coordinates);

  // A general rotation changes distances only at rounding level.
  Rng rng(12);
  DenseMatrix q(6, 6);
  for (auto& v : q.data) v = rng.normal();
  for (std::size_t c = 0; c < 6; ++c) {  // Gram-Schmidt on columns
    for (std::size_t prev = 0; prev < c; ++prev) {
      double dot = 0;
      for (std::size_t r = 0; r < 6; ++r) dot += q(r, c) * q(r, prev);
      for (std::size_t r = 0; r < 6; ++r) q(r, c) -= dot * q(r, prev);
    }
    double nrm = 0;
    for (std::size_t r = 0; r < 6; ++r) nrm += q(r, c) * q(r, c);
    for (std::size_t r = 0; r < 6; ++r) q(r, c) /= std::sqrt(nrm);
  }
  DenseMatrix rotated(x.rows, 6);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t c = 0; c < 6; ++c)
      for (std::size_t k = 0; k < 6; ++k) rotated(i, c) += x(i, k) * q(k, c);
  auto p0 = joint_affinities(x, 10);
  auto p1 = joint_affinities(rotated, 10);
  for (std::size_t k = 0; k < p0.data.size(); ++k) CHECK(std::abs(p0.data[k] - p1.data[k]) <= 1e-12);
}

TEST_CASE("t-SNE is deterministic per seed and across thread counts") {
  ThreadGuard guard;
  auto x = gaussian_points(13, 80, 4);
  TsneConfig cfg;
  cfg.perplexity = 12;
  cfg.iterations = 300;
  set_thread_count(1);
  auto a = tsne(x, cfg);
  set_thread_count(4);
  auto b = tsne(x, cfg);
  CHECK(a.coordinates == b.coordinates);
  CHECK(a.kl_history == b.kl_history);
  cfg.seed = 1;
  CHECK_FALSE(tsne(x, cfg).coordinates == a.coordinates);
}

TEST_CASE("t-SNE size and parameter limits") {
  TsneConfig cfg;
  cfg.perplexity = 2;
  CHECK(error_code_of([&] { tsne(gaussian_points(1, 9, 2), cfg); }) == Errc::insufficient_data);
  cfg.perplexity = 4;
  CHECK(error_code_of([&] { tsne(gaussian_points(1, 12, 2), cfg); }) == Errc::invalid_argument);
  cfg.perplexity = 30;
  std::string msg;
  CHECK(error_code_of([&] { tsne(gaussian_points(1, kTsneMaxPoints + 1, 1), cfg); }, &msg) == Errc::invalid_argument);
  CHECK(msg.find("5000") != std::string::npos);
  cfg.perplexity = 3;
  cfg.iterations = 0;
  CHECK(error_code_of([&] { tsne(gaussian_points(1, 12, 2), cfg); }) == Errc::invalid_argument);

  EmbeddingStore framewise(2);
  for (int i = 0; i < 12; ++i) framewise.add({"t" + std::to_string(i), 2, 2, {1, 2, 3, float(i)}});
  CHECK(error_code_of([&] { tsne(framewise, TsneConfig{}); }) == Errc::invalid_argument);
}

TEST_CASE("t-SNE on a pooled store matches the matrix path") {
  EmbeddingStore store(3);
  auto x = gaussian_points(14, 20, 3);
  DenseMatrix xf(20, 3);
  for (std::size_t i = 0; i < 20; ++i) {
    std::vector<float> v(3);
    for (std::size_t k = 0; k < 3; ++k) v[k] = float(x(i, k)), xf(i, k) = v[k];
    store.add({"t" + std::to_string(i), 1, 3, v});
  }
  TsneConfig cfg;
  cfg.perplexity = 5;
  cfg.iterations = 100;
  CHECK(tsne(store, cfg).coordinates == tsne(xf, cfg).coordinates);
}

TEST_CASE("SVG legend lists non-empty groups in order") {
  DenseMatrix c(6, 2);
  for (std::size_t i = 0; i < 6; ++i) c(i, 0) = double(i), c(i, 1) = double(i % 3);
  std::vector<std::string> groups{"train/bonafide", "train/spoof", "dev/bonafide", "dev/spoof", "dev/spoof", "train/spoof"};
  std::vector<std::string> order{"train/bonafide", "train/spoof", "dev/bonafide", "dev/spoof"};
  auto svg = render_svg(c, groups, order, "four groups");
  CHECK(svg.rfind("<svg", 0) == 0);
  for (const auto& g : order) CHECK(svg.find(">" + g + "</text>") != std::string::npos);
  CHECK(svg.find("#d62728") != std::string::npos);
  CHECK(svg.find("#000000") != std::string::npos);
  std::size_t circles = 0;
  for (auto pos = svg.find("r=\"2.5\""); pos != std::string::npos; pos = svg.find("r=\"2.5\"", pos + 1)) ++circles;
  CHECK(circles == 6);
  CHECK(render_svg(c, groups, order, "four groups") == svg);

  std::vector<std::string> three{"train/bonafide", "train/spoof", "train/spoof", "train/spoof", "train/bonafide", "dev/spoof"};
  auto partial = render_svg(c, three, order);
  CHECK(partial.find(">dev/bonafide</text>") == std::string::npos);
  CHECK(partial.find(">dev/spoof</text>") != std::string::npos);

  std::vector<std::string> short_groups{"train/spoof"};
  CHECK(error_code_of([&] { render_svg(c, short_groups, order); }) == Errc::dim_mismatch);
  std::vector<std::string> unknown(6, "other");
  CHECK(error_code_of([&] { render_svg(c, unknown, order); }) == Errc::invalid_argument);
}

TEST_CASE("coordinate file lists one point per line") {
  DenseMatrix c(2, 2);
  c(0, 0) = 1.5, c(0, 1) = -2, c(1, 0) = 0, c(1, 1) = 0.25;
  std::vector<std::string> ids{"a", "b"};
  CHECK(serialize_coordinates(ids, c) == "a\t1.5\t-2\nb\t0\t0.25\n");
}
