#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spoofkit/augment.hpp"
#include "spoofkit/error.hpp"
#include "spoofkit/rng.hpp"
#include "spoofkit/synthetic.hpp"
#include "spoofkit/workflow.hpp"
#include "support.hpp"

using namespace spoofkit;
using testing::error_code_of;

namespace {

AudioBuffer unit_power_sine(std::size_t n) {
  AudioBuffer a;
  a.sample_rate = 16000;
  a.samples.resize(n);
  // Whole number of periods: mean square is exactly 1 up to rounding.
  for (std::size_t i = 0; i < n; ++i) a.samples[i] = std::numbers::sqrt2 * std::sin(2 * std::numbers::pi * 50.0 * i / 16000.0);
  return a;
}

double measured_snr(const AudioBuffer& in, const AudioBuffer& out) {
  std::vector<double> noise(in.samples.size());
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = out.samples[i] - in.samples[i];
  return 10.0 * std::log10(signal_power(in.samples) / signal_power(noise));
}

}  // namespace

TEST_CASE("white noise at 25 dB has power 10^-2.5 of a unit-power sine") {
  AudioBuffer sine = unit_power_sine(16000);
  CHECK(signal_power(sine.samples) == doctest::Approx(1.0).epsilon(1e-12));
  AudioBuffer noisy = add_white_noise(sine, 25.0, 11);
  REQUIRE(noisy.samples.size() == sine.samples.size());
  std::vector<double> noise(sine.samples.size());
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = noisy.samples[i] - sine.samples[i];
  CHECK(signal_power(noise) == doctest::Approx(3.1622776601683795e-3).epsilon(1e-9));
  double mean = 0;
  for (double v : noise) mean += v;
  CHECK(std::abs(mean / noise.size()) < 1e-12);
}

TEST_CASE("white noise at 100 dB leaves the signal essentially untouched") {
  AudioBuffer a = synthetic::tone(440.0, 0.5, 16000, 0.8);
  AudioBuffer b = add_white_noise(a, 100.0, 3);
  double dev = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) dev = std::max(dev, std::abs(a.samples[i] - b.samples[i]));
  CHECK(dev < 1e-4 * 0.8);
}

TEST_CASE("white noise is deterministic per seed") {
  AudioBuffer a = synthetic::tone(300.0, 0.1, 16000);
  CHECK(add_white_noise(a, 25.0, 5).samples == add_white_noise(a, 25.0, 5).samples);
  CHECK(add_white_noise(a, 25.0, 5).samples != add_white_noise(a, 25.0, 6).samples);
}

TEST_CASE("white noise rejects silent and empty input") {
  AudioBuffer zero;
  zero.samples.assign(100, 0.0);
  CHECK(error_code_of([&] { add_white_noise(zero, 25.0, 1); }) == Errc::invalid_argument);
  CHECK(error_code_of([&] { add_white_noise(AudioBuffer{}, 25.0, 1); }) == Errc::invalid_argument);
}

TEST_CASE("measured SNR stays within 0.5 dB of target over 1000 seeds") {
  AudioBuffer a = synthetic::tone(220.0, 0.1, 16000, 0.3);
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    worst = std::max(worst, std::abs(measured_snr(a, add_white_noise(a, 25.0, seed)) - 25.0));
  }
  CHECK(worst <= 0.5);
}

TEST_CASE("reverberate: identity and delay kernels") {
  AudioBuffer a;
  a.samples = {0.1, -0.5, 0.25, 0.3, -0.2};
  AudioBuffer id;
  id.samples = {1.0};
  CHECK(reverberate(a, id).samples == a.samples);

  AudioBuffer delay;
  delay.samples = {0.0, 1.0};
  auto shifted = reverberate(a, delay).samples;
  CHECK(shifted == std::vector<double>{0.0, 0.1, -0.5, 0.25, 0.3});
}

TEST_CASE("convolution of [1,0,0,0] with [0.5,0.25]") {
  std::vector<double> x{1, 0, 0, 0}, h{0.5, 0.25};
  CHECK(convolve_truncated(x, h) == std::vector<double>{0.5, 0.25, 0.0, 0.0});
  AudioBuffer a, ir;
  a.samples = x;
  ir.samples = h;
  // normalized back to the input's unit peak
  CHECK(reverberate(a, ir).samples == std::vector<double>{1.0, 0.5, 0.0, 0.0});
}

TEST_CASE("convolution is linear") {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(200), b(200), ab(200), h(1 + rng.uniform_index(60));
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
      ab[i] = a[i] + b[i];
    }
    for (auto& v : h) v = rng.normal();
    auto ya = convolve_truncated(a, h), yb = convolve_truncated(b, h), yab = convolve_truncated(ab, h);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(yab[i] - ya[i] - yb[i]) < 1e-9);
  }
}

TEST_CASE("reverberate rejects mismatched sample rates and empty kernels") {
  AudioBuffer a = synthetic::tone(100, 0.01, 16000);
  AudioBuffer ir = synthetic_impulse_response(8000);
  CHECK(error_code_of([&] { reverberate(a, ir); }) == Errc::sample_rate_mismatch);
  CHECK(error_code_of([&] { reverberate(a, AudioBuffer{}); }) == Errc::invalid_argument);
}

TEST_CASE("bundled impulse response is a 0.3 s decaying burst") {
  AudioBuffer ir = synthetic_impulse_response(16000);
  CHECK(ir.samples.size() == 4800);
  CHECK(ir.samples[0] == 1.0);
  double head = 0, tail = 0;
  for (std::size_t i = 0; i < 480; ++i) head += ir.samples[i] * ir.samples[i];
  for (std::size_t i = 4320; i < 4800; ++i) tail += ir.samples[i] * ir.samples[i];
  CHECK(tail < 1e-3 * head);
  AudioBuffer out = reverberate(synthetic::tone(200, 1.0, 16000, 0.5), ir);
  double peak = 0;
  for (double v : out.samples) peak = std::max(peak, std::abs(v));
  CHECK(peak == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("apply_policy tags half of the bonafides and no spoofs") {
  Manifest m = synthetic::pool(Source::ASV5, 10, 8, 10, "p");
  AugmentPolicy policy;
  policy.seed = 4;
  Manifest out = apply_policy(m, policy);
  std::size_t tagged = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (out[i].label == Label::spoof) CHECK(out[i] == m[i]);
    else tagged += out[i].augmentation != Augmentation::none;
  }
  CHECK(tagged == 5);
  CHECK(apply_policy(m, policy) == out);
}

TEST_CASE("apply_policy edge fractions") {
  Manifest m = synthetic::pool(Source::ASV5, 4, 2, 3, "e");
  AugmentPolicy none;
  none.bonafide_fraction = 0.0;
  CHECK(apply_policy(m, none) == m);

  AugmentPolicy all;
  all.bonafide_fraction = 1.0;
  for (const auto& e : apply_policy(m, all)) {
    if (e.label == Label::bonafide) {
      CHECK((e.augmentation == Augmentation::noise || e.augmentation == Augmentation::reverb));
    }
  }
  AugmentPolicy bad;
  bad.bonafide_fraction = 1.5;
  CHECK(error_code_of([&] { apply_policy(m, bad); }) == Errc::invalid_argument);
}

TEST_CASE("apply_policy never changes labels, paths or spoof rows") {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    Manifest m = synthetic::pool(Source::ASV5, 1 + rng.uniform_index(40), 3, rng.uniform_index(20), "q");
    AugmentPolicy p;
    p.seed = rng.next_u64();
    p.bonafide_fraction = rng.uniform01();
    Manifest out = apply_policy(m, p);
    std::size_t nb = 0, tagged = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(out[i].trial_id == m[i].trial_id);
      CHECK(out[i].label == m[i].label);
      CHECK(out[i].audio_path == m[i].audio_path);
      if (m[i].label == Label::spoof) CHECK(out[i] == m[i]);
      else {
        ++nb;
        tagged += out[i].augmentation != Augmentation::none;
      }
    }
    CHECK(tagged == static_cast<std::size_t>(std::llround(p.bonafide_fraction * nb)));
  }
}

TEST_CASE("augmented paths") {
  CHECK(augmented_path("a/b/c.wav", Augmentation::noise) == "a/b/c.noise.wav");
  CHECK(augmented_path("c.flac", Augmentation::reverb) == "c.flac.reverb.wav");
}

TEST_CASE("PCM16 WAV round trip and rejection") {
  AudioBuffer a = synthetic::tone(1000, 0.05, 8000, 0.9);
  AudioBuffer b = decode_wav(encode_wav(a));
  CHECK(b.sample_rate == 8000);
  REQUIRE(b.samples.size() == a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(std::abs(a.samples[i] - b.samples[i]) <= 0.5 / 32768.0 + 1e-15);
  CHECK(encode_wav(b) == encode_wav(a));
  CHECK(error_code_of([] { decode_wav("RIFX0000WAVE"); }) == Errc::bad_magic);
  std::string bytes = encode_wav(a);
  CHECK(error_code_of([&] { decode_wav(bytes.substr(0, 60)); }) == Errc::truncated);
  std::string stereo = bytes;
  stereo[22] = 2;
  CHECK(error_code_of([&] { decode_wav(stereo); }) == Errc::parse);
}

TEST_CASE("render_augmentations writes tagged files beside the originals") {
  testing::TempDir dir("render");
  Manifest m = synthetic::pool(Source::ASV5, 4, 1, 2, "clip");
  std::filesystem::create_directories(dir / "clip");
  for (std::size_t i = 0; i < m.size(); ++i) write_wav(dir / m[i].audio_path, synthetic::tone(200.0 + 50 * i, 0.2, 16000));
  AugmentPolicy p;
  p.bonafide_fraction = 1.0;
  p.seed = 9;
  Manifest tagged = apply_policy(m, p);
  Manifest out = render_augmentations(tagged, dir.path(), p);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (tagged[i].augmentation == Augmentation::none) {
      CHECK(out[i].audio_path == m[i].audio_path);
      continue;
    }
    CHECK(out[i].audio_path == augmented_path(m[i].audio_path, tagged[i].augmentation));
    AudioBuffer rendered = read_wav(dir / out[i].audio_path);
    CHECK(rendered.samples.size() == 3200);
  }
}
