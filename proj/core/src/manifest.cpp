#include "spoofkit/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "spoofkit/error.hpp"
#include "spoofkit/rng.hpp"
#include "spoofkit/text.hpp"

namespace spoofkit {

std::string_view to_string(Label v) noexcept {
  return v == Label::bonafide ? "bonafide" : "spoof";
}

std::string_view to_string(Source v) noexcept {
  switch (v) {
    case Source::ASV5: return "ASV5";
    case Source::ASV19: return "ASV19";
    case Source::ASV21: return "ASV21";
    case Source::FoR: return "FoR";
    case Source::ITW: return "ITW";
    case Source::synthetic: return "synthetic";
  }
  return "?";
}

std::string_view to_string(Augmentation v) noexcept {
  switch (v) {
    case Augmentation::none: return "none";
    case Augmentation::noise: return "noise";
    case Augmentation::reverb: return "reverb";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view t) noexcept {
  if (t == "bonafide") return Label::bonafide;
  if (t == "spoof") return Label::spoof;
  return std::nullopt;
}

std::optional<Source> parse_source(std::string_view t) noexcept {
  for (Source s : {Source::ASV5, Source::ASV19, Source::ASV21, Source::FoR, Source::ITW,
                   Source::synthetic}) {
    if (t == to_string(s)) return s;
  }
  return std::nullopt;
}

std::optional<Augmentation> parse_augmentation(std::string_view t) noexcept {
  if (t == "none") return Augmentation::none;
  if (t == "noise") return Augmentation::noise;
  if (t == "reverb") return Augmentation::reverb;
  return std::nullopt;
}

namespace {

[[noreturn]] void fail_at(std::size_t line_no, const std::string& what) {
  throw Error(Errc::parse, "manifest line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Manifest parse_manifest(std::string_view content) {
  auto rows = text::lines(content);
  if (rows.empty()) throw Error(Errc::parse, "manifest is empty (missing header)");
  if (rows[0] != kManifestHeader) fail_at(1, "unexpected header");

  Manifest out;
  out.reserve(rows.size() - 1);
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::size_t line_no = i + 1;
    auto fields = text::split(rows[i], '\t');
    if (fields.size() != 6) {
      fail_at(line_no, "expected 6 tab-separated fields, got " + std::to_string(fields.size()));
    }
    ManifestEntry e;
    if (fields[0].empty()) fail_at(line_no, "empty trial_id");
    e.trial_id = std::string(fields[0]);
    e.audio_path = std::string(fields[1]);
    auto label = parse_label(fields[2]);
    if (!label) fail_at(line_no, "unknown label '" + std::string(fields[2]) + "'");
    e.label = *label;
    e.attack_id = std::string(fields[3]);
    if (e.attack_id.empty()) fail_at(line_no, "empty attack_id");
    if (e.label == Label::bonafide && e.attack_id != "-") {
      fail_at(line_no, "bonafide trial with attack_id '" + e.attack_id + "'");
    }
    auto source = parse_source(fields[4]);
    if (!source) fail_at(line_no, "unknown source '" + std::string(fields[4]) + "'");
    e.source = *source;
    auto aug = parse_augmentation(fields[5]);
    if (!aug) fail_at(line_no, "unknown augmentation '" + std::string(fields[5]) + "'");
    e.augmentation = *aug;
    if (!seen.insert(fields[0]).second) {
      throw Error(Errc::duplicate_id, "manifest line " + std::to_string(line_no) +
                                          ": duplicate trial_id '" + e.trial_id + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string serialize_manifest(const Manifest& entries) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& e : entries) {
    out += e.trial_id;
    out += '\t';
    out += e.audio_path;
    out += '\t';
    out += to_string(e.label);
    out += '\t';
    out += e.attack_id;
    out += '\t';
    out += to_string(e.source);
    out += '\t';
    out += to_string(e.augmentation);
    out += '\n';
  }
  return out;
}

Manifest read_manifest(const std::filesystem::path& path) {
  try {
    return parse_manifest(text::read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const Manifest& entries) {
  text::write_file(path, serialize_manifest(entries));
}

Manifest stratified_sample(const Manifest& entries, std::size_t total, double ratio,
                           std::uint64_t seed) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw Error(Errc::invalid_argument, "ratio must be positive and finite");
  }
  const auto n_bona = static_cast<std::size_t>(std::floor(static_cast<double>(total) / (ratio + 1.0)));
  const std::size_t n_spoof = total - n_bona;

  std::vector<std::size_t> bona_idx;
  std::map<std::string, std::vector<std::size_t>> by_attack;  // lexical order
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].label == Label::bonafide) bona_idx.push_back(i);
    else by_attack[entries[i].attack_id].push_back(i);
  }
  if (bona_idx.size() < n_bona) {
    throw Error(Errc::insufficient_data, "stratum 'bonafide' has " +
                                             std::to_string(bona_idx.size()) + " entries, need " +
                                             std::to_string(n_bona));
  }
  if (n_spoof > 0 && by_attack.empty()) {
    throw Error(Errc::insufficient_data, "no spoof entries available, need " +
                                             std::to_string(n_spoof));
  }

  Rng rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(total);
  for (std::size_t k : rng.sample_indices(bona_idx.size(), n_bona)) chosen.push_back(bona_idx[k]);

  if (n_spoof > 0) {
    const std::size_t attacks = by_attack.size();
    const std::size_t base = n_spoof / attacks;
    const std::size_t extra = n_spoof % attacks;
    std::size_t rank = 0;
    for (const auto& [attack, idx] : by_attack) {
      const std::size_t want = base + (rank < extra ? 1 : 0);
      ++rank;
      if (idx.size() < want) {
        throw Error(Errc::insufficient_data, "stratum 'spoof/" + attack + "' has " +
                                                 std::to_string(idx.size()) + " entries, need " +
                                                 std::to_string(want));
      }
      Rng stratum_rng(derive_seed(seed, attack));
      for (std::size_t k : stratum_rng.sample_indices(idx.size(), want)) chosen.push_back(idx[k]);
    }
  }

  std::sort(chosen.begin(), chosen.end());
  Manifest out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(entries[i]);
  return out;
}

std::size_t MixRecipe::total() const {
  std::size_t sum = 0;
  for (const auto& [_, c] : counts) sum += c;
  return sum;
}

MixRecipe parse_recipe(std::string_view content) {
  MixRecipe recipe;
  std::size_t line_no = 0;
  for (auto raw : text::lines(content)) {
    ++line_no;
    auto line = raw.substr(0, raw.find('#'));
    line = text::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    auto where = "recipe line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw Error(Errc::parse, where + "expected key = value");
    auto key = text::trim(line.substr(0, eq));
    auto value = text::trim(line.substr(eq + 1));
    if (key == "ratio") {
      double r = 0;
      if (!text::parse_double(value, r) || !(r > 0) || !std::isfinite(r)) {
        throw Error(Errc::parse, where + "ratio must be a positive number");
      }
      recipe.class_ratio = r;
    } else if (key == "seed") {
      if (!text::parse_u64(value, recipe.seed)) throw Error(Errc::parse, where + "bad seed");
    } else if (key.size() > 6 && key.substr(key.size() - 6) == ".count") {
      auto source = parse_source(key.substr(0, key.size() - 6));
      if (!source) throw Error(Errc::parse, where + "unknown source in '" + std::string(key) + "'");
      std::uint64_t c = 0;
      if (!text::parse_u64(value, c)) throw Error(Errc::parse, where + "bad count");
      recipe.counts[*source] = static_cast<std::size_t>(c);
    } else {
      throw Error(Errc::parse, where + "unknown key '" + std::string(key) + "'");
    }
  }
  if (recipe.total() == 0) throw Error(Errc::invalid_argument, "recipe requests no samples");
  return recipe;
}

std::string serialize_recipe(const MixRecipe& recipe) {
  std::string out;
  for (const auto& [source, count] : recipe.counts) {
    out += std::string(to_string(source)) + ".count = " + std::to_string(count) + "\n";
  }
  if (recipe.class_ratio) out += "ratio = " + text::format_double(*recipe.class_ratio) + "\n";
  out += "seed = " + std::to_string(recipe.seed) + "\n";
  return out;
}

std::optional<MixRecipe> preset_recipe(std::string_view name) {
  MixRecipe r;
  r.class_ratio = 8.0;
  if (name == "medium-27k") {
    r.counts = {{Source::ASV5, 27000}};
  } else if (name == "augm-31k") {
    r.counts = {{Source::ASV5, 13000},
                {Source::ASV19, 6100},
                {Source::ASV21, 8600},
                {Source::ITW, 1600},
                {Source::FoR, 1800}};
  } else if (name == "augm-114k") {
    r.counts = {{Source::ASV5, 102000},
                {Source::ASV19, 2900},
                {Source::ASV21, 6800},
                {Source::FoR, 1600},
                {Source::ITW, 1600}};
  } else {
    return std::nullopt;
  }
  return r;
}

std::vector<std::string> preset_names() { return {"medium-27k", "augm-31k", "augm-114k"}; }

Manifest mix(const MixRecipe& recipe, const std::map<Source, Manifest>& pools) {
  if (recipe.total() == 0) throw Error(Errc::invalid_argument, "recipe requests no samples");
  std::vector<std::pair<Source, Manifest>> parts;
  for (const auto& [source, count] : recipe.counts) {
    if (count == 0) continue;
    auto it = pools.find(source);
    const std::size_t have = it == pools.end() ? 0 : it->second.size();
    if (have < count) {
      throw Error(Errc::insufficient_data, "pool '" + std::string(to_string(source)) +
                                               "' has " + std::to_string(have) + " entries, short by " +
                                               std::to_string(count - have));
    }
    const std::uint64_t seed = derive_seed(recipe.seed, to_string(source));
    Manifest drawn;
    if (source == Source::ASV5 && recipe.class_ratio) {
      drawn = stratified_sample(it->second, count, *recipe.class_ratio, seed);
    } else {
      Rng rng(seed);
      for (std::size_t k : rng.sample_indices(have, count)) drawn.push_back(it->second[k]);
    }
    parts.emplace_back(source, std::move(drawn));
  }

  std::unordered_map<std::string, std::size_t> occurrences;
  for (const auto& [_, part] : parts) {
    for (const auto& e : part) ++occurrences[e.trial_id];
  }
  Manifest out;
  out.reserve(recipe.total());
  for (auto& [source, part] : parts) {
    for (auto& e : part) {
      if (occurrences[e.trial_id] > 1) e.trial_id = std::string(to_string(source)) + "/" + e.trial_id;
      out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace spoofkit
