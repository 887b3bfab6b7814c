#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spoofkit {

enum class Label { bonafide, spoof };
enum class Source { ASV5, ASV19, ASV21, FoR, ITW, synthetic };
enum class Augmentation { none, noise, reverb };

std::string_view to_string(Label v) noexcept;
std::string_view to_string(Source v) noexcept;
std::string_view to_string(Augmentation v) noexcept;
std::optional<Label> parse_label(std::string_view token) noexcept;
std::optional<Source> parse_source(std::string_view token) noexcept;
std::optional<Augmentation> parse_augmentation(std::string_view token) noexcept;

/// One audio trial. Bonafide trials carry attack_id "-".
struct ManifestEntry {
  std::string trial_id;
  std::string audio_path;
  Label label = Label::bonafide;
  std::string attack_id = "-";
  Source source = Source::ASV5;
  Augmentation augmentation = Augmentation::none;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

using Manifest = std::vector<ManifestEntry>;

inline constexpr std::string_view kManifestHeader =
    "trial_id\taudio_path\tlabel\tattack_id\tsource\taugmentation";

/// Parses the six-column TSV manifest (header line required). Rejects
/// duplicate trial ids, unknown tokens, and bonafide rows with an attack id;
/// messages carry the 1-based line number.
Manifest parse_manifest(std::string_view content);
std::string serialize_manifest(const Manifest& entries);

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& entries);

/// Draws `total` entries: floor(total / (ratio + 1)) bonafide, the rest spoof,
/// spoof split evenly over distinct attack ids with the remainder handed out
/// round-robin in lexical attack order. Without replacement; the result keeps
/// the input order.
Manifest stratified_sample(const Manifest& entries, std::size_t total, double ratio,
                           std::uint64_t seed);

/// Per-source draw counts for a mixed training set.
struct MixRecipe {
  std::map<Source, std::size_t> counts;
  /// Spoof-per-bonafide target, applied to the ASV5 draw only. Other corpora
  /// are drawn uniformly since their attack inventories differ.
  std::optional<double> class_ratio;
  std::uint64_t seed = 0;

  std::size_t total() const;
};

/// Grammar: one `key = value` per line; `#` starts a comment; blank lines are
/// ignored. Keys: `<source>.count` (non-negative integer), `ratio` (positive
/// real), `seed` (unsigned integer). Unknown keys are errors.
MixRecipe parse_recipe(std::string_view content);
std::string serialize_recipe(const MixRecipe& recipe);

/// Built-in recipes: "medium-27k", "augm-31k", "augm-114k".
std::optional<MixRecipe> preset_recipe(std::string_view name);
std::vector<std::string> preset_names();

/// Draws the requested count from every source pool and concatenates them in
/// Source order. Trial ids that collide across sources are rewritten as
/// "<source>/<trial_id>".
Manifest mix(const MixRecipe& recipe, const std::map<Source, Manifest>& pools);

}  // namespace spoofkit
