#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace spoofkit {

/// Frame-major T x D matrix of features for one trial. Pooled records have T == 1.
struct EmbeddingRecord {
  std::string trial_id;
  std::uint32_t frames = 0;
  std::uint32_t dim = 0;
  std::vector<float> data;

  std::span<const float> frame(std::size_t t) const { return {data.data() + t * dim, dim}; }

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

/// Ordered records sharing one dimension, with unique trial ids.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::uint32_t dim) : dim_(dim) {}

  /// Validates shape, finiteness, dim agreement and id uniqueness.
  void add(EmbeddingRecord record);

  std::uint32_t dim() const { return dim_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<EmbeddingRecord>& records() const { return records_; }
  const EmbeddingRecord& operator[](std::size_t i) const { return records_[i]; }

  /// nullptr when absent.
  const EmbeddingRecord* find(std::string_view trial_id) const;
  bool pooled() const;

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
    return a.dim_ == b.dim_ && a.records_ == b.records_;
  }

 private:
  std::uint32_t dim_ = 0;
  std::vector<EmbeddingRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Per-dimension mean over frames in double precision.
std::vector<double> pooled_mean(const EmbeddingRecord& record);

/// pooled_mean rounded to float, as a T == 1 record.
EmbeddingRecord average_pool(const EmbeddingRecord& record);
EmbeddingStore average_pool(const EmbeddingStore& store);

// SPB1 layout (little-endian):
//   "SPB1" | u32 record_count | u32 dim
//   per record: u16 id_len | id bytes | u32 frames | frames*dim f32
inline constexpr char kStoreMagic[4] = {'S', 'P', 'B', '1'};

std::string encode_store(const EmbeddingStore& store);
EmbeddingStore decode_store(std::string_view bytes);

EmbeddingStore read_store(const std::filesystem::path& path);
void write_store(const std::filesystem::path& path, const EmbeddingStore& store);

/// Exact byte size of an SPB1 file for the given id lengths and frame counts.
std::size_t store_file_size(std::uint32_t dim, std::span<const std::size_t> id_lengths,
                            std::span<const std::uint32_t> frames);

}  // namespace spoofkit
