#include "spoofkit/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "spoofkit/error.hpp"
#include "spoofkit/text.hpp"

namespace spoofkit {

static_assert(std::endian::native == std::endian::little,
              "SPB1 I/O assumes a little-endian host");

void EmbeddingStore::add(EmbeddingRecord record) {
  if (record.frames == 0 || record.dim == 0) {
    throw Error(Errc::invalid_argument, "record '" + record.trial_id + "' has an empty shape");
  }
  if (record.data.size() != std::size_t(record.frames) * record.dim) {
    throw Error(Errc::dim_mismatch, "record '" + record.trial_id + "' data length " +
                                        std::to_string(record.data.size()) + " != frames*dim");
  }
  if (records_.empty() && dim_ == 0) dim_ = record.dim;
  if (record.dim != dim_) {
    throw Error(Errc::dim_mismatch, "record '" + record.trial_id + "' has dim " +
                                        std::to_string(record.dim) + ", store has " +
                                        std::to_string(dim_));
  }
  for (float v : record.data) {
    if (!std::isfinite(v)) {
      throw Error(Errc::non_finite, "record '" + record.trial_id + "' contains a non-finite value");
    }
  }
  if (index_.count(record.trial_id)) {
    throw Error(Errc::duplicate_id, "trial '" + record.trial_id + "' already in store");
  }
  index_.emplace(record.trial_id, records_.size());
  records_.push_back(std::move(record));
}

const EmbeddingRecord* EmbeddingStore::find(std::string_view trial_id) const {
  auto it = index_.find(std::string(trial_id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

bool EmbeddingStore::pooled() const {
  for (const auto& r : records_) {
    if (r.frames != 1) return false;
  }
  return true;
}

std::vector<double> pooled_mean(const EmbeddingRecord& record) {
  if (record.frames == 0) throw Error(Errc::invalid_argument, "record '" + record.trial_id + "' has no frames");
  if (record.data.size() != std::size_t(record.frames) * record.dim) {
    throw Error(Errc::dim_mismatch, "record '" + record.trial_id + "' data length != frames*dim");
  }
  std::vector<double> acc(record.dim, 0.0);
  for (std::size_t t = 0; t < record.frames; ++t) {
    const float* row = record.data.data() + t * record.dim;
    for (std::size_t d = 0; d < record.dim; ++d) {
      if (!std::isfinite(row[d])) {
        throw Error(Errc::non_finite, "record '" + record.trial_id + "' contains a non-finite value");
      }
      acc[d] += row[d];
    }
  }
  for (auto& v : acc) v /= static_cast<double>(record.frames);
  return acc;
}

EmbeddingRecord average_pool(const EmbeddingRecord& record) {
  const std::vector<double> mean = pooled_mean(record);
  EmbeddingRecord out{record.trial_id, 1, record.dim, std::vector<float>(record.dim)};
  for (std::size_t d = 0; d < record.dim; ++d) out.data[d] = static_cast<float>(mean[d]);
  return out;
}

EmbeddingStore average_pool(const EmbeddingStore& store) {
  EmbeddingStore out(store.dim());
  for (const auto& r : store.records()) out.add(average_pool(r));
  return out;
}

namespace {

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    T value;
    need(sizeof(T), what);
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw Error(Errc::truncated, std::string("file ends inside ") + what + " at offset " +
                                       std::to_string(pos_));
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_store(const EmbeddingStore& store) {
  std::string out;
  std::size_t bytes = 12;
  for (const auto& r : store.records()) bytes += 6 + r.trial_id.size() + r.data.size() * 4;
  out.reserve(bytes);
  out.append(kStoreMagic, 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(store.size()));
  put<std::uint32_t>(out, store.dim());
  for (const auto& r : store.records()) {
    if (r.trial_id.size() > 0xffff) throw Error(Errc::invalid_argument, "trial id longer than 65535 bytes");
    put<std::uint16_t>(out, static_cast<std::uint16_t>(r.trial_id.size()));
    out += r.trial_id;
    put<std::uint32_t>(out, r.frames);
    out.append(reinterpret_cast<const char*>(r.data.data()), r.data.size() * sizeof(float));
  }
  return out;
}

EmbeddingStore decode_store(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kStoreMagic, 4) != 0) {
    throw Error(Errc::bad_magic, "not an SPB1 embedding store");
  }
  Reader in(bytes.substr(4));
  const auto count = in.get<std::uint32_t>("header");
  const auto dim = in.get<std::uint32_t>("header");
  if (dim == 0) throw Error(Errc::dim_mismatch, "store header declares dim 0");
  EmbeddingStore store(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    EmbeddingRecord r;
    const auto id_len = in.get<std::uint16_t>("record header");
    r.trial_id = std::string(in.take(id_len, "record header"));
    r.frames = in.get<std::uint32_t>("record header");
    r.dim = dim;
    const std::size_t floats = std::size_t(r.frames) * dim;
    if (floats > in.remaining() / sizeof(float)) {
      throw Error(Errc::truncated, "payload of record '" + r.trial_id + "' is truncated");
    }
    auto payload = in.take(floats * sizeof(float), "record payload");
    r.data.resize(floats);
    std::memcpy(r.data.data(), payload.data(), payload.size());
    store.add(std::move(r));
  }
  if (in.remaining() != 0) {
    throw Error(Errc::dim_mismatch, std::to_string(in.remaining()) +
                                        " trailing bytes after the declared records; header dim or count is wrong");
  }
  return store;
}

EmbeddingStore read_store(const std::filesystem::path& path) {
  try {
    return decode_store(text::read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_store(const std::filesystem::path& path, const EmbeddingStore& store) {
  text::write_file(path, encode_store(store));
}

std::size_t store_file_size(std::uint32_t dim, std::span<const std::size_t> id_lengths,
                            std::span<const std::uint32_t> frames) {
  std::size_t total = 4 + 4 + 4;
  for (std::size_t i = 0; i < id_lengths.size(); ++i) {
    total += 2 + id_lengths[i] + 4 + std::size_t(frames[i]) * dim * sizeof(float);
  }
  return total;
}

}  // namespace spoofkit
