#include "avla/memory.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include <zlib.h>

#include <json.hpp>

#include "avla/errors.hpp"
#include "binary_io.hpp"
#include "avla/text_embedding.hpp"

namespace avla {

namespace {

double to_f32(double x) { return static_cast<double>(static_cast<float>(x)); }

void quantize(std::vector<double>& v) {
  for (double& x : v) x = to_f32(x);
}

}  // namespace

InstructionEmbedding embed(std::string_view instruction) {
  return {hashed_encoding(instruction, kEmbeddingDim)};
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("cosine of vectors with different sizes");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

MemoryBank::MemoryBank(std::string version_tag, std::size_t capacity, std::size_t embedding_dim)
    : version_tag_(std::move(version_tag)), capacity_(capacity), embedding_dim_(embedding_dim) {
  if (capacity_ == 0) throw ConfigError("bank capacity must be positive");
}

void MemoryBank::validate(const MemoryEntry& entry) const {
  if (entry.params.version_tag != version_tag_) {
    throw VersionMismatch("entry tag '" + entry.params.version_tag + "' vs bank tag '" +
                          version_tag_ + "'");
  }
  if (entry.embedding.values.size() != embedding_dim_) {
    throw DimensionMismatch("embedding dimension " +
                            std::to_string(entry.embedding.values.size()));
  }
  if (!entries_.empty() && entry.params.theta.size() != entries_.front().params.theta.size()) {
    throw VersionMismatch("parameter length differs from stored entries");
  }
  if (!(entry.meta.success_rate >= 0.0 && entry.meta.success_rate <= 1.0)) {
    throw ConfigError("success_rate must lie in [0, 1]");
  }
  if (!all_finite(entry.params.theta)) throw ConfigError("entry parameters are not finite");
}

double MemoryBank::eviction_score(std::size_t i) const {
  double min_distance = entries_.size() > 1 ? std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t j = 0; j < entries_.size(); ++j) {
    if (j == i) continue;
    min_distance = std::min(
        min_distance, 1.0 - cosine(entries_[i].embedding.values, entries_[j].embedding.values));
  }
  return entries_[i].meta.success_rate + kDiversityCoefficient * min_distance;
}

InsertOutcome MemoryBank::insert(MemoryEntry entry) {
  validate(entry);
  quantize(entry.embedding.values);
  quantize(entry.params.theta);
  entry.meta.success_rate = to_f32(entry.meta.success_rate);

  for (auto& existing : entries_) {
    if (existing.meta.instruction != entry.meta.instruction) continue;
    if (entry.meta.success_rate < existing.meta.success_rate) return InsertOutcome::kDropped;
    if (existing.meta.success_rate == entry.meta.success_rate &&
        existing.params == entry.params && existing.embedding == entry.embedding) {
      return InsertOutcome::kUnchanged;
    }
    existing = std::move(entry);
    return InsertOutcome::kReplaced;
  }

  InsertOutcome outcome = InsertOutcome::kAdded;
  if (entries_.size() >= capacity_) {
    std::size_t victim = 0;
    double victim_score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const double s = eviction_score(i);
      if (s < victim_score ||
          (s == victim_score && entries_[i].meta.created_at < entries_[victim].meta.created_at)) {
        victim = i;
        victim_score = s;
      }
    }
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(victim));
    outcome = InsertOutcome::kAddedWithEviction;
  }
  entries_.push_back(std::move(entry));
  return outcome;
}

std::vector<Neighbor> MemoryBank::retrieve(const InstructionEmbedding& query,
                                           std::size_t k) const {
  std::vector<Neighbor> all;
  all.reserve(entries_.size());
  for (const auto& e : entries_) all.push_back({&e, cosine(query.values, e.embedding.values)});
  const auto better = [](const Neighbor& a, const Neighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    if (a.entry->meta.created_at != b.entry->meta.created_at) {
      return a.entry->meta.created_at < b.entry->meta.created_at;
    }
    return a.entry->meta.instruction < b.entry->meta.instruction;
  };
  const std::size_t n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), better);
  all.resize(n);
  return all;
}

std::vector<double> interpolation_weights(std::span<const double> cosines, double tau) {
  if (cosines.empty()) throw EmptyNeighborSet("no neighbors to weight");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  const double max_c = *std::max_element(cosines.begin(), cosines.end());
  std::vector<double> w(cosines.size());
  double total = 0.0;
  for (std::size_t j = 0; j < cosines.size(); ++j) {
    w[j] = std::exp((cosines[j] - max_c) / tau);
    total += w[j];
  }
  for (double& x : w) x /= total;
  return w;
}

PolicyParams interpolate(std::span<const Neighbor> neighbors, double tau) {
  if (neighbors.empty()) throw EmptyNeighborSet("interpolate needs at least one neighbor");
  const auto& first = neighbors.front().entry->params;
  std::vector<double> cosines;
  cosines.reserve(neighbors.size());
  for (const auto& n : neighbors) {
    if (n.entry->params.version_tag != first.version_tag ||
        n.entry->params.theta.size() != first.theta.size()) {
      throw VersionMismatch("neighbors carry different architecture fingerprints");
    }
    cosines.push_back(n.cosine);
  }
  const auto w = interpolation_weights(cosines, tau);
  if (neighbors.size() == 1) return first;
  PolicyParams out{std::vector<double>(first.theta.size(), 0.0), first.version_tag};
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    const auto& theta = neighbors[j].entry->params.theta;
    for (std::size_t i = 0; i < theta.size(); ++i) out.theta[i] += w[j] * theta[i];
  }
  return out;
}

PolicyParams warm_start(const MemoryBank& bank, std::string_view instruction,
                        const PolicyParams& base_params, std::size_t k, double tau) {
  if (base_params.version_tag != bank.version_tag()) {
    throw VersionMismatch("base params '" + base_params.version_tag + "' vs bank '" +
                          bank.version_tag() + "'");
  }
  if (bank.empty()) return base_params;
  const auto neighbors = bank.retrieve(embed(instruction), k);
  return interpolate(neighbors, tau);
}

MemoryEntry make_entry(std::string_view instruction, const PolicyParams& params,
                       double success_rate, std::uint32_t training_iterations,
                       std::uint32_t task_complexity, std::int64_t created_at) {
  MemoryEntry e;
  e.embedding = embed(instruction);
  e.params = params;
  e.meta = {std::string(instruction), success_rate, training_iterations, task_complexity,
            created_at};
  return e;
}

// ---------------------------------------------------------------------------
// Binary format

using detail::crc32_of;
using detail::Reader;
using detail::Writer;

std::vector<std::uint8_t> serialize_bank(const MemoryBank& bank) {
  Writer w;
  w.bytes("AVEM");
  w.u32(kBankFormatVersion);
  w.prefixed(bank.version_tag());
  w.u32(static_cast<std::uint32_t>(bank.embedding_dim()));
  const std::uint64_t param_len =
      bank.empty() ? 0 : bank.entries().front().params.theta.size();
  w.u64(param_len);
  w.u32(static_cast<std::uint32_t>(bank.size()));
  for (const auto& e : bank.entries()) {
    for (double x : e.embedding.values) w.f32(x);
    for (double x : e.params.theta) w.f32(x);
    Writer meta;
    meta.prefixed(e.meta.instruction);
    meta.f32(e.meta.success_rate);
    meta.u32(e.meta.training_iterations);
    meta.u32(e.meta.task_complexity);
    meta.i64(e.meta.created_at);
    w.u32(static_cast<std::uint32_t>(meta.buffer().size()));
    w.buffer().insert(w.buffer().end(), meta.buffer().begin(), meta.buffer().end());
  }
  w.u32(crc32_of(w.buffer()));
  return std::move(w.buffer());
}

MemoryBank deserialize_bank(std::span<const std::uint8_t> bytes,
                            std::optional<std::string_view> expected_tag, std::size_t capacity) {
  if (bytes.size() < 8) throw CorruptBank("file too short");
  const auto body = bytes.first(bytes.size() - 4);
  Reader tail(bytes.last(4));
  if (tail.u32() != crc32_of(body)) throw CorruptBank("checksum mismatch");

  Reader r(body);
  if (r.bytes(4) != "AVEM") throw CorruptBank("bad magic");
  const auto version = r.u32();
  if (version != kBankFormatVersion) {
    throw CorruptBank("unsupported format version " + std::to_string(version));
  }
  std::string tag = r.prefixed();
  if (expected_tag && tag != *expected_tag) {
    throw VersionMismatch("bank fingerprint '" + tag + "' vs expected '" +
                          std::string(*expected_tag) + "'");
  }
  const std::uint32_t dim = r.u32();
  const std::uint64_t param_len = r.u64();
  const std::uint32_t count = r.u32();
  // Every entry needs at least its vectors plus a length word.
  const std::uint64_t min_entry = 4ULL * (dim + param_len) + 4;
  if (count > 0 && min_entry * count > body.size() - r.position()) {
    throw CorruptBank("entry count exceeds file size");
  }
  MemoryBank bank(std::move(tag), capacity, dim);
  for (std::uint32_t n = 0; n < count; ++n) {
    MemoryEntry e;
    e.embedding.values.resize(dim);
    for (auto& x : e.embedding.values) x = r.f32();
    e.params.theta.resize(param_len);
    for (auto& x : e.params.theta) x = r.f32();
    e.params.version_tag = bank.version_tag();
    const std::uint32_t meta_len = r.u32();
    const std::size_t meta_start = r.position();
    e.meta.instruction = r.prefixed();
    e.meta.success_rate = r.f32();
    e.meta.training_iterations = r.u32();
    e.meta.task_complexity = r.u32();
    e.meta.created_at = r.i64();
    if (r.position() - meta_start != meta_len) throw CorruptBank("metadata length mismatch");
    bank.restore(std::move(e));
  }
  if (r.position() != body.size()) throw CorruptBank("trailing bytes after entries");
  if (bank.size() > bank.capacity()) throw CorruptBank("entry count exceeds capacity");
  return bank;
}

void save_bank(const MemoryBank& bank, const std::filesystem::path& path) {
  const auto bytes = serialize_bank(bank);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write bank file " + tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

MemoryBank load_bank(const std::filesystem::path& path,
                     std::optional<std::string_view> expected_tag, std::size_t capacity) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptBank("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_bank(bytes, expected_tag, capacity);
}

std::string export_bank_text(const MemoryBank& bank) {
  using nlohmann::json;
  json doc;
  doc["format"] = "AVEM";
  doc["format_version"] = kBankFormatVersion;
  doc["fingerprint"] = bank.version_tag();
  doc["embedding_dim"] = bank.embedding_dim();
  doc["capacity"] = bank.capacity();
  doc["entries"] = json::array();
  for (const auto& e : bank.entries()) {
    doc["entries"].push_back({{"instruction", e.meta.instruction},
                              {"success_rate", e.meta.success_rate},
                              {"training_iterations", e.meta.training_iterations},
                              {"task_complexity", e.meta.task_complexity},
                              {"created_at", e.meta.created_at},
                              {"embedding", e.embedding.values},
                              {"params", e.params.theta}});
  }
  return doc.dump(1);
}

MemoryBank import_bank_text(std::string_view text, std::size_t capacity) {
  using nlohmann::json;
  try {
    const json doc = json::parse(text);
    MemoryBank bank(doc.at("fingerprint").get<std::string>(), capacity,
                    doc.at("embedding_dim").get<std::size_t>());
    for (const auto& je : doc.at("entries")) {
      MemoryEntry e;
      e.meta.instruction = je.at("instruction").get<std::string>();
      e.meta.success_rate = je.at("success_rate").get<double>();
      e.meta.training_iterations = je.at("training_iterations").get<std::uint32_t>();
      e.meta.task_complexity = je.at("task_complexity").get<std::uint32_t>();
      e.meta.created_at = je.at("created_at").get<std::int64_t>();
      e.embedding.values = je.at("embedding").get<std::vector<double>>();
      e.params.theta = je.at("params").get<std::vector<double>>();
      e.params.version_tag = bank.version_tag();
      bank.restore(std::move(e));
    }
    return bank;
  } catch (const json::exception& e) {
    throw CorruptBank(std::string("malformed bank export: ") + e.what());
  }
}

PolicyParams SharedMemoryBank::warm_start(std::string_view instruction,
                                          const PolicyParams& base_params, std::size_t k,
                                          double tau) const {
  std::shared_lock lock(mutex_);
  return avla::warm_start(bank_, instruction, base_params, k, tau);
}

std::vector<std::pair<MemoryEntry, double>> SharedMemoryBank::retrieve(
    const InstructionEmbedding& query, std::size_t k) const {
  std::shared_lock lock(mutex_);
  std::vector<std::pair<MemoryEntry, double>> out;
  for (const auto& n : bank_.retrieve(query, k)) out.emplace_back(*n.entry, n.cosine);
  return out;
}

InsertOutcome SharedMemoryBank::insert(MemoryEntry entry) {
  std::unique_lock lock(mutex_);
  MemoryBank next = bank_;
  const auto outcome = next.insert(std::move(entry));
  bank_ = std::move(next);
  return outcome;
}

void SharedMemoryBank::save(const std::filesystem::path& path) const {
  std::shared_lock lock(mutex_);
  save_bank(bank_, path);
}

MemoryBank SharedMemoryBank::snapshot() const {
  std::shared_lock lock(mutex_);
  return bank_;
}

}  // namespace avla
