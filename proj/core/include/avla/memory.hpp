#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avla/policy.hpp"

namespace avla {

inline constexpr std::size_t kEmbeddingDim = 768;
inline constexpr std::size_t kDefaultCapacity = 100;
inline constexpr double kDiversityCoefficient = 0.5;

// Unit-norm instruction embedding.
struct InstructionEmbedding {
  std::vector<double> values;
  friend bool operator==(const InstructionEmbedding&, const InstructionEmbedding&) = default;
};

// Hashed token/bigram encoder at kEmbeddingDim dimensions. Throws
// EmptyInstruction when nothing survives tokenization.
InstructionEmbedding embed(std::string_view instruction);

// Cosine similarity; exactly 1 for identical vectors.
double cosine(std::span<const double> a, std::span<const double> b);

struct EntryMeta {
  std::string instruction;
  double success_rate = 0.0;
  std::uint32_t training_iterations = 0;
  std::uint32_t task_complexity = 0;
  std::int64_t created_at = 0;
  friend bool operator==(const EntryMeta&, const EntryMeta&) = default;
};

// Stored values are rounded to f32 on insertion, matching the file format,
// so a saved bank reloads bit-for-bit.
struct MemoryEntry {
  InstructionEmbedding embedding;
  PolicyParams params;
  EntryMeta meta;
  friend bool operator==(const MemoryEntry&, const MemoryEntry&) = default;
};

struct Neighbor {
  const MemoryEntry* entry = nullptr;
  double cosine = 0.0;
};

enum class InsertOutcome { kAdded, kAddedWithEviction, kReplaced, kDropped, kUnchanged };

class MemoryBank {
 public:
  explicit MemoryBank(std::string version_tag, std::size_t capacity = kDefaultCapacity,
                      std::size_t embedding_dim = kEmbeddingDim);

  [[nodiscard]] const std::vector<MemoryEntry>& entries() const { return entries_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] std::size_t embedding_dim() const { return embedding_dim_; }
  [[nodiscard]] const std::string& version_tag() const { return version_tag_; }

  // Same instruction already stored: replace when the new success rate is
  // at least the old one, otherwise drop the newcomer. Full bank: evict the
  // lowest eviction_score first.
  InsertOutcome insert(MemoryEntry entry);

  // score(i) = success_rate_i + 0.5 * min_{j != i} (1 - cos(e_i, e_j));
  // the diversity term is 0 for a single-entry bank.
  [[nodiscard]] double eviction_score(std::size_t i) const;

  // Top min(k, size) entries by cosine, descending; ties go to the earlier
  // created_at, then the lexicographically smaller instruction. Pointers
  // stay valid until the bank is next modified.
  [[nodiscard]] std::vector<Neighbor> retrieve(const InstructionEmbedding& query,
                                               std::size_t k) const;

  // Appends without validation or eviction; used by the loaders.
  void restore(MemoryEntry entry) { entries_.push_back(std::move(entry)); }

  friend bool operator==(const MemoryBank&, const MemoryBank&) = default;

 private:
  void validate(const MemoryEntry& entry) const;

  std::string version_tag_;
  std::size_t capacity_;
  std::size_t embedding_dim_;
  std::vector<MemoryEntry> entries_;
};

// Softmax weights exp(cos_j / tau) / sum exp(cos_j' / tau), max-subtracted.
std::vector<double> interpolation_weights(std::span<const double> cosines, double tau);

// theta_init = sum_j w_j theta_j. Throws EmptyNeighborSet, VersionMismatch.
PolicyParams interpolate(std::span<const Neighbor> neighbors, double tau);

// Base params for an empty bank, otherwise interpolation over the k
// nearest stored instructions.
PolicyParams warm_start(const MemoryBank& bank, std::string_view instruction,
                        const PolicyParams& base_params, std::size_t k, double tau);

MemoryEntry make_entry(std::string_view instruction, const PolicyParams& params,
                       double success_rate, std::uint32_t training_iterations,
                       std::uint32_t task_complexity, std::int64_t created_at);

// Binary bank file, little-endian:
//   "AVEM" | u32 format version | u32 len + fingerprint bytes | u32 dim |
//   u64 param length | u32 entry count |
//   per entry: dim x f32 embedding, L x f32 params,
//              u32 len + { u32 len + instruction, f32 success_rate,
//                          u32 training_iterations, u32 task_complexity,
//                          i64 created_at } |
//   u32 CRC-32 of every preceding byte.
inline constexpr std::uint32_t kBankFormatVersion = 1;

std::vector<std::uint8_t> serialize_bank(const MemoryBank& bank);
// Throws CorruptBank on bad magic, version, length or checksum, and
// VersionMismatch when expected_tag is given and differs.
MemoryBank deserialize_bank(std::span<const std::uint8_t> bytes,
                            std::optional<std::string_view> expected_tag = std::nullopt,
                            std::size_t capacity = kDefaultCapacity);

void save_bank(const MemoryBank& bank, const std::filesystem::path& path);
MemoryBank load_bank(const std::filesystem::path& path,
                     std::optional<std::string_view> expected_tag = std::nullopt,
                     std::size_t capacity = kDefaultCapacity);

// Lossless JSON rendering for inspection; import_bank_text inverts it.
std::string export_bank_text(const MemoryBank& bank);
MemoryBank import_bank_text(std::string_view text, std::size_t capacity = kDefaultCapacity);

// Readers see the bank either before or after a write, never midway.
class SharedMemoryBank {
 public:
  explicit SharedMemoryBank(MemoryBank bank) : bank_(std::move(bank)) {}

  PolicyParams warm_start(std::string_view instruction, const PolicyParams& base_params,
                          std::size_t k, double tau) const;
  std::vector<std::pair<MemoryEntry, double>> retrieve(const InstructionEmbedding& query,
                                                       std::size_t k) const;
  InsertOutcome insert(MemoryEntry entry);
  void save(const std::filesystem::path& path) const;
  [[nodiscard]] MemoryBank snapshot() const;

 private:
  mutable std::shared_mutex mutex_;
  MemoryBank bank_;
};

}  // namespace avla
