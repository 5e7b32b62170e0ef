#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "avla/errors.hpp"
#include "avla/memory.hpp"
#include "avla/text_embedding.hpp"
#include "avla/trainer.hpp"

namespace avla {
namespace {

const std::string kTag = "test-tag";

PolicyParams params_of(std::vector<double> theta) { return {std::move(theta), kTag}; }

MemoryEntry synthetic(std::vector<double> embedding, std::vector<double> theta, std::string instruction,
                      double success, std::int64_t created_at) {
  MemoryEntry e;
  e.embedding.values = std::move(embedding);
  e.params = params_of(std::move(theta));
  e.meta = {std::move(instruction), success, 10, 3, created_at};
  return e;
}

std::vector<double> unit(std::vector<double> v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

std::vector<double> basis(std::size_t dim, std::size_t i) {
  std::vector<double> v(dim, 0.0);
  v[i] = 1.0;
  return v;
}

double independent_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<long double>(a[i]) * b[i];
    aa += static_cast<long double>(a[i]) * a[i];
    bb += static_cast<long double>(b[i]) * b[i];
  }
  return static_cast<double>(ab / std::sqrt(aa * bb));
}

// Sparse token/bigram counts keyed by string, cosine computed by hand.
double sparse_cosine(const std::string& a, const std::string& b) {
  auto counts = [](const std::string& text) {
    std::map<std::string, double> m;
    const auto tok = tokenize(text);
    for (std::size_t i = 0; i < tok.size(); ++i) {
      m["t:" + tok[i]] += 1.0;
      if (i + 1 < tok.size()) m["b:" + tok[i] + " " + tok[i + 1]] += 0.5;
    }
    return m;
  };
  const auto ma = counts(a), mb = counts(b);
  double dot = 0, na = 0, nb = 0;
  for (const auto& [k, v] : ma) {
    na += v * v;
    if (auto it = mb.find(k); it != mb.end()) dot += v * it->second;
  }
  for (const auto& [k, v] : mb) nb += v * v;
  return dot / std::sqrt(na * nb);
}

bool collision_free(const std::vector<std::string>& texts) {
  std::map<std::size_t, std::string> owner;
  for (const auto& text : texts) {
    const auto tok = tokenize(text);
    for (std::size_t i = 0; i < tok.size(); ++i) {
      const std::string key = "t:" + tok[i];
      const auto b = token_bucket(tok[i], kEmbeddingDim);
      if (auto [it, fresh] = owner.emplace(b, key); !fresh && it->second != key) return false;
      if (i + 1 < tok.size()) {
        const std::string bkey = "b:" + tok[i] + " " + tok[i + 1];
        const auto bb = bigram_bucket(tok[i], tok[i + 1], kEmbeddingDim);
        if (auto [it, fresh] = owner.emplace(bb, bkey); !fresh && it->second != bkey) return false;
      }
    }
  }
  return true;
}

TEST(Memory, EmbeddingIsUnitNormAndDeterministic) {
  for (const char* s : {"approach the stove", "turn on the stove and put the moka pot on it", "x"}) {
    const auto e = embed(s);
    ASSERT_EQ(e.values.size(), kEmbeddingDim);
    double n = 0;
    for (double x : e.values) n += x * x;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-6);
    EXPECT_EQ(e, embed(s));
    EXPECT_EQ(cosine(e.values, embed(s).values), 1.0);
  }
  EXPECT_THROW(embed("  ...  "), EmptyInstruction);
}

TEST(Memory, DisjointInstructionsHaveZeroCosine) {
  ASSERT_NE(token_bucket("alpha", kEmbeddingDim), token_bucket("omega", kEmbeddingDim));
  EXPECT_EQ(cosine(embed("alpha").values, embed("omega").values), 0.0);
}

TEST(Memory, LexicalSimilarityOrdering) {
  const std::string bowl = "pick up the bowl", plate = "pick up the plate", stove = "turn on the stove";
  ASSERT_TRUE(collision_free({bowl, plate, stove}));
  const double near = cosine(embed(bowl).values, embed(plate).values);
  const double far = cosine(embed(bowl).values, embed(stove).values);
  EXPECT_NEAR(near, sparse_cosine(bowl, plate), 1e-12);
  EXPECT_NEAR(far, sparse_cosine(bowl, stove), 1e-12);
  EXPECT_NEAR(near, 3.5 / 4.75, 1e-12);
  EXPECT_NEAR(far, 1.0 / 4.75, 1e-12);
  EXPECT_GT(near, far);
}

TEST(Memory, CosineSymmetricAndNonNegative) {
  const std::vector<std::string> texts = {"turn on the stove and put the moka pot on it",
                                          "pick up the bowl and place it in the basket",
                                          "open the drawer and put the bowl in it", "approach the stove",
                                          "put the apple and then the pear in the box"};
  for (const auto& a : texts) {
    for (const auto& b : texts) {
      const double ab = cosine(embed(a).values, embed(b).values);
      EXPECT_EQ(ab, cosine(embed(b).values, embed(a).values));
      EXPECT_GE(ab, 0.0);
      EXPECT_LE(ab, 1.0);
    }
  }
}

TEST(Memory, RetrieveSingleAndEmpty) {
  MemoryBank bank(kTag, 10, 4);
  EXPECT_TRUE(bank.retrieve({basis(4, 0)}, 3).empty());
  bank.insert(synthetic(basis(4, 1), {1, 2}, "only", 0.5, 0));
  const auto n = bank.retrieve({basis(4, 0)}, 3);
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(n[0].entry->meta.instruction, "only");
}

TEST(Memory, RetrieveMatchesBruteForce) {
  Rng rng(1);
  for (int b = 0; b < 100; ++b) {
    const std::size_t dim = 6;
    const std::size_t n = 1 + rng.next_u64() % 200;
    MemoryBank bank(kTag, 200, dim);
    // A small pool of directions makes exact cosine ties common.
    std::vector<std::vector<double>> pool;
    for (int i = 0; i < 8; ++i) {
      std::vector<double> v(dim);
      for (double& x : v) x = rng.uniform() + 0.01;
      pool.push_back(unit(v));
    }
    for (std::size_t i = 0; i < n; ++i) {
      bank.insert(synthetic(pool[rng.next_u64() % pool.size()], {rng.normal()},
                            "task " + std::to_string(rng.next_u64() % 100000) + "-" + std::to_string(i),
                            rng.uniform(), static_cast<std::int64_t>(rng.next_u64() % 20)));
    }
    std::vector<double> q(dim);
    for (double& x : q) x = rng.uniform();
    const InstructionEmbedding query{unit(q)};
    const std::size_t k = 1 + rng.next_u64() % 12;

    std::vector<std::pair<double, const MemoryEntry*>> all;
    for (const auto& e : bank.entries()) {
      const double c = cosine(query.values, e.embedding.values);
      EXPECT_NEAR(c, independent_cosine(query.values, e.embedding.values), 1e-12);
      all.emplace_back(c, &e);
    }
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
      return std::tie(y.first, x.second->meta.created_at, x.second->meta.instruction) <
             std::tie(x.first, y.second->meta.created_at, y.second->meta.instruction);
    });
    const auto got = bank.retrieve(query, k);
    ASSERT_EQ(got.size(), std::min(k, all.size()));
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].entry, all[i].second) << "bank " << b << " rank " << i;
      EXPECT_EQ(got[i].cosine, all[i].first);
    }
  }
}

TEST(Memory, InterpolationWeightsExamples) {
  const auto w = interpolation_weights(std::vector<double>{0.9, 0.7}, 0.1);
  const long double e9 = std::exp(9.0L), e7 = std::exp(7.0L);
  EXPECT_NEAR(w[0], static_cast<double>(e9 / (e9 + e7)), 1e-15);
  EXPECT_NEAR(w[1], static_cast<double>(e7 / (e9 + e7)), 1e-15);
  EXPECT_NEAR(w[0], 0.8808, 1e-4);
  EXPECT_THROW(interpolation_weights(std::vector<double>{}, 0.1), EmptyNeighborSet);
}

TEST(Memory, InterpolationWeightsSumToOne) {
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> c(1 + rng.next_u64() % 10);
    for (double& x : c) x = rng.uniform() * 2 - 1;
    const double tau = std::pow(10.0, -3.0 + 5.0 * rng.uniform());
    const auto w = interpolation_weights(c, tau);
    double s = 0;
    for (double x : w) {
      EXPECT_GE(x, 0.0);
      s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Memory, InterpolationIsConvex) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    MemoryBank bank(kTag, 20, 4);
    const std::size_t n = 1 + rng.next_u64() % 5;
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> theta(16);
      for (double& x : theta) x = rng.normal();
      std::vector<double> e(4);
      for (double& x : e) x = rng.uniform() + 0.01;
      bank.insert(synthetic(unit(e), theta, "t" + std::to_string(j), 0.5, static_cast<std::int64_t>(j)));
    }
    std::vector<double> q(4);
    for (double& x : q) x = rng.uniform();
    const auto neighbors = bank.retrieve({unit(q)}, 5);
    const auto out = interpolate(neighbors, 0.05 + rng.uniform());
    EXPECT_EQ(out.version_tag, kTag);
    for (std::size_t i = 0; i < out.theta.size(); ++i) {
      double lo = 1e300, hi = -1e300;
      for (const auto& nb : neighbors) {
        lo = std::min(lo, nb.entry->params.theta[i]);
        hi = std::max(hi, nb.entry->params.theta[i]);
      }
      EXPECT_GE(out.theta[i], lo - 1e-12);
      EXPECT_LE(out.theta[i], hi + 1e-12);
    }
  }
}

TEST(Memory, InterpolateSingleAndSymmetricPairs) {
  MemoryBank bank(kTag, 10, 2);
  bank.insert(synthetic({1, 0}, {1.0, -3.0}, "a", 0.5, 0));
  bank.insert(synthetic({0, 1}, {3.0, 5.0}, "b", 0.5, 1));
  const auto one = bank.retrieve({{1, 0}}, 1);
  EXPECT_EQ(interpolate(one, 0.1).theta, (std::vector<double>{1.0, -3.0}));
  const auto both = bank.retrieve({unit({1, 1})}, 2);
  ASSERT_EQ(both[0].cosine, both[1].cosine);
  const auto mean = interpolate(both, 0.1);
  EXPECT_NEAR(mean.theta[0], 2.0, 1e-15);
  EXPECT_NEAR(mean.theta[1], 1.0, 1e-15);
}

TEST(Memory, InterpolateRejectsMixedTags) {
  MemoryEntry a = synthetic({1, 0}, {1.0}, "a", 0.5, 0);
  MemoryEntry b = synthetic({0, 1}, {2.0}, "b", 0.5, 1);
  b.params.version_tag = "other";
  const std::vector<Neighbor> n = {{&a, 0.5}, {&b, 0.5}};
  EXPECT_THROW(interpolate(n, 0.1), VersionMismatch);
  EXPECT_THROW(interpolate(std::span<const Neighbor>{}, 0.1), EmptyNeighborSet);
  MemoryBank bank(kTag, 10, 2);
  EXPECT_THROW(bank.insert(b), VersionMismatch);
}

TEST(Memory, WarmStartColdAndDominantMatch) {
  const FeatureLayout layout{};
  const std::string tag = layout.fingerprint();
  const PolicyParams base = hint_following_prior(layout, 4.0);
  MemoryBank bank(tag);
  EXPECT_EQ(warm_start(bank, "approach the stove", base, 3, 0.1), base);

  const std::string target = "pick up the bowl and place it in the basket";
  const std::vector<std::string> others = {"switch on a hotplate", "open a microwave"};
  Rng rng(4);
  auto random_theta = [&] {
    PolicyParams p = zero_params(layout);
    for (double& x : p.theta) x = rng.normal();
    return p;
  };
  bank.insert(make_entry(target, random_theta(), 0.9, 10, 4, 0));
  for (std::size_t i = 0; i < others.size(); ++i) {
    ASSERT_LE(cosine(embed(target).values, embed(others[i]).values), 0.3);
    bank.insert(make_entry(others[i], random_theta(), 0.9, 10, 4, static_cast<std::int64_t>(i + 1)));
  }
  const auto out = warm_start(bank, target, base, 3, 0.1);
  const auto& match = bank.entries()[0].params.theta;
  // Scale: the largest elementwise spread between stored parameter vectors.
  double scale = 0;
  for (const auto& e : bank.entries()) {
    for (std::size_t i = 0; i < match.size(); ++i) scale = std::max(scale, std::abs(e.params.theta[i] - match[i]));
  }
  for (std::size_t i = 0; i < match.size(); ++i) EXPECT_LE(std::abs(out.theta[i] - match[i]), 1e-3 * scale);
  const auto neighbors = bank.retrieve(embed(target), 3);
  std::vector<double> cos;
  for (const auto& n : neighbors) cos.push_back(n.cosine);
  EXPECT_GE(interpolation_weights(cos, 0.1)[0], 0.999);

  EXPECT_THROW(warm_start(bank, target, params_of({1.0}), 3, 0.1), VersionMismatch);
}

TEST(Memory, DominanceBoundWithRivalsAtPointThree) {
  // Two rivals at exactly 0.3 leave the match 1 / (1 + 2 e^-7) of the mass.
  const auto w = interpolation_weights(std::vector<double>{1.0, 0.3, 0.3}, 0.1);
  const long double expected = 1.0L / (1.0L + 2.0L * std::exp(-7.0L));
  EXPECT_NEAR(w[0], static_cast<double>(expected), 1e-12);
  EXPECT_NEAR(w[0], 0.99818, 1e-5);
}

TEST(Memory, SharplyPeakedRetrieval) {
  Rng rng(5);
  for (int i = 0; i < 5000; ++i) {
    std::vector<double> c(2 + rng.next_u64() % 2);
    for (double& x : c) x = rng.uniform();
    std::sort(c.rbegin(), c.rend());
    if (c[0] - c[1] <= 0.07) continue;
    EXPECT_GT(interpolation_weights(c, 0.1)[0], 0.5);
  }
}

TEST(Memory, InsertWithoutEviction) {
  MemoryBank bank(kTag, 3, 2);
  EXPECT_EQ(bank.insert(synthetic({1, 0}, {1}, "a", 0.5, 0)), InsertOutcome::kAdded);
  EXPECT_EQ(bank.size(), 1u);
  EXPECT_EQ(bank.insert(synthetic({0, 1}, {1}, "b", 0.5, 1)), InsertOutcome::kAdded);
  EXPECT_EQ(bank.size(), 2u);
}

TEST(Memory, IdenticalEmbeddingsEvictLowestSuccess) {
  MemoryBank bank(kTag, 3, 2);
  bank.insert(synthetic({1, 0}, {1}, "a", 0.7, 0));
  bank.insert(synthetic({1, 0}, {1}, "b", 0.2, 1));
  bank.insert(synthetic({1, 0}, {1}, "c", 0.9, 2));
  EXPECT_EQ(bank.insert(synthetic({1, 0}, {1}, "d", 0.5, 3)), InsertOutcome::kAddedWithEviction);
  std::set<std::string> names;
  for (const auto& e : bank.entries()) names.insert(e.meta.instruction);
  EXPECT_EQ(names, (std::set<std::string>{"a", "c", "d"}));
}

TEST(Memory, RedundantMidQualityEntryEvicted) {
  // Scores: a = 0.9 + 0.5*0 = 0.9, b = 0.6 + 0.5*0 = 0.6, c = 0.5 + 0.5*1 = 1.0.
  MemoryBank bank(kTag, 3, 3);
  bank.insert(synthetic(basis(3, 0), {1}, "a", 0.9, 0));
  bank.insert(synthetic(basis(3, 0), {1}, "b", 0.6, 1));
  bank.insert(synthetic(basis(3, 1), {1}, "c", 0.5, 2));
  EXPECT_NEAR(bank.eviction_score(0), 0.9, 1e-6);
  EXPECT_NEAR(bank.eviction_score(1), 0.6, 1e-6);
  EXPECT_NEAR(bank.eviction_score(2), 1.0, 1e-6);
  bank.insert(synthetic(basis(3, 2), {1}, "d", 0.4, 3));
  std::set<std::string> names;
  for (const auto& e : bank.entries()) names.insert(e.meta.instruction);
  EXPECT_EQ(names, (std::set<std::string>{"a", "c", "d"}));
}

TEST(Memory, DuplicateInstructionPolicy) {
  MemoryBank bank(kTag, 5, 2);
  bank.insert(synthetic({1, 0}, {1}, "a", 0.6, 0));
  EXPECT_EQ(bank.insert(synthetic({1, 0}, {2}, "a", 0.5, 1)), InsertOutcome::kDropped);
  EXPECT_EQ(bank.entries()[0].params.theta[0], 1.0);
  EXPECT_EQ(bank.insert(synthetic({1, 0}, {3}, "a", 0.6, 2)), InsertOutcome::kReplaced);
  EXPECT_EQ(bank.entries()[0].params.theta[0], 3.0);
  const MemoryBank before = bank;
  EXPECT_EQ(bank.insert(synthetic({1, 0}, {3}, "a", 0.6, 2)), InsertOutcome::kUnchanged);
  EXPECT_EQ(bank, before);
  EXPECT_EQ(bank.size(), 1u);
}

TEST(Memory, CapacityNeverExceeded) {
  Rng rng(6);
  MemoryBank bank(kTag, 7, 3);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> e(3);
    for (double& x : e) x = rng.uniform() + 0.01;
    bank.insert(synthetic(unit(e), {rng.normal()}, "t" + std::to_string(rng.next_u64() % 30),
                          rng.uniform(), i));
    ASSERT_LE(bank.size(), bank.capacity());
  }
}

MemoryBank random_bank(std::size_t n, Rng& rng) {
  const FeatureLayout layout{};
  MemoryBank bank(layout.fingerprint(), 100);
  for (std::size_t i = 0; i < n; ++i) {
    PolicyParams p = zero_params(layout);
    for (double& x : p.theta) x = rng.normal();
    bank.insert(make_entry("pick up the item " + std::to_string(i) + " and place it in the bin", p,
                           rng.uniform(), static_cast<std::uint32_t>(rng.next_u64() % 1000),
                           4, static_cast<std::int64_t>(i)));
  }
  return bank;
}

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "avla_memory_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

TEST(Memory, EmptyBankRoundTrips) {
  const MemoryBank bank(FeatureLayout{}.fingerprint());
  const auto path = temp_file("empty.avem");
  save_bank(bank, path);
  EXPECT_EQ(load_bank(path), bank);
}

TEST(Memory, HundredEntryBankRoundTripsBitExact) {
  Rng rng(7);
  const MemoryBank bank = random_bank(100, rng);
  ASSERT_EQ(bank.size(), 100u);
  const auto path = temp_file("hundred.avem");
  save_bank(bank, path);
  const MemoryBank loaded = load_bank(path, bank.version_tag());
  EXPECT_EQ(loaded, bank);
  EXPECT_EQ(serialize_bank(loaded), serialize_bank(bank));
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const auto& a = bank.entries()[i].params.theta;
    const auto& b = loaded.entries()[i].params.theta;
    EXPECT_EQ(0, std::memcmp(a.data(), b.data(), a.size() * sizeof(double)));
  }
}

TEST(Memory, TruncatedOrCorruptedFilesFailClosed) {
  Rng rng(8);
  const auto bytes = serialize_bank(random_bank(5, rng));
  for (std::size_t len : {std::size_t{0}, std::size_t{3}, std::size_t{12}, bytes.size() / 2, bytes.size() - 1}) {
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(len));
    EXPECT_THROW(deserialize_bank(cut), CorruptBank) << len;
  }
  for (std::size_t pos : {std::size_t{0}, std::size_t{6}, bytes.size() / 3, bytes.size() - 2}) {
    auto flipped = bytes;
    flipped[pos] ^= 0x40;
    EXPECT_THROW(deserialize_bank(flipped), CorruptBank) << pos;
  }
  EXPECT_THROW(deserialize_bank(bytes, std::string_view("other")), VersionMismatch);
  EXPECT_THROW(load_bank(temp_file("missing.avem")), CorruptBank);
  const auto path = temp_file("truncated.avem");
  {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size() - 7));
  }
  EXPECT_THROW(load_bank(path), CorruptBank);
}

TEST(Memory, TextExportRoundTrips) {
  Rng rng(9);
  const MemoryBank bank = random_bank(6, rng);
  EXPECT_EQ(import_bank_text(export_bank_text(bank)), bank);
  EXPECT_THROW(import_bank_text("{not json"), CorruptBank);
}

TEST(Memory, ConcurrentReadersSeeWholeBanks) {
  SharedMemoryBank shared(MemoryBank(kTag, 1000, 2));
  std::atomic<bool> stop{false};
  std::atomic<int> violations{0};
  auto reader = [&] {
    std::size_t last = 0;
    while (!stop.load()) {
      const MemoryBank snap = shared.snapshot();
      if (snap.size() < last) ++violations;
      last = snap.size();
      for (std::size_t i = 0; i < snap.size(); ++i) {
        // Entry i was written with every parameter equal to i.
        for (double x : snap.entries()[i].params.theta) {
          if (x != static_cast<double>(i)) ++violations;
        }
      }
      const auto hits = shared.retrieve({{1, 0}}, 3);
      if (hits.size() > 3) ++violations;
    }
  };
  std::vector<std::thread> readers;
  for (int i = 0; i < 4; ++i) readers.emplace_back(reader);
  for (int i = 0; i < 300; ++i) {
    shared.insert(synthetic({1, 0}, std::vector<double>(32, static_cast<double>(i)),
                            "t" + std::to_string(i), 0.5, i));
  }
  stop = true;
  for (auto& t : readers) t.join();
  EXPECT_EQ(violations.load(), 0);
  EXPECT_EQ(shared.snapshot().size(), 300u);
}

}  // namespace
}  // namespace avla
