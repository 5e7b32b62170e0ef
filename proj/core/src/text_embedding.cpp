#include "avla/text_embedding.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>

#include "avla/errors.hpp"

namespace avla {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
constexpr std::uint64_t kTokenSeed = 0x5eeeULL;
constexpr std::uint64_t kBigramSeed = 0xb16a3ULL;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = kFnvOffset ^ (seed * kFnvPrime);
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  // Final avalanche so low bits depend on every input byte.
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t token_bucket(std::string_view token, std::size_t dim) {
  return static_cast<std::size_t>(fnv1a(token, kTokenSeed) % dim);
}

std::size_t bigram_bucket(std::string_view first, std::string_view second, std::size_t dim) {
  std::string joined;
  joined.reserve(first.size() + second.size() + 1);
  joined.append(first).push_back(' ');
  joined.append(second);
  return static_cast<std::size_t>(fnv1a(joined, kBigramSeed) % dim);
}

std::vector<double> hashed_counts(std::string_view text, std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  const auto tokens = tokenize(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    v[token_bucket(tokens[i], dim)] += 1.0;
    if (i + 1 < tokens.size()) v[bigram_bucket(tokens[i], tokens[i + 1], dim)] += 0.5;
  }
  return v;
}

std::vector<double> hashed_encoding(std::string_view text, std::size_t dim) {
  auto v = hashed_counts(text, dim);
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq == 0.0) throw EmptyInstruction("no tokens in '" + std::string(text) + "'");
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
  return v;
}

}  // namespace avla
