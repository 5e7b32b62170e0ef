#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace avla {

// Lowercased alphanumeric tokens; every other character separates tokens.
std::vector<std::string> tokenize(std::string_view text);

// Bucket of a unigram / adjacent bigram under the fixed-seed hash.
std::size_t token_bucket(std::string_view token, std::size_t dim);
std::size_t bigram_bucket(std::string_view first, std::string_view second, std::size_t dim);

// Sparse bag of tokens (+1 each) and adjacent bigrams (+0.5 each), hashed
// into `dim` buckets. Not normalized.
std::vector<double> hashed_counts(std::string_view text, std::size_t dim);

// hashed_counts scaled to unit L2 norm. Throws EmptyInstruction when the
// text has no tokens.
std::vector<double> hashed_encoding(std::string_view text, std::size_t dim);

}  // namespace avla
