#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace avla {

enum class SuggestionSource { kNone, kHeuristic, kExternal };

std::string_view source_name(SuggestionSource s);

// A language hint and its hashed feature encoding. `features` is all-zero
// exactly when source is kNone.
struct Suggestion {
  std::string text;
  std::vector<double> features;
  SuggestionSource source = SuggestionSource::kNone;

  [[nodiscard]] bool active() const { return source != SuggestionSource::kNone; }
};

// Encodes hint text with the instruction encoder at `dim` dimensions.
Suggestion make_suggestion(std::string text, SuggestionSource source, std::size_t dim);
Suggestion no_suggestion(std::size_t dim);

}  // namespace avla
