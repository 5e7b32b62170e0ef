#include "avla/suggestion.hpp"

#include "avla/text_embedding.hpp"

namespace avla {

std::string_view source_name(SuggestionSource s) {
  switch (s) {
    case SuggestionSource::kNone: return "none";
    case SuggestionSource::kHeuristic: return "heuristic";
    case SuggestionSource::kExternal: return "external";
  }
  return "?";
}

Suggestion make_suggestion(std::string text, SuggestionSource source, std::size_t dim) {
  if (source == SuggestionSource::kNone || tokenize(text).empty()) return no_suggestion(dim);
  Suggestion s;
  s.features = hashed_encoding(text, dim);
  s.text = std::move(text);
  s.source = source;
  return s;
}

Suggestion no_suggestion(std::size_t dim) {
  Suggestion s;
  s.features.assign(dim, 0.0);
  return s;
}

}  // namespace avla
