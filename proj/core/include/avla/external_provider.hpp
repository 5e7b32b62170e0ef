#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "avla/lge.hpp"

namespace avla {

// Wire protocol for an out-of-process suggestion service (e.g. a VLM
// wrapper). One JSON request/response exchange per suggestion, UTF-8.
//
// request:  { "instruction": str,
//             "observation": { "width", "height", "gripper": [x, y],
//                              "held": str | null, "step_count",
//                              "entities": [ { "id", "kind", "pos": [x, y],
//                                              "toggled" } ] },
//             "unsatisfied_subgoals": [ str, ... ] }
// response: { "suggestion": str }
struct SuggestionRequest {
  std::string instruction;
  WorldState observation;
  std::vector<std::string> unsatisfied_subgoals;

  friend bool operator==(const SuggestionRequest&, const SuggestionRequest&) = default;
};

struct SuggestionResponse {
  std::string suggestion;
};

SuggestionRequest make_request(const WorldState& obs, const TaskSpec& task);

std::string encode_request(const SuggestionRequest& req);
SuggestionRequest decode_request(std::string_view body);  // throws ProviderUnavailable
std::string encode_response(const SuggestionResponse& resp);
SuggestionResponse decode_response(std::string_view body);  // throws ProviderUnavailable

// HTTP client for the protocol: POST <path> with the request body. Any
// transport failure, timeout or malformed reply falls back to the heuristic
// rulebook.
class ExternalProvider final : public SuggestionProvider {
 public:
  struct Options {
    std::string host = "127.0.0.1";
    int port = 8765;
    std::string path = "/suggest";
    std::chrono::milliseconds timeout{500};
  };

  ExternalProvider(Options options, std::size_t dim);

  Suggestion suggest(const WorldState& obs, const TaskSpec& task,
                     const CapabilityTracker& tracker, Rng& rng) override;

  // Single exchange without fallback; throws ProviderUnavailable.
  SuggestionResponse request(const SuggestionRequest& req) const;

  [[nodiscard]] std::size_t fallback_count() const { return fallbacks_; }

 private:
  Options options_;
  std::size_t dim_;
  HeuristicProvider fallback_;
  std::size_t fallbacks_ = 0;
};

}  // namespace avla
