#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "avla/policy.hpp"

namespace avla {

// Parameter file, little-endian:
//   "AVPP" | u32 format version | u32 len + version_tag bytes |
//   u64 L | L x f64 theta | u32 CRC-32 of every preceding byte.
inline constexpr std::uint32_t kParamsFormatVersion = 1;

std::vector<std::uint8_t> serialize_params(const PolicyParams& params);
// Throws CorruptBank on framing or checksum errors and VersionMismatch when
// expected_tag is given and differs.
PolicyParams deserialize_params(std::span<const std::uint8_t> bytes,
                                std::optional<std::string_view> expected_tag = std::nullopt);

void save_params(const PolicyParams& params, const std::filesystem::path& path);
PolicyParams load_params(const std::filesystem::path& path,
                         std::optional<std::string_view> expected_tag = std::nullopt);

}  // namespace avla
