#include "avla/params_io.hpp"

#include <fstream>

#include "avla/errors.hpp"
#include "binary_io.hpp"

namespace avla {

using detail::crc32_of;
using detail::Reader;
using detail::Writer;

std::vector<std::uint8_t> serialize_params(const PolicyParams& params) {
  Writer w;
  w.bytes("AVPP");
  w.u32(kParamsFormatVersion);
  w.prefixed(params.version_tag);
  w.u64(params.theta.size());
  for (double x : params.theta) w.f64(x);
  w.u32(crc32_of(w.buffer()));
  return std::move(w.buffer());
}

PolicyParams deserialize_params(std::span<const std::uint8_t> bytes,
                                std::optional<std::string_view> expected_tag) {
  if (bytes.size() < 8) throw CorruptBank("parameter file too short");
  const auto body = bytes.first(bytes.size() - 4);
  Reader tail(bytes.last(4));
  if (tail.u32() != crc32_of(body)) throw CorruptBank("parameter checksum mismatch");
  Reader r(body);
  if (r.bytes(4) != "AVPP") throw CorruptBank("bad parameter magic");
  if (r.u32() != kParamsFormatVersion) throw CorruptBank("unsupported parameter format");
  PolicyParams p;
  p.version_tag = r.prefixed();
  if (expected_tag && p.version_tag != *expected_tag) {
    throw VersionMismatch("parameters '" + p.version_tag + "' vs expected '" +
                          std::string(*expected_tag) + "'");
  }
  const std::uint64_t n = r.u64();
  if (n > (body.size() - r.position()) / 8) throw CorruptBank("parameter length exceeds file");
  p.theta.resize(n);
  for (auto& x : p.theta) x = r.f64();
  if (r.position() != body.size()) throw CorruptBank("trailing bytes after parameters");
  return p;
}

void save_params(const PolicyParams& params, const std::filesystem::path& path) {
  const auto bytes = serialize_params(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

PolicyParams load_params(const std::filesystem::path& path,
                         std::optional<std::string_view> expected_tag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptBank("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_params(bytes, expected_tag);
}

}  // namespace avla
