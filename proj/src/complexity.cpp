#include "envdiff/complexity.hpp"

#include <zlib.h>

#include <algorithm>
#include <stdexcept>

namespace envdiff::complexity {

std::string compressor_id() {
  return std::string("zlib-") + zlibVersion() + "/deflate/level" + std::to_string(kCompressionLevel);
}

std::size_t compressed_len(std::span<const unsigned char> bytes) {
  uLongf out_len = compressBound(static_cast<uLong>(bytes.size()));
  std::vector<Bytef> out(out_len);
  int rc = compress2(out.data(), &out_len, bytes.data(), static_cast<uLong>(bytes.size()), kCompressionLevel);
  if (rc != Z_OK) throw std::runtime_error("zlib compress2 failed with code " + std::to_string(rc));
  return static_cast<std::size_t>(out_len);
}

std::size_t compressed_len(std::string_view bytes) {
  return compressed_len(std::span(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()));
}

std::size_t empty_baseline() {
  static const std::size_t baseline = compressed_len(std::string_view{});
  return baseline;
}

int k_of_program(const apl::Program& program) {
  const auto raw = static_cast<long long>(compressed_len(apl::encode(program)));
  const auto k = raw - static_cast<long long>(empty_baseline());
  return static_cast<int>(std::clamp<long long>(k, 0, static_cast<long long>(program.size())));
}

int k_of_actions(std::span<const saeca::Action> actions) {
  std::vector<unsigned char> bytes;
  bytes.reserve(actions.size());
  for (const auto& a : actions) bytes.push_back(static_cast<unsigned char>(a.code()));
  const auto raw = static_cast<long long>(compressed_len(bytes));
  return static_cast<int>(std::max<long long>(0, raw - static_cast<long long>(empty_baseline())));
}

}  // namespace envdiff::complexity
