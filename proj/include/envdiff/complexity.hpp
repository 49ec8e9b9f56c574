#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "envdiff/apl.hpp"
#include "envdiff/saeca.hpp"

namespace envdiff::complexity {

// The one compressor every complexity value in this project comes from:
// zlib compress2() (zlib container around DEFLATE) at level 6, the library
// default. Changing it invalidates every downstream number.
inline constexpr int kCompressionLevel = 6;

// e.g. "zlib-1.2.11/deflate/level6"
std::string compressor_id();

std::size_t compressed_len(std::span<const unsigned char> bytes);
std::size_t compressed_len(std::string_view bytes);

// Size of the compressed empty string; the baseline subtracted from every k.
std::size_t empty_baseline();

// clamp(compressed_len(encode(p)) - baseline, 0, |p|). Expects a simplified
// program.
int k_of_program(const apl::Program& program);

// One byte per action (4*move + upshot); max(0, compressed_len - baseline).
int k_of_actions(std::span<const saeca::Action> actions);

}  // namespace envdiff::complexity
