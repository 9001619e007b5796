#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ticknet {

/// Split one CSV line on commas. The formats in this project never quote
/// fields (symbols and sector labels contain no commas), so no quote
/// handling is done.
std::vector<std::string_view> split_csv(std::string_view line);

/// Shortest round-trip decimal representation of a double (std::to_chars).
/// Used for every numeric cell we emit, so re-reading a file reproduces the
/// exact bits and repeated runs are byte-identical.
std::string fmt_double(double v);

/// Fixed-precision representation, e.g. fmt_fixed(12.3456, 2) == "12.35".
std::string fmt_fixed(double v, int precision);

/// Strip surrounding whitespace.
std::string_view trim(std::string_view s);

}  // namespace ticknet
