#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace adhominem::util {

// Splits a UTF-8 string into code points, each returned as its byte string.
// Invalid lead bytes are passed through as single-byte symbols.
std::vector<std::string> utf8_symbols(std::string_view text);

}  // namespace adhominem::util
