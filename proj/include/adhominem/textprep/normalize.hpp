#pragma once

#include <string>
#include <string_view>

namespace adhominem::textprep {

inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kEmailToken = "<email>";
inline constexpr std::string_view kPhoneToken = "<phone>";

// Replaces URLs, e-mail addresses and phone numbers with the universal
// tokens above. Everything else is copied through unchanged.
std::string normalize(std::string_view text);

}  // namespace adhominem::textprep
