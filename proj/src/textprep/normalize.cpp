#include "adhominem/textprep/normalize.hpp"

#include <cctype>
#include <regex>

namespace adhominem::textprep {
namespace {

const std::regex& url_pattern() {
  static const std::regex re(R"((?:https?://|ftp://|www\.)[^\s<>"]*[^\s<>".,!?;:)\]}'])", std::regex::icase);
  return re;
}

const std::regex& email_pattern() {
  static const std::regex re(R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(?:\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,})");
  return re;
}

const std::regex& phone_pattern() {
  static const std::regex re(R"((?:\+\d{1,3}[ .\-]?)?(?:\(\d{3}\)|\d{3})[ .\-]?\d{3}[ .\-]?\d{4})");
  return re;
}

bool is_digit_at(const std::string& s, std::ptrdiff_t pos) {
  return pos >= 0 && pos < static_cast<std::ptrdiff_t>(s.size()) &&
         std::isdigit(static_cast<unsigned char>(s[static_cast<std::size_t>(pos)]));
}

// Replaces every match of `re` by `token`. With `digit_bounded`, matches that
// touch an adjacent digit are left alone (they are part of a longer number).
std::string replace_all(const std::string& text, const std::regex& re, std::string_view token, bool digit_bounded) {
  std::string out;
  out.reserve(text.size());
  std::size_t copied = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    const auto pos = it->position(0);
    const auto len = it->length(0);
    if (digit_bounded && (is_digit_at(text, pos - 1) || is_digit_at(text, pos + len))) continue;
    out.append(text, copied, static_cast<std::size_t>(pos) - copied);
    out.append(token);
    copied = static_cast<std::size_t>(pos + len);
  }
  out.append(text, copied, std::string::npos);
  return out;
}

}  // namespace

std::string normalize(std::string_view text) {
  std::string s(text);
  s = replace_all(s, url_pattern(), kUrlToken, false);
  s = replace_all(s, email_pattern(), kEmailToken, false);
  s = replace_all(s, phone_pattern(), kPhoneToken, true);
  return s;
}

}  // namespace adhominem::textprep
