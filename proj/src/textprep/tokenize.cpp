#include "adhominem/textprep/tokenize.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "adhominem/textprep/normalize.hpp"
#include "adhominem/util/utf8.hpp"

namespace adhominem::textprep {
namespace {

constexpr std::array<std::string_view, 3> kUniversal = {kUrlToken, kEmailToken, kPhoneToken};
constexpr std::array<std::string_view, 6> kClitics = {"s", "m", "d", "ll", "ve", "re"};
constexpr std::array<std::string_view, 8> kUnicodePunct = {"…", "“", "”", "‘", "–", "—", "«", "»"};

struct Token {
  std::string text;
  bool ends_chunk = false;
};

bool is_apostrophe(const std::string& sym) { return sym == "'" || sym == "’"; }

bool is_letter(const std::string& sym) {
  if (sym.size() > 1) return true;  // treat non-ASCII symbols as word characters
  return std::isalpha(static_cast<unsigned char>(sym[0])) != 0;
}

bool is_alnum(const std::string& sym) {
  if (sym.size() > 1) return true;
  return std::isalnum(static_cast<unsigned char>(sym[0])) != 0;
}

bool is_split_punct(const std::string& sym) {
  if (sym.size() == 1) {
    const unsigned char c = static_cast<unsigned char>(sym[0]);
    return std::ispunct(c) && c != '_' && c != '@' && c != '#';
  }
  return std::find(kUnicodePunct.begin(), kUnicodePunct.end(), sym) != kUnicodePunct.end();
}

bool is_terminal(const std::string& tok) {
  if (tok == "…") return true;
  return !tok.empty() && std::all_of(tok.begin(), tok.end(), [](char c) { return c == '.' || c == '!' || c == '?'; });
}

bool is_closer(const std::string& tok) {
  return tok == ")" || tok == "]" || tok == "}" || tok == "\"" || tok == "'" || tok == "”" || tok == "’";
}

std::string lower_ascii(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Length (in symbols) of the run of letters starting at `from`.
std::size_t letter_run(const std::vector<std::string>& syms, std::size_t from) {
  std::size_t n = 0;
  while (from + n < syms.size() && is_letter(syms[from + n])) ++n;
  return n;
}

std::string join(const std::vector<std::string>& syms, std::size_t from, std::size_t count) {
  std::string out;
  for (std::size_t i = from; i < from + count; ++i) out += syms[i];
  return out;
}

void tokenize_chunk(std::string_view chunk, std::vector<Token>& out) {
  const auto syms = util::utf8_symbols(chunk);
  std::vector<std::size_t> offsets(syms.size() + 1, 0);
  for (std::size_t k = 0; k < syms.size(); ++k) offsets[k + 1] = offsets[k] + syms[k].size();
  std::string word;
  const auto flush = [&] {
    if (!word.empty()) out.push_back({std::move(word), false});
    word.clear();
  };
  std::size_t i = 0;
  while (i < syms.size()) {
    const std::string& s = syms[i];
    if (s == "<") {
      const std::string_view rest = chunk.substr(offsets[i]);
      auto hit = std::find_if(kUniversal.begin(), kUniversal.end(),
                              [&](std::string_view u) { return rest.substr(0, u.size()) == u; });
      if (hit != kUniversal.end()) {
        flush();
        out.push_back({std::string(*hit), false});
        i += hit->size();
        continue;
      }
    }
    if (s == "n" && !word.empty() && i + 2 < syms.size() && is_apostrophe(syms[i + 1]) &&
        (syms[i + 2] == "t" || syms[i + 2] == "T") && (i + 3 >= syms.size() || !is_letter(syms[i + 3]))) {
      flush();
      out.push_back({join(syms, i, 3), false});
      i += 3;
      continue;
    }
    if (is_apostrophe(s)) {
      const std::size_t run = letter_run(syms, i + 1);
      const std::string suffix = lower_ascii(join(syms, i + 1, run));
      if (!word.empty() && run > 0 && std::find(kClitics.begin(), kClitics.end(), suffix) != kClitics.end()) {
        flush();
        out.push_back({join(syms, i, run + 1), false});
        i += run + 1;
        continue;
      }
      if (!word.empty() && run > 0) {  // inner apostrophe, e.g. o'clock
        word += s;
        ++i;
        continue;
      }
      flush();
      out.push_back({s, false});
      ++i;
      continue;
    }
    if (s == ".") {
      if (!word.empty() && i + 1 < syms.size() && is_alnum(syms[i + 1])) {
        word += s;  // 3.5, a.b
        ++i;
        continue;
      }
      flush();
      std::size_t run = 1;
      while (i + run < syms.size() && syms[i + run] == ".") ++run;
      out.push_back({std::string(run, '.'), false});
      i += run;
      continue;
    }
    if (is_split_punct(s)) {
      flush();
      out.push_back({s, false});
      ++i;
      continue;
    }
    word += s;
    ++i;
  }
  flush();
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

std::vector<Sentence> segment_and_tokenize(std::string_view text) {
  std::vector<Sentence> sentences;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    const std::string_view line = text.substr(line_start, line_end - line_start);

    std::vector<Token> tokens;
    std::size_t p = 0;
    while (p < line.size()) {
      while (p < line.size() && is_space(line[p])) ++p;
      std::size_t q = p;
      while (q < line.size() && !is_space(line[q])) ++q;
      if (q > p) {
        const std::size_t before = tokens.size();
        tokenize_chunk(line.substr(p, q - p), tokens);
        if (tokens.size() > before) tokens.back().ends_chunk = true;
      }
      p = q;
    }

    Sentence current;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      current.push_back(tokens[t].text);
      bool boundary = false;
      if (tokens[t].ends_chunk) {
        if (is_terminal(tokens[t].text)) boundary = true;
        // closing bracket/quote right after terminal punctuation: "(really!)"
        if (is_closer(tokens[t].text) && t > 0 && is_terminal(tokens[t - 1].text)) boundary = true;
      }
      if (boundary) sentences.push_back(std::move(current)), current.clear();
    }
    if (!current.empty()) sentences.push_back(std::move(current));

    if (line_end == text.size()) break;
    line_start = line_end + 1;
  }
  return sentences;
}

std::size_t count_tokens(std::string_view text) {
  std::size_t n = 0;
  for (const auto& s : segment_and_tokenize(normalize(text))) n += s.size();
  return n;
}

}  // namespace adhominem::textprep
