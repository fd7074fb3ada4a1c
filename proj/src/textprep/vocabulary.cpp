#include "adhominem/textprep/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "adhominem/errors.hpp"
#include "adhominem/util/hash.hpp"
#include "adhominem/util/utf8.hpp"

namespace adhominem::textprep {
namespace {

constexpr std::string_view kMagic = "#adhominem-vocab v1";

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    switch (s[++i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: out += s[i];
    }
  }
  return out;
}

std::vector<VocabEntry> ranked(const std::map<std::string, std::uint64_t>& counts, std::uint64_t threshold,
                               std::initializer_list<std::string_view> specials) {
  std::vector<VocabEntry> kept;
  for (const auto& [sym, freq] : counts) {
    if (freq >= threshold) kept.push_back({sym, freq});
  }
  // std::map iteration is lexicographic, so a stable sort keeps that order on ties.
  std::stable_sort(kept.begin(), kept.end(), [](const VocabEntry& a, const VocabEntry& b) { return a.freq > b.freq; });
  std::vector<VocabEntry> out;
  for (auto s : specials) out.push_back({std::string(s), 0});
  out.insert(out.end(), kept.begin(), kept.end());
  return out;
}

bool is_special(std::string_view s) {
  return s == Vocabulary::kPadSymbol || s == Vocabulary::kUnkSymbol || s == Vocabulary::kSentEndSymbol ||
         s == Vocabulary::kLineBreakSymbol;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<VocabEntry> tokens, std::vector<VocabEntry> chars, std::uint64_t min_token_freq,
                       std::uint64_t min_char_freq)
    : tokens_(std::move(tokens)), chars_(std::move(chars)), min_token_freq_(min_token_freq), min_char_freq_(min_char_freq) {
  const std::string_view token_specials[] = {kPadSymbol, kUnkSymbol, kSentEndSymbol, kLineBreakSymbol};
  const std::string_view char_specials[] = {kPadSymbol, kUnkSymbol};
  if (tokens_.size() < 4 || chars_.size() < 2) throw CorruptVocabularyError("vocabulary is missing special symbols");
  for (int i = 0; i < 4; ++i) {
    if (tokens_[static_cast<std::size_t>(i)].symbol != token_specials[i]) {
      throw CorruptVocabularyError("token id " + std::to_string(i) + " must be " + std::string(token_specials[i]));
    }
  }
  for (int i = 0; i < 2; ++i) {
    if (chars_[static_cast<std::size_t>(i)].symbol != char_specials[i]) {
      throw CorruptVocabularyError("character id " + std::to_string(i) + " must be " + std::string(char_specials[i]));
    }
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!token_index_.emplace(tokens_[i].symbol, static_cast<int>(i)).second) {
      throw CorruptVocabularyError("duplicate token '" + tokens_[i].symbol + "'");
    }
  }
  for (std::size_t i = 0; i < chars_.size(); ++i) {
    if (!char_index_.emplace(chars_[i].symbol, static_cast<int>(i)).second) {
      throw CorruptVocabularyError("duplicate character '" + chars_[i].symbol + "'");
    }
  }
}

int Vocabulary::token_id(std::string_view token) const {
  auto it = token_index_.find(std::string(token));
  return it == token_index_.end() ? kUnk : it->second;
}

int Vocabulary::char_id(std::string_view symbol) const {
  auto it = char_index_.find(std::string(symbol));
  return it == char_index_.end() ? kCharUnk : it->second;
}

bool Vocabulary::has_token(std::string_view token) const { return token_index_.count(std::string(token)) > 0; }
bool Vocabulary::has_char(std::string_view symbol) const { return char_index_.count(std::string(symbol)) > 0; }

const std::string& Vocabulary::token(int id) const { return tokens_.at(static_cast<std::size_t>(id)).symbol; }
const std::string& Vocabulary::character(int id) const { return chars_.at(static_cast<std::size_t>(id)).symbol; }
std::uint64_t Vocabulary::token_freq(int id) const { return tokens_.at(static_cast<std::size_t>(id)).freq; }
std::uint64_t Vocabulary::char_freq(int id) const { return chars_.at(static_cast<std::size_t>(id)).freq; }

std::string Vocabulary::body() const {
  std::ostringstream os;
  os << "[tokens]\n";
  for (std::size_t i = 0; i < tokens_.size(); ++i) os << escape(tokens_[i].symbol) << '\t' << i << '\t' << tokens_[i].freq << '\n';
  os << "[chars]\n";
  for (std::size_t i = 0; i < chars_.size(); ++i) os << escape(chars_[i].symbol) << '\t' << i << '\t' << chars_[i].freq << '\n';
  return os.str();
}

std::string Vocabulary::content_hash() const { return util::hash_hex(body()); }

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary file " + path.string());
  const std::string text = body();
  out << kMagic << "\tmin_token_freq=" << min_token_freq_ << "\tmin_char_freq=" << min_char_freq_
      << "\thash=" << util::hash_hex(text) << '\n'
      << text;
  if (!out) throw IoError("failed writing vocabulary file " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read vocabulary file " + path.string());
  std::string header;
  std::getline(in, header);
  if (header.rfind(kMagic, 0) != 0) throw CorruptVocabularyError(path.string() + ": not a vocabulary file");

  std::uint64_t min_tok = 0, min_chr = 0;
  std::string expected_hash;
  std::istringstream hs(header.substr(kMagic.size()));
  std::string field;
  while (std::getline(hs, field, '\t')) {
    if (field.empty()) continue;
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw CorruptVocabularyError(path.string() + ": malformed header field " + field);
    const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    try {
      if (key == "min_token_freq") min_tok = std::stoull(value);
      else if (key == "min_char_freq") min_chr = std::stoull(value);
      else if (key == "hash") expected_hash = value;
    } catch (const std::exception&) {
      throw CorruptVocabularyError(path.string() + ": malformed header value " + field);
    }
  }

  std::vector<VocabEntry> tokens, chars;
  std::vector<VocabEntry>* section = nullptr;
  std::string line;
  std::string text;
  while (std::getline(in, line)) {
    text += line + '\n';
    if (line == "[tokens]") { section = &tokens; continue; }
    if (line == "[chars]") { section = &chars; continue; }
    if (!section) throw CorruptVocabularyError(path.string() + ": entry outside a section");
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw CorruptVocabularyError(path.string() + ": malformed entry '" + line + "'");
    try {
      const auto id = std::stoull(line.substr(t1 + 1, t2 - t1 - 1));
      if (id != section->size()) throw CorruptVocabularyError(path.string() + ": ids are not contiguous at '" + line + "'");
      section->push_back({unescape(line.substr(0, t1)), std::stoull(line.substr(t2 + 1))});
    } catch (const CorruptVocabularyError&) {
      throw;
    } catch (const std::exception&) {
      throw CorruptVocabularyError(path.string() + ": malformed entry '" + line + "'");
    }
  }
  if (!expected_hash.empty() && util::hash_hex(text) != expected_hash) {
    throw CorruptVocabularyError(path.string() + ": content hash mismatch");
  }
  return Vocabulary(std::move(tokens), std::move(chars), min_tok, min_chr);
}

Vocabulary build_vocab(std::span<const std::vector<std::string>> token_lists, std::uint64_t min_token_freq,
                       std::uint64_t min_char_freq) {
  if (token_lists.empty()) throw DomainError("build_vocab: empty corpus");
  std::map<std::string, std::uint64_t> token_counts;
  std::map<std::string, std::uint64_t> char_counts;
  for (const auto& list : token_lists) {
    for (const auto& tok : list) {
      if (tok.empty() || is_special(tok)) continue;
      ++token_counts[tok];
      for (auto& sym : util::utf8_symbols(tok)) ++char_counts[sym];
    }
  }
  return Vocabulary(ranked(token_counts, min_token_freq, {Vocabulary::kPadSymbol, Vocabulary::kUnkSymbol,
                                                          Vocabulary::kSentEndSymbol, Vocabulary::kLineBreakSymbol}),
                    ranked(char_counts, min_char_freq, {Vocabulary::kPadSymbol, Vocabulary::kUnkSymbol}),
                    min_token_freq, min_char_freq);
}

}  // namespace adhominem::textprep
