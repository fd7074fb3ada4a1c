#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace adhominem::textprep {

struct VocabEntry {
  std::string symbol;
  std::uint64_t freq = 0;
};

// Token and character id maps. Special symbols occupy the lowest ids:
// tokens 0 <pad>, 1 <unk>, 2 <eos> (sentence end), 3 <lb> (line break);
// characters 0 <pad>, 1 <unk>. Immutable once built.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kSentEnd = 2;
  static constexpr int kLineBreak = 3;
  static constexpr int kCharPad = 0;
  static constexpr int kCharUnk = 1;

  static constexpr std::string_view kPadSymbol = "<pad>";
  static constexpr std::string_view kUnkSymbol = "<unk>";
  static constexpr std::string_view kSentEndSymbol = "<eos>";
  static constexpr std::string_view kLineBreakSymbol = "<lb>";

  Vocabulary() = default;
  // Entries are given in id order, specials included. Throws
  // CorruptVocabularyError if the special ids are missing or misplaced.
  Vocabulary(std::vector<VocabEntry> tokens, std::vector<VocabEntry> chars, std::uint64_t min_token_freq,
             std::uint64_t min_char_freq);

  int token_id(std::string_view token) const;  // kUnk when absent
  int char_id(std::string_view symbol) const;  // kCharUnk when absent
  bool has_token(std::string_view token) const;
  bool has_char(std::string_view symbol) const;

  const std::string& token(int id) const;
  const std::string& character(int id) const;
  std::uint64_t token_freq(int id) const;
  std::uint64_t char_freq(int id) const;

  std::size_t token_count() const { return tokens_.size(); }
  std::size_t char_count() const { return chars_.size(); }
  std::uint64_t min_token_freq() const { return min_token_freq_; }
  std::uint64_t min_char_freq() const { return min_char_freq_; }

  static bool is_structural(int token_id) { return token_id == kSentEnd || token_id == kLineBreak; }

  // Hash over the serialized token and character sections.
  std::string content_hash() const;

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::string body() const;

  std::vector<VocabEntry> tokens_;
  std::vector<VocabEntry> chars_;
  std::unordered_map<std::string, int> token_index_;
  std::unordered_map<std::string, int> char_index_;
  std::uint64_t min_token_freq_ = 0;
  std::uint64_t min_char_freq_ = 0;
};

// Counts token and character frequencies over every token list and keeps
// symbols with freq >= threshold. Ids after the specials are assigned by
// descending frequency, ties broken lexicographically.
Vocabulary build_vocab(std::span<const std::vector<std::string>> token_lists, std::uint64_t min_token_freq = 20,
                       std::uint64_t min_char_freq = 100);

}  // namespace adhominem::textprep
