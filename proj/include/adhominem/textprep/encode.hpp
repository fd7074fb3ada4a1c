#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "adhominem/textprep/tokenize.hpp"
#include "adhominem/textprep/vocabulary.hpp"

namespace adhominem::textprep {

struct EncodingConfig {
  std::size_t words_per_sentence = 32;  // T_w, including the closing token
  std::size_t chars_per_word = 16;
  std::size_t max_sentences = 50;  // T_s, sentence rows after line-break splitting

  void validate() const;
};

// One padded sentence row. Slots [0, length) are real; the last real slot
// holds <eos> or <lb>.
struct SentenceRow {
  std::vector<int> word_ids;                 // words_per_sentence
  std::vector<std::vector<int>> char_ids;    // words_per_sentence x chars_per_word
  std::vector<std::size_t> char_lengths;     // true characters per slot (0 for pads and structural tokens)
  std::vector<std::string> raw_tokens;       // surface form per slot, "" for pads
  std::size_t length = 0;

  bool is_structural(std::size_t slot) const;
  // Character ids of the real characters of a slot (may be empty).
  std::vector<int> word_chars(std::size_t slot) const;
};

struct EncodedDocument {
  std::size_t words_per_sentence = 0;
  std::size_t chars_per_word = 0;
  std::vector<SentenceRow> sentences;  // rows with length 0 are padding

  std::size_t real_sentence_count() const;
  std::size_t real_token_count() const;  // non-structural real slots
};

// Maps tokenized sentences to ids. Out-of-vocabulary tokens get <unk> but
// keep their real character ids. Sentences longer than T_w - 1 tokens are
// cut with <lb> and continue on the next row; the document is truncated to
// max_sentences rows and words to chars_per_word characters.
EncodedDocument encode(const std::vector<Sentence>& sentences, const Vocabulary& vocab, const EncodingConfig& cfg);

// normalize -> segment_and_tokenize -> encode.
EncodedDocument preprocess(std::string_view raw_text, const Vocabulary& vocab, const EncodingConfig& cfg);

// Token strings of all non-structural real slots, in order, via the vocabulary.
std::vector<std::string> decode_tokens(const EncodedDocument& doc, const Vocabulary& vocab);

// Appends an all-padding sentence row of the document's geometry.
void append_pad_row(EncodedDocument& doc);

}  // namespace adhominem::textprep
