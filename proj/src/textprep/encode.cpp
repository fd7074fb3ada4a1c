#include "adhominem/textprep/encode.hpp"

#include <algorithm>

#include "adhominem/errors.hpp"
#include "adhominem/textprep/normalize.hpp"
#include "adhominem/util/utf8.hpp"

namespace adhominem::textprep {
namespace {

SentenceRow empty_row(std::size_t words, std::size_t chars) {
  SentenceRow row;
  row.word_ids.assign(words, Vocabulary::kPad);
  row.char_ids.assign(words, std::vector<int>(chars, Vocabulary::kCharPad));
  row.char_lengths.assign(words, 0);
  row.raw_tokens.assign(words, "");
  return row;
}

void check_specials(const Vocabulary& vocab) {
  if (vocab.token_count() < 4 || vocab.char_count() < 2 ||
      vocab.token(Vocabulary::kPad) != Vocabulary::kPadSymbol ||
      vocab.token(Vocabulary::kUnk) != Vocabulary::kUnkSymbol ||
      vocab.token(Vocabulary::kSentEnd) != Vocabulary::kSentEndSymbol ||
      vocab.token(Vocabulary::kLineBreak) != Vocabulary::kLineBreakSymbol ||
      vocab.character(Vocabulary::kCharPad) != Vocabulary::kPadSymbol ||
      vocab.character(Vocabulary::kCharUnk) != Vocabulary::kUnkSymbol) {
    throw CorruptVocabularyError("vocabulary special ids are not in their reserved slots");
  }
}

}  // namespace

void EncodingConfig::validate() const {
  if (words_per_sentence < 2 || chars_per_word < 1 || max_sentences < 1) {
    throw DomainError("encoding needs words_per_sentence >= 2 and chars_per_word, max_sentences >= 1");
  }
}

bool SentenceRow::is_structural(std::size_t slot) const {
  return slot < length && Vocabulary::is_structural(word_ids[slot]) && slot + 1 == length;
}

std::vector<int> SentenceRow::word_chars(std::size_t slot) const {
  return {char_ids[slot].begin(), char_ids[slot].begin() + static_cast<std::ptrdiff_t>(char_lengths[slot])};
}

std::size_t EncodedDocument::real_sentence_count() const {
  return static_cast<std::size_t>(std::count_if(sentences.begin(), sentences.end(), [](const SentenceRow& r) { return r.length > 0; }));
}

std::size_t EncodedDocument::real_token_count() const {
  std::size_t n = 0;
  for (const auto& r : sentences)
    for (std::size_t j = 0; j < r.length; ++j) n += r.is_structural(j) ? 0 : 1;
  return n;
}

EncodedDocument encode(const std::vector<Sentence>& sentences, const Vocabulary& vocab, const EncodingConfig& cfg) {
  cfg.validate();
  check_specials(vocab);
  EncodedDocument doc;
  doc.words_per_sentence = cfg.words_per_sentence;
  doc.chars_per_word = cfg.chars_per_word;
  const std::size_t per_row = cfg.words_per_sentence - 1;

  for (const auto& sentence : sentences) {
    std::size_t pos = 0;
    while (pos < sentence.size() && doc.sentences.size() < cfg.max_sentences) {
      const std::size_t take = std::min(per_row, sentence.size() - pos);
      SentenceRow row = empty_row(cfg.words_per_sentence, cfg.chars_per_word);
      for (std::size_t j = 0; j < take; ++j) {
        const std::string& tok = sentence[pos + j];
        row.word_ids[j] = vocab.token_id(tok);
        row.raw_tokens[j] = tok;
        const auto syms = util::utf8_symbols(tok);
        const std::size_t n = std::min(syms.size(), cfg.chars_per_word);
        for (std::size_t c = 0; c < n; ++c) row.char_ids[j][c] = vocab.char_id(syms[c]);
        row.char_lengths[j] = n;
      }
      pos += take;
      const bool continues = pos < sentence.size();
      row.word_ids[take] = continues ? Vocabulary::kLineBreak : Vocabulary::kSentEnd;
      row.raw_tokens[take] = std::string(continues ? Vocabulary::kLineBreakSymbol : Vocabulary::kSentEndSymbol);
      row.length = take + 1;
      doc.sentences.push_back(std::move(row));
    }
    if (doc.sentences.size() >= cfg.max_sentences) break;
  }
  return doc;
}

EncodedDocument preprocess(std::string_view raw_text, const Vocabulary& vocab, const EncodingConfig& cfg) {
  return encode(segment_and_tokenize(normalize(raw_text)), vocab, cfg);
}

std::vector<std::string> decode_tokens(const EncodedDocument& doc, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (const auto& row : doc.sentences)
    for (std::size_t j = 0; j < row.length; ++j)
      if (!row.is_structural(j)) out.push_back(vocab.token(row.word_ids[j]));
  return out;
}

void append_pad_row(EncodedDocument& doc) {
  doc.sentences.push_back(empty_row(doc.words_per_sentence, doc.chars_per_word));
}

}  // namespace adhominem::textprep
