#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace adhominem::textprep {

using Sentence = std::vector<std::string>;

// Rule-based sentence segmentation and tokenization of normalized text.
// Sentences end at terminal punctuation (. ! ? ... and the ellipsis
// character) that is followed by whitespace or the end of input, and at
// line breaks. Punctuation, brackets and the clitics 's 'm 've 're n't 'll 'd
// become tokens of their own; the universal tokens <url> <email> <phone>
// stay intact.
std::vector<Sentence> segment_and_tokenize(std::string_view text);

// Token count of normalize(text) after segmentation.
std::size_t count_tokens(std::string_view text);

}  // namespace adhominem::textprep
