#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adhominem/model/encoder.hpp"
#include "adhominem/textprep/encode.hpp"

namespace adhominem::evalviz {

// Overall per-token attention: word weight times its sentence's weight.
struct WeightedToken {
  std::size_t sentence = 0;
  std::size_t slot = 0;
  std::string surface;
  double weight = 0.0;
  bool structural = false;  // <eos> / <lb> closing slot
};

struct WeightedAttention {
  std::vector<WeightedToken> tokens;    // every real slot, document order
  std::vector<double> sentence_weights;  // per sentence row, 0 for padding rows

  std::vector<double> weights() const;
  double total() const;
};

WeightedAttention weighted_attention(const model::AttentionMap& attention, const textprep::EncodedDocument& doc);

// For each document, the top_n non-structural tokens by weight (earlier
// position wins ties) are tallied by surface form. Sorted by descending
// count, then lexicographically.
std::vector<std::pair<std::string, std::size_t>> top_token_tally(std::span<const WeightedAttention> docs,
                                                                 std::size_t top_n = 5);

}  // namespace adhominem::evalviz
