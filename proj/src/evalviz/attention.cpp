#include "adhominem/evalviz/attention.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "adhominem/errors.hpp"

namespace adhominem::evalviz {

std::vector<double> WeightedAttention::weights() const {
  std::vector<double> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.weight);
  return out;
}

double WeightedAttention::total() const {
  double s = 0.0;
  for (const auto& t : tokens) s += t.weight;
  return s;
}

WeightedAttention weighted_attention(const model::AttentionMap& attention, const textprep::EncodedDocument& doc) {
  if (attention.word_weights.size() != doc.sentences.size() || attention.sentence_weights.size() != doc.sentences.size()) {
    throw DimensionError("weighted_attention: attention map does not match the document rows");
  }
  WeightedAttention out;
  out.sentence_weights = attention.sentence_weights;
  for (std::size_t k = 0; k < doc.sentences.size(); ++k) {
    const auto& row = doc.sentences[k];
    for (std::size_t j = 0; j < row.length; ++j) {
      out.tokens.push_back({k, j, row.raw_tokens[j], attention.word_weights[k][j] * attention.sentence_weights[k],
                            row.is_structural(j)});
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::size_t>> top_token_tally(std::span<const WeightedAttention> docs,
                                                                 std::size_t top_n) {
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : docs) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < doc.tokens.size(); ++i)
      if (!doc.tokens[i].structural) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return doc.tokens[a].weight > doc.tokens[b].weight; });
    idx.resize(std::min(idx.size(), top_n));
    for (auto i : idx) ++counts[doc.tokens[i].surface];
  }
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

}  // namespace adhominem::evalviz
