#include "adhominem/model/encoder.hpp"

#include <algorithm>

#include "adhominem/errors.hpp"
#include "adhominem/numerics/ops.hpp"

namespace adhominem::model {

using namespace numerics;
using textprep::Vocabulary;

Tensor chars_to_word(std::span<const int> char_ids, const ModelParameters& params) {
  if (char_ids.empty()) throw DomainError("chars_to_word: word has no characters");
  const std::size_t window = params.dims.window;
  std::vector<int> ids(char_ids.begin(), char_ids.end());
  if (ids.size() < window) ids.resize(window, Vocabulary::kCharPad);
  const Tensor embedded = embedding_rows(params.char_embed, ids);
  const Tensor windows = unfold_windows(embedded, window);
  const Tensor conv = tanh_map(linear(windows, params.conv_weight, params.conv_bias));
  return max_over_time(conv).values;
}

std::vector<Tensor> run_lstm(std::span<const Tensor> inputs, const LstmParameters& lstm, bool reverse) {
  const std::size_t hidden = lstm.bias.dim(0) / 4;
  const std::size_t steps = inputs.size();
  std::vector<Tensor> outputs(steps);
  Tensor h = Tensor::zeros({hidden});
  Tensor c = Tensor::zeros({hidden});
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = reverse ? steps - 1 - s : s;
    const Tensor gates = linear(concat({inputs[t], h}), lstm.weight, lstm.bias);
    const Tensor sig = sigmoid_map(slice(gates, 0, 3 * hidden));
    const Tensor input_gate = slice(sig, 0, hidden);
    const Tensor forget_gate = slice(sig, hidden, hidden);
    const Tensor output_gate = slice(sig, 2 * hidden, hidden);
    const Tensor candidate = tanh_map(slice(gates, 3 * hidden, hidden));
    c = add(hadamard(forget_gate, c), hadamard(input_gate, candidate));
    h = hadamard(output_gate, tanh_map(c));
    outputs[t] = h;
  }
  return outputs;
}

Tensor bidirectional(std::span<const Tensor> inputs, const LstmParameters& forward, const LstmParameters& backward) {
  if (inputs.empty()) throw DomainError("bidirectional: empty sequence");
  const auto fwd = run_lstm(inputs, forward, false);
  const auto bwd = run_lstm(inputs, backward, true);
  std::vector<Tensor> rows;
  rows.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) rows.push_back(concat({fwd[t], bwd[t]}));
  return stack_rows(rows);
}

PooledSequence attend(const Tensor& hidden, const AttentionParameters& attention) {
  const Tensor u = tanh_map(linear(hidden, attention.weight, attention.bias));
  const Tensor logits = matmul(u, reshape(attention.context, {attention.context.size()}));
  const Tensor weights = softmax(logits);
  return {weighted_sum(weights, hidden), weights};
}

PooledSequence words_to_sentence(const textprep::SentenceRow& row, const ModelParameters& params) {
  if (row.length == 0) throw DomainError("words_to_sentence: sentence has no real tokens");
  const std::vector<int> ids(row.word_ids.begin(), row.word_ids.begin() + static_cast<std::ptrdiff_t>(row.length));
  const Tensor words = embedding_rows(params.word_embed, ids);
  std::vector<Tensor> inputs;
  inputs.reserve(row.length);
  for (std::size_t j = 0; j < row.length; ++j) {
    std::vector<int> chars = row.word_chars(j);
    if (chars.empty()) chars.push_back(Vocabulary::kCharPad);  // structural tokens have no surface characters
    inputs.push_back(concat({numerics::row(words, j), chars_to_word(chars, params)}));
  }
  return attend(bidirectional(inputs, params.word_forward, params.word_backward), params.word_attention);
}

PooledSequence sentences_to_document(std::span<const Tensor> sentence_embeddings, const ModelParameters& params) {
  if (sentence_embeddings.empty()) throw DomainError("sentences_to_document: document has no real sentences");
  return attend(bidirectional(sentence_embeddings, params.sentence_forward, params.sentence_backward),
                params.sentence_attention);
}

Tensor project(const Tensor& document_embedding, const ModelParameters& params) {
  return tanh_map(linear(document_embedding, params.mlp_weight, params.mlp_bias));
}

Tensor distance(const Tensor& y1, const Tensor& y2) { return euclidean_distance(y1, y2); }

DocumentFeatures encode_document(const textprep::EncodedDocument& doc, const ModelParameters& params) {
  DocumentFeatures out;
  out.attention.word_weights.assign(doc.sentences.size(), std::vector<double>(doc.words_per_sentence, 0.0));
  out.attention.sentence_weights.assign(doc.sentences.size(), 0.0);

  std::vector<Tensor> embeddings;
  std::vector<std::size_t> real_rows;
  for (std::size_t k = 0; k < doc.sentences.size(); ++k) {
    const auto& row = doc.sentences[k];
    if (row.length == 0) continue;
    auto sentence = words_to_sentence(row, params);
    std::copy(sentence.weights.data().begin(), sentence.weights.data().end(), out.attention.word_weights[k].begin());
    embeddings.push_back(sentence.pooled);
    real_rows.push_back(k);
  }
  const auto document = sentences_to_document(embeddings, params);
  for (std::size_t i = 0; i < real_rows.size(); ++i) out.attention.sentence_weights[real_rows[i]] = document.weights.at(i);
  out.y = project(document.pooled, params);
  return out;
}

}  // namespace adhominem::model
