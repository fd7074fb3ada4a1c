#pragma once

#include <span>
#include <vector>

#include "adhominem/model/parameters.hpp"
#include "adhominem/textprep/encode.hpp"

namespace adhominem::model {

// Attention weights of one document, indexed like its sentence rows. Padding
// slots and padding rows carry weight exactly 0.
struct AttentionMap {
  std::vector<std::vector<double>> word_weights;  // [rows][words_per_sentence]
  std::vector<double> sentence_weights;           // [rows]
};

struct DocumentFeatures {
  Tensor y;  // [D_f], entries in (-1, 1)
  AttentionMap attention;
};

struct PooledSequence {
  Tensor pooled;   // attention-weighted sum of hidden states
  Tensor weights;  // softmax weights over the real positions
};

// Character convolution (tanh) followed by max-over-time pooling. Words
// shorter than the window are right-padded with the character <pad>.
Tensor chars_to_word(std::span<const int> char_ids, const ModelParameters& params);

// Runs one LSTM direction; outputs are aligned with `inputs` order even when
// `reverse` is set.
std::vector<Tensor> run_lstm(std::span<const Tensor> inputs, const LstmParameters& lstm, bool reverse);

// Rows h_t = forward_t (+) backward_t, shape [T x 2H].
Tensor bidirectional(std::span<const Tensor> inputs, const LstmParameters& forward, const LstmParameters& backward);

// u = tanh(W h + b), weights = softmax(v u), pooled = sum_t weights_t h_t.
PooledSequence attend(const Tensor& hidden, const AttentionParameters& attention);

// Word tier for one sentence row; only the real slots take part.
PooledSequence words_to_sentence(const textprep::SentenceRow& row, const ModelParameters& params);

// Sentence tier over sentence embeddings (real sentences only).
PooledSequence sentences_to_document(std::span<const Tensor> sentence_embeddings, const ModelParameters& params);

// y = tanh(W_f x + b_f).
Tensor project(const Tensor& document_embedding, const ModelParameters& params);

// Euclidean distance between two feature vectors, shape [1].
Tensor distance(const Tensor& y1, const Tensor& y2);

DocumentFeatures encode_document(const textprep::EncodedDocument& doc, const ModelParameters& params);

}  // namespace adhominem::model
