#pragma once

// Small shared builders for tests: a toy vocabulary, random documents and a
// plain-double reference implementation of the encoder.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "adhominem/model/encoder.hpp"
#include "adhominem/model/parameters.hpp"
#include "adhominem/textprep/encode.hpp"
#include "adhominem/textprep/vocabulary.hpp"

namespace fixtures {

using adhominem::model::ModelDimensions;
using adhominem::model::ModelParameters;
using adhominem::textprep::EncodedDocument;
using adhominem::textprep::EncodingConfig;
using adhominem::textprep::Sentence;
using adhominem::textprep::Vocabulary;

inline const std::vector<std::string>& toy_words() {
  static const std::vector<std::string> words{"the", "cat", "sat", "on", "a", "mat", "dog", "ran",
                                              "fast", "slow", "good", "book", "i", "liked", "it", "."};
  return words;
}

inline Vocabulary toy_vocab() {
  std::vector<std::vector<std::string>> corpus{toy_words()};
  return adhominem::textprep::build_vocab(corpus, 1, 1);
}

// All dimensions <= 6.
inline ModelDimensions tiny_dims(const Vocabulary& v) {
  ModelDimensions d;
  d.char_vocab = v.char_count();
  d.word_vocab = v.token_count();
  d.char_embed = 3;
  d.window = 2;
  d.char_repr = 4;
  d.word_embed = 4;
  d.word_state = 3;
  d.sentence_state = 3;
  d.word_attention = 4;
  d.sentence_attention = 4;
  d.features = 5;
  return d;
}

// Redraws every parameter from U(-1, 1) so activations and gradients are O(1).
inline void randomize(ModelParameters& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& [name, t] : p.named())
    for (auto& v : t.mutable_data()) v = u(rng);
}

// Random words, occasionally out of vocabulary, in `sentences` sentences.
inline std::vector<Sentence> random_sentences(std::mt19937_64& rng, std::size_t sentences, std::size_t max_words) {
  std::vector<Sentence> out(sentences);
  const auto& words = toy_words();
  for (auto& s : out) {
    const std::size_t n = 1 + rng() % max_words;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng() % 10 == 0) s.push_back("zq" + std::to_string(rng() % 5));  // unknown word
      else s.push_back(words[rng() % words.size()]);
    }
  }
  return out;
}

// --- reference encoder on plain vectors --------------------------------------

using Vec = std::vector<double>;

inline Vec matvec(const adhominem::numerics::Tensor& w, const Vec& x, const adhominem::numerics::Tensor& b) {
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  Vec out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = b.at(r);
    for (std::size_t c = 0; c < cols; ++c) s += w.at(r, c) * x[c];
    out[r] = s;
  }
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec ref_char_word(std::vector<int> ids, const ModelParameters& p) {
  const std::size_t h = p.dims.window, dc = p.dims.char_embed;
  if (ids.empty()) ids.push_back(Vocabulary::kCharPad);
  while (ids.size() < h) ids.push_back(Vocabulary::kCharPad);
  Vec best(p.dims.char_repr, -1e300);
  for (std::size_t i = 0; i + h <= ids.size(); ++i) {
    Vec window;
    for (std::size_t k = 0; k < h; ++k)
      for (std::size_t e = 0; e < dc; ++e) window.push_back(p.char_embed.at(static_cast<std::size_t>(ids[i + k]), e));
    const Vec c = matvec(p.conv_weight, window, p.conv_bias);
    for (std::size_t r = 0; r < c.size(); ++r) best[r] = std::max(best[r], std::tanh(c[r]));
  }
  return best;
}

inline std::vector<Vec> ref_lstm(const std::vector<Vec>& xs, const adhominem::model::LstmParameters& l, bool reverse) {
  const std::size_t hdim = l.bias.size() / 4;
  Vec h(hdim, 0.0), c(hdim, 0.0);
  std::vector<Vec> out(xs.size());
  for (std::size_t s = 0; s < xs.size(); ++s) {
    const std::size_t t = reverse ? xs.size() - 1 - s : s;
    Vec z = xs[t];
    z.insert(z.end(), h.begin(), h.end());
    const Vec g = matvec(l.weight, z, l.bias);
    for (std::size_t k = 0; k < hdim; ++k) {
      const double i = sigmoid(g[k]), f = sigmoid(g[hdim + k]), o = sigmoid(g[2 * hdim + k]);
      const double cand = std::tanh(g[3 * hdim + k]);
      c[k] = f * c[k] + i * cand;
      h[k] = o * std::tanh(c[k]);
    }
    out[t] = h;
  }
  return out;
}

struct RefPooled {
  Vec pooled;
  Vec weights;
};

inline RefPooled ref_attend(const std::vector<Vec>& hs, const adhominem::model::AttentionParameters& a) {
  Vec logits;
  for (const auto& h : hs) {
    const Vec u = matvec(a.weight, h, a.bias);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += a.context.at(0, i) * std::tanh(u[i]);
    logits.push_back(s);
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (auto& l : logits) z += (l = std::exp(l - m));
  RefPooled r{Vec(hs[0].size(), 0.0), {}};
  for (std::size_t t = 0; t < hs.size(); ++t) {
    r.weights.push_back(logits[t] / z);
    for (std::size_t i = 0; i < hs[t].size(); ++i) r.pooled[i] += r.weights[t] * hs[t][i];
  }
  return r;
}

inline std::vector<Vec> ref_bidirectional(const std::vector<Vec>& xs, const adhominem::model::LstmParameters& fwd,
                                          const adhominem::model::LstmParameters& bwd) {
  const auto f = ref_lstm(xs, fwd, false);
  const auto b = ref_lstm(xs, bwd, true);
  std::vector<Vec> out;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    Vec row = f[t];
    row.insert(row.end(), b[t].begin(), b[t].end());
    out.push_back(row);
  }
  return out;
}

inline RefPooled ref_sentence(const adhominem::textprep::SentenceRow& row, const ModelParameters& p) {
  std::vector<Vec> inputs;
  for (std::size_t j = 0; j < row.length; ++j) {
    Vec x;
    for (std::size_t e = 0; e < p.dims.word_embed; ++e) x.push_back(p.word_embed.at(static_cast<std::size_t>(row.word_ids[j]), e));
    const Vec r = ref_char_word(row.word_chars(j), p);
    x.insert(x.end(), r.begin(), r.end());
    inputs.push_back(x);
  }
  return ref_attend(ref_bidirectional(inputs, p.word_forward, p.word_backward), p.word_attention);
}

struct RefDocument {
  Vec y;
  Vec sentence_weights;  // real sentences only
  std::vector<Vec> word_weights;
};

inline RefDocument ref_document(const EncodedDocument& doc, const ModelParameters& p) {
  RefDocument out;
  std::vector<Vec> sentences;
  for (const auto& row : doc.sentences) {
    if (row.length == 0) continue;
    const auto s = ref_sentence(row, p);
    sentences.push_back(s.pooled);
    out.word_weights.push_back(s.weights);
  }
  const auto d = ref_attend(ref_bidirectional(sentences, p.sentence_forward, p.sentence_backward), p.sentence_attention);
  out.sentence_weights = d.weights;
  out.y = matvec(p.mlp_weight, d.pooled, p.mlp_bias);
  for (auto& v : out.y) v = std::tanh(v);
  return out;
}

}  // namespace fixtures
