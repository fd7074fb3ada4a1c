#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "adhominem/errors.hpp"
#include "adhominem/model/checkpoint.hpp"
#include "adhominem/model/encoder.hpp"
#include "adhominem/numerics/grad_check.hpp"
#include "adhominem/numerics/ops.hpp"
#include "adhominem/training/training.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace adhominem;
using namespace adhominem::model;
using numerics::Tensor;

namespace {

constexpr double kOracleTol = 1e-12;

void fill(Tensor t, double value) {
  for (auto& v : t.mutable_data()) v = value;
}

textprep::EncodedDocument random_doc(std::mt19937_64& rng, const textprep::Vocabulary& v, std::size_t sentences,
                                     std::size_t max_words, textprep::EncodingConfig cfg = {8, 6, 6}) {
  return textprep::encode(fixtures::random_sentences(rng, sentences, max_words), v, cfg);
}

}  // namespace

TEST_CASE("parameter layout, initialization and cloning") {
  const auto v = fixtures::toy_vocab();
  const auto dims = fixtures::tiny_dims(v);
  const auto p = ModelParameters::initialize(dims, 3);
  const auto named = p.named();
  const auto layout = ModelParameters::layout(dims);
  REQUIRE(named.size() == layout.size());
  std::size_t count = 0;
  for (std::size_t i = 0; i < named.size(); ++i) {
    CHECK(named[i].first == layout[i].first);
    CHECK(named[i].second.shape() == layout[i].second);
    count += named[i].second.size();
  }
  CHECK(p.parameter_count() == count);

  // Forget-gate biases start at one, the other gates at zero.
  const std::size_t h = dims.word_state;
  for (std::size_t k = 0; k < 4 * h; ++k) CHECK(p.word_forward.bias.at(k) == (k >= h && k < 2 * h ? 1.0 : 0.0));
  for (std::size_t i = 0; i < p.word_embed.size(); ++i) CHECK(std::abs(p.word_embed.data()[i]) <= 0.05);

  const auto q = ModelParameters::initialize(dims, 3);
  for (std::size_t i = 0; i < named.size(); ++i)
    CHECK(std::equal(named[i].second.data().begin(), named[i].second.data().end(), q.named()[i].second.data().begin()));

  auto c = p.clone(false);
  c.mlp_bias.mutable_data()[0] = 42.0;
  CHECK(p.mlp_bias.at(0) != 42.0);
  CHECK_FALSE(c.mlp_bias.requires_grad());
  CHECK(p.mlp_bias.requires_grad());
}

TEST_CASE("chars_to_word examples") {
  const auto v = fixtures::toy_vocab();
  auto p = ModelParameters::initialize(fixtures::tiny_dims(v), 5);
  const std::vector<int> ids{v.char_id("c"), v.char_id("a"), v.char_id("t")};

  SUBCASE("zero convolution gives a zero vector") {
    fill(p.conv_weight, 0.0);
    fill(p.conv_bias, 0.0);
    const auto r = chars_to_word(ids, p);
    for (double x : r.data()) CHECK(x == 0.0);
  }
  SUBCASE("a word exactly one window wide returns that window") {
    const std::vector<int> two(ids.begin(), ids.begin() + 2);  // window h = 2
    const auto r = chars_to_word(two, p);
    const auto expected = fixtures::ref_char_word(two, p);
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(r.at(i) == doctest::Approx(expected[i]).epsilon(kOracleTol));
  }
  SUBCASE("random 6-char word, h=3, D_r=4 matches the window oracle") {
    auto dims = fixtures::tiny_dims(v);
    dims.window = 3;
    dims.char_repr = 4;
    const auto q = ModelParameters::initialize(dims, 8);
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<int> word(6);
      for (auto& c : word) c = static_cast<int>(rng() % v.char_count());
      const auto r = chars_to_word(word, q);
      const auto expected = fixtures::ref_char_word(word, q);
      for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(r.at(i) - expected[i]) < kOracleTol);
    }
  }
  CHECK_THROWS_AS(chars_to_word(std::vector<int>{}, p), DomainError);
}

TEST_CASE("words_to_sentence examples") {
  const auto v = fixtures::toy_vocab();
  auto p = ModelParameters::initialize(fixtures::tiny_dims(v), 6);
  const auto doc = textprep::encode({{"the", "cat", "sat"}}, v, {8, 6, 2});
  const auto& row = doc.sentences[0];

  SUBCASE("zero context gives uniform weights and the mean state") {
    fill(p.word_attention.context, 0.0);
    const auto s = words_to_sentence(row, p);
    REQUIRE(s.weights.size() == row.length);
    for (double w : s.weights.data()) CHECK(w == doctest::Approx(1.0 / static_cast<double>(row.length)).epsilon(1e-15));
    const auto ref = fixtures::ref_sentence(row, p);
    for (std::size_t i = 0; i < ref.pooled.size(); ++i) CHECK(std::abs(s.pooled.at(i) - ref.pooled[i]) < kOracleTol);
  }
  SUBCASE("a single-token row puts all weight on it") {
    textprep::SentenceRow r = textprep::encode({{"cat"}}, v, {4, 6, 1}).sentences[0];
    r.length = 1;  // keep only the word itself
    const auto s = words_to_sentence(r, p);
    CHECK(s.weights.size() == 1);
    CHECK(s.weights.at(0) == 1.0);
  }
  SUBCASE("3-token sentence matches the step-by-step oracle") {
    const auto s = words_to_sentence(row, p);
    const auto ref = fixtures::ref_sentence(row, p);
    for (std::size_t i = 0; i < ref.weights.size(); ++i) CHECK(std::abs(s.weights.at(i) - ref.weights[i]) < kOracleTol);
    for (std::size_t i = 0; i < ref.pooled.size(); ++i) CHECK(std::abs(s.pooled.at(i) - ref.pooled[i]) < kOracleTol);
  }
}

TEST_CASE("sentences_to_document examples") {
  const auto v = fixtures::toy_vocab();
  auto p = ModelParameters::initialize(fixtures::tiny_dims(v), 7);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  auto random_vec = [&](std::size_t n) {
    std::vector<double> x(n);
    for (auto& e : x) e = u(rng);
    return x;
  };
  const std::size_t width = 2 * p.dims.word_state;

  SUBCASE("one sentence gets weight one and passes its state through") {
    const auto x = random_vec(width);
    const std::vector<Tensor> in{Tensor::vector(x)};
    const auto d = sentences_to_document(in, p);
    CHECK(d.weights.at(0) == 1.0);
    const auto hs = fixtures::ref_bidirectional({x}, p.sentence_forward, p.sentence_backward);
    for (std::size_t i = 0; i < hs[0].size(); ++i) CHECK(std::abs(d.pooled.at(i) - hs[0][i]) < kOracleTol);
  }
  SUBCASE("zero context gives uniform sentence weights") {
    fill(p.sentence_attention.context, 0.0);
    const std::vector<Tensor> in{Tensor::vector(random_vec(width)), Tensor::vector(random_vec(width)),
                                 Tensor::vector(random_vec(width))};
    const auto d = sentences_to_document(in, p);
    for (double w : d.weights.data()) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("two sentences match the oracle") {
    const auto a = random_vec(width), b = random_vec(width);
    const std::vector<Tensor> in{Tensor::vector(a), Tensor::vector(b)};
    const auto d = sentences_to_document(in, p);
    const auto ref = fixtures::ref_attend(fixtures::ref_bidirectional({a, b}, p.sentence_forward, p.sentence_backward),
                                          p.sentence_attention);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(d.weights.at(i) - ref.weights[i]) < kOracleTol);
    for (std::size_t i = 0; i < ref.pooled.size(); ++i) CHECK(std::abs(d.pooled.at(i) - ref.pooled[i]) < kOracleTol);
  }
}

TEST_CASE("project examples") {
  const auto v = fixtures::toy_vocab();
  auto p = ModelParameters::initialize(fixtures::tiny_dims(v), 9);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> x(2 * p.dims.sentence_state);
  for (auto& e : x) e = u(rng);
  const auto y = project(Tensor::vector(x), p);
  const auto expected = fixtures::matvec(p.mlp_weight, x, p.mlp_bias);
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(y.at(i) - std::tanh(expected[i])) < kOracleTol);

  fill(p.mlp_bias, 5.0);
  fill(p.mlp_weight, 0.0);
  const auto saturated = project(Tensor::vector(x), p);
  for (double e : saturated.data()) CHECK(e > 0.999);
  fill(p.mlp_bias, 0.0);
  const auto zero = project(Tensor::vector(x), p);
  for (double e : zero.data()) CHECK(e == 0.0);
}

TEST_CASE("distance examples") {
  CHECK(distance(Tensor::vector({1, 0}), Tensor::vector({0, 1})).item() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const auto y = Tensor::vector({0.2, -0.4, 0.9});
  CHECK(distance(y, y).item() == 0.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 20; ++i) {
    const auto a = Tensor::vector({u(rng), u(rng), u(rng)});
    const auto b = Tensor::vector({u(rng), u(rng), u(rng)});
    CHECK(distance(a, b).item() == distance(b, a).item());
  }
}

TEST_CASE("encode_document matches the composed oracle") {
  const auto v = fixtures::toy_vocab();
  const auto p = ModelParameters::initialize(fixtures::tiny_dims(v), 10);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto doc = random_doc(rng, v, 1 + rng() % 4, 9);
    const auto f = encode_document(doc, p);
    const auto ref = fixtures::ref_document(doc, p);
    for (std::size_t i = 0; i < ref.y.size(); ++i) CHECK(std::abs(f.y.at(i) - ref.y[i]) < kOracleTol);
    std::size_t real = 0;
    double sentence_total = 0.0;
    for (std::size_t k = 0; k < doc.sentences.size(); ++k) {
      const auto& row = doc.sentences[k];
      sentence_total += f.attention.sentence_weights[k];
      if (row.length == 0) {
        CHECK(f.attention.sentence_weights[k] == 0.0);
        for (double w : f.attention.word_weights[k]) CHECK(w == 0.0);
        continue;
      }
      CHECK(std::abs(f.attention.sentence_weights[k] - ref.sentence_weights[real]) < kOracleTol);
      double row_total = 0.0;
      for (std::size_t j = 0; j < row.word_ids.size(); ++j) {
        const double w = f.attention.word_weights[k][j];
        CHECK(w >= 0.0);
        row_total += w;
        if (j < row.length) CHECK(std::abs(w - ref.word_weights[real][j]) < kOracleTol);
        else CHECK(w == 0.0);
      }
      CHECK(std::abs(row_total - 1.0) < 1e-9);
      ++real;
    }
    CHECK(std::abs(sentence_total - 1.0) < 1e-9);
  }
}

TEST_CASE("padding never changes the features") {
  const auto v = fixtures::toy_vocab();
  const auto p = ModelParameters::initialize(fixtures::tiny_dims(v), 11);
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sentences = fixtures::random_sentences(rng, 1 + rng() % 3, 5);
    const auto tight = textprep::encode(sentences, v, {6, 6, 4});
    const auto loose = textprep::encode(sentences, v, {6, 9, 7});  // wider char padding, more pad rows
    auto extra = tight;
    textprep::append_pad_row(extra);
    const auto y = encode_document(tight, p).y;
    for (const textprep::EncodedDocument* other : {&loose, static_cast<const textprep::EncodedDocument*>(&extra)}) {
      const auto z = encode_document(*other, p).y;
      for (std::size_t i = 0; i < y.size(); ++i) CHECK(y.at(i) == z.at(i));
    }
  }
}

TEST_CASE("identical documents have distance zero and the pair is symmetric") {
  const auto v = fixtures::toy_vocab();
  const auto p = ModelParameters::initialize(fixtures::tiny_dims(v), 12);
  std::mt19937_64 rng(7);
  const auto a = random_doc(rng, v, 3, 6);
  const auto b = random_doc(rng, v, 2, 6);
  CHECK(distance(encode_document(a, p).y, encode_document(a, p).y).item() == 0.0);
  const double ab = distance(encode_document(a, p).y, encode_document(b, p).y).item();
  const double ba = distance(encode_document(b, p).y, encode_document(a, p).y).item();
  CHECK(ab == ba);
}

TEST_CASE("full Siamese loss gradient matches finite differences") {
  const auto v = fixtures::toy_vocab();
  auto p = ModelParameters::initialize(fixtures::tiny_dims(v), 13);
  fixtures::randomize(p, 13);
  std::mt19937_64 rng(8);
  const auto d1 = textprep::encode(fixtures::random_sentences(rng, 2, 3), v, {4, 5, 2});
  const auto d2 = textprep::encode(fixtures::random_sentences(rng, 2, 3), v, {4, 5, 2});
  training::LossConfig cfg;
  cfg.tau_s = 0.01;
  cfg.tau_d = 10.0;  // beyond the largest possible distance, so both hinges are active
  for (int same : {0, 1}) {
    auto loss = [&] {
      return training::pair_loss(distance(encode_document(d1, p).y, encode_document(d2, p).y), same, cfg);
    };
    CAPTURE(same);
    REQUIRE(loss().item() > 0.0);
    for (const auto& [name, t] : p.named()) {
      CAPTURE(name);
      CHECK(numerics::grad_check(loss, t, 1e-6) < 1e-4);
    }
  }
}

TEST_CASE("checkpoints round-trip and reject mismatches") {
  const auto v = fixtures::toy_vocab();
  const auto p = ModelParameters::initialize(fixtures::tiny_dims(v), 14);
  CheckpointMetadata meta;
  meta.dims = p.dims;
  meta.vocab_hash = v.content_hash();
  meta.training_seed = 99;
  meta.encoding = {10, 7, 3};
  const auto dir = std::filesystem::temp_directory_path() / "adhominem_ckpt_test";
  std::filesystem::create_directories(dir);
  save_checkpoint(dir / "a.ckpt", p, meta);
  const auto back = load_checkpoint(dir / "a.ckpt");
  CHECK(back.metadata.dims == p.dims);
  CHECK(back.metadata.vocab_hash == v.content_hash());
  CHECK(back.metadata.training_seed == 99);
  CHECK(back.metadata.encoding.words_per_sentence == 10);
  const auto named = p.named(), loaded = back.params.named();
  for (std::size_t i = 0; i < named.size(); ++i)
    CHECK(std::equal(named[i].second.data().begin(), named[i].second.data().end(), loaded[i].second.data().begin()));

  auto wrong = meta;
  wrong.dims.features = 6;
  CHECK_THROWS_AS(save_checkpoint(dir / "b.ckpt", p, wrong), DimensionError);
  {
    std::ofstream out(dir / "junk.ckpt", std::ios::binary);
    out << "not a checkpoint";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.ckpt"), FormatError);
  // Truncation is detected.
  std::filesystem::resize_file(dir / "a.ckpt", std::filesystem::file_size(dir / "a.ckpt") - 8);
  CHECK_THROWS_AS(load_checkpoint(dir / "a.ckpt"), FormatError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("pretrained word vectors replace embedding rows") {
  const auto v = fixtures::toy_vocab();
  auto p = ModelParameters::initialize(fixtures::tiny_dims(v), 15);
  const auto path = std::filesystem::temp_directory_path() / "adhominem_vectors.txt";
  {
    std::ofstream out(path);
    out << "cat 0.1 0.2 0.3 0.4\nnotaword 1 1 1 1\n";
  }
  CHECK(import_word_vectors(path, v, p) == 1);
  const auto id = static_cast<std::size_t>(v.token_id("cat"));
  CHECK(p.word_embed.at(id, 0) == 0.1);
  CHECK(p.word_embed.at(id, 3) == 0.4);
  {
    std::ofstream out(path);
    out << "cat 0.1 0.2\n";
  }
  CHECK_THROWS(import_word_vectors(path, v, p));
  std::filesystem::remove(path);
}
