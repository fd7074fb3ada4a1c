#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "adhominem/corpus/synthetic.hpp"
#include "adhominem/errors.hpp"
#include "adhominem/model/checkpoint.hpp"
#include "adhominem/model/encoder.hpp"
#include "adhominem/numerics/grad_check.hpp"
#include "adhominem/numerics/ops.hpp"
#include "adhominem/textprep/normalize.hpp"
#include "adhominem/textprep/tokenize.hpp"
#include "adhominem/training/training.hpp"
#include "doctest.h"

using namespace adhominem;
using namespace adhominem::training;
using numerics::Tensor;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// A small synthetic setup: few authors, short encodings, tiny model.
struct Setup {
  std::vector<corpus::Review> reviews;
  std::vector<corpus::Fold> folds;
  textprep::Vocabulary vocab;
  TrainerConfig cfg;
};

Setup small_setup(std::size_t pairs_per_label = 5) {
  Setup s;
  corpus::SyntheticConfig sc;
  sc.authors = 8;
  sc.categories = 2;
  sc.reviews_per_category = 2;
  s.reviews = corpus::make_synthetic_corpus(sc);
  s.folds = corpus::split_by_author(s.reviews, 4, 1);
  std::vector<std::vector<std::string>> tokens;
  for (const auto& r : s.reviews) {
    std::vector<std::string> t;
    for (auto& sent : textprep::segment_and_tokenize(textprep::normalize(r.text))) t.insert(t.end(), sent.begin(), sent.end());
    tokens.push_back(t);
  }
  s.vocab = textprep::build_vocab(tokens, 2, 2);
  auto& d = s.cfg.dims;
  d.char_embed = 4;
  d.window = 3;
  d.char_repr = 6;
  d.word_embed = 6;
  d.word_state = 5;
  d.sentence_state = 5;
  d.word_attention = 5;
  d.sentence_attention = 5;
  d.features = 4;
  s.cfg.encoding = {10, 8, 6};
  s.cfg.sampling = {pairs_per_label, 1};
  s.cfg.loss.batch_size = 4;
  s.cfg.loss.epochs = 2;
  s.cfg.loss.learning_rate = 1e-2;
  s.cfg.loss.seed = 5;
  return s;
}

}  // namespace

TEST_CASE("pair_loss hinge cases") {
  LossConfig cfg;
  CHECK(pair_loss(0.5, 1, cfg) == 0.0);
  CHECK(pair_loss(1.5, 1, cfg) == 0.25);
  CHECK(pair_loss(2.0, 0, cfg) == 1.0);
  CHECK(pair_loss(3.5, 0, cfg) == 0.0);
  CHECK(pair_loss(1.66, 1, cfg) == doctest::Approx(0.4356).epsilon(1e-12));
  CHECK_THROWS_AS(pair_loss(-0.1, 1, cfg), DomainError);
  CHECK(pair_loss(Tensor::vector({1.5}), 1, cfg).item() == 0.25);
  CHECK_THROWS_AS(pair_loss(Tensor::vector({-1.0}), 0, cfg), DomainError);
}

TEST_CASE("property: pair_loss is zero on the satisfied side and positive elsewhere") {
  LossConfig cfg;
  for (double d = 0.0; d <= 5.0; d += 0.0625) {
    CHECK((pair_loss(d, 1, cfg) > 0.0) == (d > cfg.tau_s));
    CHECK((pair_loss(d, 0, cfg) > 0.0) == (d < cfg.tau_d));
    CHECK(pair_loss(Tensor::vector({d}), 1, cfg).item() == pair_loss(d, 1, cfg));
    CHECK(pair_loss(Tensor::vector({d}), 0, cfg).item() == pair_loss(d, 0, cfg));
  }
}

TEST_CASE("pair_loss gradient matches finite differences away from the hinges") {
  LossConfig cfg;
  for (double d : {0.3, 1.4, 2.2, 2.9, 3.7}) {
    for (int a : {0, 1}) {
      const auto x = Tensor::vector({d}, true);
      CHECK(numerics::grad_check([&] { return pair_loss(x, a, cfg); }, x) < 1e-7);
    }
  }
}

TEST_CASE("loss config validation") {
  LossConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.tau_s = 3.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.tau_s = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = LossConfig{};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("Adam step examples") {
  LossConfig cfg;
  cfg.learning_rate = 0.1;

  SUBCASE("first step moves by about the learning rate") {
    std::vector<Tensor> params{Tensor::vector({0.0}, true)};
    AdamState state;
    optimizer_step(params, {{1.0}}, cfg, state);
    CHECK(params[0].at(0) == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(state.step == 1);
  }
  SUBCASE("zero gradient leaves parameters and moments alone") {
    std::vector<Tensor> params{Tensor::vector({0.7, -0.2}, true)};
    AdamState state;
    optimizer_step(params, {{0.0, 0.0}}, cfg, state);
    CHECK(params[0].at(0) == 0.7);
    CHECK(params[0].at(1) == -0.2);
    CHECK(state.step == 1);
    CHECK(state.first_moment[0] == std::vector<double>{0.0, 0.0});
    CHECK(state.second_moment[0] == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("global norm clipping scales the gradient") {
    cfg.grad_clip_norm = 1.0;
    std::vector<Tensor> params{Tensor::vector({0.0, 0.0}, true)};
    AdamState state;
    const auto stats = optimizer_step(params, {{6.0, 8.0}}, cfg, state);
    CHECK(stats.grad_norm == 10.0);
    CHECK(stats.clipped);
    CHECK(state.first_moment[0][0] == doctest::Approx(0.1 * 0.6).epsilon(1e-14));
    CHECK(state.first_moment[0][1] == doctest::Approx(0.1 * 0.8).epsilon(1e-14));
  }
  SUBCASE("non-finite and mismatched gradients abort") {
    std::vector<Tensor> params{Tensor::vector({0.0}, true)};
    AdamState state;
    CHECK_THROWS_AS(optimizer_step(params, {{std::nan("")}}, cfg, state), EvaluationError);
    CHECK_THROWS_AS(optimizer_step(params, {{1.0, 2.0}}, cfg, state), DimensionError);
    CHECK(params[0].at(0) == 0.0);
  }
}

TEST_CASE("Adam matches a hand-rolled recurrence over several steps") {
  LossConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.grad_clip_norm = 0.0;
  std::vector<Tensor> params{Tensor::vector({1.0}, true)};
  AdamState state;
  double x = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 5; ++t) {
    const double g = 2.0 * x;  // gradient of x^2
    optimizer_step(params, {{2.0 * params[0].at(0)}}, cfg, state);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    x -= 0.05 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(params[0].at(0) == doctest::Approx(x).epsilon(1e-14));
  }
}

TEST_CASE("collect_gradients fills zeros for untouched tensors") {
  const auto a = Tensor::vector({1.0, 2.0}, true);
  const auto b = Tensor::vector({3.0}, true);
  numerics::backward(numerics::sum(numerics::square(a)));
  const auto g = collect_gradients(std::vector<Tensor>{a, b});
  CHECK(g[0] == std::vector<double>{2.0, 4.0});
  CHECK(g[1] == std::vector<double>{0.0});
}

TEST_CASE("zero learning rate leaves parameters bit-identical") {
  auto s = small_setup();
  s.cfg.loss.learning_rate = 0.0;
  s.cfg.loss.epochs = 1;
  const auto train_fold = corpus::merge_folds(s.folds, {1, 2, 3});
  model::ModelDimensions dims = s.cfg.dims;
  dims.char_vocab = s.vocab.char_count();
  dims.word_vocab = s.vocab.token_count();
  const auto initial = model::ModelParameters::initialize(dims, 77);
  const auto result = train(s.reviews, train_fold, {}, s.vocab, s.cfg, initial.clone());
  const auto before = initial.named(), after = result.final_params.named();
  for (std::size_t i = 0; i < before.size(); ++i)
    CHECK(std::equal(before[i].second.data().begin(), before[i].second.data().end(), after[i].second.data().begin()));
}

TEST_CASE("training is deterministic and writes its artifacts") {
  auto s = small_setup();
  const auto train_fold = corpus::merge_folds(s.folds, {1, 2, 3});
  const auto dev_pairs = corpus::sample_pairs(s.reviews, s.folds[0], {2, 1}, 3);
  const auto base = std::filesystem::temp_directory_path() / "adhominem_train_test";
  std::filesystem::remove_all(base);
  s.cfg.output_dir = base / "a";
  const auto r1 = train(s.reviews, train_fold, dev_pairs, s.vocab, s.cfg);
  s.cfg.output_dir = base / "b";
  const auto r2 = train(s.reviews, train_fold, dev_pairs, s.vocab, s.cfg);
  REQUIRE(r1.history.size() == 2);
  for (std::size_t e = 0; e < 2; ++e) {
    CHECK(r1.history[e].train_loss == r2.history[e].train_loss);
    CHECK(r1.history[e].dev_error == r2.history[e].dev_error);
  }
  for (const char* f : {"final.ckpt", "best.ckpt", "history.csv"}) {
    REQUIRE(std::filesystem::exists(base / "a" / f));
    CHECK(slurp(base / "a" / f) == slurp(base / "b" / f));
  }
  const auto csv = slurp(base / "a" / "history.csv");
  CHECK(csv.rfind("epoch,train_loss,dev_error_overall,dev_error_a1c1,dev_error_a1c0,dev_error_a0c1,dev_error_a0c0\n", 0) == 0);
  const auto ckpt = model::load_checkpoint(base / "a" / "final.ckpt");
  CHECK(ckpt.metadata.vocab_hash == s.vocab.content_hash());
  CHECK(ckpt.metadata.training_seed == s.cfg.loss.seed);
  std::filesystem::remove_all(base);
}

TEST_CASE("training loss decreases on a small two-style problem") {
  // 20 pairs per epoch from a handful of authors; loss must fall over the
  // first five epochs.
  auto s = small_setup(5);
  s.cfg.loss.epochs = 5;
  s.cfg.loss.batch_size = 5;
  s.cfg.loss.learning_rate = 5e-3;
  const auto train_fold = corpus::merge_folds(s.folds, {0, 1, 2, 3});
  const auto r = train(s.reviews, train_fold, {}, s.vocab, s.cfg);
  REQUIRE(r.history.size() == 5);
  for (std::size_t e = 1; e < 5; ++e) CHECK(r.history[e].train_loss < r.history[e - 1].train_loss);
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
  auto s = small_setup();
  const auto train_fold = corpus::merge_folds(s.folds, {1, 2, 3});
  model::ModelDimensions dims = s.cfg.dims;
  dims.char_vocab = s.vocab.char_count();
  dims.word_vocab = s.vocab.token_count();
  auto poisoned = model::ModelParameters::initialize(dims, 1);
  poisoned.mlp_bias.mutable_data()[0] = std::nan("");
  try {
    train(s.reviews, train_fold, {}, s.vocab, s.cfg, std::move(poisoned));
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    const std::string what = e.what();
    CHECK(what.find("epoch 0") != std::string::npos);
    CHECK(what.find("batch 0") != std::string::npos);
    CHECK(what.find("pair (") != std::string::npos);
  }
}

TEST_CASE("trainer config round-trips through JSON") {
  TrainerConfig cfg;
  cfg.loss.tau_s = 0.5;
  cfg.loss.epochs = 7;
  cfg.dims.features = 9;
  cfg.encoding.words_per_sentence = 12;
  cfg.sampling.pairs_per_label = 33;
  const auto back = trainer_config_from_json(to_json(cfg));
  CHECK(back.loss.tau_s == 0.5);
  CHECK(back.loss.epochs == 7);
  CHECK(back.dims.features == 9);
  CHECK(back.encoding.words_per_sentence == 12);
  CHECK(back.sampling.pairs_per_label == 33);
  CHECK_THROWS_AS(trainer_config_from_json(nlohmann::json{{"tau_s", "one"}}), FormatError);
}

TEST_CASE("evaluate_pairs reuses encodings and agrees with classify") {
  auto s = small_setup();
  model::ModelDimensions dims = s.cfg.dims;
  dims.char_vocab = s.vocab.char_count();
  dims.word_vocab = s.vocab.token_count();
  const auto p = model::ModelParameters::initialize(dims, 2);
  DocumentCache docs(s.reviews, s.vocab, s.cfg.encoding);
  const std::vector<corpus::PairRecord> pairs{{0, 1, 1, 1}, {0, 5, 0, 0}, {3, 3, 1, 1}};
  const auto results = evaluate_pairs(p, docs, pairs, 1.0, 3.0);
  REQUIRE(results.size() == 3);
  const auto y0 = model::encode_document(docs.get(0), p).y;
  const auto y1 = model::encode_document(docs.get(1), p).y;
  CHECK(results[0].distance == model::distance(y0, y1).item());
  CHECK(results[2].distance == 0.0);
}
