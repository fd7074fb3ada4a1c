// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "adhominem/corpus/corpus.hpp"
#include "adhominem/corpus/synthetic.hpp"
#include "adhominem/evalviz/attention.hpp"
#include "adhominem/evalviz/heatmap.hpp"
#include "adhominem/evalviz/kendall.hpp"
#include "adhominem/evalviz/verification.hpp"
#include "adhominem/model/encoder.hpp"
#include "adhominem/numerics/grad_check.hpp"
#include "adhominem/textprep/normalize.hpp"
#include "adhominem/textprep/tokenize.hpp"
#include "adhominem/training/training.hpp"
#include "adhominem/util/rng.hpp"
#include "support/fixtures.hpp"

using namespace adhominem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// --- 1 ----------------------------------------------------------------------

Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  const std::vector<std::vector<std::string>> words{{"apple", "table", "green", "quick", "brown", "house"}};
  const auto vocab = textprep::build_vocab(words, 1, 1);
  auto dims = fixtures::tiny_dims(vocab);
  auto params = model::ModelParameters::initialize(dims, 13);
  fixtures::randomize(params, 13);  // O(1) weights so no gradient is trivially small
  // Two sentences of three five-letter words; the closing <eos> takes a fourth slot.
  const textprep::EncodingConfig enc{4, 5, 2};
  const auto d1 = textprep::encode({{"apple", "table", "green"}, {"quick", "brown", "house"}}, vocab, enc);
  const auto d2 = textprep::encode({{"house", "green", "apple"}, {"table", "quick", "brown"}}, vocab, enc);
  // tau_d exceeds the largest possible distance, so both hinges are active.
  training::LossConfig cfg;
  cfg.tau_s = 0.01;
  cfg.tau_d = 10.0;
  double worst = 0.0;
  std::string worst_name;
  for (int a : {0, 1}) {
    auto loss = [&] {
      return training::pair_loss(model::distance(model::encode_document(d1, params).y, model::encode_document(d2, params).y),
                                 a, cfg);
    };
    if (loss().item() <= 0.0) return {false, format("loss inactive for a=%d", a)};
    for (const auto& [name, t] : params.named()) {
      const double err = numerics::grad_check(loss, t, 1e-6);
      if (!(err <= worst)) {
        worst = err;
        worst_name = name;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 10.0,
          format("max relative error %.3e (%s), %zu tensors, %.2f s", worst, worst_name.c_str(), params.named().size(), secs)};
}

// --- 2 ----------------------------------------------------------------------

Outcome attention_invariants() {
  const auto vocab = fixtures::toy_vocab();
  const auto params = model::ModelParameters::initialize(fixtures::tiny_dims(vocab), 21);
  std::mt19937_64 rng(2);
  double worst = 0.0;
  std::size_t pad_mismatches = 0;
  for (int doc_index = 0; doc_index < 200; ++doc_index) {
    const textprep::EncodingConfig enc{6, 6, 5};
    auto doc = textprep::encode(fixtures::random_sentences(rng, 1 + rng() % 5, 8), vocab, enc);
    const auto f = model::encode_document(doc, params);
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      if (doc.sentences[s].length == 0) continue;
      double sum = 0.0;
      for (double w : f.attention.word_weights[s]) sum += w;
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    double sentence_sum = 0.0;
    for (double w : f.attention.sentence_weights) sentence_sum += w;
    worst = std::max(worst, std::abs(sentence_sum - 1.0));
    worst = std::max(worst, std::abs(evalviz::weighted_attention(f.attention, doc).total() - 1.0));

    auto padded = doc;
    textprep::append_pad_row(padded);
    textprep::append_pad_row(padded);
    const auto g = model::encode_document(padded, params);
    if (!std::equal(f.y.data().begin(), f.y.data().end(), g.y.data().begin())) ++pad_mismatches;
  }
  return {worst <= 1e-9 && pad_mismatches == 0,
          format("max |sum - 1| = %.2e over 200 documents, %zu padded documents changed y", worst, pad_mismatches)};
}

// --- 3 ----------------------------------------------------------------------

Outcome loss_oracle() {
  const training::LossConfig cfg;  // tau_s = 1, tau_d = 3
  struct Case {
    int a;
    double d, expected;
  };
  const Case cases[] = {{1, 0.5, 0.0}, {1, 1.5, 0.25}, {0, 2.0, 1.0}, {0, 3.5, 0.0}};
  std::string detail;
  bool pass = true;
  for (const auto& c : cases) {
    const double got = training::pair_loss(c.d, c.a, cfg);
    const double got_t = training::pair_loss(numerics::Tensor::vector({c.d}), c.a, cfg).item();
    pass = pass && got == c.expected && got_t == c.expected;
    detail += format("(a=%d,d=%g)->%g ", c.a, c.d, got);
  }
  return {pass, detail};
}

// --- 4 ----------------------------------------------------------------------

Outcome decision_protocol() {
  const auto r1 = evalviz::classify_distance(1.66, 1.0, 3.0);
  const auto r2 = evalviz::classify_distance(2.30, 1.0, 3.0);
  const bool pass = r1.decision == evalviz::Decision::kSame && r1.reliability == evalviz::Reliability::kLow &&
                    r2.decision == evalviz::Decision::kDifferent;
  return {pass, format("1.66 -> %s/%s, 2.30 -> %s/%s", evalviz::to_string(r1.decision).c_str(),
                       evalviz::to_string(r1.reliability).c_str(), evalviz::to_string(r2.decision).c_str(),
                       evalviz::to_string(r2.reliability).c_str())};
}

// --- 5, 6, 9 share one trained model -------------------------------------------

struct DeskRun {
  std::vector<corpus::Review> reviews;
  textprep::Vocabulary vocab;
  training::TrainerConfig cfg;
  std::vector<corpus::PairRecord> test_pairs;
  std::optional<training::TrainingResult> result;
  std::vector<evalviz::VerificationResult> test_results;
  double seconds = 0.0;
  std::string failure;
};

DeskRun desk_run() {
  DeskRun run;
  const auto t0 = Clock::now();
  try {
    run.reviews = corpus::filter_reviews(corpus::make_synthetic_corpus({}), 80, 1000);
    const auto folds = corpus::split_by_author(run.reviews, 5, 1);
    const auto train_fold = corpus::merge_folds(folds, {2, 3, 4});
    std::vector<std::vector<std::string>> token_lists;
    for (std::size_t idx : train_fold.review_indices) {
      std::vector<std::string> tokens;
      for (auto& s : textprep::segment_and_tokenize(textprep::normalize(run.reviews[idx].text)))
        tokens.insert(tokens.end(), s.begin(), s.end());
      token_lists.push_back(std::move(tokens));
    }
    run.vocab = textprep::build_vocab(token_lists, 5, 5);
    const auto dev_pairs = corpus::sample_pairs(run.reviews, folds[1], {50, 1}, util::derive_seed(1, 0xde7));
    run.test_pairs = corpus::sample_pairs(run.reviews, folds[0], {50, 1}, util::derive_seed(1, 0x7e57));

    run.cfg.loss.learning_rate = 3e-3;
    run.cfg.loss.epochs = 30;
    run.cfg.loss.batch_size = 32;
    run.cfg.loss.seed = 1;
    run.cfg.sampling = {200, 1};  // 800 pairs per epoch
    run.cfg.encoding = {20, 12, 20};
    run.result = training::train(run.reviews, train_fold, dev_pairs, run.vocab, run.cfg, std::nullopt,
                                 [](const training::EpochRecord& e) {
                                   std::printf("  epoch %2zu loss %.4f dev_error %.3f\n", e.epoch, e.train_loss, e.dev_error);
                                   std::fflush(stdout);
                                 });
    training::DocumentCache docs(run.reviews, run.vocab, run.cfg.encoding);
    run.test_results = training::evaluate_pairs(run.result->best_params, docs, run.test_pairs, run.cfg.loss.tau_s,
                                                run.cfg.loss.tau_d);
  } catch (const std::exception& e) {
    run.failure = e.what();
  }
  run.seconds = seconds_since(t0);
  return run;
}

Outcome desk_learning(const DeskRun& run) {
  if (!run.failure.empty()) return {false, "training failed: " + run.failure};
  const auto table = evalviz::error_table(run.test_results, run.test_pairs);
  const double err = table.overall.rate();
  return {err <= 0.10 && run.seconds < 900.0,
          format("test error %.1f%% on %zu author-disjoint pairs (best epoch %zu of %zu), %.0f s", 100.0 * err,
                 run.test_pairs.size(), run.result->best_epoch, run.result->history.size(), run.seconds)};
}

Outcome high_reliability(const DeskRun& run) {
  if (!run.failure.empty()) return {false, "training failed: " + run.failure};
  const auto all = evalviz::error_table(run.test_results, run.test_pairs).overall;
  const auto high = evalviz::high_reliability_table(run.test_results, run.test_pairs).overall;
  if (high.empty()) return {false, "no HIGH-reliability decisions"};
  return {high.high.rate() <= all.rate(),
          format("HIGH error %.1f%% <= overall %.1f%%, retained %.1f%% (%zu of %zu)", 100.0 * high.high.rate(),
                 100.0 * all.rate(), 100.0 * high.retained_fraction(), high.high.total, high.instances)};
}

Outcome heatmap_determinism(const DeskRun& run) {
  if (!run.failure.empty()) return {false, "training failed: " + run.failure};
  const auto& params = run.result->best_params;
  auto render = [&](std::size_t i, std::size_t j) {
    const auto d1 = textprep::preprocess(run.reviews[i].text, run.vocab, run.cfg.encoding);
    const auto d2 = textprep::preprocess(run.reviews[j].text, run.vocab, run.cfg.encoding);
    const auto f1 = model::encode_document(d1, params), f2 = model::encode_document(d2, params);
    const auto result = evalviz::classify(f1.y, f2.y, run.cfg.loss.tau_s, run.cfg.loss.tau_d);
    return evalviz::render_heatmap({"first", evalviz::weighted_attention(f1.attention, d1)},
                                   {"second", evalviz::weighted_attention(f2.attention, d2)}, result);
  };
  const std::string needle = "class=\"token\" data-intensity=\"100.000000\"";
  std::size_t identical = 0, pairs = 0, max_ok = 0;
  for (std::size_t k = 0; k < 5; ++k) {
    const std::size_t i = run.test_pairs[k * 7].doc1, j = run.test_pairs[k * 7].doc2;
    const auto a = render(i, j), b = render(i, j);
    ++pairs;
    if (a == b) ++identical;
    // Each of the two documents has a token at full intensity.
    const auto second = a.find("data-doc=\"2\"");
    const auto first_hit = a.find(needle);
    if (first_hit < second && a.find(needle, second) != std::string::npos) ++max_ok;
  }
  return {identical == pairs && max_ok == pairs,
          format("%zu/%zu renders byte-identical, %zu/%zu with a max token at intensity 100", identical, pairs, max_ok, pairs)};
}

// --- 7 ----------------------------------------------------------------------

double brute_tau(const std::vector<double>& x, const std::vector<double>& y) {
  long long c = 0, d = 0, tx = 0, ty = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) ++tx;
      else if (dy == 0) ++ty;
      else if ((dx > 0) == (dy > 0)) ++c;
      else ++d;
    }
  return static_cast<double>(c - d) / std::sqrt(static_cast<double>(c + d + tx) * static_cast<double>(c + d + ty));
}

Outcome kendall_correctness() {
  std::mt19937_64 rng(7);
  std::size_t compared = 0, exact = 0, identity = 0, reversed = 0;
  while (compared < 1000) {
    const std::size_t n = 2 + rng() % 9;
    const bool integer = compared % 2 == 0;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = integer ? static_cast<double>(rng() % 5) : std::uniform_real_distribution<double>(-1, 1)(rng);
      y[i] = integer ? static_cast<double>(rng() % 5) : std::uniform_real_distribution<double>(-1, 1)(rng);
    }
    auto constant = [](const std::vector<double>& v) { return std::all_of(v.begin(), v.end(), [&](double e) { return e == v[0]; }); };
    if (constant(x) || constant(y)) continue;
    ++compared;
    if (evalviz::kendall_tau(x, y).tau == brute_tau(x, y)) ++exact;
    if (evalviz::kendall_tau(x, x).tau == 1.0) ++identity;
    std::vector<double> neg(n);
    std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
    if (evalviz::kendall_tau(x, neg).tau == -1.0) ++reversed;
  }
  return {exact == compared && identity == compared && reversed == compared,
          format("%zu/%zu equal to brute force, tau(x,x)=1 in %zu, tau(x,reverse)=-1 in %zu", exact, compared, identity,
                 reversed)};
}

// --- 8 ----------------------------------------------------------------------

Outcome corpus_protocol() {
  std::size_t failures = 0;
  auto expect = [&](bool ok) {
    if (!ok) ++failures;
  };
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    corpus::SyntheticConfig sc;
    sc.authors = 10 + seed % 7;
    sc.categories = 2 + seed % 2;
    sc.reviews_per_category = 2;
    sc.seed = seed;
    auto reviews = corpus::make_synthetic_corpus(sc);
    // Lengths straddling both bounds.
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < 6; ++k) {
      const std::size_t tokens = std::vector<std::size_t>{79, 80, 81, 999, 1000, 1001}[k];
      std::string text;
      for (std::size_t t = 0; t < tokens; ++t) text += (t ? " w" : "w") + std::to_string(rng() % 50);
      reviews.push_back(corpus::make_review("edge" + std::to_string(k), "books", text));
    }
    const auto kept = corpus::filter_reviews(reviews, 80, 1000);
    for (const auto& r : reviews) {
      const bool inside = r.token_count >= 80 && r.token_count <= 1000;
      const bool present = std::any_of(kept.begin(), kept.end(), [&](const corpus::Review& k) { return k.text == r.text; });
      expect(inside == present);
    }

    const auto folds = corpus::split_by_author(kept, 3 + seed % 3, seed);
    std::map<std::string, std::size_t> owner;
    std::size_t total = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      for (const auto& a : folds[f].authors) expect(owner.emplace(a, f).second);
      total += folds[f].review_indices.size();
    }
    expect(total == kept.size());
    for (std::size_t f = 0; f < folds.size(); ++f)
      for (auto idx : folds[f].review_indices) expect(owner.at(kept[idx].author_id) == f);

    const auto train = corpus::merge_folds(folds, {0, 1});
    const auto cap = corpus::label_capacity(kept, train);
    const std::size_t quota = std::min<std::uint64_t>(4, *std::min_element(cap.begin(), cap.end()));
    if (quota == 0) {
      ++failures;
      continue;
    }
    const corpus::SamplingConfig cfg{quota, 1};
    const auto e0 = corpus::resample_epoch(kept, train, cfg, 0, seed);
    expect(e0 == corpus::resample_epoch(kept, train, cfg, 0, seed));
    const auto e1 = corpus::resample_epoch(kept, train, cfg, 1, seed);
    for (const auto* pairs : {&e0, &e1}) {
      for (auto n : corpus::label_histogram(*pairs)) expect(n == quota);
      std::set<std::pair<std::size_t, std::size_t>> seen;
      for (const auto& p : *pairs) {
        const auto& r1 = kept[p.doc1];
        const auto& r2 = kept[p.doc2];
        expect(p.doc1 != p.doc2);
        expect(p.a == (r1.author_id == r2.author_id ? 1 : 0));
        expect(p.c == (r1.category == r2.category ? 1 : 0));
        expect(seen.emplace(std::min(p.doc1, p.doc2), std::max(p.doc1, p.doc2)).second);
        expect(owner.at(r1.author_id) <= 1 && owner.at(r2.author_id) <= 1);
      }
    }
  }
  return {failures == 0, format("50 seeds, %zu violated checks", failures)};
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> fast{
      {"1 gradient fidelity", gradient_fidelity},   {"2 attention invariants", attention_invariants},
      {"3 loss oracle", loss_oracle},               {"4 decision protocol", decision_protocol},
      {"7 kendall tau correctness", kendall_correctness}, {"8 corpus protocol", corpus_protocol},
  };
  int failed = 0;
  std::vector<std::pair<std::string, Outcome>> outcomes;
  auto record = [&](const std::string& name, const Outcome& o) {
    outcomes.emplace_back(name, o);
    if (!o.pass) ++failed;
  };
  for (const auto& [name, fn] : fast) {
    try {
      record(name, fn());
    } catch (const std::exception& e) {
      record(name, {false, std::string("threw: ") + e.what()});
    }
  }
  std::printf("training the desk-scale model...\n");
  std::fflush(stdout);
  const auto run = desk_run();
  record("5 desk-scale learning", desk_learning(run));
  record("6 high-reliability monotonicity", high_reliability(run));
  record("9 heatmap determinism", heatmap_determinism(run));

  std::sort(outcomes.begin(), outcomes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [name, o] : outcomes) std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::printf("%zu/%zu criteria passed\n", outcomes.size() - failed, outcomes.size());
  return failed == 0 ? 0 : 1;
}
