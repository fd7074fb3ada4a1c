#include "adhominem/cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "adhominem/corpus/corpus.hpp"
#include "adhominem/corpus/synthetic.hpp"
#include "adhominem/errors.hpp"
#include "adhominem/evalviz/attention.hpp"
#include "adhominem/evalviz/features.hpp"
#include "adhominem/evalviz/heatmap.hpp"
#include "adhominem/evalviz/kendall.hpp"
#include "adhominem/evalviz/verification.hpp"
#include "adhominem/model/checkpoint.hpp"
#include "adhominem/model/encoder.hpp"
#include "adhominem/textprep/normalize.hpp"
#include "adhominem/textprep/tokenize.hpp"
#include "adhominem/training/training.hpp"
#include "adhominem/util/hash.hpp"
#include "adhominem/util/rng.hpp"

namespace adhominem::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

fs::path manifest_for_file(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

// A trained checkpoint and the vocabulary it was trained with.
struct LoadedModel {
  model::Checkpoint checkpoint;
  textprep::Vocabulary vocab;
  fs::path vocab_path;
};

LoadedModel load_model(const fs::path& checkpoint_path, std::string vocab_path, RunManifest& manifest) {
  LoadedModel m;
  m.checkpoint = model::load_checkpoint(checkpoint_path);
  m.vocab_path = vocab_path.empty() ? checkpoint_path.parent_path() / "vocab.tsv" : fs::path(vocab_path);
  m.vocab = textprep::Vocabulary::load(m.vocab_path);
  if (m.vocab.content_hash() != m.checkpoint.metadata.vocab_hash) {
    throw FormatError("vocabulary " + m.vocab_path.string() + " does not match checkpoint " + checkpoint_path.string());
  }
  manifest.add_input(checkpoint_path);
  manifest.add_input(m.vocab_path);
  return m;
}

struct Thresholds {
  std::optional<double> tau_s;
  std::optional<double> tau_d;
  std::pair<double, double> resolve(const model::CheckpointMetadata& meta) const {
    return {tau_s.value_or(meta.tau_s), tau_d.value_or(meta.tau_d)};
  }
};

void add_threshold_flags(CLI::App* cmd, Thresholds& t) {
  cmd->add_option("--tau-s", t.tau_s, "Lower distance threshold (default: from checkpoint)");
  cmd->add_option("--tau-d", t.tau_d, "Upper distance threshold (default: from checkpoint)");
}

struct NamedDocument {
  std::string id;
  std::string author;
  std::string text;
};

// A JSON Lines review file, a directory of .txt files, or a single text file.
std::vector<NamedDocument> load_documents(const fs::path& path, RunManifest& manifest) {
  std::vector<NamedDocument> docs;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path))
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      docs.push_back({f.filename().string(), "", read_text(f)});
      manifest.add_input(f);
    }
    return docs;
  }
  manifest.add_input(path);
  if (path.extension() == ".jsonl") {
    const auto reviews = corpus::read_reviews_jsonl(path);
    for (std::size_t i = 0; i < reviews.size(); ++i) docs.push_back({std::to_string(i), reviews[i].author_id, reviews[i].text});
    return docs;
  }
  docs.push_back({path.filename().string(), "", read_text(path)});
  return docs;
}

evalviz::WeightedAttention attention_of(const textprep::EncodedDocument& doc, const model::ModelParameters& params) {
  return evalviz::weighted_attention(model::encode_document(doc, params).attention, doc);
}

struct SplitRoles {
  std::size_t test_fold = 0;
  std::size_t dev_fold = 1;
  std::vector<std::size_t> train_folds;
};

SplitRoles read_split(const fs::path& path) {
  try {
    const auto j = json::parse(read_text(path));
    return {j.at("test_fold").get<std::size_t>(), j.at("dev_fold").get<std::size_t>(),
            j.at("train_folds").get<std::vector<std::size_t>>()};
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// ---- subcommands ----------------------------------------------------------

struct MakeSyntheticArgs {
  corpus::SyntheticConfig cfg;
  std::string output;
};

void run_make_synthetic(const MakeSyntheticArgs& args, RunManifest& manifest, std::ostream& out) {
  manifest.seed = args.cfg.seed;
  const auto reviews = corpus::make_synthetic_corpus(args.cfg);
  const fs::path path = args.output;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  corpus::write_reviews_jsonl(path, reviews);
  manifest.outputs.push_back(path.string());
  manifest.write(manifest_for_file(path));
  out << "wrote " << reviews.size() << " reviews to " << path.string() << '\n';
}

struct BuildCorpusArgs {
  std::string input;
  std::string output;
  std::uint64_t seed = 1;
  std::size_t folds = 5;
  std::size_t test_fold = 0;
  std::size_t dev_fold = 1;
  std::size_t eval_pairs_per_label = 100;
  std::size_t min_tokens = corpus::kMinTokens;
  std::size_t max_tokens = corpus::kMaxTokens;
  std::uint64_t min_token_freq = 20;
  std::uint64_t min_char_freq = 100;
};

void run_build_corpus(const BuildCorpusArgs& args, RunManifest& manifest, std::ostream& out) {
  if (args.folds < 3) throw DomainError("build-corpus needs at least 3 folds (train, dev, test)");
  if (args.test_fold >= args.folds || args.dev_fold >= args.folds || args.test_fold == args.dev_fold) {
    throw DomainError("test and dev folds must be distinct fold indices");
  }
  manifest.seed = args.seed;
  manifest.add_input(args.input);
  const auto all = corpus::read_reviews_jsonl(args.input);
  const auto reviews = corpus::filter_reviews(all, args.min_tokens, args.max_tokens);
  const auto folds = corpus::split_by_author(reviews, args.folds, args.seed);

  SplitRoles roles{args.test_fold, args.dev_fold, {}};
  for (std::size_t f = 0; f < args.folds; ++f)
    if (f != args.test_fold && f != args.dev_fold) roles.train_folds.push_back(f);
  const auto train = corpus::merge_folds(folds, roles.train_folds);

  std::vector<std::vector<std::string>> token_lists;
  for (std::size_t idx : train.review_indices) {
    std::vector<std::string> tokens;
    for (auto& s : textprep::segment_and_tokenize(textprep::normalize(reviews[idx].text)))
      tokens.insert(tokens.end(), s.begin(), s.end());
    token_lists.push_back(std::move(tokens));
  }
  const auto vocab = textprep::build_vocab(token_lists, args.min_token_freq, args.min_char_freq);

  const corpus::SamplingConfig sampling{args.eval_pairs_per_label, 1};
  const auto dev_seed = util::derive_seed(args.seed, 0xde7), test_seed = util::derive_seed(args.seed, 0x7e57);
  const auto dev_pairs = corpus::sample_pairs(reviews, folds[args.dev_fold], sampling, dev_seed);
  const auto test_pairs = corpus::sample_pairs(reviews, folds[args.test_fold], sampling, test_seed);

  const fs::path dir = args.output;
  fs::create_directories(dir);
  corpus::write_reviews_jsonl(dir / "reviews.jsonl", reviews);
  corpus::write_folds_json(dir / "folds.json", folds, args.seed);
  write_text(dir / "split.json",
             json{{"test_fold", roles.test_fold}, {"dev_fold", roles.dev_fold}, {"train_folds", roles.train_folds}}.dump(2) + "\n");
  vocab.save(dir / "vocab.tsv");
  corpus::write_pairs_jsonl(dir / "dev_pairs.jsonl", dev_pairs);
  corpus::write_pairs_jsonl(dir / "test_pairs.jsonl", test_pairs);
  const auto hash = corpus::corpus_hash(reviews);
  corpus::write_pairs_manifest(dir / "dev_pairs.jsonl", {dev_seed, args.dev_fold, sampling, hash});
  corpus::write_pairs_manifest(dir / "test_pairs.jsonl", {test_seed, args.test_fold, sampling, hash});
  for (const char* name : {"reviews.jsonl", "folds.json", "split.json", "vocab.tsv", "dev_pairs.jsonl", "test_pairs.jsonl",
                            "dev_pairs.jsonl.manifest.json", "test_pairs.jsonl.manifest.json"})
    manifest.outputs.push_back((dir / name).string());
  manifest.write(dir / "manifest.json");
  out << "kept " << reviews.size() << " of " << all.size() << " reviews; " << folds.size() << " folds; vocabulary "
      << vocab.token_count() << " tokens / " << vocab.char_count() << " characters; " << dev_pairs.size() << " dev and "
      << test_pairs.size() << " test pairs\n";
}

struct TrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output;
};

void run_train(const TrainArgs& args, RunManifest& manifest, std::ostream& out) {
  const fs::path config_path = args.config;
  manifest.config_path = config_path.string();
  manifest.add_input(config_path);
  json j;
  try {
    j = json::parse(read_text(config_path));
  } catch (const json::exception& e) {
    throw FormatError(config_path.string() + ": " + e.what());
  }
  auto cfg = training::trainer_config_from_json(j);
  if (args.seed) cfg.loss.seed = *args.seed;
  if (!j.contains("corpus_dir")) throw FormatError(config_path.string() + ": missing \"corpus_dir\"");
  // Relative paths in the config are taken relative to the config file; -o is relative to the working directory.
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : config_path.parent_path() / path;
  };
  if (!args.output.empty()) cfg.output_dir = args.output;
  else if (!cfg.output_dir.empty()) cfg.output_dir = resolve(cfg.output_dir.string());
  if (cfg.output_dir.empty()) throw FormatError("no output directory: set \"output_dir\" or pass -o");
  const fs::path corpus_dir = resolve(j.at("corpus_dir").get<std::string>());
  manifest.seed = cfg.loss.seed;

  for (const char* name : {"reviews.jsonl", "folds.json", "split.json", "vocab.tsv", "dev_pairs.jsonl"})
    manifest.add_input(corpus_dir / name);
  const auto reviews = corpus::read_reviews_jsonl(corpus_dir / "reviews.jsonl");
  const auto folds = corpus::read_folds_json(corpus_dir / "folds.json");
  const auto roles = read_split(corpus_dir / "split.json");
  const auto vocab = textprep::Vocabulary::load(corpus_dir / "vocab.tsv");
  const auto dev_pairs = corpus::read_pairs_jsonl(corpus_dir / "dev_pairs.jsonl");
  for (std::size_t f : roles.train_folds)
    if (f >= folds.size()) throw FormatError("split.json names a fold that does not exist");
  const auto train_fold = corpus::merge_folds(folds, roles.train_folds);

  std::optional<model::ModelParameters> initial;
  if (j.contains("word_vectors")) {
    model::ModelDimensions dims = cfg.dims;
    dims.char_vocab = vocab.char_count();
    dims.word_vocab = vocab.token_count();
    initial = model::ModelParameters::initialize(dims, util::derive_seed(cfg.loss.seed, 1));
    const fs::path vectors = resolve(j.at("word_vectors").get<std::string>());
    manifest.add_input(vectors);
    const auto found = model::import_word_vectors(vectors, vocab, *initial);
    out << "imported " << found << " word vectors\n";
  }

  fs::create_directories(cfg.output_dir);
  vocab.save(cfg.output_dir / "vocab.tsv");
  json resolved = training::to_json(cfg);
  resolved["corpus_dir"] = fs::absolute(corpus_dir).lexically_normal().string();
  write_text(cfg.output_dir / "config.json", resolved.dump(2) + "\n");

  const auto result = training::train(reviews, train_fold, dev_pairs, vocab, cfg, std::move(initial),
                                      [&](const training::EpochRecord& r) {
                                        out << "epoch " << r.epoch << " loss " << fixed6(r.train_loss) << " dev_error "
                                            << (std::isnan(r.dev_error) ? std::string("n/a") : fixed6(r.dev_error)) << '\n';
                                      });
  for (const char* name : {"final.ckpt", "best.ckpt", "history.csv", "vocab.tsv", "config.json"})
    manifest.outputs.push_back((cfg.output_dir / name).string());
  manifest.write(cfg.output_dir / "manifest.json");
  out << "best epoch " << result.best_epoch << "; checkpoints in " << cfg.output_dir.string() << '\n';
}

struct EvaluateArgs {
  std::string checkpoint;
  std::string vocab;
  std::string corpus_dir;
  std::string reviews;
  std::string pairs;
  std::string output;
  Thresholds thresholds;
};

void run_evaluate(const EvaluateArgs& args, RunManifest& manifest, std::ostream& out) {
  const auto m = load_model(args.checkpoint, args.vocab, manifest);
  const fs::path reviews_path = args.reviews.empty() ? fs::path(args.corpus_dir) / "reviews.jsonl" : fs::path(args.reviews);
  const fs::path pairs_path = args.pairs.empty() ? fs::path(args.corpus_dir) / "test_pairs.jsonl" : fs::path(args.pairs);
  if ((args.reviews.empty() || args.pairs.empty()) && args.corpus_dir.empty()) {
    throw FormatError("evaluate needs --corpus or both --reviews and --pairs");
  }
  manifest.add_input(reviews_path);
  manifest.add_input(pairs_path);
  const auto reviews = corpus::read_reviews_jsonl(reviews_path);
  const auto pairs = corpus::read_pairs_jsonl(pairs_path);
  for (const auto& p : pairs)
    if (p.doc1 >= reviews.size() || p.doc2 >= reviews.size()) throw FormatError("pair index outside the review file");
  const auto [tau_s, tau_d] = args.thresholds.resolve(m.checkpoint.metadata);

  training::DocumentCache docs(reviews, m.vocab, m.checkpoint.metadata.encoding);
  const auto results = training::evaluate_pairs(m.checkpoint.params, docs, pairs, tau_s, tau_d);
  const auto errors = evalviz::error_table(results, pairs);
  const auto reliable = evalviz::high_reliability_table(results, pairs);

  const fs::path dir = args.output;
  fs::create_directories(dir);
  evalviz::write_error_table_csv(dir / "error_table.csv", errors);
  evalviz::write_reliability_table_csv(dir / "reliability_table.csv", reliable);
  std::ostringstream decisions;
  decisions << "doc1,doc2,a,c,distance,decision,reliability\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    decisions << pairs[i].doc1 << ',' << pairs[i].doc2 << ',' << pairs[i].a << ',' << pairs[i].c << ','
              << fixed6(results[i].distance) << ',' << evalviz::to_string(results[i].decision) << ','
              << evalviz::to_string(results[i].reliability) << '\n';
  }
  write_text(dir / "decisions.csv", decisions.str());
  for (const char* name : {"error_table.csv", "reliability_table.csv", "decisions.csv"})
    manifest.outputs.push_back((dir / name).string());
  manifest.write(dir / "manifest.json");

  out << "pairs " << pairs.size() << " error " << fixed6(100.0 * errors.overall.rate()) << "%";
  if (!reliable.overall.empty()) out << " high-reliability error " << fixed6(100.0 * reliable.overall.high.rate()) << "%";
  out << " on " << fixed6(100.0 * reliable.overall.retained_fraction()) << "% of pairs\n";
}

struct PairArgs {
  std::string file_a;
  std::string file_b;
  std::string checkpoint;
  std::string vocab;
  std::string output;
  Thresholds thresholds;
};

struct PairRun {
  textprep::EncodedDocument doc1, doc2;
  model::DocumentFeatures f1, f2;
  evalviz::VerificationResult result;
};

PairRun score_pair(const PairArgs& args, RunManifest& manifest) {
  const auto m = load_model(args.checkpoint, args.vocab, manifest);
  manifest.add_input(args.file_a);
  manifest.add_input(args.file_b);
  const auto& enc = m.checkpoint.metadata.encoding;
  PairRun run;
  run.doc1 = textprep::preprocess(read_text(args.file_a), m.vocab, enc);
  run.doc2 = textprep::preprocess(read_text(args.file_b), m.vocab, enc);
  if (run.doc1.real_sentence_count() == 0 || run.doc2.real_sentence_count() == 0) {
    throw DomainError("input document contains no tokens");
  }
  const auto params = m.checkpoint.params.clone(false);
  run.f1 = model::encode_document(run.doc1, params);
  run.f2 = model::encode_document(run.doc2, params);
  const auto [tau_s, tau_d] = args.thresholds.resolve(m.checkpoint.metadata);
  run.result = evalviz::classify(run.f1.y, run.f2.y, tau_s, tau_d);
  return run;
}

void print_result(std::ostream& out, const evalviz::VerificationResult& r) {
  out << "distance " << fixed6(r.distance) << '\n'
      << "decision " << evalviz::to_string(r.decision) << '\n'
      << "reliability " << evalviz::to_string(r.reliability) << '\n';
}

void run_verify(const PairArgs& args, RunManifest& manifest, std::ostream& out) {
  const auto run = score_pair(args, manifest);
  print_result(out, run.result);
  if (!args.output.empty()) {
    const json result{{"distance", run.result.distance},
                      {"decision", evalviz::to_string(run.result.decision)},
                      {"reliability", evalviz::to_string(run.result.reliability)},
                      {"tau_s", run.result.tau_s},
                      {"tau_d", run.result.tau_d}};
    write_text(args.output, result.dump(2) + "\n");
    manifest.outputs.push_back(args.output);
    manifest.write(manifest_for_file(args.output));
  }
}

void run_heatmap(const PairArgs& args, RunManifest& manifest, std::ostream& out) {
  const auto run = score_pair(args, manifest);
  const evalviz::HeatmapDocument d1{fs::path(args.file_a).filename().string(), evalviz::weighted_attention(run.f1.attention, run.doc1)};
  const evalviz::HeatmapDocument d2{fs::path(args.file_b).filename().string(), evalviz::weighted_attention(run.f2.attention, run.doc2)};
  write_text(args.output, evalviz::render_heatmap(d1, d2, run.result));
  manifest.outputs.push_back(args.output);
  manifest.write(manifest_for_file(args.output));
  print_result(out, run.result);
}

struct CorrelateArgs {
  std::string run1;
  std::string run2;
  std::string docs;
  std::string vocab;
  std::string output;
  std::size_t bins = 20;
  double alpha = 0.01;
};

void run_correlate(const CorrelateArgs& args, RunManifest& manifest, std::ostream& out) {
  if (args.bins == 0) throw DomainError("--bins must be positive");
  const auto m1 = load_model(args.run1, args.vocab, manifest);
  const auto m2 = load_model(args.run2, args.vocab.empty() ? m1.vocab_path.string() : args.vocab, manifest);
  if (!(m1.checkpoint.metadata.encoding.words_per_sentence == m2.checkpoint.metadata.encoding.words_per_sentence &&
        m1.checkpoint.metadata.encoding.chars_per_word == m2.checkpoint.metadata.encoding.chars_per_word &&
        m1.checkpoint.metadata.encoding.max_sentences == m2.checkpoint.metadata.encoding.max_sentences)) {
    throw FormatError("the two runs use different encoding settings");
  }
  const auto docs = load_documents(args.docs, manifest);
  const auto p1 = m1.checkpoint.params.clone(false);
  const auto p2 = m2.checkpoint.params.clone(false);

  std::vector<std::size_t> counts(args.bins, 0), significant(args.bins, 0);
  std::ostringstream per_doc;
  per_doc << "doc_id,tokens,tau,p_value\n";
  std::size_t scored = 0, skipped = 0;
  double tau_sum = 0.0;
  for (const auto& d : docs) {
    const auto enc = textprep::preprocess(d.text, m1.vocab, m1.checkpoint.metadata.encoding);
    if (enc.real_sentence_count() == 0) {
      ++skipped;
      continue;
    }
    std::vector<double> x, y;
    const auto a1 = attention_of(enc, p1);
    const auto a2 = attention_of(enc, p2);
    for (std::size_t i = 0; i < a1.tokens.size(); ++i) {
      if (a1.tokens[i].structural) continue;
      x.push_back(a1.tokens[i].weight);
      y.push_back(a2.tokens[i].weight);
    }
    evalviz::KendallResult k;
    try {
      k = evalviz::kendall_tau(x, y);
    } catch (const Error&) {
      ++skipped;  // fewer than two tokens or constant weights
      continue;
    }
    const auto bin = std::min(args.bins - 1, static_cast<std::size_t>((k.tau + 1.0) / 2.0 * static_cast<double>(args.bins)));
    ++counts[bin];
    if (k.p_value <= args.alpha) ++significant[bin];
    ++scored;
    tau_sum += k.tau;
    char buf[128];
    std::snprintf(buf, sizeof buf, ",%zu,%.6f,%.6g\n", x.size(), k.tau, k.p_value);
    per_doc << d.id << buf;
  }
  std::ostringstream hist;
  hist << "bin_low,bin_high,documents,significant\n";
  for (std::size_t b = 0; b < args.bins; ++b) {
    const double lo = -1.0 + 2.0 * static_cast<double>(b) / static_cast<double>(args.bins);
    const double hi = -1.0 + 2.0 * static_cast<double>(b + 1) / static_cast<double>(args.bins);
    hist << fixed6(lo) << ',' << fixed6(hi) << ',' << counts[b] << ',' << significant[b] << '\n';
  }
  const fs::path output = args.output;
  fs::path per_doc_path = output;
  per_doc_path.replace_extension(".per_doc.csv");
  write_text(output, hist.str());
  write_text(per_doc_path, per_doc.str());
  manifest.outputs = {output.string(), per_doc_path.string()};
  manifest.write(manifest_for_file(output));
  out << "documents " << scored << " scored, " << skipped << " skipped";
  if (scored > 0) out << "; mean tau " << fixed6(tau_sum / static_cast<double>(scored));
  out << '\n';
}

struct DocsArgs {
  std::string checkpoint;
  std::string vocab;
  std::string docs;
  std::string output;
  std::size_t top_n = 5;
};

void run_export_features(const DocsArgs& args, RunManifest& manifest, std::ostream& out) {
  const auto m = load_model(args.checkpoint, args.vocab, manifest);
  const auto docs = load_documents(args.docs, manifest);
  std::vector<evalviz::FeatureDocument> encoded;
  for (const auto& d : docs) {
    auto enc = textprep::preprocess(d.text, m.vocab, m.checkpoint.metadata.encoding);
    if (enc.real_sentence_count() == 0) throw DomainError("document " + d.id + " contains no tokens");
    encoded.push_back({d.id, d.author, std::move(enc)});
  }
  evalviz::export_features(encoded, m.checkpoint.params, args.output);
  manifest.outputs.push_back(args.output);
  manifest.write(manifest_for_file(args.output));
  out << "wrote " << encoded.size() << " feature rows to " << args.output << '\n';
}

void run_top_tokens(const DocsArgs& args, RunManifest& manifest, std::ostream& out) {
  const auto m = load_model(args.checkpoint, args.vocab, manifest);
  const auto docs = load_documents(args.docs, manifest);
  const auto params = m.checkpoint.params.clone(false);
  std::vector<evalviz::WeightedAttention> attentions;
  for (const auto& d : docs) {
    const auto enc = textprep::preprocess(d.text, m.vocab, m.checkpoint.metadata.encoding);
    if (enc.real_sentence_count() == 0) continue;
    attentions.push_back(attention_of(enc, params));
  }
  const auto tally = evalviz::top_token_tally(attentions, args.top_n);
  std::ostringstream csv;
  csv << "token,count\n";
  for (const auto& [token, count] : tally) {
    const bool quote = token.find_first_of(",\"\n") != std::string::npos;
    if (quote) {
      std::string escaped;
      for (char c : token) escaped += c == '"' ? std::string("\"\"") : std::string(1, c);
      csv << '"' << escaped << '"';
    } else {
      csv << token;
    }
    csv << ',' << count << '\n';
  }
  write_text(args.output, csv.str());
  manifest.outputs.push_back(args.output);
  manifest.write(manifest_for_file(args.output));
  out << "tallied " << attentions.size() << " documents, " << tally.size() << " distinct tokens\n";
}

}  // namespace

std::string file_hash(const fs::path& path) { return util::hash_hex(read_text(path)); }

void RunManifest::add_input(const fs::path& path) { inputs.emplace_back(path.string(), file_hash(path)); }

json RunManifest::to_json() const {
  json in = json::array();
  for (const auto& [path, hash] : inputs) in.push_back({{"path", path}, {"hash", hash}});
  return {{"command", command}, {"argv", argv},       {"config_path", config_path}, {"seed", seed},
          {"inputs", in},       {"outputs", outputs}, {"started", started},         {"finished", finished},
          {"version", version}};
}

void RunManifest::write(const fs::path& path) {
  finished = timestamp();
  write_text(path, to_json().dump(2) + "\n");
}

int command_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural authorship verification: corpus building, training, evaluation and attention analysis",
               "adhominem"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  MakeSyntheticArgs synth;
  auto* make_synthetic = app.add_subcommand("make-synthetic", "Generate a synthetic review corpus with per-author styles");
  make_synthetic->add_option("-o,--output", synth.output, "Output JSON Lines file")->required();
  make_synthetic->add_option("--seed", synth.cfg.seed, "Generator seed");
  make_synthetic->add_option("--authors", synth.cfg.authors, "Number of authors");
  make_synthetic->add_option("--categories", synth.cfg.categories, "Number of categories");
  make_synthetic->add_option("--reviews-per-category", synth.cfg.reviews_per_category, "Reviews per author and category");
  make_synthetic->add_option("--min-tokens", synth.cfg.min_tokens, "Minimum tokens per generated review");

  BuildCorpusArgs build;
  auto* build_corpus = app.add_subcommand("build-corpus", "Filter reviews, split by author, build vocabulary and pairs");
  build_corpus->add_option("--input", build.input, "Reviews as JSON Lines")->required();
  build_corpus->add_option("-o,--output", build.output, "Output directory")->required();
  build_corpus->add_option("--seed", build.seed, "Split and sampling seed");
  build_corpus->add_option("--folds", build.folds, "Number of author-disjoint folds");
  build_corpus->add_option("--test-fold", build.test_fold, "Fold index held out for testing");
  build_corpus->add_option("--dev-fold", build.dev_fold, "Fold index used for development");
  build_corpus->add_option("--eval-pairs-per-label", build.eval_pairs_per_label, "Dev/test pairs per (a,c) label");
  build_corpus->add_option("--min-tokens", build.min_tokens, "Minimum review length in tokens (inclusive)");
  build_corpus->add_option("--max-tokens", build.max_tokens, "Maximum review length in tokens (inclusive)");
  build_corpus->add_option("--min-token-freq", build.min_token_freq, "Token frequency threshold");
  build_corpus->add_option("--min-char-freq", build.min_char_freq, "Character frequency threshold");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a JSON config");
  train_cmd->add_option("--config", train.config, "Training config JSON")->required();
  train_cmd->add_option("--seed", train.seed, "Override the config seed");
  train_cmd->add_option("-o,--output", train.output, "Override the output directory");

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Error and high-reliability tables for labelled pairs");
  evaluate_cmd->add_option("--checkpoint", evaluate.checkpoint, "Model checkpoint")->required();
  evaluate_cmd->add_option("--vocab", evaluate.vocab, "Vocabulary (default: vocab.tsv next to the checkpoint)");
  evaluate_cmd->add_option("--corpus", evaluate.corpus_dir, "Corpus directory from build-corpus (uses test pairs)");
  evaluate_cmd->add_option("--reviews", evaluate.reviews, "Reviews JSON Lines");
  evaluate_cmd->add_option("--pairs", evaluate.pairs, "Pairs JSON Lines");
  evaluate_cmd->add_option("-o,--output", evaluate.output, "Output directory")->required();
  add_threshold_flags(evaluate_cmd, evaluate.thresholds);

  PairArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Distance, decision and reliability for two text files");
  verify_cmd->add_option("file_a", verify.file_a, "First document")->required();
  verify_cmd->add_option("file_b", verify.file_b, "Second document")->required();
  verify_cmd->add_option("--checkpoint", verify.checkpoint, "Model checkpoint")->required();
  verify_cmd->add_option("--vocab", verify.vocab, "Vocabulary (default: vocab.tsv next to the checkpoint)");
  verify_cmd->add_option("-o,--output", verify.output, "Also write the result as JSON");
  add_threshold_flags(verify_cmd, verify.thresholds);

  PairArgs heat;
  auto* heatmap_cmd = app.add_subcommand("heatmap", "Attention heatmap of two text files as HTML");
  heatmap_cmd->add_option("file_a", heat.file_a, "First document")->required();
  heatmap_cmd->add_option("file_b", heat.file_b, "Second document")->required();
  heatmap_cmd->add_option("--checkpoint", heat.checkpoint, "Model checkpoint")->required();
  heatmap_cmd->add_option("--vocab", heat.vocab, "Vocabulary (default: vocab.tsv next to the checkpoint)");
  heatmap_cmd->add_option("-o,--output", heat.output, "Output HTML file")->required();
  add_threshold_flags(heatmap_cmd, heat.thresholds);

  CorrelateArgs correlate;
  auto* correlate_cmd = app.add_subcommand("correlate", "Kendall tau of attention weights between two runs");
  correlate_cmd->add_option("run1", correlate.run1, "Reference checkpoint")->required();
  correlate_cmd->add_option("run2", correlate.run2, "Other checkpoint")->required();
  correlate_cmd->add_option("--docs", correlate.docs, "JSON Lines reviews, a directory of .txt files or one text file")->required();
  correlate_cmd->add_option("--vocab", correlate.vocab, "Vocabulary (default: vocab.tsv next to the first checkpoint)");
  correlate_cmd->add_option("-o,--output", correlate.output, "Histogram CSV")->required();
  correlate_cmd->add_option("--bins", correlate.bins, "Histogram bins over [-1, 1]");
  correlate_cmd->add_option("--alpha", correlate.alpha, "Significance level for the p-value column");

  DocsArgs features;
  auto* features_cmd = app.add_subcommand("export-features", "Write the feature vector of every document as CSV");
  features_cmd->add_option("--checkpoint", features.checkpoint, "Model checkpoint")->required();
  features_cmd->add_option("--vocab", features.vocab, "Vocabulary (default: vocab.tsv next to the checkpoint)");
  features_cmd->add_option("--docs", features.docs, "JSON Lines reviews, a directory of .txt files or one text file")->required();
  features_cmd->add_option("-o,--output", features.output, "Output CSV")->required();

  DocsArgs top;
  auto* top_cmd = app.add_subcommand("top-tokens", "Tally each document's most attended tokens");
  top_cmd->add_option("--checkpoint", top.checkpoint, "Model checkpoint")->required();
  top_cmd->add_option("--vocab", top.vocab, "Vocabulary (default: vocab.tsv next to the checkpoint)");
  top_cmd->add_option("--docs", top.docs, "JSON Lines reviews, a directory of .txt files or one text file")->required();
  top_cmd->add_option("-o,--output", top.output, "Output CSV")->required();
  top_cmd->add_option("--top-n", top.top_n, "Tokens taken per document");

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("adhominem");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  RunManifest manifest;
  manifest.argv = args;
  manifest.started = timestamp();
  try {
    const auto* sub = app.get_subcommands().front();
    manifest.command = sub->get_name();
    if (sub == make_synthetic) run_make_synthetic(synth, manifest, out);
    else if (sub == build_corpus) run_build_corpus(build, manifest, out);
    else if (sub == train_cmd) run_train(train, manifest, out);
    else if (sub == evaluate_cmd) run_evaluate(evaluate, manifest, out);
    else if (sub == verify_cmd) run_verify(verify, manifest, out);
    else if (sub == heatmap_cmd) run_heatmap(heat, manifest, out);
    else if (sub == correlate_cmd) run_correlate(correlate, manifest, out);
    else if (sub == features_cmd) run_export_features(features, manifest, out);
    else if (sub == top_cmd) run_top_tokens(top, manifest, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace adhominem::cli
