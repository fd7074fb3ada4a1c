#include "adhominem/corpus/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <unordered_set>

#include "adhominem/errors.hpp"
#include "adhominem/textprep/tokenize.hpp"
#include "adhominem/util/hash.hpp"
#include "adhominem/util/rng.hpp"
#include "json.hpp"

namespace adhominem::corpus {
namespace {

using json = nlohmann::json;

std::uint64_t choose2(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

std::uint64_t pair_key(std::size_t x, std::size_t y) {
  if (x > y) std::swap(x, y);
  return (static_cast<std::uint64_t>(x) << 32) | static_cast<std::uint64_t>(y);
}

// author -> category -> review indices, all sorted.
using AuthorIndex = std::map<std::string, std::map<std::string, std::vector<std::size_t>>>;

AuthorIndex index_fold(const std::vector<Review>& reviews, const Fold& fold) {
  AuthorIndex idx;
  for (auto r : fold.review_indices) idx[reviews.at(r).author_id][reviews[r].category].push_back(r);
  return idx;
}

class LabelSampler {
 public:
  LabelSampler(const std::vector<Review>& reviews, const Fold& fold, util::Rng& rng, std::unordered_set<std::uint64_t>& used)
      : reviews_(reviews), fold_(fold), rng_(rng), used_(used) {}

  // One fresh pair with the given label anchored at `author`, or nullopt when
  // the author has no unused candidate left.
  std::optional<PairRecord> draw(const std::string& author, Label label,
                                 const std::map<std::string, std::vector<std::size_t>>& own) {
    std::vector<std::size_t> mine;
    for (const auto& [cat, docs] : own) mine.insert(mine.end(), docs.begin(), docs.end());
    for (int attempt = 0; attempt < 32; ++attempt) {
      const std::size_t x = mine[rng_.index(mine.size())];
      const auto& pool = label.a == 1 ? mine : fold_.review_indices;
      const std::size_t y = pool[rng_.index(pool.size())];
      if (matches(author, label, x, y) && !used_.count(pair_key(x, y))) return accept(x, y, label);
    }
    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    const auto& pool = label.a == 1 ? mine : fold_.review_indices;
    for (auto x : mine)
      for (auto y : pool)
        if (matches(author, label, x, y) && (label.a == 0 || x < y) && !used_.count(pair_key(x, y)))
          candidates.emplace_back(x, y);
    if (candidates.empty()) return std::nullopt;
    const auto [x, y] = candidates[rng_.index(candidates.size())];
    return accept(x, y, label);
  }

 private:
  bool matches(const std::string& author, Label label, std::size_t x, std::size_t y) const {
    if (x == y) return false;
    const auto& rx = reviews_[x];
    const auto& ry = reviews_[y];
    if (rx.author_id != author) return false;
    const int a = rx.author_id == ry.author_id ? 1 : 0;
    const int c = rx.category == ry.category ? 1 : 0;
    return a == label.a && c == label.c;
  }

  PairRecord accept(std::size_t x, std::size_t y, Label label) {
    used_.insert(pair_key(x, y));
    if (rng_.bernoulli(0.5)) std::swap(x, y);
    return PairRecord{x, y, label.a, label.c};
  }

  const std::vector<Review>& reviews_;
  const Fold& fold_;
  util::Rng& rng_;
  std::unordered_set<std::uint64_t>& used_;
};

Review review_from_json(const json& j, std::size_t line_no, const std::filesystem::path& path) {
  for (const char* key : {"author_id", "category", "text"}) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": missing string field '" + key + "'");
    }
  }
  if (j["category"].get<std::string>().empty()) {
    throw FormatError(path.string() + ":" + std::to_string(line_no) + ": empty category");
  }
  return make_review(j["author_id"], j["category"], j["text"]);
}

}  // namespace

Review make_review(std::string author_id, std::string category, std::string text) {
  Review r{std::move(author_id), std::move(category), std::move(text), 0};
  r.token_count = textprep::count_tokens(r.text);
  return r;
}

std::size_t label_index(Label label) {
  for (std::size_t i = 0; i < kLabels.size(); ++i)
    if (kLabels[i] == label) return i;
  throw DomainError("invalid label");
}

std::string label_name(Label label) { return "a=" + std::to_string(label.a) + ",c=" + std::to_string(label.c); }

std::vector<Review> filter_reviews(const std::vector<Review>& reviews, std::size_t min_tokens, std::size_t max_tokens) {
  std::vector<Review> out;
  std::copy_if(reviews.begin(), reviews.end(), std::back_inserter(out),
               [&](const Review& r) { return r.token_count >= min_tokens && r.token_count <= max_tokens; });
  return out;
}

std::vector<Fold> split_by_author(const std::vector<Review>& reviews, std::size_t fold_count, std::uint64_t seed) {
  if (fold_count < 2) throw DomainError("split_by_author: fold_count must be at least 2");
  std::set<std::string> unique;
  for (const auto& r : reviews) unique.insert(r.author_id);
  if (unique.size() < fold_count) {
    throw DomainError("split_by_author: " + std::to_string(unique.size()) + " authors cannot fill " +
                      std::to_string(fold_count) + " folds");
  }
  std::vector<std::pair<std::uint64_t, std::string>> keyed;
  for (const auto& a : unique) {
    util::Fnv1a h;
    h.update(a);
    keyed.emplace_back(util::splitmix64(h.value() ^ util::splitmix64(seed)), a);
  }
  std::sort(keyed.begin(), keyed.end());
  std::map<std::string, std::size_t> fold_of;
  for (std::size_t i = 0; i < keyed.size(); ++i) fold_of[keyed[i].second] = i % fold_count;

  std::vector<Fold> folds(fold_count);
  for (const auto& [author, f] : fold_of) folds[f].authors.push_back(author);
  for (std::size_t i = 0; i < reviews.size(); ++i) folds[fold_of[reviews[i].author_id]].review_indices.push_back(i);
  return folds;
}

Fold merge_folds(const std::vector<Fold>& folds, const std::vector<std::size_t>& which) {
  Fold out;
  for (auto f : which) {
    const auto& src = folds.at(f);
    out.authors.insert(out.authors.end(), src.authors.begin(), src.authors.end());
    out.review_indices.insert(out.review_indices.end(), src.review_indices.begin(), src.review_indices.end());
  }
  std::sort(out.authors.begin(), out.authors.end());
  std::sort(out.review_indices.begin(), out.review_indices.end());
  return out;
}

std::array<std::uint64_t, 4> label_capacity(const std::vector<Review>& reviews, const Fold& fold) {
  const auto idx = index_fold(reviews, fold);
  std::map<std::string, std::uint64_t> per_category;
  std::uint64_t same_author_same_cat = 0, same_author = 0, total = 0, same_cat = 0;
  for (const auto& [author, cats] : idx) {
    std::uint64_t n_author = 0;
    for (const auto& [cat, docs] : cats) {
      same_author_same_cat += choose2(docs.size());
      per_category[cat] += docs.size();
      n_author += docs.size();
    }
    same_author += choose2(n_author);
    total += n_author;
  }
  for (const auto& [cat, n] : per_category) same_cat += choose2(n);
  const std::uint64_t all = choose2(total);
  return {same_author_same_cat, same_author - same_author_same_cat, same_cat - same_author_same_cat,
          all - same_author - same_cat + same_author_same_cat};
}

std::vector<PairRecord> sample_pairs(const std::vector<Review>& reviews, const Fold& fold, const SamplingConfig& cfg,
                                     std::uint64_t seed) {
  if (cfg.min_per_author == 0) throw DomainError("sample_pairs: min_per_author must be positive");
  const auto capacity = label_capacity(reviews, fold);
  std::string infeasible;
  for (std::size_t l = 0; l < kLabels.size(); ++l) {
    if (cfg.pairs_per_label > capacity[l]) {
      if (!infeasible.empty()) infeasible += "; ";
      infeasible += "(" + label_name(kLabels[l]) + ") needs " + std::to_string(cfg.pairs_per_label) + ", has " +
                    std::to_string(capacity[l]);
    }
  }
  if (!infeasible.empty()) throw FeasibilityError("sample_pairs: infeasible labels: " + infeasible);

  const auto idx = index_fold(reviews, fold);
  util::Rng rng(seed);
  std::unordered_set<std::uint64_t> used;
  LabelSampler sampler(reviews, fold, rng, used);
  std::vector<PairRecord> out;
  out.reserve(cfg.pairs_per_label * kLabels.size());

  for (const Label label : kLabels) {
    // Authors that can anchor this label at all.
    std::vector<std::string> anchors;
    for (const auto& [author, cats] : idx) {
      const bool two_in_a_cat = std::any_of(cats.begin(), cats.end(), [](const auto& kv) { return kv.second.size() >= 2; });
      const bool ok = label.a == 1 ? (label.c == 1 ? two_in_a_cat : cats.size() >= 2) : idx.size() >= 2;
      if (ok) anchors.push_back(author);
    }
    rng.shuffle(std::span<std::string>(anchors));
    std::size_t produced = 0;
    while (produced < cfg.pairs_per_label && !anchors.empty()) {
      std::vector<std::string> still_open;
      for (const auto& author : anchors) {
        bool exhausted = false;
        for (std::size_t k = 0; k < cfg.min_per_author && produced < cfg.pairs_per_label; ++k) {
          auto pair = sampler.draw(author, label, idx.at(author));
          if (!pair) {
            exhausted = true;
            break;
          }
          out.push_back(*pair);
          ++produced;
        }
        if (!exhausted) still_open.push_back(author);
        if (produced == cfg.pairs_per_label) break;
      }
      anchors = std::move(still_open);
    }
    if (produced < cfg.pairs_per_label) {
      throw FeasibilityError("sample_pairs: ran out of candidates for (" + label_name(label) + ")");
    }
  }
  return out;
}

std::vector<PairRecord> resample_epoch(const std::vector<Review>& reviews, const Fold& fold, const SamplingConfig& cfg,
                                       std::size_t epoch_index, std::uint64_t base_seed) {
  return sample_pairs(reviews, fold, cfg, util::derive_seed(base_seed, 0x5eed0000ULL + epoch_index));
}

std::array<std::size_t, 4> label_histogram(const std::vector<PairRecord>& pairs) {
  std::array<std::size_t, 4> h{};
  for (const auto& p : pairs) ++h[label_index({p.a, p.c})];
  return h;
}

std::string corpus_hash(const std::vector<Review>& reviews) {
  util::Fnv1a h;
  for (const auto& r : reviews) {
    h.update(r.author_id);
    h.update(std::string_view("\x1f", 1));
    h.update(r.category);
    h.update(std::string_view("\x1f", 1));
    h.update(r.text);
    h.update(std::string_view("\x1e", 1));
  }
  return h.hex();
}

std::vector<Review> read_reviews_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read reviews file " + path.string());
  std::vector<Review> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(review_from_json(j, line_no, path));
  }
  return out;
}

void write_reviews_jsonl(const std::filesystem::path& path, const std::vector<Review>& reviews) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write reviews file " + path.string());
  for (const auto& r : reviews) {
    out << json{{"author_id", r.author_id}, {"category", r.category}, {"text", r.text}}.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<PairRecord> read_pairs_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read pairs file " + path.string());
  std::vector<PairRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("doc1_idx").get<std::size_t>(), j.at("doc2_idx").get<std::size_t>(), j.at("a").get<int>(),
                     j.at("c").get<int>()});
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_pairs_jsonl(const std::filesystem::path& path, const std::vector<PairRecord>& pairs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write pairs file " + path.string());
  for (const auto& p : pairs) {
    out << json{{"doc1_idx", p.doc1}, {"doc2_idx", p.doc2}, {"a", p.a}, {"c", p.c}}.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::filesystem::path pairs_manifest_path(const std::filesystem::path& pairs_path) {
  return pairs_path.string() + ".manifest.json";
}

void write_pairs_manifest(const std::filesystem::path& pairs_path, const PairsManifest& m) {
  const auto path = pairs_manifest_path(pairs_path);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const json j{{"seed", m.seed},
               {"fold", m.fold},
               {"quotas", {{"pairs_per_label", m.sampling.pairs_per_label}, {"min_per_author", m.sampling.min_per_author}}},
               {"corpus_hash", m.corpus_hash}};
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

PairsManifest read_pairs_manifest(const std::filesystem::path& pairs_path) {
  const auto path = pairs_manifest_path(pairs_path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    const auto j = json::parse(in);
    PairsManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.fold = j.at("fold").get<std::size_t>();
    m.sampling.pairs_per_label = j.at("quotas").at("pairs_per_label").get<std::size_t>();
    m.sampling.min_per_author = j.at("quotas").at("min_per_author").get<std::size_t>();
    m.corpus_hash = j.at("corpus_hash").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_folds_json(const std::filesystem::path& path, const std::vector<Fold>& folds, std::uint64_t seed) {
  json j;
  j["seed"] = seed;
  j["folds"] = json::array();
  for (const auto& f : folds) j["folds"].push_back({{"authors", f.authors}, {"review_indices", f.review_indices}});
  std::ofstream out(path);
  if (!out) throw IoError("cannot write folds file " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<Fold> read_folds_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read folds file " + path.string());
  try {
    const auto j = json::parse(in);
    std::vector<Fold> folds;
    for (const auto& f : j.at("folds")) {
      folds.push_back({f.at("authors").get<std::vector<std::string>>(),
                       f.at("review_indices").get<std::vector<std::size_t>>()});
    }
    return folds;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace adhominem::corpus
