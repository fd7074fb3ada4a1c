#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace adhominem::corpus {

struct Review {
  std::string author_id;
  std::string category;
  std::string text;
  std::size_t token_count = 0;
};

// Builds a review and computes its token count with the text pipeline.
Review make_review(std::string author_id, std::string category, std::string text);

// a: same author, c: same category. Indices refer to the review list the
// pair was sampled from.
struct PairRecord {
  std::size_t doc1 = 0;
  std::size_t doc2 = 0;
  int a = 0;
  int c = 0;

  bool operator==(const PairRecord&) const = default;
};

struct Label {
  int a = 0;
  int c = 0;
  bool operator==(const Label&) const = default;
};

// Emission and reporting order of the four labels.
inline constexpr std::array<Label, 4> kLabels = {Label{1, 1}, Label{1, 0}, Label{0, 1}, Label{0, 0}};
std::size_t label_index(Label label);
std::string label_name(Label label);  // "a=1,c=0"

inline constexpr std::size_t kMinTokens = 80;
inline constexpr std::size_t kMaxTokens = 1000;

// Keeps reviews with min_tokens <= token_count <= max_tokens.
std::vector<Review> filter_reviews(const std::vector<Review>& reviews, std::size_t min_tokens = kMinTokens,
                                   std::size_t max_tokens = kMaxTokens);

struct Fold {
  std::vector<std::string> authors;        // sorted
  std::vector<std::size_t> review_indices;  // sorted
};

// Author-disjoint partition into fold_count folds. Authors are ordered by a
// seeded hash of their id and dealt round-robin, so folds differ in size by
// at most one author.
std::vector<Fold> split_by_author(const std::vector<Review>& reviews, std::size_t fold_count, std::uint64_t seed);

// Merges folds (e.g. all training folds) into one.
Fold merge_folds(const std::vector<Fold>& folds, const std::vector<std::size_t>& which);

struct SamplingConfig {
  std::size_t pairs_per_label = 1;
  // Pairs an author contributes per round-robin turn; every feasible author
  // gets at least this many per label when the quota allows.
  std::size_t min_per_author = 1;
};

// Number of distinct unordered pairs available per label, in kLabels order.
std::array<std::uint64_t, 4> label_capacity(const std::vector<Review>& reviews, const Fold& fold);

// Exactly pairs_per_label pairs per label, no repeated unordered pair,
// ordered label by label (kLabels order). Throws FeasibilityError naming
// every label whose quota exceeds its capacity.
std::vector<PairRecord> sample_pairs(const std::vector<Review>& reviews, const Fold& fold, const SamplingConfig& cfg,
                                     std::uint64_t seed);

// Deterministic in (base_seed, epoch_index).
std::vector<PairRecord> resample_epoch(const std::vector<Review>& reviews, const Fold& fold, const SamplingConfig& cfg,
                                       std::size_t epoch_index, std::uint64_t base_seed);

std::array<std::size_t, 4> label_histogram(const std::vector<PairRecord>& pairs);

// Hash over author, category and text of every review, in order.
std::string corpus_hash(const std::vector<Review>& reviews);

// JSON Lines I/O. Reviews: {"author_id", "category", "text"}.
std::vector<Review> read_reviews_jsonl(const std::filesystem::path& path);
void write_reviews_jsonl(const std::filesystem::path& path, const std::vector<Review>& reviews);

// Pairs: {"doc1_idx", "doc2_idx", "a", "c"}.
std::vector<PairRecord> read_pairs_jsonl(const std::filesystem::path& path);
void write_pairs_jsonl(const std::filesystem::path& path, const std::vector<PairRecord>& pairs);

// Sidecar "<pairs file>.manifest.json" describing how a pairs file was drawn.
struct PairsManifest {
  std::uint64_t seed = 0;
  std::size_t fold = 0;
  SamplingConfig sampling;
  std::string corpus_hash;
};
std::filesystem::path pairs_manifest_path(const std::filesystem::path& pairs_path);
void write_pairs_manifest(const std::filesystem::path& pairs_path, const PairsManifest& manifest);
PairsManifest read_pairs_manifest(const std::filesystem::path& pairs_path);

void write_folds_json(const std::filesystem::path& path, const std::vector<Fold>& folds, std::uint64_t seed);
std::vector<Fold> read_folds_json(const std::filesystem::path& path);

}  // namespace adhominem::corpus
