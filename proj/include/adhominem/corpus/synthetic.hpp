#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "adhominem/corpus/corpus.hpp"

namespace adhominem::corpus {

// Generator for reviews whose authorship is carried by a programmatic style
// signature: a per-author set of character-level misspelling habits plus a
// preferred choice among interchangeable function words. Topic words depend
// only on the category, so content does not reveal the author.
struct SyntheticConfig {
  std::size_t authors = 40;
  std::size_t categories = 4;
  std::size_t reviews_per_category = 3;  // per author and category
  std::size_t min_tokens = 160;          // keep generating sentences until reached
  std::uint64_t seed = 7;
};

// Number of distinct misspelling habits an author may switch on.
inline constexpr std::size_t kStyleHabits = 12;

struct StyleSignature {
  std::vector<bool> habits;             // kStyleHabits flags
  std::vector<std::size_t> preferences;  // preferred option per function-word slot
};

StyleSignature make_signature(std::uint64_t seed);

std::vector<Review> make_synthetic_corpus(const SyntheticConfig& cfg);

}  // namespace adhominem::corpus
