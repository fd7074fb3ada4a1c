#include "adhominem/corpus/synthetic.hpp"

#include <array>
#include <cctype>
#include <string>
#include <string_view>

#include "adhominem/errors.hpp"
#include "adhominem/textprep/tokenize.hpp"
#include "adhominem/util/rng.hpp"

namespace adhominem::corpus {
namespace {

struct Topic {
  std::string_view name;
  std::array<std::string_view, 8> nouns;
  std::array<std::string_view, 8> adjectives;
  std::array<std::string_view, 6> verbs_ing;
};

constexpr std::array<Topic, 6> kTopics = {{
    {"books",
     {"story", "author", "plot", "chapter", "ending", "character", "cover", "series"},
     {"gripping", "slow", "moving", "clever", "predictable", "thoughtful", "dark", "charming"},
     {"reading", "finishing", "rereading", "following", "discussing", "recommending"}},
    {"electronics",
     {"battery", "screen", "charger", "cable", "speaker", "remote", "adapter", "case"},
     {"bright", "sturdy", "cheap", "responsive", "loud", "flimsy", "sleek", "reliable"},
     {"charging", "streaming", "testing", "connecting", "recording", "installing"}},
    {"kitchen",
     {"pan", "knife", "blender", "kettle", "lid", "handle", "mixer", "toaster"},
     {"sharp", "heavy", "quiet", "durable", "shiny", "compact", "hot", "solid"},
     {"cooking", "baking", "cleaning", "chopping", "boiling", "washing"}},
    {"music",
     {"album", "song", "chorus", "guitar", "singer", "track", "beat", "record"},
     {"catchy", "mellow", "raw", "upbeat", "haunting", "polished", "loud", "soulful"},
     {"listening", "singing", "dancing", "playing", "humming", "driving"}},
    {"toys",
     {"puzzle", "doll", "truck", "block", "game", "piece", "box", "robot"},
     {"colorful", "fun", "tiny", "sturdy", "noisy", "educational", "soft", "bright"},
     {"building", "sharing", "stacking", "racing", "sorting", "learning"}},
    {"garden",
     {"hose", "shovel", "rake", "seed", "planter", "glove", "sprinkler", "fence"},
     {"green", "rusty", "strong", "lightweight", "muddy", "tough", "handy", "wide"},
     {"digging", "planting", "watering", "weeding", "trimming", "growing"}},
}};

// Interchangeable function-word slots; each author prefers one option per slot.
constexpr std::array<std::array<std::string_view, 4>, 4> kSlots = {{
    {"very", "really", "super", "quite"},
    {"just", "actually", "basically", "honestly"},
    {"Overall", "Well", "Anyway", "Frankly"},
    {"I think", "I feel", "I believe", "I guess"},
}};

constexpr std::array<std::string_view, 10> kTemplates = {
    "OPEN , the NOUN is INT ADJ and the NOUN is ADJ .",
    "THINK you will FILL love this NOUN because the NOUN is ADJ .",
    "I have been VERB it with my NOUN for a lot of days .",
    "It is definitely INT ADJ and I FILL like the NOUN .",
    "If you are VERB a NOUN , this is the one because it is ADJ .",
    "The NOUN came with a ADJ NOUN and it works INT well .",
    "I FILL use it a lot when I am VERB at home with the family .",
    "THINK the NOUN could be INT ADJ , but the price is fair .",
    "You can definitely tell the NOUN is ADJ because of the NOUN .",
    "We started VERB it and the NOUN was INT ADJ right away .",
};

enum Habit : std::size_t {
  kCuz,
  kAmpersand,
  kU,
  kWithSlash,
  kTeh,
  kDropG,
  kRealy,
  kDoubleBang,
  kLowerStart,
  kDefinately,
  kAlot,
  kEllipsis,
};

constexpr double kPreferenceRate = 0.9;
constexpr double kHabitRate = 0.95;

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

class Writer {
 public:
  Writer(const StyleSignature& sig, const Topic& topic, util::Rng& rng) : sig_(sig), topic_(topic), rng_(rng) {}

  std::string sentence() {
    std::vector<std::string> words;
    for (auto& w : split_words(kTemplates[rng_.index(kTemplates.size())])) {
      if (w == "NOUN") words.emplace_back(topic_.nouns[rng_.index(8)]);
      else if (w == "ADJ") words.emplace_back(topic_.adjectives[rng_.index(8)]);
      else if (w == "VERB") words.emplace_back(topic_.verbs_ing[rng_.index(6)]);
      else if (w == "INT") words.emplace_back(slot(0));
      else if (w == "FILL") words.emplace_back(slot(1));
      else if (w == "OPEN") words.emplace_back(slot(2));
      else if (w == "THINK") for (auto& part : split_words(slot(3))) words.push_back(part);
      else words.push_back(w);
    }
    apply_habits(words);
    std::string out;
    for (const auto& w : words) {
      const bool attach = w == "." || w == "," || w == "!!" || w == "...";
      if (!out.empty() && !attach) out += ' ';
      out += w;
    }
    return out;
  }

 private:
  std::string slot(std::size_t s) {
    const auto& options = kSlots[s];
    const std::size_t pick = rng_.bernoulli(kPreferenceRate) ? sig_.preferences[s] : rng_.index(options.size());
    return std::string(options[pick]);
  }

  bool fires(Habit h) { return sig_.habits[h] && rng_.bernoulli(kHabitRate); }

  void apply_habits(std::vector<std::string>& words) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < words.size(); ++i) {
      std::string w = words[i];
      if (w == "because" && fires(kCuz)) w = "cuz";
      else if (w == "and" && fires(kAmpersand)) w = "&";
      else if ((w == "you" || w == "You") && fires(kU)) w = w == "you" ? "u" : "U";
      else if (w == "with" && fires(kWithSlash)) w = "w/";
      else if ((w == "the" || w == "The") && fires(kTeh)) w = w == "the" ? "teh" : "Teh";
      else if (w == "really" && fires(kRealy)) w = "realy";
      else if (w == "definitely" && fires(kDefinately)) w = "definately";
      else if (w.size() > 4 && w.ends_with("ing") && fires(kDropG)) w.pop_back();
      else if (w == "a" && i + 1 < words.size() && words[i + 1] == "lot" && fires(kAlot)) {
        w = "alot";
        ++i;
      } else if (w == "." && i + 1 == words.size()) {
        const bool bang = fires(kDoubleBang);
        const bool dots = fires(kEllipsis);
        if (bang && dots) w = rng_.bernoulli(0.5) ? "!!" : "...";
        else if (bang) w = "!!";
        else if (dots) w = "...";
      }
      out.push_back(std::move(w));
    }
    if (!out.empty() && fires(kLowerStart)) {
      auto& first = out.front();
      first[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(first[0])));
    }
    words = std::move(out);
  }

  const StyleSignature& sig_;
  const Topic& topic_;
  util::Rng& rng_;
};

}  // namespace

StyleSignature make_signature(std::uint64_t seed) {
  util::Rng rng(seed);
  StyleSignature sig;
  for (std::size_t h = 0; h < kStyleHabits; ++h) sig.habits.push_back(rng.bernoulli(0.5));
  for (std::size_t s = 0; s < kSlots.size(); ++s) sig.preferences.push_back(rng.index(kSlots[s].size()));
  return sig;
}

std::vector<Review> make_synthetic_corpus(const SyntheticConfig& cfg) {
  if (cfg.categories == 0 || cfg.categories > kTopics.size()) {
    throw DomainError("synthetic corpus supports 1.." + std::to_string(kTopics.size()) + " categories");
  }
  if (cfg.authors == 0 || cfg.reviews_per_category == 0) throw DomainError("synthetic corpus needs authors and reviews");
  std::vector<Review> reviews;
  for (std::size_t a = 0; a < cfg.authors; ++a) {
    const auto sig = make_signature(util::derive_seed(cfg.seed, a));
    util::Rng rng(util::derive_seed(cfg.seed, 0x100000 + a));
    const std::string author = "author" + std::to_string(a);
    for (std::size_t c = 0; c < cfg.categories; ++c) {
      Writer writer(sig, kTopics[c], rng);
      for (std::size_t r = 0; r < cfg.reviews_per_category; ++r) {
        std::string text;
        while (textprep::count_tokens(text) < cfg.min_tokens) {
          if (!text.empty()) text += ' ';
          text += writer.sentence();
        }
        reviews.push_back(make_review(author, std::string(kTopics[c].name), text));
      }
    }
  }
  return reviews;
}

}  // namespace adhominem::corpus
