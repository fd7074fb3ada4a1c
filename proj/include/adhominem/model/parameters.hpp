#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "adhominem/numerics/tensor.hpp"
#include "adhominem/textprep/vocabulary.hpp"
#include "json.hpp"

namespace adhominem::model {

using numerics::Tensor;

struct ModelDimensions {
  std::size_t char_vocab = 0;
  std::size_t word_vocab = 0;
  std::size_t char_embed = 8;           // D_c
  std::size_t window = 4;               // h, convolution width in characters
  std::size_t char_repr = 16;           // D_r
  std::size_t word_embed = 32;          // D_w
  std::size_t word_state = 24;          // D_s, per direction
  std::size_t sentence_state = 24;      // D_d, per direction
  std::size_t word_attention = 24;      // D^a_ws
  std::size_t sentence_attention = 24;  // D^a_sd
  std::size_t features = 16;            // D_f

  void validate() const;
  bool operator==(const ModelDimensions&) const = default;
};

nlohmann::json to_json(const ModelDimensions& dims);
ModelDimensions dimensions_from_json(const nlohmann::json& j);

// Gates are stacked in the order input, forget, output, candidate:
// weight [4H x (in + H)] multiplies [x ; h_prev].
struct LstmParameters {
  Tensor weight;
  Tensor bias;  // [4H]
};

struct AttentionParameters {
  Tensor weight;   // [A x 2H]
  Tensor bias;     // [A]
  Tensor context;  // [1 x A]
};

// The single trainable set shared by both Siamese branches.
class ModelParameters {
 public:
  ModelDimensions dims;

  Tensor char_embed;   // [|C| x D_c]
  Tensor word_embed;   // [|V| x D_w]
  Tensor conv_weight;  // [D_r x h*D_c]
  Tensor conv_bias;    // [D_r]
  LstmParameters word_forward;
  LstmParameters word_backward;
  AttentionParameters word_attention;
  LstmParameters sentence_forward;
  LstmParameters sentence_backward;
  AttentionParameters sentence_attention;
  Tensor mlp_weight;  // [D_f x 2D_d]
  Tensor mlp_bias;    // [D_f]

  // Random initialization: uniform Glorot weights, zero biases except the
  // LSTM forget gates (1.0), word embeddings uniform in [-0.05, 0.05].
  static ModelParameters initialize(const ModelDimensions& dims, std::uint64_t seed);

  // Expected parameter names and shapes for a set of dimensions.
  static std::vector<std::pair<std::string, numerics::Shape>> layout(const ModelDimensions& dims);

  // Handles in layout order; they share storage with the members.
  std::vector<std::pair<std::string, Tensor>> named() const;
  std::vector<Tensor> tensors() const;

  // Deep copy. `trainable` controls requires_grad of the copy.
  ModelParameters clone(bool trainable = true) const;

  void zero_grad();
  std::size_t parameter_count() const;
  void validate() const;
};

// Replaces embedding rows with vectors from a `token v1 ... vD` text file.
// Returns the number of vocabulary tokens that were found.
std::size_t import_word_vectors(const std::filesystem::path& path, const textprep::Vocabulary& vocab,
                                ModelParameters& params);

}  // namespace adhominem::model
