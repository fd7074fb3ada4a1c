#include "adhominem/model/parameters.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "adhominem/errors.hpp"
#include "adhominem/util/rng.hpp"

namespace adhominem::model {
namespace {

using numerics::Shape;

Tensor uniform(Shape shape, double bound, util::Rng& rng) {
  std::vector<double> data(numerics::shape_size(shape));
  for (auto& v : data) v = rng.uniform(-bound, bound);
  return Tensor(std::move(shape), std::move(data), true);
}

Tensor glorot(std::size_t rows, std::size_t cols, util::Rng& rng) {
  return uniform({rows, cols}, std::sqrt(6.0 / static_cast<double>(rows + cols)), rng);
}

LstmParameters make_lstm(std::size_t input, std::size_t hidden, util::Rng& rng) {
  LstmParameters p;
  p.weight = glorot(4 * hidden, input + hidden, rng);
  std::vector<double> bias(4 * hidden, 0.0);
  for (std::size_t i = hidden; i < 2 * hidden; ++i) bias[i] = 1.0;
  p.bias = Tensor({4 * hidden}, std::move(bias), true);
  return p;
}

AttentionParameters make_attention(std::size_t hidden2, std::size_t width, util::Rng& rng) {
  AttentionParameters p;
  p.weight = glorot(width, hidden2, rng);
  p.bias = Tensor::zeros({width}, true);
  p.context = glorot(1, width, rng);
  return p;
}

}  // namespace

void ModelDimensions::validate() const {
  const std::pair<const char*, std::size_t> fields[] = {
      {"char_vocab", char_vocab},       {"word_vocab", word_vocab},         {"char_embed", char_embed},
      {"window", window},               {"char_repr", char_repr},           {"word_embed", word_embed},
      {"word_state", word_state},       {"sentence_state", sentence_state}, {"word_attention", word_attention},
      {"sentence_attention", sentence_attention}, {"features", features}};
  for (const auto& [name, value] : fields) {
    if (value == 0) throw DomainError(std::string("model dimension ") + name + " must be positive");
  }
}

nlohmann::json to_json(const ModelDimensions& d) {
  return {{"char_vocab", d.char_vocab},         {"word_vocab", d.word_vocab},
          {"char_embed", d.char_embed},         {"window", d.window},
          {"char_repr", d.char_repr},           {"word_embed", d.word_embed},
          {"word_state", d.word_state},         {"sentence_state", d.sentence_state},
          {"word_attention", d.word_attention}, {"sentence_attention", d.sentence_attention},
          {"features", d.features}};
}

ModelDimensions dimensions_from_json(const nlohmann::json& j) {
  ModelDimensions d;
  auto read = [&](const char* key, std::size_t& field) {
    if (j.contains(key)) field = j.at(key).get<std::size_t>();
  };
  read("char_vocab", d.char_vocab);
  read("word_vocab", d.word_vocab);
  read("char_embed", d.char_embed);
  read("window", d.window);
  read("char_repr", d.char_repr);
  read("word_embed", d.word_embed);
  read("word_state", d.word_state);
  read("sentence_state", d.sentence_state);
  read("word_attention", d.word_attention);
  read("sentence_attention", d.sentence_attention);
  read("features", d.features);
  return d;
}

ModelParameters ModelParameters::initialize(const ModelDimensions& dims, std::uint64_t seed) {
  dims.validate();
  util::Rng rng(seed);
  ModelParameters p;
  p.dims = dims;
  p.char_embed = uniform({dims.char_vocab, dims.char_embed}, 0.5, rng);
  p.word_embed = uniform({dims.word_vocab, dims.word_embed}, 0.05, rng);
  p.conv_weight = glorot(dims.char_repr, dims.window * dims.char_embed, rng);
  p.conv_bias = Tensor::zeros({dims.char_repr}, true);
  p.word_forward = make_lstm(dims.word_embed + dims.char_repr, dims.word_state, rng);
  p.word_backward = make_lstm(dims.word_embed + dims.char_repr, dims.word_state, rng);
  p.word_attention = make_attention(2 * dims.word_state, dims.word_attention, rng);
  p.sentence_forward = make_lstm(2 * dims.word_state, dims.sentence_state, rng);
  p.sentence_backward = make_lstm(2 * dims.word_state, dims.sentence_state, rng);
  p.sentence_attention = make_attention(2 * dims.sentence_state, dims.sentence_attention, rng);
  p.mlp_weight = glorot(dims.features, 2 * dims.sentence_state, rng);
  p.mlp_bias = Tensor::zeros({dims.features}, true);
  return p;
}

std::vector<std::pair<std::string, numerics::Shape>> ModelParameters::layout(const ModelDimensions& d) {
  const std::size_t word_in = d.word_embed + d.char_repr;
  const std::size_t Hs = d.word_state, Hd = d.sentence_state;
  return {
      {"char_embed", {d.char_vocab, d.char_embed}},
      {"word_embed", {d.word_vocab, d.word_embed}},
      {"conv.weight", {d.char_repr, d.window * d.char_embed}},
      {"conv.bias", {d.char_repr}},
      {"word_lstm_fwd.weight", {4 * Hs, word_in + Hs}},
      {"word_lstm_fwd.bias", {4 * Hs}},
      {"word_lstm_bwd.weight", {4 * Hs, word_in + Hs}},
      {"word_lstm_bwd.bias", {4 * Hs}},
      {"word_att.weight", {d.word_attention, 2 * Hs}},
      {"word_att.bias", {d.word_attention}},
      {"word_att.context", {1, d.word_attention}},
      {"sent_lstm_fwd.weight", {4 * Hd, 2 * Hs + Hd}},
      {"sent_lstm_fwd.bias", {4 * Hd}},
      {"sent_lstm_bwd.weight", {4 * Hd, 2 * Hs + Hd}},
      {"sent_lstm_bwd.bias", {4 * Hd}},
      {"sent_att.weight", {d.sentence_attention, 2 * Hd}},
      {"sent_att.bias", {d.sentence_attention}},
      {"sent_att.context", {1, d.sentence_attention}},
      {"mlp.weight", {d.features, 2 * Hd}},
      {"mlp.bias", {d.features}},
  };
}

std::vector<std::pair<std::string, Tensor>> ModelParameters::named() const {
  return {
      {"char_embed", char_embed},
      {"word_embed", word_embed},
      {"conv.weight", conv_weight},
      {"conv.bias", conv_bias},
      {"word_lstm_fwd.weight", word_forward.weight},
      {"word_lstm_fwd.bias", word_forward.bias},
      {"word_lstm_bwd.weight", word_backward.weight},
      {"word_lstm_bwd.bias", word_backward.bias},
      {"word_att.weight", word_attention.weight},
      {"word_att.bias", word_attention.bias},
      {"word_att.context", word_attention.context},
      {"sent_lstm_fwd.weight", sentence_forward.weight},
      {"sent_lstm_fwd.bias", sentence_forward.bias},
      {"sent_lstm_bwd.weight", sentence_backward.weight},
      {"sent_lstm_bwd.bias", sentence_backward.bias},
      {"sent_att.weight", sentence_attention.weight},
      {"sent_att.bias", sentence_attention.bias},
      {"sent_att.context", sentence_attention.context},
      {"mlp.weight", mlp_weight},
      {"mlp.bias", mlp_bias},
  };
}

std::vector<Tensor> ModelParameters::tensors() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named()) out.push_back(t);
  return out;
}

ModelParameters ModelParameters::clone(bool trainable) const {
  auto copy = [trainable](const Tensor& t) {
    Tensor c = t.detach();
    c.set_requires_grad(trainable);
    return c;
  };
  ModelParameters p;
  p.dims = dims;
  p.char_embed = copy(char_embed);
  p.word_embed = copy(word_embed);
  p.conv_weight = copy(conv_weight);
  p.conv_bias = copy(conv_bias);
  p.word_forward = {copy(word_forward.weight), copy(word_forward.bias)};
  p.word_backward = {copy(word_backward.weight), copy(word_backward.bias)};
  p.word_attention = {copy(word_attention.weight), copy(word_attention.bias), copy(word_attention.context)};
  p.sentence_forward = {copy(sentence_forward.weight), copy(sentence_forward.bias)};
  p.sentence_backward = {copy(sentence_backward.weight), copy(sentence_backward.bias)};
  p.sentence_attention = {copy(sentence_attention.weight), copy(sentence_attention.bias),
                          copy(sentence_attention.context)};
  p.mlp_weight = copy(mlp_weight);
  p.mlp_bias = copy(mlp_bias);
  return p;
}

void ModelParameters::zero_grad() {
  for (auto t : tensors()) t.zero_grad();
}

std::size_t ModelParameters::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += t.size();
  return n;
}

void ModelParameters::validate() const {
  dims.validate();
  const auto expected = layout(dims);
  const auto actual = named();
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (!actual[i].second.defined()) throw DimensionError("parameter " + expected[i].first + " is missing");
    if (actual[i].second.shape() != expected[i].second) {
      throw DimensionError("parameter " + expected[i].first + " has shape " +
                           numerics::shape_to_string(actual[i].second.shape()) + ", expected " +
                           numerics::shape_to_string(expected[i].second));
    }
  }
}

std::size_t import_word_vectors(const std::filesystem::path& path, const textprep::Vocabulary& vocab,
                                ModelParameters& params) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read word vectors " + path.string());
  const std::size_t width = params.dims.word_embed;
  auto table = params.word_embed.mutable_data();
  std::size_t found = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;
    std::vector<double> values;
    double v = 0.0;
    while (ls >> v) values.push_back(v);
    if (line_no == 1 && values.size() == 1) continue;  // "count dim" header of .vec files
    if (values.size() != width) {
      throw DimensionError(path.string() + ":" + std::to_string(line_no) + ": vector has " +
                           std::to_string(values.size()) + " components, model expects " + std::to_string(width));
    }
    if (!vocab.has_token(token)) continue;
    const auto id = static_cast<std::size_t>(vocab.token_id(token));
    std::copy(values.begin(), values.end(), table.begin() + static_cast<std::ptrdiff_t>(id * width));
    ++found;
  }
  return found;
}

}  // namespace adhominem::model
