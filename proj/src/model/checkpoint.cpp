#include "adhominem/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "adhominem/errors.hpp"

namespace adhominem::model {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'A', 'D', 'H', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof value)) throw FormatError(path.string() + ": truncated checkpoint");
  return value;
}

nlohmann::json metadata_json(const CheckpointMetadata& m) {
  return {{"format_version", m.format_version}, {"dims", to_json(m.dims)},
          {"encoding", to_json(m.encoding)},    {"vocab_hash", m.vocab_hash},
          {"training_seed", m.training_seed},   {"tau_s", m.tau_s},
          {"tau_d", m.tau_d}};
}

}  // namespace

nlohmann::json to_json(const textprep::EncodingConfig& cfg) {
  return {{"words_per_sentence", cfg.words_per_sentence},
          {"chars_per_word", cfg.chars_per_word},
          {"max_sentences", cfg.max_sentences}};
}

textprep::EncodingConfig encoding_from_json(const nlohmann::json& j) {
  textprep::EncodingConfig cfg;
  if (j.contains("words_per_sentence")) cfg.words_per_sentence = j.at("words_per_sentence").get<std::size_t>();
  if (j.contains("chars_per_word")) cfg.chars_per_word = j.at("chars_per_word").get<std::size_t>();
  if (j.contains("max_sentences")) cfg.max_sentences = j.at("max_sentences").get<std::size_t>();
  return cfg;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParameters& params, const CheckpointMetadata& meta) {
  params.validate();
  if (params.dims != meta.dims) throw DimensionError("checkpoint metadata dimensions differ from the parameters");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  const std::string header = metadata_json(meta).dump();
  out.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  const auto named = params.named();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, tensor] : named) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.rank()));
    for (auto d : tensor.shape()) put<std::uint64_t>(out, d);
    const auto data = tensor.data();
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw FormatError(path.string() + ": not a checkpoint file");
  }
  const auto header_len = get<std::uint64_t>(in, path);
  if (header_len > (1u << 24)) throw FormatError(path.string() + ": implausible metadata length");
  std::string header(header_len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(header_len))) throw FormatError(path.string() + ": truncated metadata");

  Checkpoint ckpt;
  try {
    const auto j = nlohmann::json::parse(header);
    auto& m = ckpt.metadata;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kCheckpointVersion) {
      throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(m.format_version));
    }
    m.dims = dimensions_from_json(j.at("dims"));
    m.encoding = encoding_from_json(j.at("encoding"));
    m.vocab_hash = j.at("vocab_hash").get<std::string>();
    m.training_seed = j.at("training_seed").get<std::uint64_t>();
    m.tau_s = j.value("tau_s", 1.0);
    m.tau_d = j.value("tau_d", 3.0);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad metadata: " + e.what());
  }

  const auto expected = ModelParameters::layout(ckpt.metadata.dims);
  const auto count = get<std::uint32_t>(in, path);
  if (count != expected.size()) {
    throw FormatError(path.string() + ": expected " + std::to_string(expected.size()) + " parameters, found " +
                      std::to_string(count));
  }
  std::vector<Tensor> loaded;
  for (const auto& [want_name, want_shape] : expected) {
    const auto name_len = get<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw FormatError(path.string() + ": truncated parameter name");
    if (name != want_name) throw FormatError(path.string() + ": expected parameter " + want_name + ", found " + name);
    const auto rank = get<std::uint32_t>(in, path);
    numerics::Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(get<std::uint64_t>(in, path));
    if (shape != want_shape) {
      throw DimensionError(path.string() + ": parameter " + name + " has shape " + numerics::shape_to_string(shape) +
                           ", metadata implies " + numerics::shape_to_string(want_shape));
    }
    std::vector<double> data(numerics::shape_size(shape));
    if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)))) {
      throw FormatError(path.string() + ": truncated data for " + name);
    }
    loaded.emplace_back(std::move(shape), std::move(data), true);
  }

  auto& p = ckpt.params;
  p.dims = ckpt.metadata.dims;
  std::size_t i = 0;
  p.char_embed = loaded[i++];
  p.word_embed = loaded[i++];
  p.conv_weight = loaded[i++];
  p.conv_bias = loaded[i++];
  p.word_forward = {loaded[i], loaded[i + 1]};
  i += 2;
  p.word_backward = {loaded[i], loaded[i + 1]};
  i += 2;
  p.word_attention = {loaded[i], loaded[i + 1], loaded[i + 2]};
  i += 3;
  p.sentence_forward = {loaded[i], loaded[i + 1]};
  i += 2;
  p.sentence_backward = {loaded[i], loaded[i + 1]};
  i += 2;
  p.sentence_attention = {loaded[i], loaded[i + 1], loaded[i + 2]};
  i += 3;
  p.mlp_weight = loaded[i++];
  p.mlp_bias = loaded[i++];
  p.validate();
  return ckpt;
}

}  // namespace adhominem::model
