#include "adhominem/training/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "adhominem/model/checkpoint.hpp"
#include "adhominem/model/encoder.hpp"
#include "adhominem/numerics/ops.hpp"
#include "adhominem/util/rng.hpp"

namespace adhominem::training {

using corpus::PairRecord;
using model::ModelParameters;

void LossConfig::validate() const {
  if (!(tau_s > 0.0 && tau_s < tau_d)) throw DomainError("loss thresholds must satisfy 0 < tau_s < tau_d");
  if (!(learning_rate >= 0.0)) throw DomainError("learning rate must be non-negative");
  if (batch_size == 0) throw DomainError("batch size must be positive");
}

double pair_loss(double distance, int same_author, const LossConfig& cfg) {
  if (!(distance >= 0.0)) throw DomainError("pair_loss: distance must be non-negative");
  const double hinge = same_author ? std::max(distance - cfg.tau_s, 0.0) : std::max(cfg.tau_d - distance, 0.0);
  return hinge * hinge;
}

Tensor pair_loss(const Tensor& distance, int same_author, const LossConfig& cfg) {
  if (!(distance.item() >= 0.0)) throw DomainError("pair_loss: distance must be non-negative");
  using namespace numerics;
  const Tensor hinge = same_author ? relu(add_scalar(distance, -cfg.tau_s)) : relu(add_scalar(scale(distance, -1.0), cfg.tau_d));
  return square(hinge);
}

std::vector<std::vector<double>> collect_gradients(std::span<const Tensor> params) {
  std::vector<std::vector<double>> out;
  out.reserve(params.size());
  for (const auto& p : params) {
    if (p.has_grad()) out.emplace_back(p.grad().begin(), p.grad().end());
    else out.emplace_back(p.size(), 0.0);
  }
  return out;
}

StepStats optimizer_step(std::span<Tensor> params, std::vector<std::vector<double>> grads, const LossConfig& cfg,
                         AdamState& state) {
  if (grads.size() != params.size()) throw DimensionError("optimizer_step: gradient count differs from parameters");
  double sq = 0.0;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].size() != params[i].size()) throw DimensionError("optimizer_step: gradient shape mismatch");
    for (double g : grads[i]) {
      if (!std::isfinite(g)) throw EvaluationError("optimizer_step: non-finite gradient in parameter " + std::to_string(i));
      sq += g * g;
    }
  }
  StepStats stats;
  stats.grad_norm = std::sqrt(sq);
  if (cfg.grad_clip_norm > 0.0 && stats.grad_norm > cfg.grad_clip_norm) {
    const double factor = cfg.grad_clip_norm / stats.grad_norm;
    for (auto& g : grads)
      for (auto& v : g) v *= factor;
    stats.clipped = true;
  }

  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  }
  ++state.step;
  const double correction1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params[i].mutable_data();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    const auto& g = grads[i];
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (g[k] == 0.0 && m[k] == 0.0 && v[k] == 0.0) continue;
      m[k] = kAdamBeta1 * m[k] + (1.0 - kAdamBeta1) * g[k];
      v[k] = kAdamBeta2 * v[k] + (1.0 - kAdamBeta2) * g[k] * g[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      values[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
    }
  }
  return stats;
}

nlohmann::json to_json(const TrainerConfig& cfg) {
  return {{"tau_s", cfg.loss.tau_s},
          {"tau_d", cfg.loss.tau_d},
          {"learning_rate", cfg.loss.learning_rate},
          {"epochs", cfg.loss.epochs},
          {"batch_size", cfg.loss.batch_size},
          {"seed", cfg.loss.seed},
          {"grad_clip_norm", cfg.loss.grad_clip_norm},
          {"model", model::to_json(cfg.dims)},
          {"encoding", model::to_json(cfg.encoding)},
          {"sampling", {{"pairs_per_label", cfg.sampling.pairs_per_label}, {"min_per_author", cfg.sampling.min_per_author}}},
          {"output_dir", cfg.output_dir.string()}};
}

TrainerConfig trainer_config_from_json(const nlohmann::json& j) {
  TrainerConfig cfg;
  try {
    cfg.loss.tau_s = j.value("tau_s", cfg.loss.tau_s);
    cfg.loss.tau_d = j.value("tau_d", cfg.loss.tau_d);
    cfg.loss.learning_rate = j.value("learning_rate", cfg.loss.learning_rate);
    cfg.loss.epochs = j.value("epochs", cfg.loss.epochs);
    cfg.loss.batch_size = j.value("batch_size", cfg.loss.batch_size);
    cfg.loss.seed = j.value("seed", cfg.loss.seed);
    cfg.loss.grad_clip_norm = j.value("grad_clip_norm", cfg.loss.grad_clip_norm);
    if (j.contains("model")) cfg.dims = model::dimensions_from_json(j.at("model"));
    if (j.contains("encoding")) cfg.encoding = model::encoding_from_json(j.at("encoding"));
    if (j.contains("sampling")) {
      const auto& s = j.at("sampling");
      cfg.sampling.pairs_per_label = s.value("pairs_per_label", cfg.sampling.pairs_per_label);
      cfg.sampling.min_per_author = s.value("min_per_author", cfg.sampling.min_per_author);
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad training config: ") + e.what());
  }
  return cfg;
}

DocumentCache::DocumentCache(const std::vector<corpus::Review>& reviews, const textprep::Vocabulary& vocab,
                             textprep::EncodingConfig encoding)
    : reviews_(reviews), vocab_(vocab), encoding_(encoding), docs_(reviews.size()) {}

const textprep::EncodedDocument& DocumentCache::get(std::size_t review_index) {
  auto& slot = docs_.at(review_index);
  if (!slot) slot = textprep::preprocess(reviews_[review_index].text, vocab_, encoding_);
  return *slot;
}

std::vector<evalviz::VerificationResult> evaluate_pairs(const ModelParameters& params, DocumentCache& docs,
                                                        const std::vector<PairRecord>& pairs, double tau_s,
                                                        double tau_d) {
  const auto frozen = params.clone(false);
  std::map<std::size_t, Tensor> features;
  auto feature = [&](std::size_t idx) -> const Tensor& {
    auto it = features.find(idx);
    if (it == features.end()) it = features.emplace(idx, model::encode_document(docs.get(idx), frozen).y).first;
    return it->second;
  };
  std::vector<evalviz::VerificationResult> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(evalviz::classify(feature(p.doc1), feature(p.doc2), tau_s, tau_d));
  return out;
}

namespace {

void save(const std::filesystem::path& path, const ModelParameters& params, const TrainerConfig& cfg,
          const textprep::Vocabulary& vocab) {
  model::CheckpointMetadata meta;
  meta.dims = params.dims;
  meta.encoding = cfg.encoding;
  meta.vocab_hash = vocab.content_hash();
  meta.training_seed = cfg.loss.seed;
  meta.tau_s = cfg.loss.tau_s;
  meta.tau_d = cfg.loss.tau_d;
  model::save_checkpoint(path, params, meta);
}

}  // namespace

TrainingResult train(const std::vector<corpus::Review>& reviews, const corpus::Fold& train_fold,
                     const std::vector<PairRecord>& dev_pairs, const textprep::Vocabulary& vocab,
                     const TrainerConfig& cfg, std::optional<ModelParameters> initial, const EpochCallback& on_epoch) {
  cfg.loss.validate();
  cfg.encoding.validate();
  model::ModelDimensions dims = cfg.dims;
  dims.char_vocab = vocab.char_count();
  dims.word_vocab = vocab.token_count();

  TrainingResult result;
  ModelParameters params = initial ? std::move(*initial) : ModelParameters::initialize(dims, util::derive_seed(cfg.loss.seed, 1));
  params.validate();
  if (params.dims != dims) throw DimensionError("initial parameters do not match the vocabulary and configuration");

  if (!cfg.output_dir.empty()) std::filesystem::create_directories(cfg.output_dir);
  DocumentCache docs(reviews, vocab, cfg.encoding);
  AdamState adam;
  auto tensors = params.tensors();
  double best_dev = std::numeric_limits<double>::infinity();
  result.best_params = params.clone();

  for (std::size_t epoch = 0; epoch < cfg.loss.epochs; ++epoch) {
    auto pairs = corpus::resample_epoch(reviews, train_fold, cfg.sampling, epoch, cfg.loss.seed);
    util::Rng rng(util::derive_seed(cfg.loss.seed, 0xba7c0000ULL + epoch));
    rng.shuffle(std::span<PairRecord>(pairs));

    double loss_sum = 0.0;
    for (std::size_t start = 0, batch = 0; start < pairs.size(); start += cfg.loss.batch_size, ++batch) {
      const std::size_t end = std::min(pairs.size(), start + cfg.loss.batch_size);
      const double weight = 1.0 / static_cast<double>(end - start);
      params.zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const auto& pair = pairs[i];
        const Tensor y1 = model::encode_document(docs.get(pair.doc1), params).y;
        const Tensor y2 = model::encode_document(docs.get(pair.doc2), params).y;
        const Tensor d = model::distance(y1, y2);
        const Tensor loss = std::isfinite(d.item()) ? pair_loss(d, pair.a, cfg.loss) : d;
        const double value = loss.item();
        if (!std::isfinite(value)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
                              ", pair (" + std::to_string(pair.doc1) + ", " + std::to_string(pair.doc2) + ")");
        }
        loss_sum += value;
        if (loss.requires_grad()) numerics::backward(loss, weight);
      }
      try {
        optimizer_step(tensors, collect_gradients(tensors), cfg.loss, adam);
      } catch (const EvaluationError& e) {
        throw TrainingError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ": " + e.what());
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = pairs.empty() ? 0.0 : loss_sum / static_cast<double>(pairs.size());
    rec.dev_error = std::numeric_limits<double>::quiet_NaN();
    rec.dev_label_error.fill(std::numeric_limits<double>::quiet_NaN());
    if (!dev_pairs.empty()) {
      const auto table = evalviz::error_table(evaluate_pairs(params, docs, dev_pairs, cfg.loss.tau_s, cfg.loss.tau_d), dev_pairs);
      rec.dev_error = table.overall.rate();
      for (std::size_t l = 0; l < 4; ++l) rec.dev_label_error[l] = table.per_label[l].rate();
    }
    result.history.push_back(rec);
    // Without development pairs the latest epoch counts as best.
    const double score = dev_pairs.empty() ? -static_cast<double>(epoch) : rec.dev_error;
    if (score < best_dev) {
      best_dev = score;
      result.best_epoch = epoch;
      result.best_params = params.clone();
      if (!cfg.output_dir.empty()) save(cfg.output_dir / "best.ckpt", params, cfg, vocab);
    }
    if (on_epoch) on_epoch(rec);
  }
  params.zero_grad();
  result.final_params = params;
  if (!cfg.output_dir.empty()) {
    save(cfg.output_dir / "final.ckpt", params, cfg, vocab);
    write_history_csv(cfg.output_dir / "history.csv", result.history);
  }
  return result;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,train_loss,dev_error_overall";
  for (const auto& l : corpus::kLabels) out << ",dev_error_a" << l.a << 'c' << l.c;
  out << '\n';
  char buf[64];
  auto num = [&](double v) -> std::string {
    if (std::isnan(v)) return "";
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
  };
  for (const auto& r : history) {
    out << r.epoch << ',' << num(r.train_loss) << ',' << num(r.dev_error);
    for (double e : r.dev_label_error) out << ',' << num(e);
    out << '\n';
  }
}

}  // namespace adhominem::training
