#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "adhominem/corpus/corpus.hpp"
#include "adhominem/errors.hpp"
#include "adhominem/evalviz/verification.hpp"
#include "adhominem/model/parameters.hpp"
#include "adhominem/textprep/encode.hpp"
#include "json.hpp"

namespace adhominem::training {

using numerics::Tensor;

struct LossConfig {
  double tau_s = 1.0;
  double tau_d = 3.0;
  double learning_rate = 1e-3;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  double grad_clip_norm = 1.0;  // <= 0 disables clipping

  void validate() const;
};

// Double-threshold contrastive loss of one pair: same-author distances are
// pulled below tau_s, different-author distances pushed above tau_d, each as
// a squared hinge.
double pair_loss(double distance, int same_author, const LossConfig& cfg);
Tensor pair_loss(const Tensor& distance, int same_author, const LossConfig& cfg);

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

struct AdamState {
  std::size_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

struct StepStats {
  double grad_norm = 0.0;  // before clipping
  bool clipped = false;
};

// Gradients of each tensor (zeros when it never received one).
std::vector<std::vector<double>> collect_gradients(std::span<const Tensor> params);

// Global-norm clipping followed by a bias-corrected Adam update, in place.
// Throws EvaluationError on a non-finite gradient.
StepStats optimizer_step(std::span<Tensor> params, std::vector<std::vector<double>> grads, const LossConfig& cfg,
                         AdamState& state);

class TrainingError : public Error {
 public:
  using Error::Error;
};

struct TrainerConfig {
  LossConfig loss;
  model::ModelDimensions dims;  // vocabulary sizes are taken from the vocabulary
  textprep::EncodingConfig encoding;
  corpus::SamplingConfig sampling{200, 1};
  std::filesystem::path output_dir;  // empty: no files written
};

nlohmann::json to_json(const TrainerConfig& cfg);
// Reads every LossConfig field plus "model", "encoding" and "sampling"
// objects; missing keys keep their defaults.
TrainerConfig trainer_config_from_json(const nlohmann::json& j);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_error = 0.0;  // NaN without development pairs
  std::array<double, 4> dev_label_error{};
};

struct TrainingResult {
  model::ModelParameters final_params;
  model::ModelParameters best_params;
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> history;
};

// Lazily encodes reviews and reuses the result.
class DocumentCache {
 public:
  DocumentCache(const std::vector<corpus::Review>& reviews, const textprep::Vocabulary& vocab,
                textprep::EncodingConfig encoding);
  const textprep::EncodedDocument& get(std::size_t review_index);

 private:
  const std::vector<corpus::Review>& reviews_;
  const textprep::Vocabulary& vocab_;
  textprep::EncodingConfig encoding_;
  std::vector<std::optional<textprep::EncodedDocument>> docs_;
};

// Distances and decisions for every pair, encoding each distinct document once.
std::vector<evalviz::VerificationResult> evaluate_pairs(const model::ModelParameters& params, DocumentCache& docs,
                                                        const std::vector<corpus::PairRecord>& pairs, double tau_s,
                                                        double tau_d);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Per epoch: resample pairs from the training fold, shuffle, run minibatches
// (mean pair loss, one clipped Adam step per batch) and score the
// development pairs. With an output directory, writes final.ckpt, best.ckpt
// (lowest development error) and history.csv.
TrainingResult train(const std::vector<corpus::Review>& reviews, const corpus::Fold& train_fold,
                     const std::vector<corpus::PairRecord>& dev_pairs, const textprep::Vocabulary& vocab,
                     const TrainerConfig& cfg, std::optional<model::ModelParameters> initial = std::nullopt,
                     const EpochCallback& on_epoch = {});

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

}  // namespace adhominem::training
