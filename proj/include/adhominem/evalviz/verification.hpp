#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "adhominem/corpus/corpus.hpp"
#include "adhominem/numerics/tensor.hpp"

namespace adhominem::evalviz {

enum class Decision { kSame, kDifferent };
enum class Reliability { kHigh, kLow };

std::string to_string(Decision d);
std::string to_string(Reliability r);

struct VerificationResult {
  double distance = 0.0;
  Decision decision = Decision::kDifferent;
  Reliability reliability = Reliability::kLow;
  double tau_s = 1.0;
  double tau_d = 3.0;
};

// SAME iff distance < (tau_s + tau_d) / 2; HIGH iff distance <= tau_s or
// distance >= tau_d. Throws DomainError unless 0 <= tau_s < tau_d.
VerificationResult classify_distance(double distance, double tau_s, double tau_d);
VerificationResult classify(const numerics::Tensor& y1, const numerics::Tensor& y2, double tau_s, double tau_d);

struct RateCell {
  std::size_t errors = 0;
  std::size_t total = 0;
  double rate() const;  // NaN when total == 0
};

// Verification error rates overall and per label (kLabels order).
struct ErrorTable {
  RateCell overall;
  std::array<RateCell, 4> per_label;
};

ErrorTable error_table(const std::vector<VerificationResult>& results, const std::vector<corpus::PairRecord>& pairs);

struct ReliabilityCell {
  RateCell high;             // errors among HIGH decisions
  std::size_t instances = 0;  // all decisions in this row
  double retained_fraction() const;
  bool empty() const { return high.total == 0; }
};

struct HighReliabilityTable {
  ReliabilityCell overall;
  std::array<ReliabilityCell, 4> per_label;
};

HighReliabilityTable high_reliability_table(const std::vector<VerificationResult>& results,
                                            const std::vector<corpus::PairRecord>& pairs);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (0 for a single fold)
};

// Mean and standard deviation of error rates across folds, per row.
struct FoldSummary {
  MeanStd overall;
  std::array<MeanStd, 4> per_label;
};

FoldSummary summarize_folds(const std::vector<ErrorTable>& folds);

// CSV with a header row, one row per label, then "overall". Rates are in
// percent.
void write_error_table_csv(const std::filesystem::path& path, const ErrorTable& table);
void write_reliability_table_csv(const std::filesystem::path& path, const HighReliabilityTable& table);
void write_fold_summary_csv(const std::filesystem::path& path, const FoldSummary& summary);

}  // namespace adhominem::evalviz
