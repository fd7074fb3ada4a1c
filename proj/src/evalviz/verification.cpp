#include "adhominem/evalviz/verification.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "adhominem/errors.hpp"
#include "adhominem/numerics/ops.hpp"

namespace adhominem::evalviz {
namespace {

std::string percent(double rate) {
  if (std::isnan(rate)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", 100.0 * rate);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void check_sizes(const std::vector<VerificationResult>& results, const std::vector<corpus::PairRecord>& pairs) {
  if (results.empty()) throw DomainError("no verification results");
  if (results.size() != pairs.size()) throw DimensionError("results and pairs differ in length");
}

}  // namespace

std::string to_string(Decision d) { return d == Decision::kSame ? "SAME" : "DIFFERENT"; }
std::string to_string(Reliability r) { return r == Reliability::kHigh ? "HIGH" : "LOW"; }

VerificationResult classify_distance(double distance, double tau_s, double tau_d) {
  if (!(tau_s >= 0.0 && tau_s < tau_d) || !std::isfinite(tau_d)) {
    throw DomainError("thresholds must satisfy 0 <= tau_s < tau_d");
  }
  if (!(distance >= 0.0)) throw DomainError("distance must be a non-negative number");
  VerificationResult r;
  r.distance = distance;
  r.tau_s = tau_s;
  r.tau_d = tau_d;
  r.decision = distance < 0.5 * (tau_s + tau_d) ? Decision::kSame : Decision::kDifferent;
  r.reliability = (distance <= tau_s || distance >= tau_d) ? Reliability::kHigh : Reliability::kLow;
  return r;
}

VerificationResult classify(const numerics::Tensor& y1, const numerics::Tensor& y2, double tau_s, double tau_d) {
  return classify_distance(numerics::euclidean_distance(y1.detach(), y2.detach()).item(), tau_s, tau_d);
}

double RateCell::rate() const {
  return total == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(errors) / static_cast<double>(total);
}

double ReliabilityCell::retained_fraction() const {
  return instances == 0 ? std::numeric_limits<double>::quiet_NaN()
                        : static_cast<double>(high.total) / static_cast<double>(instances);
}

ErrorTable error_table(const std::vector<VerificationResult>& results, const std::vector<corpus::PairRecord>& pairs) {
  check_sizes(results, pairs);
  ErrorTable t;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const bool wrong = (results[i].decision == Decision::kSame) != (pairs[i].a == 1);
    auto& cell = t.per_label[corpus::label_index({pairs[i].a, pairs[i].c})];
    for (RateCell* c : {&t.overall, &cell}) {
      ++c->total;
      c->errors += wrong ? 1 : 0;
    }
  }
  return t;
}

HighReliabilityTable high_reliability_table(const std::vector<VerificationResult>& results,
                                            const std::vector<corpus::PairRecord>& pairs) {
  check_sizes(results, pairs);
  HighReliabilityTable t;
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& cell = t.per_label[corpus::label_index({pairs[i].a, pairs[i].c})];
    const bool wrong = (results[i].decision == Decision::kSame) != (pairs[i].a == 1);
    for (ReliabilityCell* c : {&t.overall, &cell}) {
      ++c->instances;
      if (results[i].reliability == Reliability::kHigh) {
        ++c->high.total;
        c->high.errors += wrong ? 1 : 0;
      }
    }
  }
  return t;
}

FoldSummary summarize_folds(const std::vector<ErrorTable>& folds) {
  if (folds.empty()) throw DomainError("summarize_folds: no folds");
  auto stats = [&](auto pick) {
    MeanStd m;
    std::size_t n = 0;
    for (const auto& f : folds) {
      const double r = pick(f).rate();
      if (std::isnan(r)) continue;
      m.mean += r;
      ++n;
    }
    if (n == 0) return MeanStd{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    m.mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& f : folds) {
      const double r = pick(f).rate();
      if (!std::isnan(r)) ss += (r - m.mean) * (r - m.mean);
    }
    m.std = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    return m;
  };
  FoldSummary s;
  s.overall = stats([](const ErrorTable& t) { return t.overall; });
  for (std::size_t l = 0; l < 4; ++l) s.per_label[l] = stats([l](const ErrorTable& t) { return t.per_label[l]; });
  return s;
}

void write_error_table_csv(const std::filesystem::path& path, const ErrorTable& table) {
  auto out = open_csv(path);
  out << "label,a,c,errors,instances,error_rate_percent\n";
  for (std::size_t l = 0; l < 4; ++l) {
    const auto& c = table.per_label[l];
    out << '"' << corpus::label_name(corpus::kLabels[l]) << "\"," << corpus::kLabels[l].a << ',' << corpus::kLabels[l].c
        << ',' << c.errors << ',' << c.total << ',' << percent(c.rate()) << '\n';
  }
  out << "overall,,," << table.overall.errors << ',' << table.overall.total << ',' << percent(table.overall.rate()) << '\n';
}

void write_reliability_table_csv(const std::filesystem::path& path, const HighReliabilityTable& table) {
  auto out = open_csv(path);
  out << "label,a,c,high_errors,high_instances,instances,error_rate_percent,retained_percent,empty\n";
  auto row = [&](const std::string& name, const std::string& a, const std::string& c, const ReliabilityCell& cell) {
    out << name << ',' << a << ',' << c << ',' << cell.high.errors << ',' << cell.high.total << ',' << cell.instances
        << ',' << percent(cell.high.rate()) << ',' << percent(cell.retained_fraction()) << ','
        << (cell.empty() ? "true" : "false") << '\n';
  };
  for (std::size_t l = 0; l < 4; ++l) {
    row('"' + corpus::label_name(corpus::kLabels[l]) + '"', std::to_string(corpus::kLabels[l].a),
        std::to_string(corpus::kLabels[l].c), table.per_label[l]);
  }
  row("overall", "", "", table.overall);
}

void write_fold_summary_csv(const std::filesystem::path& path, const FoldSummary& summary) {
  auto out = open_csv(path);
  out << "label,mean_error_percent,std_error_percent\n";
  for (std::size_t l = 0; l < 4; ++l) {
    out << '"' << corpus::label_name(corpus::kLabels[l]) << "\"," << percent(summary.per_label[l].mean) << ','
        << percent(summary.per_label[l].std) << '\n';
  }
  out << "overall," << percent(summary.overall.mean) << ',' << percent(summary.overall.std) << '\n';
}

}  // namespace adhominem::evalviz
