#pragma once

#include <string>

#include "adhominem/evalviz/attention.hpp"
#include "adhominem/evalviz/verification.hpp"

namespace adhominem::evalviz {

struct HeatmapDocument {
  std::string title;
  WeightedAttention attention;
};

// Self-contained UTF-8 HTML with inline styles. Each sentence row opens with
// a blue marker at intensity 100 * a_s / max(a_s) and each token gets a red
// background at intensity 100 * a / max(a), both per document; structural
// closing tokens are not drawn. Output depends only on the inputs.
std::string render_heatmap(const HeatmapDocument& doc1, const HeatmapDocument& doc2, const VerificationResult& result);

}  // namespace adhominem::evalviz
