#include "adhominem/evalviz/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "adhominem/errors.hpp"

namespace adhominem::evalviz {
namespace {

std::string fixed(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string escape_html(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

// White blended towards the given channel(s) by intensity percent.
std::string shade(double intensity, bool blue) {
  const long fade = std::lround(255.0 * (1.0 - intensity / 100.0));
  std::ostringstream os;
  if (blue) os << "rgb(" << fade << ',' << fade << ",255)";
  else os << "rgb(255," << fade << ',' << fade << ')';
  return os.str();
}

void render_document(std::ostringstream& os, const HeatmapDocument& doc, int index) {
  double max_token = 0.0;
  bool any = false;
  for (const auto& t : doc.attention.tokens) {
    if (t.structural) continue;
    max_token = any ? std::max(max_token, t.weight) : t.weight;
    any = true;
  }
  if (!any) throw DomainError("render_heatmap: document " + std::to_string(index) + " has no tokens");
  const double max_sentence = *std::max_element(doc.attention.sentence_weights.begin(), doc.attention.sentence_weights.end());

  os << "<div class=\"document\" data-doc=\"" << index << "\" style=\"margin:1em 0;padding:0.5em;border:1px solid #ccc\">\n";
  os << "<h3 style=\"margin:0 0 0.5em 0\">" << escape_html(doc.title) << "</h3>\n";
  std::size_t current = static_cast<std::size_t>(-1);
  for (const auto& t : doc.attention.tokens) {
    if (t.sentence != current) {
      if (current != static_cast<std::size_t>(-1)) os << "</div>\n";
      current = t.sentence;
      const double w = doc.attention.sentence_weights[t.sentence];
      const double intensity = max_sentence > 0.0 ? 100.0 * w / max_sentence : 0.0;
      os << "<div class=\"sentence\" style=\"line-height:1.8\">"
         << "<span class=\"sentence-marker\" data-intensity=\"" << fixed(intensity) << "\" style=\"background-color:"
         << shade(intensity, true) << "\">&nbsp;&nbsp;&nbsp;</span>";
    }
    if (t.structural) continue;
    const double intensity = max_token > 0.0 ? 100.0 * t.weight / max_token : 0.0;
    os << " <span class=\"token\" data-intensity=\"" << fixed(intensity) << "\" style=\"background-color:"
       << shade(intensity, false) << "\">" << escape_html(t.surface) << "</span>";
  }
  if (current != static_cast<std::size_t>(-1)) os << "</div>\n";
  os << "</div>\n";
}

}  // namespace

std::string render_heatmap(const HeatmapDocument& doc1, const HeatmapDocument& doc2, const VerificationResult& result) {
  std::ostringstream os;
  os << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Attention heatmap</title>\n</head>\n"
     << "<body style=\"font-family:sans-serif;max-width:60em;margin:auto\">\n";
  os << "<div class=\"summary\" style=\"padding:0.5em;background:#f4f4f4\">"
     << "distance <b class=\"distance\">" << fixed(result.distance) << "</b>"
     << " | tau_s " << fixed(result.tau_s) << " | tau_d " << fixed(result.tau_d)
     << " | decision <b class=\"decision\">" << to_string(result.decision) << "</b>"
     << " | reliability <b class=\"reliability\">" << to_string(result.reliability) << "</b></div>\n";
  render_document(os, doc1, 1);
  render_document(os, doc2, 2);
  os << "</body>\n</html>\n";
  return os.str();
}

}  // namespace adhominem::evalviz
