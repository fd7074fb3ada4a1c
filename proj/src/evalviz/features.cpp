#include "adhominem/evalviz/features.hpp"

#include <cstdio>
#include <fstream>

#include "adhominem/errors.hpp"
#include "adhominem/model/encoder.hpp"

namespace adhominem::evalviz {
namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void export_features(const std::vector<FeatureDocument>& docs, const model::ModelParameters& params,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write feature file " + path.string());
  const auto frozen = params.clone(false);
  out << "doc_id,author_id";
  for (std::size_t f = 0; f < params.dims.features; ++f) out << ",f" << f;
  out << '\n';
  char buf[40];
  for (const auto& doc : docs) {
    const auto y = model::encode_document(doc.encoded, frozen).y;
    out << csv_field(doc.doc_id) << ',' << csv_field(doc.author_id);
    for (double v : y.data()) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing feature file " + path.string());
}

}  // namespace adhominem::evalviz
