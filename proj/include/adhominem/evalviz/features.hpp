#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "adhominem/model/parameters.hpp"
#include "adhominem/textprep/encode.hpp"

namespace adhominem::evalviz {

struct FeatureDocument {
  std::string doc_id;
  std::string author_id;
  textprep::EncodedDocument encoded;
};

// Writes "doc_id,author_id,f0..f{D_f-1}" with one row per document. Values
// use 17 significant digits so they read back bit-exactly.
void export_features(const std::vector<FeatureDocument>& docs, const model::ModelParameters& params,
                     const std::filesystem::path& path);

}  // namespace adhominem::evalviz
