#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <sstream>

#include "adhominem/cli/cli.hpp"
#include "adhominem/corpus/synthetic.hpp"
#include "adhominem/errors.hpp"
#include "adhominem/evalviz/attention.hpp"
#include "adhominem/evalviz/heatmap.hpp"
#include "adhominem/evalviz/kendall.hpp"
#include "adhominem/evalviz/verification.hpp"
#include "adhominem/model/checkpoint.hpp"
#include "adhominem/model/encoder.hpp"
#include "adhominem/textprep/normalize.hpp"
#include "adhominem/textprep/tokenize.hpp"
#include "adhominem/training/training.hpp"

namespace py = pybind11;
using namespace adhominem;

namespace {

py::dict result_dict(const evalviz::VerificationResult& r) {
  py::dict d;
  d["distance"] = r.distance;
  d["decision"] = evalviz::to_string(r.decision);
  d["reliability"] = evalviz::to_string(r.reliability);
  d["tau_s"] = r.tau_s;
  d["tau_d"] = r.tau_d;
  return d;
}

// A checkpoint plus its vocabulary, scoring raw text.
class Model {
 public:
  Model(const std::filesystem::path& checkpoint, std::optional<std::filesystem::path> vocab) {
    ckpt_ = model::load_checkpoint(checkpoint);
    vocab_ = textprep::Vocabulary::load(vocab.value_or(checkpoint.parent_path() / "vocab.tsv"));
    if (vocab_.content_hash() != ckpt_.metadata.vocab_hash) throw FormatError("vocabulary does not match checkpoint");
    params_ = ckpt_.params.clone(false);
  }

  std::vector<double> features(const std::string& text) const {
    const auto y = model::encode_document(encode(text), params_).y;
    return {y.data().begin(), y.data().end()};
  }

  py::dict verify(const std::string& a, const std::string& b, std::optional<double> tau_s,
                  std::optional<double> tau_d) const {
    return result_dict(score(a, b, tau_s, tau_d));
  }

  std::vector<py::tuple> attention(const std::string& text) const {
    const auto doc = encode(text);
    const auto w = evalviz::weighted_attention(model::encode_document(doc, params_).attention, doc);
    std::vector<py::tuple> out;
    for (const auto& t : w.tokens) out.push_back(py::make_tuple(t.surface, t.weight, t.sentence, t.structural));
    return out;
  }

  std::string heatmap(const std::string& a, const std::string& b, std::optional<double> tau_s,
                      std::optional<double> tau_d) const {
    const auto d1 = encode(a), d2 = encode(b);
    const auto f1 = model::encode_document(d1, params_), f2 = model::encode_document(d2, params_);
    const auto r = evalviz::classify(f1.y, f2.y, tau_s.value_or(ckpt_.metadata.tau_s), tau_d.value_or(ckpt_.metadata.tau_d));
    return evalviz::render_heatmap({"document 1", evalviz::weighted_attention(f1.attention, d1)},
                                   {"document 2", evalviz::weighted_attention(f2.attention, d2)}, r);
  }

  double tau_s() const { return ckpt_.metadata.tau_s; }
  double tau_d() const { return ckpt_.metadata.tau_d; }

 private:
  textprep::EncodedDocument encode(const std::string& text) const {
    auto doc = textprep::preprocess(text, vocab_, ckpt_.metadata.encoding);
    if (doc.real_sentence_count() == 0) throw DomainError("document contains no tokens");
    return doc;
  }

  evalviz::VerificationResult score(const std::string& a, const std::string& b, std::optional<double> tau_s,
                                    std::optional<double> tau_d) const {
    const auto y1 = model::encode_document(encode(a), params_).y;
    const auto y2 = model::encode_document(encode(b), params_).y;
    return evalviz::classify(y1, y2, tau_s.value_or(ckpt_.metadata.tau_s), tau_d.value_or(ckpt_.metadata.tau_d));
  }

  model::Checkpoint ckpt_;
  textprep::Vocabulary vocab_;
  model::ModelParameters params_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Neural authorship verification core";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<DomainError> domain(m, "DomainError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DomainError& e) {
      py::set_error(domain, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("normalize", &textprep::normalize, py::arg("text"));
  m.def("tokenize", &textprep::segment_and_tokenize, py::arg("text"), "Sentences as token lists");
  m.def("count_tokens", &textprep::count_tokens, py::arg("text"));

  m.def(
      "pair_loss",
      [](double d, int a, double tau_s, double tau_d) {
        training::LossConfig cfg;
        cfg.tau_s = tau_s;
        cfg.tau_d = tau_d;
        cfg.validate();
        return training::pair_loss(d, a, cfg);
      },
      py::arg("distance"), py::arg("same_author"), py::arg("tau_s") = 1.0, py::arg("tau_d") = 3.0);

  m.def(
      "classify_distance",
      [](double d, double tau_s, double tau_d) { return result_dict(evalviz::classify_distance(d, tau_s, tau_d)); },
      py::arg("distance"), py::arg("tau_s") = 1.0, py::arg("tau_d") = 3.0);

  m.def(
      "kendall_tau",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const auto r = evalviz::kendall_tau(x, y);
        return py::make_tuple(r.tau, r.p_value);
      },
      py::arg("x"), py::arg("y"), "Kendall tau-b and its two-sided p-value");

  m.def(
      "synthetic_corpus",
      [](std::size_t authors, std::uint64_t seed) {
        corpus::SyntheticConfig cfg;
        cfg.authors = authors;
        cfg.seed = seed;
        std::vector<py::dict> out;
        for (const auto& r : corpus::make_synthetic_corpus(cfg)) {
          py::dict d;
          d["author_id"] = r.author_id;
          d["category"] = r.category;
          d["text"] = r.text;
          out.push_back(d);
        }
        return out;
      },
      py::arg("authors") = 40, py::arg("seed") = 7);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::command_dispatch(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one CLI subcommand; returns (exit_code, stdout, stderr)");

  py::class_<Model>(m, "Model")
      .def(py::init<const std::filesystem::path&, std::optional<std::filesystem::path>>(), py::arg("checkpoint"),
           py::arg("vocab") = py::none())
      .def("features", &Model::features, py::arg("text"))
      .def("verify", &Model::verify, py::arg("a"), py::arg("b"), py::arg("tau_s") = py::none(),
           py::arg("tau_d") = py::none())
      .def("attention", &Model::attention, py::arg("text"), "(surface, weight, sentence, structural) per token")
      .def("heatmap", &Model::heatmap, py::arg("a"), py::arg("b"), py::arg("tau_s") = py::none(),
           py::arg("tau_d") = py::none())
      .def_property_readonly("tau_s", &Model::tau_s)
      .def_property_readonly("tau_d", &Model::tau_d);

  m.attr("__version__") = cli::kVersion;
}
