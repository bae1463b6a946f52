// Python bindings for the main operations: stimulus synthesis, corpus
// handling, metrics, CTC/attention primitives and model training.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "strlab/corpus.hpp"
#include "strlab/ctc.hpp"
#include "strlab/font.hpp"
#include "strlab/harness.hpp"
#include "strlab/metrics.hpp"
#include "strlab/model.hpp"
#include "strlab/stimulus.hpp"
#include "strlab/train.hpp"

namespace py = pybind11;
using namespace strlab;

namespace {

py::array_t<uint8_t> image_to_numpy(const Image& img) {
  py::array_t<uint8_t> arr({img.height, img.width});
  std::memcpy(arr.mutable_data(), img.pixels.data(), img.pixels.size());
  return arr;
}

Image numpy_to_image(const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2) throw Error("expected a 2-D uint8 array");
  Image img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
  std::memcpy(img.pixels.data(), arr.data(), img.pixels.size());
  return img;
}

Tensor numpy_to_logprobs(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2) throw Error("expected a 2-D float array");
  Tensor t({arr.shape(0), arr.shape(1)});
  std::memcpy(t.data(), arr.data(), sizeof(double) * static_cast<size_t>(t.size()));
  return t;
}

}  // namespace

PYBIND11_MODULE(_strlab, m) {
  m.doc() = "word-stimulus generalization lab (C++ core)";

  py::register_exception<Error>(m, "StrlabError");

  // corpus
  py::class_<WordList>(m, "WordList")
      .def_readonly("words", &WordList::words)
      .def_readonly("source", &WordList::source)
      .def("__len__", [](const WordList& w) { return w.words.size(); });
  m.def("load_wordlist", [](const std::string& path) { return load_wordlist(path); });
  m.def("synthetic_wordlist", &synthetic_wordlist, py::arg("count"), py::arg("seed"));
  m.def(
      "stratified_split",
      [](const WordList& words, uint64_t seed, double fraction) {
        SplitSpec spec;
        spec.seed = seed;
        spec.train_fraction = fraction;
        return stratified_split(words, spec);
      },
      py::arg("words"), py::arg("seed"), py::arg("train_fraction") = 0.7);
  m.def("length_subsets", &length_subsets);

  // stimulus
  m.def("font_ids", [] { return font_ids(); });
  m.def(
      "render_word",
      [](const std::string& word, const std::string& font) {
        return image_to_numpy(render_word(word, builtin_atlas(font)));
      },
      py::arg("word"), py::arg("font") = std::string("mono_serif"));
  m.def(
      "occlude",
      [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& img,
         const std::string& mode, int percent) {
        OcclusionMode m_ = mode == "bottom_up" ? OcclusionMode::kBottomUp
                                               : OcclusionMode::kTopDown;
        return image_to_numpy(occlude(numpy_to_image(img), m_, percent));
      },
      py::arg("image"), py::arg("mode"), py::arg("percent"));
  m.def(
      "salt_pepper",
      [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& img, double p,
         uint64_t seed) { return image_to_numpy(salt_pepper(numpy_to_image(img), p, seed)); },
      py::arg("image"), py::arg("p"), py::arg("seed"));
  m.def(
      "add_flankers",
      [](const std::string& word, uint64_t seed) {
        Sample s = add_flankers(word, builtin_atlas(default_font_id()), seed);
        return py::make_tuple(image_to_numpy(s.image), s.label);
      },
      py::arg("word"), py::arg("seed"));
  m.def(
      "resize",
      [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& img, int w,
         int h) { return image_to_numpy(resize_bilinear(numpy_to_image(img), w, h)); },
      py::arg("image"), py::arg("width"), py::arg("height"));

  // metrics
  m.def("word_accuracy", [](const std::string& p, const std::string& t) {
    return metrics::word_accuracy({p, t});
  });
  m.def("char_accuracy", [](const std::string& p, const std::string& t) {
    return metrics::char_accuracy({p, t});
  });
  m.def("length_accuracy", [](const std::string& p, const std::string& t) {
    return metrics::length_accuracy({p, t});
  });
  m.def("edit_distance_accuracy", [](const std::string& p, const std::string& t) {
    return metrics::edit_distance_accuracy({p, t});
  });
  m.def("levenshtein", &metrics::levenshtein);

  // ctc
  m.def("ctc_collapse", [](const std::vector<int>& path) { return ctc::collapse(path); });
  m.def(
      "ctc_loss",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& logprobs,
         const std::string& target) {
        auto res = ctc::ctc_loss_logprobs(numpy_to_logprobs(logprobs),
                                          ctc::encode_label(target));
        return res.loss;
      },
      py::arg("logprobs"), py::arg("target"));
  m.def("ctc_greedy_decode",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& scores) {
          return ctc::greedy_decode(numpy_to_logprobs(scores));
        });

  // models
  py::class_<Model>(m, "Model")
      .def("predict",
           [](const Model& model,
              const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& img) {
             return model.predict(numpy_to_image(img));
           })
      .def_property_readonly("param_count", &Model::param_count)
      .def_property_readonly("frame_count", &Model::frame_count)
      .def_property_readonly("kind", [](const Model& m_) { return m_.config().kind; });

  m.def(
      "build_model",
      [](const std::string& kind, uint64_t seed) {
        ModelConfig cfg = ModelConfig::defaults_for(kind);
        cfg.seed = seed;
        return Model(cfg);
      },
      py::arg("kind"), py::arg("seed") = 0);

  m.def(
      "train_on_words",
      [](const std::string& kind, const std::vector<std::string>& words, int max_epochs,
         int patience, uint64_t seed) {
        // Quarter-size desk architecture: plenty for smoke-scale word sets.
        ModelConfig cfg = ModelConfig::defaults_for(kind);
        cfg.conv = {{8, 3, 2, 2}, {16, 3, 2, 2}, {24, 3, 2, 1}, {32, 3, 2, 1}};
        cfg.hidden_size = 64;
        cfg.embed_size = 32;
        cfg.seed = seed;
        cfg.max_epochs = max_epochs;
        cfg.patience = patience;
        WordList list;
        list.words = words;
        ImageSetSpec spec;
        spec.name = "all_words";
        spec.seed = seed;
        Dataset ds = build_image_set(spec, list);
        Model model(cfg);
        auto [ckpt, report] = train(model, ds, ds);
        model.params() = ckpt.best_params;
        return py::make_tuple(std::move(model), report.best_metric, report.stopped_epoch);
      },
      py::arg("kind"), py::arg("words"), py::arg("max_epochs") = 50, py::arg("patience") = 50,
      py::arg("seed") = 0,
      "Train a model to transcribe `words` (train == eval set; a smoke-test helper).");
}
