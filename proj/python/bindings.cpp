#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "narrative/augment.hpp"
#include "narrative/cli.hpp"
#include "narrative/error.hpp"
#include "narrative/eval.hpp"
#include "narrative/explain.hpp"
#include "narrative/models.hpp"
#include "narrative/service.hpp"
#include "narrative/synthetic.hpp"

namespace py = pybind11;
using namespace narrative;

namespace {

// nlohmann::json <-> Python through the json module keeps the binding small.
py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_py(const py::handle& obj) {
  return nlohmann::json::parse(
      py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

std::vector<Document> to_documents(const py::list& rows) {
  std::vector<Document> docs;
  std::size_t i = 0;
  for (const auto& row : rows) {
    auto doc = document_from_json(from_py(row), "document " + std::to_string(i++));
    if (doc) docs.push_back(std::move(*doc));
  }
  return docs;
}

Document text_document(const std::string& text, const std::string& id) {
  Document d;
  d.id = id;
  d.text = text;
  return d;
}

py::dict probs_dict(const ClassProbs& p) {
  py::dict out;
  for (Label l : kAllLabels) out[py::str(std::string(label_name(l)))] = p.probs[label_index(l)];
  return out;
}

ModelSpec make_spec(const std::string& kind, const py::object& config) {
  ModelSpec spec;
  spec.kind = parse_model_kind(kind);
  if (!config.is_none()) apply_config(spec, from_py(config));
  return spec;
}

// Holder so Python sees one Model type for every classifier kind.
struct PyModel {
  std::shared_ptr<const TextClassifier> model;

  const CantmModel& cantm() const {
    auto* m = dynamic_cast<const CantmModel*>(model.get());
    if (!m) throw Error("explanations need a cantm model, not " + std::string(model->kind()));
    return *m;
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Vaccine narrative classification core";
  py::register_exception<Error>(m, "NarrativeError", PyExc_ValueError);

  m.attr("CLASSES") = [] {
    std::vector<std::string> out;
    for (Label l : kAllLabels) out.emplace_back(label_name(l));
    return out;
  }();

  m.def("clean", [](const std::string& text) { return clean(text).value(); });
  m.def("tokenize", [](const std::string& text) { return tokenize(clean(text)); },
        "clean, then split into lowercase tokens");

  m.def(
      "match_rules",
      [](const std::string& text, const py::object& rules_path) {
        const std::vector<KeywordRule> rules =
            rules_path.is_none() ? default_rules() : load_rules(rules_path.cast<std::string>());
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& [label, pattern] : match_rules(text_document(text, "q"), rules).matches) {
          out.emplace_back(label_name(label), pattern);
        }
        return out;
      },
      py::arg("text"), py::arg("rules_path") = py::none());

  m.def("load_dataset", [](const std::string& path) {
    py::list out;
    for (const auto& d : load_dataset(path).documents) out.append(to_py(to_json(d)));
    return out;
  });

  m.def("class_distribution", [](const py::list& docs) {
    const ClassDistribution dist = class_distribution(to_documents(docs));
    const auto pct = dist.rounded_percent();
    py::dict counts, percent;
    for (Label l : kAllLabels) {
      counts[py::str(std::string(label_name(l)))] = dist.counts[label_index(l)];
      percent[py::str(std::string(label_name(l)))] = pct[label_index(l)];
    }
    py::dict out;
    out["counts"] = counts;
    out["percent"] = percent;
    out["total"] = dist.total;
    return out;
  });

  m.def(
      "stratified_kfold",
      [](const py::list& docs, int k, std::uint64_t seed) {
        return stratified_kfold(to_documents(docs), k, seed).fold_of;
      },
      py::arg("docs"), py::arg("k") = 5, py::arg("seed") = 1);

  m.def("metrics", [](const std::vector<std::string>& gold, const std::vector<std::string>& pred) {
    auto parse = [](const std::vector<std::string>& names) {
      std::vector<Label> out;
      for (const auto& n : names) {
        auto l = parse_label(n);
        if (!l) throw Error("unknown label '" + n + "'");
        out.push_back(*l);
      }
      return out;
    };
    return to_py(report_to_json(metrics(parse(gold), parse(pred))));
  });

  m.def(
      "synthetic_corpus",
      [](std::size_t per_class, std::uint64_t seed) {
        SyntheticSpec spec;
        spec.docs_per_class.fill(per_class);
        spec.seed = seed;
        py::list out;
        for (const auto& d : generate_synthetic(spec).documents) out.append(to_py(to_json(d)));
        return out;
      },
      py::arg("per_class") = 100, py::arg("seed") = 1);

  m.def(
      "cross_validate",
      [](const py::list& docs, const std::string& kind, int k, std::uint64_t seed,
         const py::object& config) {
        const ModelSpec spec = make_spec(kind, config);
        const std::vector<Document> data = to_documents(docs);
        CvResult cv;
        {
          py::gil_scoped_release release;
          cv = run_cv(
              data,
              [&](std::span<const Document> train, std::uint64_t s) {
                return train_model(spec, train, s);
              },
              k, seed);
        }
        return to_py(report_to_json(cv.report));
      },
      py::arg("docs"), py::arg("kind") = "cantm", py::arg("k") = 5, py::arg("seed") = 1,
      py::arg("config") = py::none());

  py::class_<PyModel>(m, "Model")
      .def_static(
          "train",
          [](const py::list& docs, const std::string& kind, std::uint64_t seed,
             const py::object& config) {
            const ModelSpec spec = make_spec(kind, config);
            const std::vector<Document> data = to_documents(docs);
            py::gil_scoped_release release;
            return PyModel{train_model(spec, data, seed)};
          },
          py::arg("docs"), py::arg("kind") = "cantm", py::arg("seed") = 1,
          py::arg("config") = py::none())
      .def_static("load", [](const std::string& path) { return PyModel{load_model(path)}; })
      .def("save", [](const PyModel& self, const std::string& path) { save_model(*self.model, path); })
      .def_property_readonly("kind", [](const PyModel& self) { return std::string(self.model->kind()); })
      .def(
          "predict_proba",
          [](const PyModel& self, const std::string& text, const std::string& id) {
            return probs_dict(self.model->predict_proba(text_document(text, id)));
          },
          py::arg("text"), py::arg("id") = "text")
      .def(
          "predict",
          [](const PyModel& self, const std::string& text, const std::string& id) {
            return std::string(label_name(self.model->predict(text_document(text, id))));
          },
          py::arg("text"), py::arg("id") = "text")
      .def(
          "explain",
          [](const PyModel& self, const std::string& text, std::size_t n_words) {
            ExplainOptions options;
            options.n_words = n_words;
            return to_py(to_json(explain(text_document(text, "text"), self.cantm(), options)));
          },
          py::arg("text"), py::arg("n_words") = 10)
      .def(
          "class_words",
          [](const PyModel& self, const std::string& label, std::size_t n) {
            auto l = parse_label(label);
            if (!l) throw Error("unknown label '" + label + "'");
            std::vector<std::string> out;
            for (const auto& w : class_associated_words(self.cantm(), *l, n).words) {
              out.push_back(w.word);
            }
            return out;
          },
          py::arg("label"), py::arg("n") = 10);

  py::class_<InferenceService>(m, "Service")
      .def(py::init([](const std::string& checkpoint) {
        return InferenceService::from_checkpoint(checkpoint);
      }))
      .def("classify",
           [](const InferenceService& s, const std::string& body) {
             const HttpReply r = s.classify(body);
             return py::make_tuple(r.status, to_py(r.body));
           })
      .def("health", [](const InferenceService& s) { return to_py(s.health().body); })
      .def("model_info", [](const InferenceService& s) { return to_py(s.model_info().body); })
      .def_property_readonly("model_version", &InferenceService::model_version);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = 0;
    {
      py::gil_scoped_release release;
      code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  });
}
