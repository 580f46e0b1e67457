#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gendernet/dataset.hpp"
#include "gendernet/encoding.hpp"
#include "gendernet/evaluation.hpp"
#include "gendernet/models.hpp"
#include "gendernet/training.hpp"

namespace py = pybind11;
using namespace gendernet;

namespace {

ModelKind kind_from_string(const std::string& name) {
    const auto kind = parse_model_kind(name);
    if (!kind) throw std::invalid_argument("unknown model kind '" + name + "'");
    return *kind;
}

std::vector<SuffixRule> rules_from_pairs(const std::vector<std::pair<std::string, double>>& pairs) {
    std::vector<SuffixRule> rules;
    rules.reserve(pairs.size());
    for (const auto& [suffix, p] : pairs) rules.push_back({suffix, p});
    return rules;
}

const char* stop_reason_string(StopReason r) {
    switch (r) {
        case StopReason::early_stop: return "early_stop";
        case StopReason::max_epochs: return "max_epochs";
        case StopReason::diverged: return "diverged";
    }
    return "unknown";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Character-level grammatical gender classifier for Swedish nouns";

    py::class_<Vocabulary>(m, "Vocabulary")
        .def_property_readonly("size", &Vocabulary::size)
        .def_property_readonly("unk_index", &Vocabulary::unk_index)
        .def("index_of", [](const Vocabulary& v, char32_t c) { return v.index_of(c); })
        .def("__len__", &Vocabulary::size)
        .def("__repr__", [](const Vocabulary& v) {
            return "Vocabulary(size=" + std::to_string(v.size()) + ")";
        });

    py::class_<EncodedWord>(m, "EncodedWord")
        .def_readonly("indices", &EncodedWord::indices)
        .def_readonly("true_length", &EncodedWord::true_length);

    m.def("build_vocabulary", &build_vocabulary, py::arg("words"));
    m.def("encode_word", &encode_word, py::arg("word"), py::arg("vocab"), py::arg("max_len"));
    m.def("decode_indices", &decode_indices, py::arg("encoded"), py::arg("vocab"));

    py::class_<LabeledWord>(m, "LabeledWord")
        .def(py::init<std::string, int>(), py::arg("surface"), py::arg("label"))
        .def_readwrite("surface", &LabeledWord::surface)
        .def_readwrite("label", &LabeledWord::label)
        .def("__repr__", [](const LabeledWord& w) {
            return "LabeledWord('" + w.surface + "', " + std::to_string(w.label) + ")";
        });

    py::class_<DatasetSplit>(m, "DatasetSplit")
        .def_readonly("train", &DatasetSplit::train)
        .def_readonly("validation", &DatasetSplit::validation)
        .def_readonly("test", &DatasetSplit::test)
        .def_readonly("seed", &DatasetSplit::seed);

    py::class_<SuffixStat>(m, "SuffixStat")
        .def_readonly("suffix", &SuffixStat::suffix)
        .def_readonly("occurrences", &SuffixStat::occurrences)
        .def_readonly("fraction_utrum", &SuffixStat::fraction_utrum);

    m.def("load_dataset", &load_dataset, py::arg("path"));
    m.def("write_dataset", &write_dataset, py::arg("data"), py::arg("path"));
    m.def("split_dataset", &split_dataset, py::arg("data"), py::arg("seed"));
    m.def("filter_suffix_test_set", &filter_suffix_test_set, py::arg("test"), py::arg("suffixes"));
    m.def("suffix_statistics", &suffix_statistics, py::arg("data"), py::arg("suffix"));
    m.def("majority_baseline", &majority_baseline, py::arg("data"));
    m.def(
        "synthesize_dataset",
        [](std::uint64_t seed, std::size_t n,
           const std::vector<std::pair<std::string, double>>& rules) {
            return synthesize_dataset(seed, n, rules_from_pairs(rules));
        },
        py::arg("seed"), py::arg("n"), py::arg("rules"));

    py::class_<Model>(m, "Model")
        .def_property_readonly(
            "kind", [](const Model& m_) { return std::string(model_kind_name(m_.kind())); })
        .def_property_readonly("max_len", &Model::max_len)
        .def_property_readonly("embedding_dim", &Model::embedding_dim)
        .def_property_readonly("hidden_size", &Model::hidden_size)
        .def_property_readonly("vocab", &Model::vocab, py::return_value_policy::reference_internal)
        .def("parameter_count", &Model::parameter_count)
        .def(
            "predict", [](const Model& m_, const std::string& word) { return m_.predict(word); },
            py::arg("word"))
        .def("__repr__", [](const Model& m_) {
            return "Model(kind='" + std::string(model_kind_name(m_.kind())) +
                   "', parameters=" + std::to_string(m_.parameter_count()) + ")";
        });

    m.def(
        "make_model",
        [](const std::string& kind, const Vocabulary& vocab, int max_len, int embedding_dim,
           int hidden_size, std::uint64_t seed) {
            return make_model(kind_from_string(kind), vocab, max_len, embedding_dim, hidden_size,
                              seed);
        },
        py::arg("kind"), py::arg("vocab"), py::arg("max_len"), py::arg("embedding_dim") = 60,
        py::arg("hidden_size") = 64, py::arg("seed") = 42);
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));
    m.def("count_parameters", &count_parameters, py::arg("model"));

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("beta1", &TrainConfig::beta1)
        .def_readwrite("beta2", &TrainConfig::beta2)
        .def_readwrite("epsilon", &TrainConfig::epsilon)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("patience", &TrainConfig::patience)
        .def_readwrite("max_epochs", &TrainConfig::max_epochs)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("threads", &TrainConfig::threads)
        .def_readwrite("checkpoint_path", &TrainConfig::checkpoint_path);

    py::class_<EpochStats>(m, "EpochStats")
        .def_readonly("train_loss", &EpochStats::train_loss)
        .def_readonly("val_loss", &EpochStats::val_loss)
        .def_readonly("val_accuracy", &EpochStats::val_accuracy);

    py::class_<TrainHistory>(m, "TrainHistory")
        .def_readonly("epochs", &TrainHistory::epochs)
        .def_readonly("best_epoch", &TrainHistory::best_epoch);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("history", &TrainResult::history)
        .def_property_readonly("reason", [](const TrainResult& r) {
            return std::string(stop_reason_string(r.reason));
        });

    m.def("train", &train, py::arg("model"), py::arg("split"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "gradient_check",
        [](Model& model, const std::string& word, int label, double h) {
            return gradient_check(model, encode_word(word, model.vocab(), model.max_len()), label,
                                  h);
        },
        py::arg("model"), py::arg("word"), py::arg("label"), py::arg("h") = 1e-5);
    m.def("write_history", &write_history, py::arg("history"), py::arg("path"));

    py::class_<ClassMetrics>(m, "ClassMetrics")
        .def_readonly("precision", &ClassMetrics::precision)
        .def_readonly("recall", &ClassMetrics::recall)
        .def_readonly("f1", &ClassMetrics::f1)
        .def_readonly("degenerate", &ClassMetrics::degenerate);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("n", &EvalReport::n)
        .def_readonly("accuracy", &EvalReport::accuracy)
        .def_readonly("utrum", &EvalReport::utrum)
        .def_readonly("neutrum", &EvalReport::neutrum)
        .def_readonly("tp", &EvalReport::tp)
        .def_readonly("tn", &EvalReport::tn)
        .def_readonly("fp", &EvalReport::fp)
        .def_readonly("fn", &EvalReport::fn);

    m.def("build_report", &build_report, py::arg("labels"), py::arg("predictions"));
    m.def("evaluate", &evaluate, py::arg("model"), py::arg("data"), py::arg("threshold") = 0.5,
          py::arg("threads") = 0);
    m.def("report_to_json", &report_to_json, py::arg("report"));

    py::class_<PredictionSample>(m, "PredictionSample")
        .def_readonly("surface", &PredictionSample::surface)
        .def_readonly("label", &PredictionSample::label)
        .def_readonly("probability", &PredictionSample::probability);

    py::class_<SampledPredictions>(m, "SampledPredictions")
        .def_readonly("correct", &SampledPredictions::correct)
        .def_readonly("incorrect", &SampledPredictions::incorrect)
        .def_readonly("correct_shortfall", &SampledPredictions::correct_shortfall)
        .def_readonly("incorrect_shortfall", &SampledPredictions::incorrect_shortfall);

    m.def("sample_predictions", &sample_predictions, py::arg("model"), py::arg("data"),
          py::arg("seed"), py::arg("n_each"), py::arg("threshold") = 0.5);
    m.def("export_hidden_states", &export_hidden_states, py::arg("model"), py::arg("data"),
          py::arg("path"), py::arg("final_state_only") = false, py::arg("threshold") = 0.5);
}
