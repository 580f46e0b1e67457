#include "gendernet/evaluation.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "gendernet/rng.hpp"
#include "gendernet/training.hpp"

namespace gendernet {

namespace {

ClassMetrics class_metrics(std::size_t true_pos, std::size_t false_pos, std::size_t false_neg) {
    ClassMetrics m;
    const std::size_t predicted = true_pos + false_pos;
    const std::size_t actual = true_pos + false_neg;
    if (predicted == 0 && actual == 0) {
        m.degenerate = true;
        return m;
    }
    m.precision = predicted == 0 ? 0.0
                                 : static_cast<double>(true_pos) / static_cast<double>(predicted);
    m.recall = actual == 0 ? 0.0 : static_cast<double>(true_pos) / static_cast<double>(actual);
    m.f1 = (m.precision + m.recall) == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

std::vector<double> predict_all(const Model& model, const std::vector<LabeledWord>& data,
                                int threads) {
    // Encoding up front keeps the parallel section free of shared state.
    std::vector<EncodedWord> encoded;
    encoded.reserve(data.size());
    for (const auto& w : data) {
        encoded.push_back(encode_word(w.surface, model.vocab(), model.max_len()));
    }
    std::vector<double> probs(data.size());
    const int workers = resolve_threads(threads);
    std::vector<std::thread> pool;
    const std::size_t n = data.size();
    const std::size_t chunk_workers =
        std::min<std::size_t>(static_cast<std::size_t>(workers), n == 0 ? 1 : n);
    for (std::size_t w = 0; w < chunk_workers; ++w) {
        const std::size_t begin = n * w / chunk_workers;
        const std::size_t end = n * (w + 1) / chunk_workers;
        pool.emplace_back([&, begin, end] {
            ForwardTrace trace;
            for (std::size_t i = begin; i < end; ++i) probs[i] = model.forward(encoded[i], trace);
        });
    }
    for (auto& t : pool) t.join();
    return probs;
}

}  // namespace

EvalReport build_report(const std::vector<int>& labels, const std::vector<int>& predictions) {
    if (labels.size() != predictions.size()) {
        throw std::invalid_argument("build_report: labels and predictions differ in length");
    }
    if (labels.empty()) throw std::invalid_argument("build_report: empty input");

    EvalReport r;
    r.n = labels.size();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        const int p = predictions[i];
        if (y == 1 && p == 1) ++r.tp;
        else if (y == 0 && p == 0) ++r.tn;
        else if (y == 0 && p == 1) ++r.fp;
        else if (y == 1 && p == 0) ++r.fn;
        else throw std::invalid_argument("build_report: labels and predictions must be 0 or 1");
    }
    r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(r.n);
    r.utrum = class_metrics(r.tp, r.fp, r.fn);
    r.neutrum = class_metrics(r.tn, r.fn, r.fp);
    return r;
}

EvalReport evaluate(const Model& model, const std::vector<LabeledWord>& data, double threshold,
                    int threads) {
    if (data.empty()) throw std::invalid_argument("evaluate: empty data");
    const auto probs = predict_all(model, data, threads);
    std::vector<int> labels(data.size()), predictions(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        labels[i] = data[i].label;
        predictions[i] = probs[i] >= threshold ? 1 : 0;
    }
    return build_report(labels, predictions);
}

SampledPredictions sample_predictions(const Model& model, const std::vector<LabeledWord>& data,
                                      std::uint64_t seed, std::size_t n_each, double threshold) {
    if (n_each < 1) throw std::invalid_argument("sample_predictions: n_each must be >= 1");
    const auto probs = predict_all(model, data, 0);

    std::vector<std::size_t> correct_idx;
    std::vector<std::size_t> incorrect_idx;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int pred = probs[i] >= threshold ? 1 : 0;
        (pred == data[i].label ? correct_idx : incorrect_idx).push_back(i);
    }

    SplitMix64 rng(seed);
    auto take = [&](std::vector<std::size_t>& pool, bool& shortfall) {
        seeded_shuffle(pool, rng);
        std::vector<PredictionSample> out;
        shortfall = pool.size() < n_each;
        const std::size_t take_n = std::min(n_each, pool.size());
        out.reserve(take_n);
        for (std::size_t k = 0; k < take_n; ++k) {
            const std::size_t i = pool[k];
            out.push_back({data[i].surface, data[i].label, probs[i]});
        }
        return out;
    };

    SampledPredictions s;
    s.correct = take(correct_idx, s.correct_shortfall);
    s.incorrect = take(incorrect_idx, s.incorrect_shortfall);
    return s;
}

void export_hidden_states(const Model& model, const std::vector<LabeledWord>& data,
                          const std::filesystem::path& path, bool final_state_only,
                          double threshold) {
    const auto* rnn = dynamic_cast<const RecurrentModel*>(&model);
    if (rnn == nullptr) {
        throw std::runtime_error("export_hidden_states: dense models have no recurrent layer");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write hidden-state file: " + path.string());

    const int hidden = rnn->hidden_size();
    ForwardTrace trace;
    char num[64];
    for (const auto& w : data) {
        const auto encoded = encode_word(w.surface, model.vocab(), model.max_len());
        const double p = rnn->forward(encoded, trace);
        out << w.surface << '\t' << w.label << '\t' << (p >= threshold ? 1 : 0);
        const std::size_t begin =
            final_state_only ? trace.hidden.size() - static_cast<std::size_t>(hidden) : 0;
        for (std::size_t k = begin; k < trace.hidden.size(); ++k) {
            std::snprintf(num, sizeof(num), "%.17g", trace.hidden[k]);
            out << '\t' << num;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["accuracy"] = r.accuracy;
    auto put_class = [&](const char* name, const ClassMetrics& m) {
        j["per_class"][name] = {{"precision", m.precision},
                                {"recall", m.recall},
                                {"f1", m.f1},
                                {"degenerate", m.degenerate}};
    };
    put_class("utrum", r.utrum);
    put_class("neutrum", r.neutrum);
    j["confusion"] = {{"tn", r.tn}, {"fp", r.fp}, {"fn", r.fn}, {"tp", r.tp}};
    return j.dump(2) + "\n";
}

void print_report(const EvalReport& r, std::ostream& out) {
    char line[160];
    std::snprintf(line, sizeof(line), "n         %zu\n", r.n);
    out << line;
    std::snprintf(line, sizeof(line), "accuracy  %.4f\n", r.accuracy);
    out << line;
    out << "class     precision  recall  f1\n";
    std::snprintf(line, sizeof(line), "utrum     %.4f     %.4f  %.4f%s\n", r.utrum.precision,
                  r.utrum.recall, r.utrum.f1, r.utrum.degenerate ? "  (empty class)" : "");
    out << line;
    std::snprintf(line, sizeof(line), "neutrum   %.4f     %.4f  %.4f%s\n", r.neutrum.precision,
                  r.neutrum.recall, r.neutrum.f1, r.neutrum.degenerate ? "  (empty class)" : "");
    out << line;
    out << "confusion (rows: actual neutrum/utrum, cols: predicted neutrum/utrum)\n";
    std::snprintf(line, sizeof(line), "          %zu  %zu\n", r.tn, r.fp);
    out << line;
    std::snprintf(line, sizeof(line), "          %zu  %zu\n", r.fn, r.tp);
    out << line;
}

}  // namespace gendernet
