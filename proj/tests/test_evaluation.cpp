#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "gendernet/evaluation.hpp"
#include "gendernet/rng.hpp"

using namespace gendernet;

namespace {

// Brute-force metric oracle: direct counting loops, written independently of
// build_report. Must agree exactly.
struct OracleReport {
    double accuracy, u_precision, u_recall, u_f1, n_precision, n_recall, n_f1;
    std::size_t tp, tn, fp, fn;
};

OracleReport oracle(const std::vector<int>& labels, const std::vector<int>& preds) {
    OracleReport o{};
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == preds[i]) ++hits;
        if (labels[i] == 1 && preds[i] == 1) ++o.tp;
        if (labels[i] == 0 && preds[i] == 0) ++o.tn;
        if (labels[i] == 0 && preds[i] == 1) ++o.fp;
        if (labels[i] == 1 && preds[i] == 0) ++o.fn;
    }
    o.accuracy = double(hits) / double(labels.size());
    auto prf = [](std::size_t tp, std::size_t fp, std::size_t fn, double& p, double& r,
                  double& f1) {
        p = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
        r = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
        f1 = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    };
    prf(o.tp, o.fp, o.fn, o.u_precision, o.u_recall, o.u_f1);
    prf(o.tn, o.fn, o.fp, o.n_precision, o.n_recall, o.n_f1);
    return o;
}

Vocabulary letters(int n) {
    std::vector<std::string> words;
    for (int i = 0; i < n; ++i) words.push_back(std::string(1, char('a' + i)));
    return build_vocabulary(words);
}

}  // namespace

TEST_CASE("hand-counted report fixture") {
    const EvalReport r = build_report({1, 0, 0, 0}, {1, 1, 0, 0});
    CHECK(r.n == 4);
    CHECK(r.accuracy == 0.75);
    CHECK(r.tp == 1);
    CHECK(r.fp == 1);
    CHECK(r.tn == 2);
    CHECK(r.fn == 0);
    CHECK(r.utrum.precision == 0.5);
    CHECK(r.utrum.recall == 1.0);
    CHECK(r.utrum.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK_FALSE(r.utrum.degenerate);
}

TEST_CASE("report rejects bad input") {
    CHECK_THROWS_AS(build_report({1}, {1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(build_report({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(build_report({2}, {1}), std::invalid_argument);
}

TEST_CASE("report agrees exactly with the brute-force oracle on 1000 random fixtures") {
    SplitMix64 rng(4242);
    for (int it = 0; it < 1000; ++it) {
        const std::size_t n = 1 + rng.below(40);
        std::vector<int> labels(n), preds(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = int(rng.below(2));
            preds[i] = int(rng.below(2));
        }
        const EvalReport r = build_report(labels, preds);
        const OracleReport o = oracle(labels, preds);
        CHECK(r.accuracy == o.accuracy);
        CHECK(r.utrum.precision == o.u_precision);
        CHECK(r.utrum.recall == o.u_recall);
        CHECK(r.utrum.f1 == o.u_f1);
        CHECK(r.neutrum.precision == o.n_precision);
        CHECK(r.neutrum.recall == o.n_recall);
        CHECK(r.neutrum.f1 == o.n_f1);
        CHECK(r.tp == o.tp);
        CHECK(r.tn == o.tn);
        CHECK(r.fp == o.fp);
        CHECK(r.fn == o.fn);
        CHECK(r.tp + r.tn + r.fp + r.fn == n);
        CHECK(r.utrum.f1 >= 0.0);
        CHECK(r.utrum.f1 <= 1.0);
    }
}

TEST_CASE("flipping labels and predictions swaps the class rows exactly") {
    SplitMix64 rng(11);
    for (int it = 0; it < 50; ++it) {
        const std::size_t n = 2 + rng.below(30);
        std::vector<int> labels(n), preds(n), flip_labels(n), flip_preds(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = int(rng.below(2));
            preds[i] = int(rng.below(2));
            flip_labels[i] = 1 - labels[i];
            flip_preds[i] = 1 - preds[i];
        }
        const EvalReport a = build_report(labels, preds);
        const EvalReport b = build_report(flip_labels, flip_preds);
        CHECK(a.accuracy == b.accuracy);
        CHECK(a.utrum.precision == b.neutrum.precision);
        CHECK(a.utrum.recall == b.neutrum.recall);
        CHECK(a.utrum.f1 == b.neutrum.f1);
        CHECK(a.tp == b.tn);
        CHECK(a.fp == b.fn);
    }
}

TEST_CASE("an absent class is flagged, not NaN") {
    const EvalReport r = build_report({1, 1, 1}, {1, 1, 1});
    CHECK(r.accuracy == 1.0);
    CHECK(r.neutrum.degenerate);
    CHECK(r.neutrum.f1 == 0.0);
    CHECK_FALSE(r.utrum.degenerate);
}

TEST_CASE("evaluate is consistent with thresholded predictions and order-free") {
    const auto data = synthesize_dataset(5, 80, {{"het", 1.0}, {"eri", 0.0}});
    std::vector<std::string> words;
    for (const auto& w : data) words.push_back(w.surface);
    auto model = make_model(ModelKind::gru, build_vocabulary(words), max_word_length(words), 5, 5, 2);

    const EvalReport direct = evaluate(*model, data);
    std::vector<int> labels, preds;
    for (const auto& w : data) {
        labels.push_back(w.label);
        preds.push_back(model->predict(w.surface) >= 0.5 ? 1 : 0);
    }
    const EvalReport rebuilt = build_report(labels, preds);
    CHECK(direct.accuracy == rebuilt.accuracy);
    CHECK(direct.tp == rebuilt.tp);
    CHECK(direct.fn == rebuilt.fn);

    auto reversed = data;
    std::reverse(reversed.begin(), reversed.end());
    const EvalReport permuted = evaluate(*model, reversed);
    CHECK(permuted.accuracy == direct.accuracy);
    CHECK(permuted.tp == direct.tp);

    // ties at the threshold classify as utrum
    for (Param* p : model->parameters()) p->value.fill(0.0);
    const EvalReport ties = evaluate(*model, data);
    CHECK(ties.tp + ties.fp == ties.n);
}

TEST_CASE("prediction sampling is seeded and flags shortfalls") {
    // an all-utrum dataset plus a constant-0.5 model: every word is correct
    const auto data = synthesize_dataset(6, 30, {{"het", 1.0}});
    std::vector<std::string> words;
    for (const auto& w : data) words.push_back(w.surface);
    auto model = make_model(ModelKind::gru, build_vocabulary(words), max_word_length(words), 5, 5, 2);
    for (Param* p : model->parameters()) p->value.fill(0.0);

    const auto s = sample_predictions(*model, data, 77, 6);
    CHECK(s.correct.size() == 6);
    CHECK(s.incorrect.empty());
    CHECK(s.incorrect_shortfall);
    CHECK_FALSE(s.correct_shortfall);
    for (const auto& w : s.correct) CHECK(w.probability == 0.5);

    const auto again = sample_predictions(*model, data, 77, 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(s.correct[i].surface == again.correct[i].surface);

    const auto other_seed = sample_predictions(*model, data, 78, 6);
    bool same = true;
    for (std::size_t i = 0; i < 6; ++i) same &= s.correct[i].surface == other_seed.correct[i].surface;
    CHECK_FALSE(same);

    CHECK_THROWS_AS(sample_predictions(*model, data, 1, 0), std::invalid_argument);
}

TEST_CASE("hidden-state export matches the trace dimensions") {
    const Vocabulary v = letters(6);
    RecurrentModel model(ModelKind::lstm, v, 19, 8, 64, 15);
    std::vector<LabeledWord> data;
    SplitMix64 rng(16);
    for (int i = 0; i < 10; ++i) {
        std::string word;
        const int len = 1 + int(rng.below(19));
        for (int k = 0; k < len; ++k) word.push_back(char('a' + int(rng.below(6))));
        data.push_back({word, int(rng.below(2))});
    }
    data.push_back(data.front());  // identical words must export identical vectors

    const auto path = std::filesystem::temp_directory_path() / "gendernet_hidden.tsv";
    export_hidden_states(model, data, path);

    std::ifstream in(path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, '\t')) cells.push_back(cell);
        rows.push_back(cells);
    }
    REQUIRE(rows.size() == 11);
    for (const auto& r : rows) CHECK(r.size() == 3 + 19 * 64);
    CHECK(rows.front() == rows.back());

    // 17 significant digits reproduce the forward pass exactly
    ForwardTrace trace;
    model.forward(encode_word(data[0].surface, v, 19), trace);
    for (int k = 0; k < 19 * 64; ++k) {
        CHECK(std::stod(rows[0][size_t(3 + k)]) == trace.hidden[size_t(k)]);
    }
    std::filesystem::remove(path);

    SUBCASE("final-state-only switch") {
        export_hidden_states(model, data, path, true);
        std::ifstream fin(path);
        std::getline(fin, line);
        std::size_t tabs = 0;
        for (char c : line) tabs += c == '\t';
        CHECK(tabs == 2 + 64);
        std::filesystem::remove(path);
    }

    SUBCASE("dense models are rejected") {
        DenseModel dense(v, 19, 8, 16, 1);
        CHECK_THROWS_AS(export_hidden_states(dense, data, path), std::runtime_error);
    }
}

TEST_CASE("json report carries the documented keys") {
    const EvalReport r = build_report({1, 0, 1, 1}, {1, 0, 0, 1});
    const auto j = nlohmann::json::parse(report_to_json(r));
    CHECK(j["n"] == 4);
    CHECK(j["accuracy"] == r.accuracy);
    CHECK(j["per_class"]["utrum"]["precision"] == r.utrum.precision);
    CHECK(j["per_class"]["utrum"]["recall"] == r.utrum.recall);
    CHECK(j["per_class"]["utrum"]["f1"] == r.utrum.f1);
    CHECK(j["per_class"]["neutrum"]["f1"] == r.neutrum.f1);
    CHECK(j["confusion"]["tp"] == r.tp);
    CHECK(j["confusion"]["tn"] == r.tn);
    CHECK(j["confusion"]["fp"] == r.fp);
    CHECK(j["confusion"]["fn"] == r.fn);

    std::ostringstream table;
    print_report(r, table);
    CHECK(table.str().find("accuracy") != std::string::npos);
    CHECK(table.str().find("utrum") != std::string::npos);
}
