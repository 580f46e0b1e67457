#include "gendernet/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "gendernet/dataset.hpp"
#include "gendernet/encoding.hpp"
#include "gendernet/evaluation.hpp"
#include "gendernet/models.hpp"
#include "gendernet/training.hpp"

namespace gendernet {

namespace {

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (begin <= csv.size()) {
        const std::size_t comma = csv.find(',', begin);
        const std::string item = csv.substr(begin, comma == std::string::npos ? std::string::npos
                                                                              : comma - begin);
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        begin = comma + 1;
    }
    return out;
}

std::vector<SuffixRule> parse_rules(const std::string& spec) {
    std::vector<SuffixRule> rules;
    for (const auto& item : split_list(spec)) {
        const std::size_t colon = item.rfind(':');
        if (colon == std::string::npos || colon == 0) {
            throw std::runtime_error("bad rule '" + item + "' (expected suffix:probability)");
        }
        SuffixRule r;
        r.suffix = item.substr(0, colon);
        try {
            r.utrum_probability = std::stod(item.substr(colon + 1));
        } catch (const std::exception&) {
            throw std::runtime_error("bad probability in rule '" + item + "'");
        }
        rules.push_back(std::move(r));
    }
    if (rules.empty()) throw std::runtime_error("empty rule list");
    return rules;
}

std::vector<LabeledWord> select_split(const std::vector<LabeledWord>& data,
                                      const std::string& part, std::uint64_t seed) {
    if (part == "all") return data;
    DatasetSplit split = split_dataset(data, seed);
    if (part == "train") return std::move(split.train);
    if (part == "validation") return std::move(split.validation);
    if (part == "test") return std::move(split.test);
    throw std::runtime_error("unknown split '" + part +
                             "' (expected train, validation, test or all)");
}

const char* stop_reason_name(StopReason reason) {
    switch (reason) {
        case StopReason::early_stop: return "early stopping";
        case StopReason::max_epochs: return "max epochs reached";
        case StopReason::diverged: return "diverged";
    }
    return "unknown";
}

struct TrainArgs {
    std::string model_kind = "lstm";
    std::string data_path;
    std::string out_path;
    std::string history_path;
    double learning_rate = 0.001;
    int batch_size = 32;
    int patience = 50;
    int max_epochs = 2000;
    int embedding_dim = 60;
    int hidden_size = 0;  // 0 = 128 for dense, 64 for gru/lstm
    int max_len = 0;      // 0 = longest word in the data
    int threads = 0;
    std::uint64_t seed = 42;
};

int do_train(const TrainArgs& a) {
    const auto kind = parse_model_kind(a.model_kind);
    if (!kind) throw std::runtime_error("unknown model kind '" + a.model_kind + "'");

    const auto data = load_dataset(a.data_path);
    if (data.empty()) throw std::runtime_error("dataset is empty: " + a.data_path);
    std::vector<std::string> words;
    words.reserve(data.size());
    for (const auto& w : data) words.push_back(w.surface);

    // The vocabulary and max_len cover the full dataset, before splitting.
    Vocabulary vocab = build_vocabulary(words);
    const int max_len = a.max_len > 0 ? a.max_len : max_word_length(words);
    const int hidden = a.hidden_size > 0 ? a.hidden_size
                                         : (*kind == ModelKind::dense ? 128 : 64);

    auto model = make_model(*kind, std::move(vocab), max_len, a.embedding_dim, hidden, a.seed);
    std::fprintf(stderr, "%s model: %lld parameters, max_len %d, vocabulary %d\n",
                 std::string(model_kind_name(*kind)).c_str(),
                 static_cast<long long>(model->parameter_count()), max_len,
                 model->vocab().size());

    const DatasetSplit split = split_dataset(data, a.seed);
    std::fprintf(stderr, "split: %zu train / %zu validation / %zu test\n", split.train.size(),
                 split.validation.size(), split.test.size());

    TrainConfig cfg;
    cfg.learning_rate = a.learning_rate;
    cfg.batch_size = a.batch_size;
    cfg.patience = a.patience;
    cfg.max_epochs = a.max_epochs;
    cfg.seed = a.seed;
    cfg.threads = a.threads;
    cfg.checkpoint_path = a.out_path;

    const TrainResult result = train(*model, split, cfg);
    const std::string history_path =
        a.history_path.empty() ? a.out_path + ".history.tsv" : a.history_path;
    write_history(result.history, history_path);

    if (result.reason == StopReason::diverged) {
        std::cerr << "error: training diverged (non-finite loss); history written to "
                  << history_path << "\n";
        return 2;
    }

    save_model(*model, a.out_path);
    const EpochStats& best =
        result.history.epochs[static_cast<std::size_t>(result.history.best_epoch) - 1];
    std::printf("trained %zu epochs (%s), best epoch %d, val_loss %.6f, val_acc %.4f\n",
                result.history.epochs.size(), stop_reason_name(result.reason),
                result.history.best_epoch, best.val_loss, best.val_accuracy);
    std::printf("model written to %s, history to %s\n", a.out_path.c_str(),
                history_path.c_str());
    return 0;
}

struct EvalArgs {
    std::string model_path;
    std::string data_path;
    std::string part = "test";
    std::string drop_suffixes;
    std::string report_path;
    double threshold = 0.5;
    std::uint64_t seed = 42;
    std::uint64_t sample_seed = 42;
    int samples = 0;
    int threads = 0;
};

int do_evaluate(const EvalArgs& a) {
    const auto model = load_model(a.model_path);
    auto data = select_split(load_dataset(a.data_path), a.part, a.seed);
    if (!a.drop_suffixes.empty()) {
        data = filter_suffix_test_set(data, split_list(a.drop_suffixes));
    }
    if (data.empty()) throw std::runtime_error("no words left to evaluate");

    const EvalReport report = evaluate(*model, data, a.threshold, a.threads);
    print_report(report, std::cout);
    if (!a.report_path.empty()) {
        std::ofstream out(a.report_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write report file: " + a.report_path);
        out << report_to_json(report);
    }
    if (a.samples > 0) {
        const auto s = sample_predictions(*model, data, a.sample_seed,
                                          static_cast<std::size_t>(a.samples), a.threshold);
        std::printf("correctly predicted%s:\n", s.correct_shortfall ? " (all there were)" : "");
        for (const auto& w : s.correct) {
            std::printf("  %s\t%s\tp=%.4f\n", w.surface.c_str(), w.label ? "U" : "N",
                        w.probability);
        }
        std::printf("incorrectly predicted%s:\n", s.incorrect_shortfall ? " (all there were)" : "");
        for (const auto& w : s.incorrect) {
            std::printf("  %s\t%s\tp=%.4f\n", w.surface.c_str(), w.label ? "U" : "N",
                        w.probability);
        }
    }
    return 0;
}

int do_gradcheck(const std::string& kind_name, int vocab_size, int embedding_dim, int hidden,
                 int max_len, int examples, double h, double tol, std::uint64_t seed) {
    const auto kind = parse_model_kind(kind_name);
    if (!kind) throw std::runtime_error("unknown model kind '" + kind_name + "'");
    if (vocab_size < 1 || vocab_size > 26) {
        throw std::runtime_error("gradcheck vocab size must be in 1..26");
    }

    std::vector<std::string> alphabet_words;
    for (int c = 0; c < vocab_size; ++c) alphabet_words.push_back(std::string(1, char('a' + c)));
    Vocabulary vocab = build_vocabulary(alphabet_words);
    auto model = make_model(*kind, vocab, max_len, embedding_dim, hidden, seed);

    SplitMix64 rng(mix_seeds(seed, 0x6763));
    double worst = 0.0;
    for (int i = 0; i < examples; ++i) {
        std::string word;
        const int len = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len)));
        for (int k = 0; k < len; ++k) {
            word.push_back(char('a' + static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab_size)))));
        }
        const int label = static_cast<int>(rng.below(2));
        const auto encoded = encode_word(word, model->vocab(), max_len);
        const double err = gradient_check(*model, encoded, label, h);
        std::printf("example %d (%s, label %d): max relative error %.3e\n", i + 1, word.c_str(),
                    label, err);
        worst = std::max(worst, err);
    }
    std::printf("overall max relative error %.3e (tolerance %.1e)\n", worst, tol);
    return worst <= tol ? 0 : 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("gendernet");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Character-level grammatical gender classifier for Swedish nouns"};
    app.require_subcommand(1);

    // --- stats ---
    auto* stats = app.add_subcommand("stats", "Corpus statistics: suffix counts, utrum fractions, majority baseline");
    std::string stats_data;
    std::string stats_suffix;
    stats->add_option("--data", stats_data, "Dataset file (surface<TAB>label)")->required();
    stats->add_option("--suffix", stats_suffix, "Report a single suffix");

    // --- split ---
    auto* split_cmd = app.add_subcommand("split", "Materialize the 60/20/20 split to files");
    std::string split_data, split_outdir;
    std::uint64_t split_seed = 42;
    split_cmd->add_option("--data", split_data, "Dataset file")->required();
    split_cmd->add_option("--out-dir", split_outdir, "Output directory")->required();
    split_cmd->add_option("--seed", split_seed, "Shuffle seed");

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "Generate a synthetic suffix-rule dataset");
    std::string synth_rules = "het:1.0,eri:0.0,a:0.7";
    std::string synth_out;
    std::uint64_t synth_seed = 42;
    std::size_t synth_n = 5000;
    synth->add_option("--n", synth_n, "Number of words");
    synth->add_option("--rules", synth_rules, "Comma-separated suffix:utrum-probability rules");
    synth->add_option("--out", synth_out, "Output dataset file")->required();
    synth->add_option("--seed", synth_seed, "Generator seed");

    // --- train ---
    auto* train_cmd = app.add_subcommand("train", "Train a model on the 60/20/20 split of a dataset");
    TrainArgs ta;
    train_cmd->add_option("--model", ta.model_kind, "dense, gru or lstm")
        ->required()
        ->check(CLI::IsMember({"dense", "gru", "lstm"}));
    train_cmd->add_option("--data", ta.data_path, "Dataset file")->required();
    train_cmd->add_option("--out", ta.out_path, "Model output file")->required();
    train_cmd->add_option("--history", ta.history_path, "History file (default <out>.history.tsv)");
    train_cmd->add_option("--lr", ta.learning_rate, "Adam learning rate");
    train_cmd->add_option("--batch-size", ta.batch_size, "Mini-batch size");
    train_cmd->add_option("--patience", ta.patience, "Early-stopping patience in epochs");
    train_cmd->add_option("--max-epochs", ta.max_epochs, "Epoch safety bound");
    train_cmd->add_option("--embedding-dim", ta.embedding_dim, "Embedding dimension");
    train_cmd->add_option("--hidden-size", ta.hidden_size,
                          "Hidden units (default 128 dense, 64 gru/lstm)");
    train_cmd->add_option("--max-len", ta.max_len, "Sequence length (default: longest word)");
    train_cmd->add_option("--threads", ta.threads, "Worker threads (default: all, capped by GNET_THREADS)");
    train_cmd->add_option("--seed", ta.seed, "Run seed (split, init, batches)");

    // --- evaluate ---
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a model; accuracy, per-class metrics, confusion matrix");
    EvalArgs ea;
    eval_cmd->add_option("--model", ea.model_path, "Model file")->required();
    eval_cmd->add_option("--data", ea.data_path, "Dataset file")->required();
    eval_cmd->add_option("--split", ea.part, "train, validation, test or all")
        ->check(CLI::IsMember({"train", "validation", "test", "all"}));
    eval_cmd->add_option("--seed", ea.seed, "Split seed (must match training)");
    eval_cmd->add_option("--drop-suffixes", ea.drop_suffixes,
                         "Comma-separated suffixes to remove before evaluating");
    eval_cmd->add_option("--threshold", ea.threshold, "Classification threshold");
    eval_cmd->add_option("--report", ea.report_path, "Write a JSON report here");
    eval_cmd->add_option("--samples", ea.samples,
                         "Also print n sampled correct/incorrect predictions");
    eval_cmd->add_option("--sample-seed", ea.sample_seed, "Seed for prediction sampling");
    eval_cmd->add_option("--threads", ea.threads, "Worker threads");

    // --- predict ---
    auto* predict_cmd = app.add_subcommand("predict", "Predict the gender of a single word");
    std::string predict_model, predict_word;
    predict_cmd->add_option("--model", predict_model, "Model file")->required();
    predict_cmd->add_option("--word", predict_word, "Word to classify")->required();

    // --- gradcheck ---
    auto* grad_cmd = app.add_subcommand("gradcheck", "Check analytic gradients against finite differences");
    std::string grad_kind = "lstm";
    int grad_vocab = 10, grad_emb = 8, grad_hidden = 8, grad_maxlen = 10, grad_examples = 10;
    double grad_h = 1e-5, grad_tol = 1e-6;
    std::uint64_t grad_seed = 42;
    grad_cmd->add_option("--model", grad_kind, "dense, gru or lstm")
        ->check(CLI::IsMember({"dense", "gru", "lstm"}));
    grad_cmd->add_option("--vocab-size", grad_vocab, "Synthetic vocabulary size (1..26)");
    grad_cmd->add_option("--embedding-dim", grad_emb, "Embedding dimension");
    grad_cmd->add_option("--hidden-size", grad_hidden, "Hidden units");
    grad_cmd->add_option("--max-len", grad_maxlen, "Sequence length");
    grad_cmd->add_option("--examples", grad_examples, "Number of random examples");
    grad_cmd->add_option("--step", grad_h, "Finite-difference step");
    grad_cmd->add_option("--tol", grad_tol, "Failure tolerance on the relative error");
    grad_cmd->add_option("--seed", grad_seed, "Seed for the model and examples");

    // --- export-hidden ---
    auto* export_cmd = app.add_subcommand("export-hidden", "Export hidden-state vectors for external analysis");
    std::string export_model, export_data, export_out, export_part = "all";
    std::uint64_t export_seed = 42;
    bool export_final_only = false;
    export_cmd->add_option("--model", export_model, "Model file (gru or lstm)")->required();
    export_cmd->add_option("--data", export_data, "Dataset file")->required();
    export_cmd->add_option("--out", export_out, "Output file")->required();
    export_cmd->add_option("--split", export_part, "train, validation, test or all")
        ->check(CLI::IsMember({"train", "validation", "test", "all"}));
    export_cmd->add_option("--seed", export_seed, "Split seed (must match training)");
    export_cmd->add_flag("--final-state-only", export_final_only,
                         "Export only the final hidden state instead of the whole sequence");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (app.got_subcommand(stats)) {
            const auto data = load_dataset(stats_data);
            if (!stats_suffix.empty()) {
                const SuffixStat s = suffix_statistics(data, stats_suffix);
                std::printf("%s %zu %.4f\n", s.suffix.c_str(), s.occurrences, s.fraction_utrum);
            } else {
                std::printf("n %zu\n", data.size());
                std::printf("majority_baseline %.4f\n", majority_baseline(data));
                for (const auto& suffix : default_stat_suffixes()) {
                    try {
                        const SuffixStat s = suffix_statistics(data, suffix);
                        std::printf("%s %zu %.4f\n", s.suffix.c_str(), s.occurrences,
                                    s.fraction_utrum);
                    } catch (const std::runtime_error&) {
                        std::printf("%s 0 -\n", suffix.c_str());
                    }
                }
            }
            return 0;
        }
        if (app.got_subcommand(split_cmd)) {
            const auto data = load_dataset(split_data);
            const DatasetSplit split = split_dataset(data, split_seed);
            const std::filesystem::path dir(split_outdir);
            std::filesystem::create_directories(dir);
            write_dataset(split.train, dir / "train.tsv");
            write_dataset(split.validation, dir / "validation.tsv");
            write_dataset(split.test, dir / "test.tsv");
            std::printf("wrote %zu/%zu/%zu words to %s\n", split.train.size(),
                        split.validation.size(), split.test.size(), split_outdir.c_str());
            return 0;
        }
        if (app.got_subcommand(synth)) {
            const auto data = synthesize_dataset(synth_seed, synth_n, parse_rules(synth_rules));
            write_dataset(data, synth_out);
            std::printf("wrote %zu words to %s\n", data.size(), synth_out.c_str());
            return 0;
        }
        if (app.got_subcommand(train_cmd)) return do_train(ta);
        if (app.got_subcommand(eval_cmd)) return do_evaluate(ea);
        if (app.got_subcommand(predict_cmd)) {
            const auto model = load_model(predict_model);
            const double p = model->predict(predict_word);
            std::printf("%s\t%.6f\t%s\n", predict_word.c_str(), p,
                        p >= 0.5 ? "utrum" : "neutrum");
            return 0;
        }
        if (app.got_subcommand(grad_cmd)) {
            return do_gradcheck(grad_kind, grad_vocab, grad_emb, grad_hidden, grad_maxlen,
                                grad_examples, grad_h, grad_tol, grad_seed);
        }
        if (app.got_subcommand(export_cmd)) {
            const auto model = load_recurrent_model(export_model);
            const auto data = select_split(load_dataset(export_data), export_part, export_seed);
            export_hidden_states(*model, data, export_out, export_final_only);
            std::printf("wrote %zu rows to %s\n", data.size(), export_out.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cerr << "error: no subcommand given\n";
    return 1;
}

}  // namespace gendernet
