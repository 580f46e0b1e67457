#include "gendernet/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

namespace gendernet {

namespace {

// Runs fn(i, worker) for i in [0, n), partitioned into contiguous chunks.
// Workers only write to disjoint per-index slots, so results are identical
// for any worker count.
void parallel_indices(std::size_t n, int threads,
                      const std::function<void(std::size_t, int)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i, 0);
        return;
    }
    const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const std::size_t begin = n * static_cast<std::size_t>(w) / static_cast<std::size_t>(workers);
        const std::size_t end = n * (static_cast<std::size_t>(w) + 1) / static_cast<std::size_t>(workers);
        pool.emplace_back([&fn, begin, end, w] {
            for (std::size_t i = begin; i < end; ++i) fn(i, w);
        });
    }
    for (auto& t : pool) t.join();
}

// Per-example gradient buffer mirroring the model's parameter shapes.
struct GradBuffer {
    std::vector<Tensor2> tensors;

    explicit GradBuffer(const std::vector<Param*>& params) {
        tensors.reserve(params.size());
        for (const Param* p : params) tensors.emplace_back(p->value.rows, p->value.cols);
    }
    void zero() {
        for (auto& t : tensors) t.fill(0.0);
    }
    std::vector<Tensor2*> refs() {
        std::vector<Tensor2*> out;
        out.reserve(tensors.size());
        for (auto& t : tensors) out.push_back(&t);
        return out;
    }
};

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("train config: learning_rate must be > 0");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
        throw std::invalid_argument("train config: decay rates must be in [0, 1)");
    }
    if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
    if (patience < 1) throw std::invalid_argument("train config: patience must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("train config: max_epochs must be >= 1");
}

AdamState AdamState::for_parameters(const std::vector<Param*>& params) {
    AdamState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Param* p : params) {
        s.m.emplace_back(p->value.rows, p->value.cols);
        s.v.emplace_back(p->value.rows, p->value.cols);
    }
    return s;
}

void adam_step(const std::vector<Param*>& params, AdamState& state, const TrainConfig& cfg) {
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw std::invalid_argument("adam_step: state does not match parameter list");
    }
    for (const Param* p : params) {
        for (double g : p->grad.v) {
            if (!std::isfinite(g)) {
                throw std::runtime_error("adam_step: non-finite gradient in tensor '" + p->name +
                                         "'");
            }
        }
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Param& p = *params[k];
        Tensor2& m = state.m[k];
        Tensor2& v = state.v[k];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad.v[i];
            m.v[i] = cfg.beta1 * m.v[i] + (1.0 - cfg.beta1) * g;
            v.v[i] = cfg.beta2 * v.v[i] + (1.0 - cfg.beta2) * g * g;
            const double m_hat = m.v[i] / bc1;
            const double v_hat = v.v[i] / bc2;
            p.value.v[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
        p.grad.fill(0.0);
    }
}

int resolve_threads(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* cap = std::getenv("GNET_THREADS")) {
        const int limit = std::atoi(cap);
        if (limit >= 1) n = std::min(n, limit);
    }
    return n;
}

LossAccuracy mean_loss_accuracy(const Model& model, const std::vector<LabeledWord>& data,
                                int threads) {
    if (data.empty()) throw std::invalid_argument("mean_loss_accuracy: empty data");
    const int workers = resolve_threads(threads);
    std::vector<EncodedWord> encoded;
    encoded.reserve(data.size());
    for (const auto& w : data) encoded.push_back(encode_word(w.surface, model.vocab(), model.max_len()));

    std::vector<double> losses(data.size());
    std::vector<unsigned char> correct(data.size());
    std::vector<ForwardTrace> traces(static_cast<std::size_t>(workers));
    parallel_indices(data.size(), workers, [&](std::size_t i, int w) {
        const double p = model.forward(encoded[i], traces[static_cast<std::size_t>(w)]);
        losses[i] = bce_loss(p, data[i].label);
        correct[i] = (p >= 0.5 ? 1 : 0) == data[i].label ? 1 : 0;
    });

    double loss_sum = 0.0;
    std::size_t n_correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        loss_sum += losses[i];
        n_correct += correct[i];
    }
    return {loss_sum / static_cast<double>(data.size()),
            static_cast<double>(n_correct) / static_cast<double>(data.size())};
}

TrainResult train(Model& model, const DatasetSplit& split, const TrainConfig& cfg) {
    cfg.validate();
    if (split.train.empty() || split.validation.empty()) {
        throw std::invalid_argument("train: empty train or validation split");
    }

    const auto params = model.parameters();
    AdamState adam = AdamState::for_parameters(params);
    const int workers = resolve_threads(cfg.threads);

    std::vector<EncodedWord> train_enc;
    std::vector<int> train_labels;
    train_enc.reserve(split.train.size());
    for (const auto& w : split.train) {
        train_enc.push_back(encode_word(w.surface, model.vocab(), model.max_len()));
        train_labels.push_back(w.label);
    }
    std::vector<std::size_t> order(split.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const std::size_t batch_cap = std::min<std::size_t>(order.size(),
                                                        static_cast<std::size_t>(cfg.batch_size));
    std::vector<GradBuffer> example_grads;
    example_grads.reserve(batch_cap);
    for (std::size_t i = 0; i < batch_cap; ++i) example_grads.emplace_back(params);
    std::vector<double> example_loss(batch_cap);
    std::vector<ForwardTrace> traces(static_cast<std::size_t>(workers));

    TrainResult result;
    result.reason = StopReason::max_epochs;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<Tensor2> best_values;
    int epochs_since_best = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto batches =
            make_batches(order, cfg.batch_size, epoch_shuffle_seed(cfg.seed, epoch));

        double epoch_loss_sum = 0.0;
        bool finite = true;
        for (const auto& batch : batches) {
            const std::size_t b = batch.size();
            // Per-example gradients, computed in parallel into disjoint
            // buffers and reduced in example order: results do not depend on
            // the worker count.
            parallel_indices(b, workers, [&](std::size_t e, int w) {
                GradBuffer& buf = example_grads[e];
                buf.zero();
                ForwardTrace& trace = traces[static_cast<std::size_t>(w)];
                const std::size_t idx = batch[e];
                const double p = model.forward(train_enc[idx], trace);
                example_loss[e] = bce_loss(p, train_labels[idx]);
                model.backward_to(trace, train_labels[idx], buf.refs());
            });

            double batch_loss = 0.0;
            for (std::size_t e = 0; e < b; ++e) batch_loss += example_loss[e];
            epoch_loss_sum += batch_loss;
            if (!std::isfinite(batch_loss)) {
                finite = false;
                break;
            }

            const double inv_b = 1.0 / static_cast<double>(b);
            for (std::size_t k = 0; k < params.size(); ++k) {
                Tensor2& acc = params[k]->grad;
                for (std::size_t e = 0; e < b; ++e) {
                    const Tensor2& g = example_grads[e].tensors[k];
                    for (std::size_t i = 0; i < acc.size(); ++i) acc.v[i] += g.v[i];
                }
                for (std::size_t i = 0; i < acc.size(); ++i) acc.v[i] *= inv_b;
            }
            adam_step(params, adam, cfg);
        }

        if (!finite) {
            result.reason = StopReason::diverged;
            break;
        }

        EpochStats stats;
        stats.train_loss = epoch_loss_sum / static_cast<double>(order.size());
        const LossAccuracy val = mean_loss_accuracy(model, split.validation, workers);
        stats.val_loss = val.loss;
        stats.val_accuracy = val.accuracy;
        result.history.epochs.push_back(stats);

        if (!std::isfinite(stats.train_loss) || !std::isfinite(stats.val_loss)) {
            result.reason = StopReason::diverged;
            break;
        }

        if (stats.val_loss < best_val) {
            best_val = stats.val_loss;
            result.history.best_epoch = epoch;
            epochs_since_best = 0;
            best_values.clear();
            best_values.reserve(params.size());
            for (const Param* p : params) best_values.push_back(p->value);
            if (!cfg.checkpoint_path.empty()) save_model(model, cfg.checkpoint_path);
        } else {
            ++epochs_since_best;
            if (epochs_since_best >= cfg.patience) {
                result.reason = StopReason::early_stop;
                break;
            }
        }
    }

    if (!best_values.empty()) {
        for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = best_values[k];
    }
    return result;
}

double gradient_check(Model& model, const EncodedWord& input, int label, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("gradient_check: h must be > 0");

    const auto params = model.parameters();
    model.zero_grads();
    ForwardTrace trace;
    model.forward(input, trace);
    model.backward(trace, label);

    // Flat copy of the analytic gradients.
    std::vector<double> analytic;
    for (const Param* p : params) {
        analytic.insert(analytic.end(), p->grad.v.begin(), p->grad.v.end());
    }
    model.zero_grads();

    const std::size_t total = analytic.size();
    std::vector<std::size_t> selected;
    constexpr std::size_t kFullCheckLimit = 4000;
    constexpr std::size_t kSubsample = 1000;
    if (total <= kFullCheckLimit) {
        selected.resize(total);
        for (std::size_t i = 0; i < total; ++i) selected[i] = i;
    } else {
        SplitMix64 rng(0x67726164636b3031ull);
        selected.reserve(kSubsample);
        for (std::size_t i = 0; i < kSubsample; ++i) {
            selected.push_back(static_cast<std::size_t>(rng.below(total)));
        }
    }

    // Maps a flat index to (tensor, offset).
    std::vector<std::size_t> starts(params.size() + 1, 0);
    for (std::size_t k = 0; k < params.size(); ++k) {
        starts[k + 1] = starts[k] + params[k]->value.size();
    }

    double max_err = 0.0;
    for (const std::size_t flat : selected) {
        const std::size_t k =
            static_cast<std::size_t>(std::upper_bound(starts.begin(), starts.end(), flat) -
                                     starts.begin()) - 1;
        double& theta = params[k]->value.v[flat - starts[k]];
        const double original = theta;

        theta = original + h;
        const double loss_plus = bce_loss(model.forward(input, trace), label);
        theta = original - h;
        const double loss_minus = bce_loss(model.forward(input, trace), label);
        theta = original;

        const double step = (original + h) - (original - h);
        const double numeric = (loss_plus - loss_minus) / step;
        const double a = analytic[flat];
        const double diff = std::abs(a - numeric);
        if (diff <= 1e-10) continue;  // flat/saturated direction: absolute fallback
        const double err = diff / std::max(std::abs(a), std::abs(numeric));
        max_err = std::max(max_err, err);
    }
    return max_err;
}

void write_history(const TrainHistory& history, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write history file: " + path.string());
    char line[256];
    for (std::size_t i = 0; i < history.epochs.size(); ++i) {
        const EpochStats& e = history.epochs[i];
        std::snprintf(line, sizeof(line), "%zu\t%.17g\t%.17g\t%.17g\n", i + 1, e.train_loss,
                      e.val_loss, e.val_accuracy);
        out << line;
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace gendernet
