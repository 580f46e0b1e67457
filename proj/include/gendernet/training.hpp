#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gendernet/dataset.hpp"
#include "gendernet/models.hpp"
#include "gendernet/rng.hpp"

namespace gendernet {

struct TrainConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int batch_size = 32;
    int patience = 50;      // epochs without a new validation-loss minimum
    int max_epochs = 2000;  // safety bound
    std::uint64_t seed = 42;
    int threads = 0;  // 0 = hardware concurrency, capped by GNET_THREADS
    std::filesystem::path checkpoint_path;  // best model written here when set

    void validate() const;
};

// First/second moment accumulators per parameter tensor plus the step count.
struct AdamState {
    std::vector<Tensor2> m;
    std::vector<Tensor2> v;
    std::int64_t step = 0;

    static AdamState for_parameters(const std::vector<Param*>& params);
};

// One Adam update over all parameters from their current grad buffers; the
// step counter is incremented before bias correction and grads are zeroed
// afterwards. Throws on non-finite gradients, naming the tensor.
void adam_step(const std::vector<Param*>& params, AdamState& state, const TrainConfig& cfg);

// Seeded shuffle then contiguous chunks; the final partial batch is kept.
template <typename T>
std::vector<std::vector<T>> make_batches(const std::vector<T>& data, int batch_size,
                                         std::uint64_t epoch_seed) {
    std::vector<T> shuffled = data;
    SplitMix64 rng(epoch_seed);
    seeded_shuffle(shuffled, rng);
    std::vector<std::vector<T>> batches;
    const std::size_t step = static_cast<std::size_t>(batch_size);
    for (std::size_t begin = 0; begin < shuffled.size(); begin += step) {
        const std::size_t end = std::min(begin + step, shuffled.size());
        batches.emplace_back(shuffled.begin() + begin, shuffled.begin() + end);
    }
    return batches;
}

// Shuffle seed for a given epoch (1-based), derived from the run seed.
inline std::uint64_t epoch_shuffle_seed(std::uint64_t run_seed, int epoch) {
    return mix_seeds(run_seed, static_cast<std::uint64_t>(epoch));
}

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = 0;  // 1-based; epoch with the first occurrence of the minimum val loss
};

enum class StopReason { early_stop, max_epochs, diverged };

struct TrainResult {
    TrainHistory history;
    StopReason reason = StopReason::max_epochs;
};

// Mini-batch training with mean-of-batch gradients and Adam. Stops when the
// validation loss has not reached a new strict minimum for cfg.patience
// consecutive epochs (or at max_epochs), then restores the best epoch's
// parameters. A non-finite loss aborts with the history so far.
TrainResult train(Model& model, const DatasetSplit& split, const TrainConfig& cfg);

// Mean loss and accuracy of the model over labeled words.
struct LossAccuracy {
    double loss = 0.0;
    double accuracy = 0.0;
};
LossAccuracy mean_loss_accuracy(const Model& model, const std::vector<LabeledWord>& data,
                                int threads = 0);

// Compares analytic gradients against central finite differences of the loss
// and returns the largest relative error. Models above a few thousand scalars
// are checked on a fixed-seed subsample of 1000 of them. Differences at or
// below 1e-10 count as zero error (absolute fallback for flat directions).
double gradient_check(Model& model, const EncodedWord& input, int label, double h);

// One "epoch<TAB>train_loss<TAB>val_loss<TAB>val_acc" line per epoch,
// 17 significant digits.
void write_history(const TrainHistory& history, const std::filesystem::path& path);

// Worker count: requested if > 0 else hardware concurrency, capped by the
// GNET_THREADS environment variable. Thread count never changes results.
int resolve_threads(int requested);

}  // namespace gendernet
