#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gendernet/dataset.hpp"
#include "gendernet/models.hpp"

namespace gendernet {

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Set when the class never occurs among actuals nor predictions, in which
    // case the zeros above are reported instead of NaN.
    bool degenerate = false;
};

// Confusion counts treat utrum (label 1) as the positive class.
struct EvalReport {
    std::size_t n = 0;
    double accuracy = 0.0;
    ClassMetrics utrum;
    ClassMetrics neutrum;
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

// Metrics from label/prediction pairs (both in {0,1}).
EvalReport build_report(const std::vector<int>& labels, const std::vector<int>& predictions);

// Runs the model over data; prediction is utrum iff p >= threshold (ties at
// the threshold count as utrum).
EvalReport evaluate(const Model& model, const std::vector<LabeledWord>& data,
                    double threshold = 0.5, int threads = 0);

struct PredictionSample {
    std::string surface;
    int label = 0;
    double probability = 0.0;
};

struct SampledPredictions {
    std::vector<PredictionSample> correct;
    std::vector<PredictionSample> incorrect;
    // Set when a subset had fewer than n_each members and was returned whole.
    bool correct_shortfall = false;
    bool incorrect_shortfall = false;
};

// Seeded uniform samples without replacement from the correctly and the
// incorrectly predicted subsets.
SampledPredictions sample_predictions(const Model& model, const std::vector<LabeledWord>& data,
                                      std::uint64_t seed, std::size_t n_each,
                                      double threshold = 0.5);

// Tab-separated export of the readout's input: surface, true label, predicted
// label, then the concatenated hidden states (or only the final state), one
// row per word, 17 significant digits. Dense models are rejected.
void export_hidden_states(const Model& model, const std::vector<LabeledWord>& data,
                          const std::filesystem::path& path, bool final_state_only = false,
                          double threshold = 0.5);

// Machine-readable report: keys n, accuracy,
// per_class.{utrum,neutrum}.{precision,recall,f1,degenerate},
// confusion.{tn,fp,fn,tp}.
std::string report_to_json(const EvalReport& report);

void print_report(const EvalReport& report, std::ostream& out);

}  // namespace gendernet
