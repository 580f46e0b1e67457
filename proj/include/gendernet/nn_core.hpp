#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace gendernet {

// Row-major 2D tensor of doubles. Vectors are stored as 1 x n.
struct Tensor2 {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Tensor2() = default;
    Tensor2(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }
    std::size_t size() const { return v.size(); }
    void fill(double x) { std::fill(v.begin(), v.end(), x); }
    bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
};

// Trainable tensor with its gradient buffer; shapes always match.
struct Param {
    std::string name;
    Tensor2 value;
    Tensor2 grad;

    Param() = default;
    Param(std::string n, int r, int c) : name(std::move(n)), value(r, c), grad(r, c) {}
};

// Clamp bound for probabilities entering the loss.
inline constexpr double kProbEpsilon = 1e-12;

// Numerically stable logistic function. sigmoid(-x) == 1 - sigmoid(x) holds
// bitwise for this formulation.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double tanh_elem(double x) { return std::tanh(x); }

inline double clamp_probability(double p) {
    if (p < kProbEpsilon) return kProbEpsilon;
    if (p > 1.0 - kProbEpsilon) return 1.0 - kProbEpsilon;
    return p;
}

// Binary cross-entropy; the prediction is clamped to [1e-12, 1-1e-12] here,
// not in the model forward pass, so saturated outputs give a finite loss.
inline double bce_loss(double p, int label) {
    const double q = clamp_probability(p);
    return label == 1 ? -std::log(q) : -std::log1p(-q);
}

// dL/dp on the clamped prediction.
inline double bce_dloss_dp(double p, int label) {
    const double q = clamp_probability(p);
    return (q - static_cast<double>(label)) / (q * (1.0 - q));
}

// Entries i.i.d. uniform on [-L, L], L = sqrt(6 / (rows + cols)), generated
// row-major from a SplitMix64 stream.
Tensor2 glorot_init(int rows, int cols, std::uint64_t seed);

}  // namespace gendernet
