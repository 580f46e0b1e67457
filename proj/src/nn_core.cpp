#include "gendernet/nn_core.hpp"

#include <stdexcept>

#include "gendernet/rng.hpp"

namespace gendernet {

Tensor2 glorot_init(int rows, int cols, std::uint64_t seed) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("glorot_init: dimensions must be >= 1");
    const double limit = std::sqrt(6.0 / (static_cast<double>(rows) + static_cast<double>(cols)));
    Tensor2 t(rows, cols);
    SplitMix64 rng(seed);
    for (auto& x : t.v) x = rng.uniform(-limit, limit);
    return t;
}

}  // namespace gendernet
