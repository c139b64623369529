#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spreader_gnn/tensor.hpp"

namespace spreader_gnn::nn {

// Moment estimates for one parameter tensor.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam over a fixed list of parameters. Tensors without
// requires_grad are skipped (they still need no gradient).
class Adam {
public:
    Adam() = default;
    explicit Adam(std::span<Tensor* const> params);

    // One update with the given learning rate, then zeroes every gradient.
    // Throws UsageError if a trainable parameter has no gradient slot.
    // On SSE targets the update runs with subnormals flushed to zero.
    void step(double lr);

    const std::vector<AdamState>& states() const noexcept { return states_; }

private:
    std::vector<Tensor*> params_;
    std::vector<AdamState> states_;
};

}  // namespace spreader_gnn::nn
