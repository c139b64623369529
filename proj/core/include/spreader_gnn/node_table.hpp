#pragma once

#include <cstdint>
#include <vector>

#include "spreader_gnn/graph.hpp"
#include "spreader_gnn/tensor.hpp"

namespace spreader_gnn {

enum class Label : std::int8_t {
    unlabeled = -1,
    regular = 0,
    spreader = 1,
};

// Per-node features (n x d, row i is node i) and ternary labels.
struct NodeTable {
    Tensor features;
    std::vector<Label> labels;

    std::size_t n_nodes() const noexcept { return labels.size(); }
    std::size_t feature_dim() const noexcept { return features.cols(); }

    // Ascending ids of nodes carrying a binary label.
    std::vector<graph::NodeId> labeled_nodes() const;
    // 0/1 labels of `nodes`; throws DataError if any is unlabeled.
    std::vector<std::uint8_t> binary_labels(const std::vector<graph::NodeId>& nodes) const;
};

}  // namespace spreader_gnn
