#include "spreader_gnn/node_table.hpp"

#include <string>

#include "spreader_gnn/error.hpp"

namespace spreader_gnn {

std::vector<graph::NodeId> NodeTable::labeled_nodes() const {
    std::vector<graph::NodeId> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != Label::unlabeled) {
            out.push_back(static_cast<graph::NodeId>(i));
        }
    }
    return out;
}

std::vector<std::uint8_t> NodeTable::binary_labels(const std::vector<graph::NodeId>& nodes) const {
    std::vector<std::uint8_t> out;
    out.reserve(nodes.size());
    for (const graph::NodeId v : nodes) {
        if (v >= labels.size() || labels[v] == Label::unlabeled) {
            throw DataError("node " + std::to_string(v) + " has no binary label");
        }
        out.push_back(labels[v] == Label::spreader ? 1 : 0);
    }
    return out;
}

}  // namespace spreader_gnn
