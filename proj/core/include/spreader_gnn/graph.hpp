#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spreader_gnn/rng.hpp"
#include "spreader_gnn/tensor.hpp"

namespace spreader_gnn::graph {

using NodeId = std::uint32_t;

struct Edge {
    NodeId src;
    NodeId dst;
};

// Read-only adjacency lists in CSR layout. Shared by SparseGraph and the
// (possibly asymmetric) output of sample_neighbors().
struct CsrView {
    std::span<const std::size_t> row_offsets;
    std::span<const NodeId> col_indices;

    std::size_t n_nodes() const noexcept { return row_offsets.empty() ? 0 : row_offsets.size() - 1; }
    std::span<const NodeId> neighbors(NodeId v) const noexcept {
        return col_indices.subspan(row_offsets[v], row_offsets[v + 1] - row_offsets[v]);
    }
};

// Immutable undirected graph in compressed sparse row form.
//
// Invariants (checked by from_csr):
//   row_offsets[0] == 0, non-decreasing, row_offsets[n] == nnz;
//   columns strictly increasing within a row and < n;
//   (u,v) present iff (v,u) present, with equal value.
class SparseGraph {
public:
    SparseGraph() : row_offsets_{0} {}

    // Validates every invariant; throws DataError on violation.
    static SparseGraph from_csr(std::size_t n_nodes, std::vector<std::size_t> row_offsets,
                                std::vector<NodeId> col_indices, std::vector<double> edge_values);

    std::size_t n_nodes() const noexcept { return n_nodes_; }
    // Directed entries; an undirected edge contributes two.
    std::size_t n_entries() const noexcept { return col_indices_.size(); }
    std::size_t n_undirected_edges() const noexcept;

    std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const NodeId> col_indices() const noexcept { return col_indices_; }
    std::span<const double> edge_values() const noexcept { return edge_values_; }

    std::size_t degree(NodeId v) const noexcept { return row_offsets_[v + 1] - row_offsets_[v]; }
    std::span<const NodeId> neighbors(NodeId v) const noexcept {
        return {col_indices_.data() + row_offsets_[v], degree(v)};
    }
    std::span<const double> values(NodeId v) const noexcept {
        return {edge_values_.data() + row_offsets_[v], degree(v)};
    }
    bool has_edge(NodeId u, NodeId v) const noexcept;
    bool has_self_loops() const noexcept;

    CsrView view() const noexcept { return {row_offsets_, col_indices_}; }
    Tensor to_dense() const;

    friend bool operator==(const SparseGraph&, const SparseGraph&) = default;

private:
    std::size_t n_nodes_ = 0;
    std::vector<std::size_t> row_offsets_;
    std::vector<NodeId> col_indices_;
    std::vector<double> edge_values_;
};

// Symmetrized, deduplicated, unweighted graph. Self-loops are dropped.
// Throws DataError naming the first edge with an endpoint >= n_nodes.
SparseGraph build_graph(std::span<const Edge> edges, std::size_t n_nodes);

// D^-1/2 (A + I) D^-1/2 where D holds the row sums of A + I.
SparseGraph sym_norm_adj(const SparseGraph& g);

struct EgoNetwork {
    // Parent-graph id of each local node; nodes[0] is the root, the rest are
    // ordered by (hop distance, parent id).
    std::vector<NodeId> nodes;
    std::vector<std::uint32_t> hops;
    // Induced subgraph over the local ids.
    SparseGraph graph;
};

// Induced subgraph over every node within `hops` of root.
EgoNetwork extract_ego(const SparseGraph& g, NodeId root, std::size_t hops = 3);

// Owning adjacency lists with at most `cap` neighbours per node, drawn
// uniformly without replacement. Not symmetric in general.
struct NeighborSample {
    std::vector<std::size_t> row_offsets;
    std::vector<NodeId> col_indices;

    CsrView view() const noexcept { return {row_offsets, col_indices}; }
};

// cap == 0 keeps every neighbour.
NeighborSample sample_neighbors(const SparseGraph& g, std::size_t cap, Rng& rng);

}  // namespace spreader_gnn::graph
