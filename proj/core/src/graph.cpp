#include "spreader_gnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "spreader_gnn/error.hpp"

namespace spreader_gnn::graph {

namespace {

constexpr NodeId kAbsent = std::numeric_limits<NodeId>::max();

// Builds CSR from (row, col) pairs already sorted and unique.
SparseGraph from_sorted_pairs(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& pairs) {
    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<NodeId> cols;
    cols.reserve(pairs.size());
    for (const auto& [u, v] : pairs) {
        ++offsets[u + 1];
        cols.push_back(v);
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::vector<double> values(cols.size(), 1.0);
    return SparseGraph::from_csr(n, std::move(offsets), std::move(cols), std::move(values));
}

}  // namespace

SparseGraph SparseGraph::from_csr(std::size_t n_nodes, std::vector<std::size_t> row_offsets,
                                  std::vector<NodeId> col_indices, std::vector<double> edge_values) {
    if (row_offsets.size() != n_nodes + 1) {
        throw DataError("csr: row_offsets has " + std::to_string(row_offsets.size()) + " entries for " +
                        std::to_string(n_nodes) + " nodes");
    }
    if (row_offsets.front() != 0 || row_offsets.back() != col_indices.size()) {
        throw DataError("csr: row_offsets must start at 0 and end at nnz");
    }
    if (edge_values.size() != col_indices.size()) {
        throw DataError("csr: edge_values and col_indices differ in length");
    }
    if (n_nodes > static_cast<std::size_t>(kAbsent)) {
        throw DataError("csr: too many nodes");
    }
    for (std::size_t u = 0; u < n_nodes; ++u) {
        if (row_offsets[u + 1] < row_offsets[u]) {
            throw DataError("csr: row_offsets decreases at row " + std::to_string(u));
        }
        for (std::size_t e = row_offsets[u]; e < row_offsets[u + 1]; ++e) {
            if (col_indices[e] >= n_nodes) {
                throw DataError("csr: column " + std::to_string(col_indices[e]) + " out of range in row " +
                                std::to_string(u));
            }
            if (e > row_offsets[u] && col_indices[e] <= col_indices[e - 1]) {
                throw DataError("csr: columns not strictly increasing in row " + std::to_string(u));
            }
        }
    }
    SparseGraph g;
    g.n_nodes_ = n_nodes;
    g.row_offsets_ = std::move(row_offsets);
    g.col_indices_ = std::move(col_indices);
    g.edge_values_ = std::move(edge_values);
    for (NodeId u = 0; u < n_nodes; ++u) {
        const auto cols = g.neighbors(u);
        const auto vals = g.values(u);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const NodeId v = cols[i];
            const auto back = g.neighbors(v);
            const auto it = std::lower_bound(back.begin(), back.end(), u);
            if (it == back.end() || *it != u) {
                throw DataError("csr: edge (" + std::to_string(u) + "," + std::to_string(v) +
                                ") has no reverse entry");
            }
            if (g.values(v)[static_cast<std::size_t>(it - back.begin())] != vals[i]) {
                throw DataError("csr: edge (" + std::to_string(u) + "," + std::to_string(v) +
                                ") is not symmetric in value");
            }
        }
    }
    return g;
}

std::size_t SparseGraph::n_undirected_edges() const noexcept {
    std::size_t loops = 0;
    for (NodeId u = 0; u < n_nodes_; ++u) {
        if (has_edge(u, u)) {
            ++loops;
        }
    }
    return (n_entries() - loops) / 2 + loops;
}

bool SparseGraph::has_edge(NodeId u, NodeId v) const noexcept {
    if (u >= n_nodes_ || v >= n_nodes_) {
        return false;
    }
    const auto cols = neighbors(u);
    return std::binary_search(cols.begin(), cols.end(), v);
}

bool SparseGraph::has_self_loops() const noexcept {
    for (NodeId u = 0; u < n_nodes_; ++u) {
        if (has_edge(u, u)) {
            return true;
        }
    }
    return false;
}

Tensor SparseGraph::to_dense() const {
    Tensor dense(n_nodes_, n_nodes_);
    for (NodeId u = 0; u < n_nodes_; ++u) {
        const auto cols = neighbors(u);
        const auto vals = values(u);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            dense(u, cols[i]) = vals[i];
        }
    }
    return dense;
}

SparseGraph build_graph(std::span<const Edge> edges, std::size_t n_nodes) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(edges.size() * 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const Edge& e = edges[i];
        if (e.src >= n_nodes || e.dst >= n_nodes) {
            throw DataError("edge " + std::to_string(i) + " (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                            ") references a node >= " + std::to_string(n_nodes));
        }
        if (e.src == e.dst) {
            continue;
        }
        pairs.emplace_back(e.src, e.dst);
        pairs.emplace_back(e.dst, e.src);
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return from_sorted_pairs(n_nodes, pairs);
}

SparseGraph sym_norm_adj(const SparseGraph& g) {
    const std::size_t n = g.n_nodes();
    std::vector<double> degree(n, 1.0);
    for (NodeId u = 0; u < n; ++u) {
        for (const double w : g.values(u)) {
            degree[u] += w;
        }
    }
    std::vector<double> inv_sqrt(n);
    for (std::size_t u = 0; u < n; ++u) {
        inv_sqrt[u] = 1.0 / std::sqrt(degree[u]);
    }

    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<NodeId> cols;
    std::vector<double> vals;
    cols.reserve(g.n_entries() + n);
    vals.reserve(g.n_entries() + n);
    for (NodeId u = 0; u < n; ++u) {
        const auto nbrs = g.neighbors(u);
        const auto ws = g.values(u);
        const double self_scale = inv_sqrt[u] * inv_sqrt[u];
        bool diagonal_done = false;
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            const NodeId v = nbrs[i];
            if (!diagonal_done && v >= u) {
                diagonal_done = true;
                if (v == u) {
                    cols.push_back(u);
                    vals.push_back((ws[i] + 1.0) * self_scale);
                    continue;
                }
                cols.push_back(u);
                vals.push_back(self_scale);
            }
            cols.push_back(v);
            vals.push_back(ws[i] * inv_sqrt[u] * inv_sqrt[v]);
        }
        if (!diagonal_done) {
            cols.push_back(u);
            vals.push_back(self_scale);
        }
        offsets[u + 1] = cols.size();
    }
    return SparseGraph::from_csr(n, std::move(offsets), std::move(cols), std::move(vals));
}

EgoNetwork extract_ego(const SparseGraph& g, NodeId root, std::size_t hops) {
    if (root >= g.n_nodes()) {
        throw DataError("ego root " + std::to_string(root) + " out of range for " + std::to_string(g.n_nodes()) +
                        " nodes");
    }
    std::vector<NodeId> local(g.n_nodes(), kAbsent);
    EgoNetwork ego;
    ego.nodes.push_back(root);
    ego.hops.push_back(0);
    local[root] = 0;
    std::size_t level_begin = 0;
    for (std::uint32_t depth = 1; depth <= hops && level_begin < ego.nodes.size(); ++depth) {
        const std::size_t level_end = ego.nodes.size();
        for (std::size_t i = level_begin; i < level_end; ++i) {
            for (const NodeId v : g.neighbors(ego.nodes[i])) {
                if (local[v] == kAbsent) {
                    local[v] = 0;  // claimed; final id assigned after sorting
                    ego.nodes.push_back(v);
                    ego.hops.push_back(depth);
                }
            }
        }
        std::sort(ego.nodes.begin() + static_cast<std::ptrdiff_t>(level_end), ego.nodes.end());
        level_begin = level_end;
    }
    for (std::size_t i = 0; i < ego.nodes.size(); ++i) {
        local[ego.nodes[i]] = static_cast<NodeId>(i);
    }

    std::vector<std::size_t> offsets(ego.nodes.size() + 1, 0);
    std::vector<NodeId> cols;
    for (std::size_t i = 0; i < ego.nodes.size(); ++i) {
        const std::size_t row_begin = cols.size();
        for (const NodeId v : g.neighbors(ego.nodes[i])) {
            if (local[v] != kAbsent) {
                cols.push_back(local[v]);
            }
        }
        std::sort(cols.begin() + static_cast<std::ptrdiff_t>(row_begin), cols.end());
        offsets[i + 1] = cols.size();
    }
    std::vector<double> vals(cols.size(), 1.0);
    ego.graph = SparseGraph::from_csr(ego.nodes.size(), std::move(offsets), std::move(cols), std::move(vals));
    return ego;
}

NeighborSample sample_neighbors(const SparseGraph& g, std::size_t cap, Rng& rng) {
    NeighborSample out;
    out.row_offsets.assign(g.n_nodes() + 1, 0);
    std::vector<NodeId> scratch;
    for (NodeId u = 0; u < g.n_nodes(); ++u) {
        const auto nbrs = g.neighbors(u);
        if (cap == 0 || nbrs.size() <= cap) {
            out.col_indices.insert(out.col_indices.end(), nbrs.begin(), nbrs.end());
        } else {
            scratch.assign(nbrs.begin(), nbrs.end());
            // Partial Fisher-Yates: the first `cap` slots become the sample.
            for (std::size_t i = 0; i < cap; ++i) {
                const auto j = i + static_cast<std::size_t>(rng.below(scratch.size() - i));
                std::swap(scratch[i], scratch[j]);
            }
            std::sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(cap));
            out.col_indices.insert(out.col_indices.end(), scratch.begin(),
                                   scratch.begin() + static_cast<std::ptrdiff_t>(cap));
        }
        out.row_offsets[u + 1] = out.col_indices.size();
    }
    return out;
}

}  // namespace spreader_gnn::graph
