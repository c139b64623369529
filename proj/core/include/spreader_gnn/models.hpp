#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spreader_gnn/graph.hpp"
#include "spreader_gnn/node_table.hpp"
#include "spreader_gnn/rng.hpp"
#include "spreader_gnn/tape.hpp"
#include "spreader_gnn/tensor.hpp"

namespace spreader_gnn::models {

enum class Architecture { gcn, sage, dgcnn };

std::string_view to_string(Architecture arch) noexcept;
// Accepts "gcn", "sage", "dgcnn"; throws ConfigError otherwise.
Architecture parse_architecture(std::string_view name);

// Fixed sizes of the DGCNN convolutional head.
inline constexpr std::size_t kDgcnnGraphLayers = 4;
inline constexpr std::size_t kDgcnnConv1Channels = 16;
inline constexpr std::size_t kDgcnnConv2Channels = 32;
inline constexpr std::size_t kDgcnnConv2Width = 5;
inline constexpr std::size_t kDgcnnPoolWindow = 2;
inline constexpr std::size_t kDgcnnDenseUnits = 128;
// One-hot hop distance from the ego root appended to the node features:
// buckets 0, 1, 2 and >= 3.
inline constexpr std::size_t kDgcnnHopChannels = 4;

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

// Ordered, named parameter tensors of one model. Names are prefixed with
// the architecture tag, e.g. "gcn.layer1.weight".
struct ModelParams {
    Architecture arch = Architecture::gcn;
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    // DGCNN only; 0 for node models.
    std::size_t sortpool_k = 0;
    std::vector<NamedTensor> tensors;

    Tensor& at(std::string_view name);
    const Tensor& at(std::string_view name) const;
    std::vector<Tensor*> trainable();
    void zero_grad();
    bool all_finite() const;
};

// Glorot-uniform weights, zero biases.
ModelParams init_gcn(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);
ModelParams init_sage(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);
// sortpool_k must be >= 2 so the pooling stage has a full window.
ModelParams init_dgcnn(std::size_t input_dim, std::size_t hidden_dim, std::size_t sortpool_k, Rng& rng);
ModelParams init_params(Architecture arch, std::size_t input_dim, std::size_t hidden_dim, std::size_t sortpool_k,
                        Rng& rng);

// Width of the second DGCNN convolution; shrinks below kDgcnnConv2Width
// when k is too small for the full window.
std::size_t dgcnn_conv2_width(std::size_t sortpool_k);

struct ForwardOptions {
    bool training = false;
    double dropout = 0.5;
    // GraphSAGE neighbour cap per layer; 0 aggregates the full neighbourhood.
    std::size_t neighbor_cap = 0;
};

// Three GCN layers (ReLU, dropout) and a linear head; one logit per node.
// g_norm is the output of sym_norm_adj.
nn::Var gcn_forward(nn::Tape& tape, const graph::SparseGraph& g_norm, const Tensor& x, ModelParams& params,
                    const ForwardOptions& opts, Rng& rng);

// Three mean-aggregator SAGE layers, h' = ReLU([h, mean_N(h)] W), with
// dropout, then a linear head. g is the raw graph.
nn::Var sage_forward(nn::Tape& tape, const graph::SparseGraph& g, const Tensor& x, ModelParams& params,
                     const ForwardOptions& opts, Rng& rng);

// Row order used by SortPooling: descending, comparing the last channel
// first, then the one before it, and so on. Fully equal rows keep input order.
std::vector<std::size_t> sort_pooling_order(const Tensor& z);

// Keeps the first k rows of z in sort_pooling_order; pads with zero rows
// when z has fewer than k.
nn::Var sort_pooling(nn::Var z, std::size_t k);

// Induced k-hop ego network of a labelled node. Node 0 is the root.
struct EgoSample {
    graph::SparseGraph graph;
    Tensor features;
    graph::NodeId root_local_index = 0;
    std::uint8_t label = 0;
    // Root id in the parent graph.
    graph::NodeId root = 0;
};

// Hop distance of every ego node from `root`, capped at kDgcnnHopChannels - 1.
std::vector<std::size_t> hop_distances(const graph::SparseGraph& g, graph::NodeId root);

// Four tanh GCN layers, column concat, SortPooling, conv/pool/conv head,
// dense layer and a single logit (1x1).
nn::Var dgcnn_forward(nn::Tape& tape, const EgoSample& sample, ModelParams& params, const ForwardOptions& opts,
                      Rng& rng);

// One EgoSample per listed node, ordered by node id. Every node must carry a
// binary label. Extraction fans out over `workers` threads.
std::vector<EgoSample> node_to_graph_dataset(const graph::SparseGraph& g, const NodeTable& table,
                                             std::span<const graph::NodeId> nodes, std::size_t hops = 3,
                                             std::size_t workers = 1);

// 0.6-quantile of ego sizes over the given samples, at least 2.
std::size_t default_sortpool_k(std::span<const EgoSample> samples, std::span<const std::size_t> indices);

}  // namespace spreader_gnn::models
