#include "spreader_gnn/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spreader_gnn/error.hpp"
#include "spreader_gnn/graph_ops.hpp"
#include "spreader_gnn/ops.hpp"
#include "spreader_gnn/parallel.hpp"

namespace spreader_gnn::models {

namespace {

Tensor glorot(std::size_t rows, std::size_t cols, double fan_in, double fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor t(rows, cols);
    for (double& v : t.data()) {
        v = (2.0 * rng.uniform() - 1.0) * limit;
    }
    t.set_requires_grad(true);
    return t;
}

Tensor glorot(std::size_t rows, std::size_t cols, Rng& rng) {
    return glorot(rows, cols, static_cast<double>(rows), static_cast<double>(cols), rng);
}

Tensor zeros(std::size_t rows, std::size_t cols) {
    Tensor t(rows, cols);
    t.set_requires_grad(true);
    return t;
}

void check_node_inputs(const char* op, const graph::SparseGraph& g, const Tensor& x, const ModelParams& params,
                       Architecture expected) {
    if (params.arch != expected) {
        throw IncompatibilityError(std::string(op) + ": parameters are for " + std::string(to_string(params.arch)));
    }
    if (x.rows() != g.n_nodes() || x.cols() != params.input_dim) {
        throw ShapeError(std::string(op) + ": features " + x.shape_string() + " do not match " +
                         std::to_string(g.n_nodes()) + " nodes of dimension " + std::to_string(params.input_dim));
    }
}

}  // namespace

std::string_view to_string(Architecture arch) noexcept {
    switch (arch) {
        case Architecture::gcn:
            return "gcn";
        case Architecture::sage:
            return "sage";
        case Architecture::dgcnn:
            return "dgcnn";
    }
    return "unknown";
}

Architecture parse_architecture(std::string_view name) {
    for (const auto arch : {Architecture::gcn, Architecture::sage, Architecture::dgcnn}) {
        if (name == to_string(arch)) {
            return arch;
        }
    }
    throw ConfigError("unknown model '" + std::string(name) + "' (expected gcn, sage or dgcnn)");
}

Tensor& ModelParams::at(std::string_view name) {
    for (auto& nt : tensors) {
        if (nt.name == name) {
            return nt.tensor;
        }
    }
    throw IncompatibilityError("model has no tensor named '" + std::string(name) + "'");
}

const Tensor& ModelParams::at(std::string_view name) const {
    return const_cast<ModelParams*>(this)->at(name);
}

std::vector<Tensor*> ModelParams::trainable() {
    std::vector<Tensor*> out;
    for (auto& nt : tensors) {
        if (nt.tensor.requires_grad()) {
            out.push_back(&nt.tensor);
        }
    }
    return out;
}

void ModelParams::zero_grad() {
    for (auto& nt : tensors) {
        nt.tensor.zero_grad();
    }
}

bool ModelParams::all_finite() const {
    return std::all_of(tensors.begin(), tensors.end(), [](const NamedTensor& nt) { return nt.tensor.all_finite(); });
}

ModelParams init_gcn(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
    if (input_dim == 0 || hidden_dim == 0) {
        throw ConfigError("gcn: input and hidden dimensions must be >= 1");
    }
    ModelParams p{Architecture::gcn, input_dim, hidden_dim, 0, {}};
    p.tensors.push_back({"gcn.layer1.weight", glorot(input_dim, hidden_dim, rng)});
    p.tensors.push_back({"gcn.layer2.weight", glorot(hidden_dim, hidden_dim, rng)});
    p.tensors.push_back({"gcn.layer3.weight", glorot(hidden_dim, hidden_dim, rng)});
    p.tensors.push_back({"gcn.head.weight", glorot(hidden_dim, 1, rng)});
    p.tensors.push_back({"gcn.head.bias", zeros(1, 1)});
    return p;
}

ModelParams init_sage(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
    if (input_dim == 0 || hidden_dim == 0) {
        throw ConfigError("sage: input and hidden dimensions must be >= 1");
    }
    ModelParams p{Architecture::sage, input_dim, hidden_dim, 0, {}};
    p.tensors.push_back({"sage.layer1.weight", glorot(2 * input_dim, hidden_dim, rng)});
    p.tensors.push_back({"sage.layer2.weight", glorot(2 * hidden_dim, hidden_dim, rng)});
    p.tensors.push_back({"sage.layer3.weight", glorot(2 * hidden_dim, hidden_dim, rng)});
    p.tensors.push_back({"sage.head.weight", glorot(hidden_dim, 1, rng)});
    p.tensors.push_back({"sage.head.bias", zeros(1, 1)});
    return p;
}

std::size_t dgcnn_conv2_width(std::size_t sortpool_k) {
    return std::min(kDgcnnConv2Width, sortpool_k / kDgcnnPoolWindow);
}

ModelParams init_dgcnn(std::size_t input_dim, std::size_t hidden_dim, std::size_t sortpool_k, Rng& rng) {
    if (input_dim == 0 || hidden_dim == 0) {
        throw ConfigError("dgcnn: input and hidden dimensions must be >= 1");
    }
    if (sortpool_k < kDgcnnPoolWindow) {
        throw ConfigError("dgcnn: sortpool_k must be >= 2, got " + std::to_string(sortpool_k));
    }
    ModelParams p{Architecture::dgcnn, input_dim, hidden_dim, sortpool_k, {}};
    std::size_t in = input_dim + kDgcnnHopChannels;
    for (std::size_t l = 1; l <= kDgcnnGraphLayers; ++l) {
        p.tensors.push_back({"dgcnn.gcn" + std::to_string(l) + ".weight", glorot(in, hidden_dim, rng)});
        in = hidden_dim;
    }
    const std::size_t channels = kDgcnnGraphLayers * hidden_dim;
    const auto w1 = static_cast<double>(channels);
    p.tensors.push_back({"dgcnn.conv1.kernel",
                         glorot(kDgcnnConv1Channels, channels, w1, static_cast<double>(kDgcnnConv1Channels) * w1, rng)});
    p.tensors.push_back({"dgcnn.conv1.bias", zeros(kDgcnnConv1Channels, 1)});

    const std::size_t pooled = sortpool_k / kDgcnnPoolWindow;
    const std::size_t w2 = dgcnn_conv2_width(sortpool_k);
    const auto w2d = static_cast<double>(w2);
    p.tensors.push_back({"dgcnn.conv2.kernel",
                         glorot(kDgcnnConv2Channels, kDgcnnConv1Channels * w2,
                                static_cast<double>(kDgcnnConv1Channels) * w2d,
                                static_cast<double>(kDgcnnConv2Channels) * w2d, rng)});
    p.tensors.push_back({"dgcnn.conv2.bias", zeros(kDgcnnConv2Channels, 1)});

    const std::size_t dense_in = kDgcnnConv2Channels * (pooled - w2 + 1);
    p.tensors.push_back({"dgcnn.dense.weight", glorot(dense_in, kDgcnnDenseUnits, rng)});
    p.tensors.push_back({"dgcnn.dense.bias", zeros(1, kDgcnnDenseUnits)});
    p.tensors.push_back({"dgcnn.head.weight", glorot(kDgcnnDenseUnits, 1, rng)});
    p.tensors.push_back({"dgcnn.head.bias", zeros(1, 1)});
    return p;
}

ModelParams init_params(Architecture arch, std::size_t input_dim, std::size_t hidden_dim, std::size_t sortpool_k,
                        Rng& rng) {
    switch (arch) {
        case Architecture::gcn:
            return init_gcn(input_dim, hidden_dim, rng);
        case Architecture::sage:
            return init_sage(input_dim, hidden_dim, rng);
        case Architecture::dgcnn:
            return init_dgcnn(input_dim, hidden_dim, sortpool_k, rng);
    }
    throw ConfigError("unknown architecture");
}

nn::Var gcn_forward(nn::Tape& tape, const graph::SparseGraph& g_norm, const Tensor& x, ModelParams& params,
                    const ForwardOptions& opts, Rng& rng) {
    check_node_inputs("gcn_forward", g_norm, x, params, Architecture::gcn);
    nn::Var h = tape.constant(x);
    for (const char* layer : {"gcn.layer1.weight", "gcn.layer2.weight", "gcn.layer3.weight"}) {
        h = nn::relu(nn::matmul(graph::spmm(g_norm, h), tape.parameter(params.at(layer))));
        h = nn::dropout(h, opts.dropout, opts.training, rng);
    }
    return nn::add_bias(nn::matmul(h, tape.parameter(params.at("gcn.head.weight"))),
                        tape.parameter(params.at("gcn.head.bias")));
}

nn::Var sage_forward(nn::Tape& tape, const graph::SparseGraph& g, const Tensor& x, ModelParams& params,
                     const ForwardOptions& opts, Rng& rng) {
    check_node_inputs("sage_forward", g, x, params, Architecture::sage);
    nn::Var h = tape.constant(x);
    for (const char* layer : {"sage.layer1.weight", "sage.layer2.weight", "sage.layer3.weight"}) {
        nn::Var agg;
        if (opts.neighbor_cap == 0) {
            agg = graph::mean_neighbor_aggregate(g, h);
        } else {
            const auto sample = graph::sample_neighbors(g, opts.neighbor_cap, rng);
            agg = graph::mean_neighbor_aggregate(sample.view(), h);
        }
        h = nn::relu(nn::matmul(nn::concat_cols(h, agg), tape.parameter(params.at(layer))));
        h = nn::dropout(h, opts.dropout, opts.training, rng);
    }
    return nn::add_bias(nn::matmul(h, tape.parameter(params.at("sage.head.weight"))),
                        tape.parameter(params.at("sage.head.bias")));
}

std::vector<std::size_t> sort_pooling_order(const Tensor& z) {
    std::vector<std::size_t> order(z.rows());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t c = z.cols();
    std::stable_sort(order.begin(), order.end(), [&z, c](std::size_t a, std::size_t b) {
        for (std::size_t j = c; j-- > 0;) {
            if (z(a, j) != z(b, j)) {
                return z(a, j) > z(b, j);
            }
        }
        return false;
    });
    return order;
}

nn::Var sort_pooling(nn::Var z, std::size_t k) {
    if (k == 0) {
        throw ConfigError("sort_pooling: k must be >= 1");
    }
    auto order = sort_pooling_order(z.value());
    if (order.size() > k) {
        order.resize(k);
    }
    return nn::gather_rows(z, order, k);
}

// BFS distance from root inside the ego; unreachable nodes land in the last bucket.
std::vector<std::size_t> hop_distances(const graph::SparseGraph& g, graph::NodeId root) {
    std::vector<std::size_t> dist(g.n_nodes(), kDgcnnHopChannels - 1);
    std::vector<bool> seen(g.n_nodes(), false);
    std::vector<graph::NodeId> frontier{root};
    seen[root] = true;
    dist[root] = 0;
    for (std::size_t level = 1; !frontier.empty() && level < kDgcnnHopChannels - 1; ++level) {
        std::vector<graph::NodeId> next;
        for (const auto u : frontier) {
            for (const auto v : g.neighbors(u)) {
                if (!seen[v]) {
                    seen[v] = true;
                    dist[v] = level;
                    next.push_back(v);
                }
            }
        }
        frontier = std::move(next);
    }
    return dist;
}

nn::Var dgcnn_forward(nn::Tape& tape, const EgoSample& sample, ModelParams& params, const ForwardOptions& opts,
                      Rng& rng) {
    check_node_inputs("dgcnn_forward", sample.graph, sample.features, params, Architecture::dgcnn);
    const graph::SparseGraph adj = graph::sym_norm_adj(sample.graph);

    if (sample.root_local_index >= sample.graph.n_nodes()) {
        throw ShapeError("dgcnn_forward: root index out of range");
    }
    const std::size_t d = sample.features.cols();
    Tensor x(sample.features.rows(), d + kDgcnnHopChannels);
    const auto hops = hop_distances(sample.graph, sample.root_local_index);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto src = sample.features.row(r);
        std::copy(src.begin(), src.end(), x.row(r).begin());
        x(r, d + std::min(hops[r], kDgcnnHopChannels - 1)) = 1.0;
    }
    nn::Var h = tape.constant(std::move(x));
    nn::Var z;
    for (std::size_t l = 1; l <= kDgcnnGraphLayers; ++l) {
        nn::Var w = tape.parameter(params.at("dgcnn.gcn" + std::to_string(l) + ".weight"));
        h = nn::tanh(nn::matmul(graph::spmm(adj, h), w));
        z = l == 1 ? h : nn::concat_cols(z, h);
    }

    const std::size_t k = params.sortpool_k;
    const std::size_t channels = kDgcnnGraphLayers * params.hidden_dim;
    nn::Var pooled = sort_pooling(z, k);
    nn::Var seq = nn::reshape(pooled, 1, k * channels);
    nn::Var c1 = nn::conv1d(seq, tape.parameter(params.at("dgcnn.conv1.kernel")),
                            tape.parameter(params.at("dgcnn.conv1.bias")), channels, channels);
    nn::Var p1 = nn::maxpool1d(c1, kDgcnnPoolWindow, kDgcnnPoolWindow);
    nn::Var c2 = nn::conv1d(p1, tape.parameter(params.at("dgcnn.conv2.kernel")),
                            tape.parameter(params.at("dgcnn.conv2.bias")), dgcnn_conv2_width(k), 1);
    nn::Var flat = nn::reshape(c2, 1, c2.rows() * c2.cols());
    nn::Var dense = nn::relu(nn::add_bias(nn::matmul(flat, tape.parameter(params.at("dgcnn.dense.weight"))),
                                          tape.parameter(params.at("dgcnn.dense.bias"))));
    dense = nn::dropout(dense, opts.dropout, opts.training, rng);
    return nn::add_bias(nn::matmul(dense, tape.parameter(params.at("dgcnn.head.weight"))),
                        tape.parameter(params.at("dgcnn.head.bias")));
}

std::vector<EgoSample> node_to_graph_dataset(const graph::SparseGraph& g, const NodeTable& table,
                                             std::span<const graph::NodeId> nodes, std::size_t hops,
                                             std::size_t workers) {
    if (table.n_nodes() != g.n_nodes() || table.features.rows() != g.n_nodes()) {
        throw ShapeError("node_to_graph_dataset: table does not match graph size");
    }
    std::vector<graph::NodeId> sorted(nodes.begin(), nodes.end());
    std::sort(sorted.begin(), sorted.end());
    const auto labels = table.binary_labels(sorted);

    std::vector<EgoSample> samples(sorted.size());
    const std::size_t d = table.feature_dim();
    parallel_for(sorted.size(), workers, [&](std::size_t i) {
        auto ego = graph::extract_ego(g, sorted[i], hops);
        EgoSample& s = samples[i];
        s.features = Tensor(ego.nodes.size(), d);
        for (std::size_t r = 0; r < ego.nodes.size(); ++r) {
            const auto src = table.features.row(ego.nodes[r]);
            std::copy(src.begin(), src.end(), s.features.row(r).begin());
        }
        s.graph = std::move(ego.graph);
        s.root_local_index = 0;
        s.label = labels[i];
        s.root = sorted[i];
    });
    return samples;
}

std::size_t default_sortpool_k(std::span<const EgoSample> samples, std::span<const std::size_t> indices) {
    std::vector<std::size_t> sizes;
    sizes.reserve(indices.size());
    for (const std::size_t i : indices) {
        sizes.push_back(samples[i].graph.n_nodes());
    }
    if (sizes.empty()) {
        return 2;
    }
    std::sort(sizes.begin(), sizes.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.6 * static_cast<double>(sizes.size())));
    return std::max<std::size_t>(2, sizes[std::max<std::size_t>(rank, 1) - 1]);
}

}  // namespace spreader_gnn::models
