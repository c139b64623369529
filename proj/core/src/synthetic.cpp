#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "spreader_gnn/data_io.hpp"
#include "spreader_gnn/error.hpp"
#include "spreader_gnn/rng.hpp"

namespace spreader_gnn::io {

namespace {

bool is_probability(double p) {
    return p >= 0.0 && p <= 1.0;
}

std::size_t spreader_count(const SynthConfig& cfg) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(cfg.n_nodes) * cfg.spreader_fraction));
}

}  // namespace

void SynthConfig::validate() const {
    if (!(spreader_fraction > 0.0 && spreader_fraction < 1.0)) {
        throw ConfigError("spreader fraction must lie strictly between 0 and 1");
    }
    for (const auto& [name, p] : {std::pair{"p_intra", p_intra}, std::pair{"p_inter", p_inter},
                                  std::pair{"hub_boost", hub_boost}, std::pair{"label_fraction", label_fraction}}) {
        if (!is_probability(p)) {
            throw ConfigError(std::string(name) + " must lie in [0, 1]");
        }
    }
    if (feature_dim == 0) {
        throw ConfigError("feature dimension must be >= 1");
    }
    if (!std::isfinite(feature_shift)) {
        throw ConfigError("feature shift must be finite");
    }
    const std::size_t n_spreaders = spreader_count(*this);
    if (n_spreaders == 0 || n_spreaders == n_nodes) {
        throw ConfigError("configuration yields " + std::to_string(n_spreaders) + " spreaders out of " +
                          std::to_string(n_nodes) + " nodes; both classes need members");
    }
}

Dataset generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n_nodes;

    std::vector<graph::NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng class_rng(cfg.seed, streams::synth_classes);
    class_rng.shuffle(std::span<graph::NodeId>(perm));
    std::vector<bool> spreader(n, false);
    const std::size_t n_spreaders = spreader_count(cfg);
    for (std::size_t i = 0; i < n_spreaders; ++i) {
        spreader[perm[i]] = true;
    }

    Dataset data;
    data.table.features = Tensor(n, cfg.feature_dim);
    Rng feature_rng(cfg.seed, streams::synth_features);
    for (std::size_t v = 0; v < n; ++v) {
        const double mean = spreader[v] ? cfg.feature_shift : -cfg.feature_shift;
        for (double& x : data.table.features.row(v)) {
            x = mean + feature_rng.normal();
        }
    }

    // One uniform draw per pair regardless of its probability keeps the
    // stream aligned across configurations.
    std::vector<graph::Edge> edges;
    Rng edge_rng(cfg.seed, streams::synth_edges);
    for (graph::NodeId u = 0; u < n; ++u) {
        for (graph::NodeId v = u + 1; v < n; ++v) {
            double p = spreader[u] == spreader[v] ? cfg.p_intra : cfg.p_inter;
            if (spreader[u] || spreader[v]) {
                p += cfg.hub_boost;
            }
            if (edge_rng.uniform() < std::min(p, 1.0)) {
                edges.push_back({u, v});
            }
        }
    }
    data.graph = graph::build_graph(edges, n);

    data.table.labels.assign(n, Label::unlabeled);
    Rng label_rng(cfg.seed, streams::synth_labels);
    for (const bool cls : {false, true}) {
        std::vector<graph::NodeId> members;
        for (graph::NodeId v = 0; v < n; ++v) {
            if (spreader[v] == cls) {
                members.push_back(v);
            }
        }
        label_rng.shuffle(std::span<graph::NodeId>(members));
        const auto n_labeled =
            static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * cfg.label_fraction));
        for (std::size_t i = 0; i < n_labeled; ++i) {
            data.table.labels[members[i]] = cls ? Label::spreader : Label::regular;
        }
    }
    return data;
}

}  // namespace spreader_gnn::io
