#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spreader_gnn/graph.hpp"
#include "spreader_gnn/metrics.hpp"
#include "spreader_gnn/models.hpp"
#include "spreader_gnn/node_table.hpp"

namespace spreader_gnn::training {

// Learning rate of the "reference" preset.
inline constexpr double kReferenceLearningRate = 1e-5;

struct TrainConfig {
    models::Architecture model = models::Architecture::gcn;
    std::size_t epochs = 200;
    double lr = 1e-3;
    double dropout = 0.5;
    std::size_t hidden_dim = 32;
    double split_ratio = 0.8;
    std::uint64_t seed = 0;
    // 0 selects the 0.6-quantile of training ego sizes.
    std::size_t sortpool_k = 0;
    std::size_t hops = 3;
    // GraphSAGE neighbour cap; 0 means the full neighbourhood.
    std::size_t neighbor_cap = 0;

    // Throws ConfigError on out-of-range fields.
    void validate() const;
    // Defaults with lr = kReferenceLearningRate.
    static TrainConfig reference();
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::optional<metrics::MetricsRecord> test_metrics;
};

struct TrainResult {
    models::ModelParams params;
    TrainHistory history;
};

// Positions into the labels array.
struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Per class, floor(n_class * (1 - ratio)) members go to test and the rest to
// train; membership is drawn from a seeded shuffle. Both lists are sorted.
// Each class needs at least two members (DataError otherwise).
Split stratified_split(std::span<const std::uint8_t> labels, double ratio, std::uint64_t seed);

// Parameters exactly as train() initializes them for this config.
models::ModelParams initial_params(const TrainConfig& cfg, std::size_t input_dim, std::size_t sortpool_k = 0);

// Full-batch semi-supervised training of gcn or sage: every epoch runs one
// forward pass over the whole graph, takes the loss on train_nodes only, and
// applies one Adam step.
TrainResult train(const graph::SparseGraph& g, const NodeTable& table, std::span<const graph::NodeId> train_nodes,
                  const TrainConfig& cfg);

// DGCNN over ego samples: one Adam step per training sample, visiting the
// samples in a freshly shuffled order each epoch.
TrainResult train(std::span<const models::EgoSample> samples, std::span<const std::size_t> train_indices,
                  const TrainConfig& cfg);

// Sigmoid scores (eval mode) for the given nodes / samples.
std::vector<double> predict_scores(models::ModelParams& params, const graph::SparseGraph& g, const NodeTable& table,
                                   std::span<const graph::NodeId> nodes, std::size_t neighbor_cap = 0);
std::vector<double> predict_scores(models::ModelParams& params, std::span<const models::EgoSample> samples,
                                   std::span<const std::size_t> indices);

metrics::MetricsRecord evaluate(models::ModelParams& params, const graph::SparseGraph& g, const NodeTable& table,
                                std::span<const graph::NodeId> test_nodes, std::size_t neighbor_cap = 0);
metrics::MetricsRecord evaluate(models::ModelParams& params, std::span<const models::EgoSample> samples,
                                std::span<const std::size_t> test_indices);

}  // namespace spreader_gnn::training
