#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "spreader_gnn/graph.hpp"
#include "spreader_gnn/metrics.hpp"
#include "spreader_gnn/models.hpp"
#include "spreader_gnn/node_table.hpp"
#include "spreader_gnn/trainer.hpp"

namespace spreader_gnn::io {

// On-disk layout of a dataset directory.
inline constexpr std::string_view kEdgesFile = "edges.tsv";
inline constexpr std::string_view kFeaturesFile = "features.csv";
inline constexpr std::string_view kLabelsFile = "labels.csv";

struct Dataset {
    graph::SparseGraph graph;
    NodeTable table;
};

// Reads edges.tsv ("src<TAB>dst", '#' comments), features.csv (header
// "id,f0,f1,...") and labels.csv (header "id,label", label 0 or 1).
// Malformed lines raise ParseError with file and line; ids that do not
// exist in features.csv raise DataError; missing files raise IoError.
Dataset load_dataset(const std::filesystem::path& dir);

// Writes the three files; each undirected edge once as "u<TAB>v" with u < v.
// Output is a pure function of the dataset.
void save_dataset(const Dataset& data, const std::filesystem::path& dir);

struct SynthConfig {
    std::size_t n_nodes = 400;
    double spreader_fraction = 0.5;
    std::size_t feature_dim = 8;
    // Spreaders draw features from N(+shift, I), regular users from N(-shift, I).
    double feature_shift = 1.0;
    double p_intra = 0.01;
    double p_inter = 0.01;
    // Added to the edge probability of every pair touching a spreader.
    double hub_boost = 0.02;
    double label_fraction = 0.5;
    std::uint64_t seed = 0;

    // Throws ConfigError on out-of-range fields or an empty class.
    void validate() const;
};

// Two-class labelled graph, fully determined by cfg.
Dataset generate_synthetic(const SynthConfig& cfg);

// Little-endian binary: magic "SGNNCKPT", version byte, u32 tensor count,
// then per tensor u32 name length, name, u64 rows, u64 cols, raw f64 data.
// DGCNN checkpoints carry the pooling size as the 1x1 tensor
// "dgcnn.sortpool_k".
inline constexpr std::string_view kCheckpointMagic = "SGNNCKPT";
inline constexpr std::uint8_t kCheckpointVersion = 1;

void save_checkpoint(const models::ModelParams& params, const std::filesystem::path& path);
// Throws IncompatibilityError on a bad magic, version or tensor table.
models::ModelParams load_checkpoint(const std::filesystem::path& path);

// {"model": ..., "seed": ..., "accuracy": ..., "mcc": ..., "roc_auc": ...|null}
std::string metrics_json(const metrics::MetricsRecord& record, std::string_view model, std::uint64_t seed);
void write_metrics(const metrics::MetricsRecord& record, std::string_view model, std::uint64_t seed,
                   const std::filesystem::path& path);

// CSV "epoch,loss,train_acc", one row per epoch.
void write_history(const training::TrainHistory& history, const std::filesystem::path& path);

// Shortest decimal text that parses back to exactly v.
std::string format_double(double v);

}  // namespace spreader_gnn::io
