#include "spreader_gnn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spreader_gnn/error.hpp"
#include "spreader_gnn/ops.hpp"
#include "spreader_gnn/optim.hpp"
#include "spreader_gnn/tape.hpp"

namespace spreader_gnn::training {

namespace {

using models::Architecture;

double stable_sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::size_t count_correct(std::span<const double> logits, std::span<const std::uint8_t> labels) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if ((logits[i] >= 0.0 ? 1 : 0) == labels[i]) {
            ++correct;
        }
    }
    return correct;
}

[[noreturn]] void numeric_failure(std::size_t epoch, const std::string& what) {
    throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + what);
}

nn::Var node_forward(nn::Tape& tape, const graph::SparseGraph& g, const graph::SparseGraph& g_norm,
                     const Tensor& x, models::ModelParams& params, const models::ForwardOptions& opts, Rng& rng) {
    switch (params.arch) {
        case Architecture::gcn:
            return models::gcn_forward(tape, g_norm, x, params, opts, rng);
        case Architecture::sage:
            return models::sage_forward(tape, g, x, params, opts, rng);
        case Architecture::dgcnn:
            break;
    }
    throw ConfigError("dgcnn is a graph model; train it on ego samples");
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 1) {
        throw ConfigError("epochs must be >= 1");
    }
    if (!(lr >= 0.0) || !std::isfinite(lr)) {
        throw ConfigError("learning rate must be finite and >= 0");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) {
        throw ConfigError("dropout must lie in [0, 1)");
    }
    if (hidden_dim < 1) {
        throw ConfigError("hidden dimension must be >= 1");
    }
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
        throw ConfigError("split ratio must lie strictly between 0 and 1");
    }
    if (model == Architecture::dgcnn && sortpool_k == 1) {
        throw ConfigError("sortpool k must be 0 (auto) or >= 2");
    }
}

TrainConfig TrainConfig::reference() {
    TrainConfig cfg;
    cfg.lr = kReferenceLearningRate;
    return cfg;
}

Split stratified_split(std::span<const std::uint8_t> labels, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ConfigError("split ratio must lie strictly between 0 and 1");
    }
    if (labels.empty()) {
        throw DataError("no labeled nodes to split");
    }
    std::vector<std::size_t> members[2];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 1) {
            throw DataError("label at position " + std::to_string(i) + " is not 0 or 1");
        }
        members[labels[i]].push_back(i);
    }
    Rng rng(seed, streams::split);
    Split split;
    for (std::size_t cls = 0; cls < 2; ++cls) {
        auto& m = members[cls];
        if (m.size() < 2) {
            throw DataError("class " + std::to_string(cls) + " has " + std::to_string(m.size()) +
                            " labeled members; stratified split needs at least 2");
        }
        // The epsilon absorbs representation error, e.g. 10 * (1 - 0.8) < 2.
        const auto n_test =
            static_cast<std::size_t>(std::floor(static_cast<double>(m.size()) * (1.0 - ratio) + 1e-9));
        rng.shuffle(std::span<std::size_t>(m));
        split.test.insert(split.test.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(n_test));
        split.train.insert(split.train.end(), m.begin() + static_cast<std::ptrdiff_t>(n_test), m.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

models::ModelParams initial_params(const TrainConfig& cfg, std::size_t input_dim, std::size_t sortpool_k) {
    Rng rng(cfg.seed, streams::init);
    return models::init_params(cfg.model, input_dim, cfg.hidden_dim, sortpool_k, rng);
}

TrainResult train(const graph::SparseGraph& g, const NodeTable& table, std::span<const graph::NodeId> train_nodes,
                  const TrainConfig& cfg) {
    cfg.validate();
    if (cfg.model == Architecture::dgcnn) {
        throw ConfigError("dgcnn is a graph model; train it on ego samples");
    }
    if (train_nodes.empty()) {
        throw DataError("no labeled nodes in the training split");
    }
    const std::vector<graph::NodeId> nodes(train_nodes.begin(), train_nodes.end());
    const auto labels = table.binary_labels(nodes);
    std::vector<std::size_t> rows(nodes.begin(), nodes.end());

    TrainResult result{initial_params(cfg, table.feature_dim()), {}};
    const graph::SparseGraph g_norm = cfg.model == Architecture::gcn ? graph::sym_norm_adj(g) : graph::SparseGraph{};
    auto trainable = result.params.trainable();
    nn::Adam adam(trainable);
    Rng dropout_rng(cfg.seed, streams::dropout);
    const models::ForwardOptions opts{true, cfg.dropout, cfg.neighbor_cap};

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        nn::Tape tape;
        double loss_value = 0.0;
        std::size_t correct = 0;
        try {
            nn::Var logits = node_forward(tape, g, g_norm, table.features, result.params, opts, dropout_rng);
            nn::Var picked = nn::gather_rows(logits, rows);
            nn::Var loss = nn::bce_with_logits(picked, labels);
            loss_value = loss.value()(0, 0);
            correct = count_correct(picked.value().data(), labels);
            tape.backward(loss);
        } catch (const NumericError& e) {
            numeric_failure(epoch, e.what());
        }
        if (!std::isfinite(loss_value)) {
            numeric_failure(epoch, "non-finite loss");
        }
        adam.step(cfg.lr);
        result.history.epochs.push_back(
            {epoch, loss_value, static_cast<double>(correct) / static_cast<double>(labels.size())});
    }
    return result;
}

TrainResult train(std::span<const models::EgoSample> samples, std::span<const std::size_t> train_indices,
                  const TrainConfig& cfg) {
    cfg.validate();
    if (cfg.model != Architecture::dgcnn) {
        throw ConfigError(std::string(models::to_string(cfg.model)) + " is a node model; train it on the full graph");
    }
    if (train_indices.empty()) {
        throw DataError("no labeled nodes in the training split");
    }
    if (samples.empty()) {
        throw DataError("no ego samples");
    }
    for (const std::size_t i : train_indices) {
        if (i >= samples.size()) {
            throw DataError("training index " + std::to_string(i) + " out of range");
        }
    }
    const std::size_t k = cfg.sortpool_k != 0 ? cfg.sortpool_k : models::default_sortpool_k(samples, train_indices);
    TrainResult result{initial_params(cfg, samples.front().features.cols(), k), {}};
    auto trainable = result.params.trainable();
    nn::Adam adam(trainable);
    Rng dropout_rng(cfg.seed, streams::dropout);
    Rng shuffle_rng(cfg.seed, streams::shuffle);
    const models::ForwardOptions opts{true, cfg.dropout, 0};

    std::vector<std::size_t> order(train_indices.begin(), train_indices.end());
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(std::span<std::size_t>(order));
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (const std::size_t i : order) {
            const models::EgoSample& sample = samples[i];
            const std::uint8_t label[1] = {sample.label};
            nn::Tape tape;
            double loss_value = 0.0;
            try {
                nn::Var logit = models::dgcnn_forward(tape, sample, result.params, opts, dropout_rng);
                nn::Var loss = nn::bce_with_logits(logit, label);
                loss_value = loss.value()(0, 0);
                correct += count_correct(logit.value().data(), label);
                tape.backward(loss);
            } catch (const NumericError& e) {
                numeric_failure(epoch, e.what());
            }
            if (!std::isfinite(loss_value)) {
                numeric_failure(epoch, "non-finite loss");
            }
            adam.step(cfg.lr);
            loss_sum += loss_value;
        }
        const auto n = static_cast<double>(order.size());
        result.history.epochs.push_back({epoch, loss_sum / n, static_cast<double>(correct) / n});
    }
    return result;
}

std::vector<double> predict_scores(models::ModelParams& params, const graph::SparseGraph& g, const NodeTable& table,
                                   std::span<const graph::NodeId> nodes, std::size_t neighbor_cap) {
    const graph::SparseGraph g_norm = params.arch == Architecture::gcn ? graph::sym_norm_adj(g) : graph::SparseGraph{};
    nn::Tape tape;
    // Eval mode never draws from this generator unless neighbour sampling is on.
    Rng rng(0, streams::sampling);
    const models::ForwardOptions opts{false, 0.0, neighbor_cap};
    nn::Var logits = node_forward(tape, g, g_norm, table.features, params, opts, rng);
    std::vector<double> scores;
    scores.reserve(nodes.size());
    for (const graph::NodeId v : nodes) {
        if (v >= logits.rows()) {
            throw DataError("node " + std::to_string(v) + " out of range");
        }
        scores.push_back(stable_sigmoid(logits.value()(v, 0)));
    }
    params.zero_grad();
    return scores;
}

std::vector<double> predict_scores(models::ModelParams& params, std::span<const models::EgoSample> samples,
                                   std::span<const std::size_t> indices) {
    std::vector<double> scores;
    scores.reserve(indices.size());
    Rng rng(0, streams::sampling);
    const models::ForwardOptions opts{false, 0.0, 0};
    for (const std::size_t i : indices) {
        if (i >= samples.size()) {
            throw DataError("sample index " + std::to_string(i) + " out of range");
        }
        nn::Tape tape;
        nn::Var logit = models::dgcnn_forward(tape, samples[i], params, opts, rng);
        scores.push_back(stable_sigmoid(logit.value()(0, 0)));
    }
    params.zero_grad();
    return scores;
}

metrics::MetricsRecord evaluate(models::ModelParams& params, const graph::SparseGraph& g, const NodeTable& table,
                                std::span<const graph::NodeId> test_nodes, std::size_t neighbor_cap) {
    const std::vector<graph::NodeId> nodes(test_nodes.begin(), test_nodes.end());
    const auto truth = table.binary_labels(nodes);
    const auto scores = predict_scores(params, g, table, nodes, neighbor_cap);
    return metrics::evaluate_scores(scores, truth);
}

metrics::MetricsRecord evaluate(models::ModelParams& params, std::span<const models::EgoSample> samples,
                                std::span<const std::size_t> test_indices) {
    std::vector<std::uint8_t> truth;
    truth.reserve(test_indices.size());
    for (const std::size_t i : test_indices) {
        if (i >= samples.size()) {
            throw DataError("sample index " + std::to_string(i) + " out of range");
        }
        truth.push_back(samples[i].label);
    }
    const auto scores = predict_scores(params, samples, test_indices);
    return metrics::evaluate_scores(scores, truth);
}

}  // namespace spreader_gnn::training
