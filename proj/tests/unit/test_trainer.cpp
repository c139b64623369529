#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "spreader_gnn/data_io.hpp"
#include "spreader_gnn/error.hpp"
#include "spreader_gnn/trainer.hpp"

using namespace spreader_gnn;
using models::Architecture;
using training::TrainConfig;
using U8 = std::vector<std::uint8_t>;

namespace {

U8 classes(std::size_t zeros, std::size_t ones) {
    U8 out(zeros, 0);
    out.insert(out.end(), ones, 1);
    return out;
}

std::size_t count_class(const std::vector<std::size_t>& idx, const U8& labels, std::uint8_t cls) {
    std::size_t n = 0;
    for (const auto i : idx) {
        n += labels[i] == cls;
    }
    return n;
}

io::Dataset small_dataset(std::uint64_t seed, std::size_t n = 80, double shift = 1.0) {
    io::SynthConfig cfg;
    cfg.n_nodes = n;
    cfg.feature_dim = 4;
    cfg.feature_shift = shift;
    cfg.p_intra = 0.05;
    cfg.p_inter = 0.02;
    cfg.hub_boost = 0.0;
    cfg.label_fraction = 1.0;
    cfg.seed = seed;
    return io::generate_synthetic(cfg);
}

void check_same_params(const models::ModelParams& a, const models::ModelParams& b) {
    REQUIRE(a.tensors.size() == b.tensors.size());
    for (std::size_t i = 0; i < a.tensors.size(); ++i) {
        INFO(a.tensors[i].name);
        CHECK(a.tensors[i].tensor == b.tensors[i].tensor);
    }
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("stratified split sizes") {
    const U8 even = classes(10, 10);
    const auto s = training::stratified_split(even, 0.8, 1);
    CHECK(count_class(s.train, even, 0) == 8);
    CHECK(count_class(s.train, even, 1) == 8);
    CHECK(count_class(s.test, even, 0) == 2);
    CHECK(count_class(s.test, even, 1) == 2);

    const U8 skew = classes(7, 13);
    const auto t = training::stratified_split(skew, 0.8, 1);
    CHECK(count_class(t.test, skew, 0) == 1);
    CHECK(count_class(t.test, skew, 1) == 2);
    CHECK(t.train.size() == 17);
    CHECK(std::is_sorted(t.train.begin(), t.train.end()));

    CHECK(training::stratified_split(even, 0.8, 1).test == s.test);
    CHECK_THROWS_AS(training::stratified_split(classes(1, 10), 0.8, 1), DataError);
    CHECK_THROWS_AS(training::stratified_split(U8{}, 0.8, 1), DataError);
    CHECK_THROWS_AS(training::stratified_split(even, 1.0, 1), ConfigError);
}

TEST_CASE("config validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.dropout = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.lr = std::nan("");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.split_ratio = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK(TrainConfig::reference().lr == training::kReferenceLearningRate);
}

TEST_CASE("node models: determinism, zero lr and masking") {
    const auto d = small_dataset(2);
    const auto labeled = d.table.labeled_nodes();
    const auto split = training::stratified_split(d.table.binary_labels(labeled), 0.8, 5);
    std::vector<graph::NodeId> train_nodes;
    for (const auto i : split.train) {
        train_nodes.push_back(labeled[i]);
    }

    for (const auto arch : {Architecture::gcn, Architecture::sage}) {
        INFO(models::to_string(arch));
        TrainConfig cfg;
        cfg.model = arch;
        cfg.epochs = 20;
        cfg.seed = 5;
        const auto a = training::train(d.graph, d.table, train_nodes, cfg);
        const auto b = training::train(d.graph, d.table, train_nodes, cfg);
        check_same_params(a.params, b.params);
        REQUIRE(a.history.epochs.size() == 20);
        CHECK(a.history.epochs.back().train_loss == b.history.epochs.back().train_loss);

        // Labels outside the training set must not reach the loss.
        NodeTable flipped = d.table;
        for (const auto i : split.test) {
            auto& l = flipped.labels[labeled[i]];
            l = l == Label::spreader ? Label::regular : Label::spreader;
        }
        check_same_params(training::train(d.graph, flipped, train_nodes, cfg).params, a.params);

        cfg.lr = 0.0;
        cfg.epochs = 3;
        check_same_params(training::train(d.graph, d.table, train_nodes, cfg).params,
                          training::initial_params(cfg, d.table.feature_dim()));
    }
}

TEST_CASE("separable two-feature data is fitted") {
    io::SynthConfig sc;
    sc.n_nodes = 200;
    sc.feature_dim = 2;
    sc.feature_shift = 3.0;
    sc.p_inter = 0.0;
    sc.hub_boost = 0.0;
    sc.label_fraction = 1.0;
    sc.seed = 1;
    const auto d = io::generate_synthetic(sc);
    const auto labeled = d.table.labeled_nodes();
    for (const auto arch : {Architecture::gcn, Architecture::sage}) {
        INFO(models::to_string(arch));
        TrainConfig cfg;
        cfg.model = arch;
        auto r = training::train(d.graph, d.table, labeled, cfg);
        CHECK(training::evaluate(r.params, d.graph, d.table, labeled).accuracy >= 0.95);
    }
}

// History losses are single dropout draws; compare the dropout-free
// objective on the training nodes instead.
TEST_CASE("loss at epoch 50 is below loss at epoch 1") {
    for (const std::uint64_t seed : {1, 2, 3}) {
        io::SynthConfig sc;
        sc.seed = seed;
        const auto d = io::generate_synthetic(sc);
        const auto labeled = d.table.labeled_nodes();
        const auto y = d.table.binary_labels(labeled);
        for (const auto arch : {Architecture::gcn, Architecture::sage}) {
            INFO(models::to_string(arch), " seed ", seed);
            TrainConfig cfg;
            cfg.model = arch;
            cfg.seed = seed;
            auto loss_after = [&](std::size_t epochs) {
                cfg.epochs = epochs;
                auto params = training::train(d.graph, d.table, labeled, cfg).params;
                const auto s = training::predict_scores(params, d.graph, d.table, labeled);
                double total = 0.0;
                for (std::size_t i = 0; i < s.size(); ++i) {
                    total -= y[i] == 1 ? std::log(s[i]) : std::log1p(-s[i]);
                }
                return total / static_cast<double>(s.size());
            };
            CHECK(loss_after(50) < loss_after(1));
        }
    }
}

TEST_CASE("dgcnn trainer on small egos") {
    const auto d = small_dataset(4, 40, 2.0);
    const auto labeled = d.table.labeled_nodes();
    const auto samples = models::node_to_graph_dataset(d.graph, d.table, labeled, 2);
    U8 labels;
    for (const auto& s : samples) {
        labels.push_back(s.label);
    }
    const auto split = training::stratified_split(labels, 0.8, 3);
    TrainConfig cfg;
    cfg.model = Architecture::dgcnn;
    cfg.epochs = 4;
    cfg.hidden_dim = 8;
    cfg.seed = 3;
    const auto a = training::train(samples, split.train, cfg);
    const auto b = training::train(samples, split.train, cfg);
    check_same_params(a.params, b.params);
    CHECK(a.params.sortpool_k == models::default_sortpool_k(samples, split.train));
    REQUIRE(a.history.epochs.size() == 4);
    for (const auto& e : a.history.epochs) {
        CHECK(std::isfinite(e.train_loss));
    }
    auto params = a.params;
    const auto rec = training::evaluate(params, samples, split.test);
    CHECK(rec.accuracy >= 0.0);
    CHECK(rec.accuracy <= 1.0);

    cfg.lr = 0.0;
    cfg.sortpool_k = 6;
    check_same_params(training::train(samples, split.train, cfg).params,
                      training::initial_params(cfg, d.table.feature_dim(), 6));
}

}  // TEST_SUITE
