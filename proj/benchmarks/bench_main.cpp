#include <algorithm>

#include <benchmark/benchmark.h>

#include "spreader_gnn/data_io.hpp"
#include "spreader_gnn/graph_ops.hpp"
#include "spreader_gnn/ops.hpp"
#include "spreader_gnn/optim.hpp"
#include "spreader_gnn/trainer.hpp"

using namespace spreader_gnn;

namespace {

io::Dataset synthetic(std::size_t n, double p) {
    io::SynthConfig cfg;
    cfg.n_nodes = n;
    cfg.p_intra = p;
    cfg.p_inter = p;
    cfg.hub_boost = 0.0;
    cfg.label_fraction = 1.0;
    cfg.seed = 1;
    return io::generate_synthetic(cfg);
}

Tensor random(std::size_t rows, std::size_t cols, Rng& rng) {
    Tensor t(rows, cols);
    for (auto& v : t.data()) {
        v = rng.uniform() - 0.5;
    }
    return t;
}

void BM_spmm(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto d = synthetic(n, 10.0 / static_cast<double>(n));
    const auto adj = graph::sym_norm_adj(d.graph);
    Rng rng(0);
    const Tensor x = random(n, 32, rng);
    for (auto _ : state) {
        nn::Tape tape;
        benchmark::DoNotOptimize(graph::spmm(adj, tape.constant(x)).value().data().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(adj.n_entries()));
}
BENCHMARK(BM_spmm)->Arg(1000)->Arg(10000);

void BM_matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(0);
    const Tensor a = random(n, n, rng);
    const Tensor b = random(n, n, rng);
    for (auto _ : state) {
        nn::Tape tape;
        benchmark::DoNotOptimize(nn::matmul(tape.constant(a), tape.constant(b)).value().data().data());
    }
}
BENCHMARK(BM_matmul)->Arg(64)->Arg(256);

void BM_extract_ego(benchmark::State& state) {
    const auto d = synthetic(2000, 0.002);
    graph::NodeId root = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(graph::extract_ego(d.graph, root, 3).nodes.size());
        root = (root + 1) % 2000;
    }
}
BENCHMARK(BM_extract_ego);

void BM_node_epoch(benchmark::State& state) {
    const auto d = synthetic(400, 0.02);
    const auto nodes = d.table.labeled_nodes();
    training::TrainConfig cfg;
    cfg.model = state.range(0) == 0 ? models::Architecture::gcn : models::Architecture::sage;
    cfg.epochs = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(training::train(d.graph, d.table, nodes, cfg).history.epochs.size());
    }
}
BENCHMARK(BM_node_epoch)->Arg(0)->Arg(1);

// One forward, backward and Adam step on a single ego.
void BM_dgcnn_step(benchmark::State& state) {
    const auto d = synthetic(400, static_cast<double>(state.range(0)) / 400.0);
    const std::vector<graph::NodeId> root{0};
    const auto samples = models::node_to_graph_dataset(d.graph, d.table, root, 3);
    const std::size_t k = std::max<std::size_t>(2, samples[0].graph.n_nodes());
    Rng init(0);
    auto params = models::init_dgcnn(d.table.feature_dim(), 32, k, init);
    auto trainable = params.trainable();
    nn::Adam adam(trainable);
    Rng rng(1);
    const std::uint8_t y[1] = {samples[0].label};
    for (auto _ : state) {
        nn::Tape tape;
        auto logit = models::dgcnn_forward(tape, samples[0], params, {true, 0.5, 0}, rng);
        tape.backward(nn::bce_with_logits(logit, y));
        adam.step(1e-3);
    }
    state.counters["ego_nodes"] = static_cast<double>(samples[0].graph.n_nodes());
}
BENCHMARK(BM_dgcnn_step)->Arg(2)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
