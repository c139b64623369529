#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "spreader_gnn/error.hpp"
#include "spreader_gnn/graph.hpp"
#include "spreader_gnn/graph_ops.hpp"

using namespace spreader_gnn;
using graph::Edge;
using graph::NodeId;
using graph::SparseGraph;

namespace {

SparseGraph triangle() {
    const std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}};
    return graph::build_graph(e, 3);
}

SparseGraph path(std::size_t n) {
    std::vector<Edge> e;
    for (NodeId v = 0; v + 1 < n; ++v) {
        e.push_back({v, v + 1});
    }
    return graph::build_graph(e, n);
}

Tensor forward_value(const SparseGraph& g, const Tensor& x, bool mean) {
    nn::Tape tape;
    auto v = tape.constant(x);
    return (mean ? graph::mean_neighbor_aggregate(g, v) : graph::spmm(g, v)).value();
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("build_graph symmetrizes and dedups") {
    const std::vector<Edge> e{{0, 1}, {1, 0}, {1, 2}};
    const auto g = graph::build_graph(e, 3);
    CHECK(g.n_entries() == 4);
    CHECK(g.n_undirected_edges() == 2);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 0));
    CHECK(g.has_edge(1, 2));
    CHECK(g.has_edge(2, 1));
    CHECK_FALSE(g.has_edge(0, 2));
    for (const double v : g.edge_values()) {
        CHECK(v == 1.0);
    }
}

TEST_CASE("build_graph empty and self-loops") {
    const auto g = graph::build_graph({}, 2);
    CHECK(g.n_nodes() == 2);
    CHECK(g.n_entries() == 0);

    const std::vector<Edge> loops{{0, 0}, {0, 1}, {1, 1}};
    const auto h = graph::build_graph(loops, 2);
    CHECK(h.n_entries() == 2);
    CHECK_FALSE(h.has_self_loops());
}

TEST_CASE("build_graph names the offending edge") {
    const std::vector<Edge> e{{0, 1}, {1, 5}};
    try {
        graph::build_graph(e, 3);
        FAIL("expected DataError");
    } catch (const DataError& err) {
        CHECK(std::string(err.what()).find("edge 1") != std::string::npos);
    }
}

TEST_CASE("build_graph matches the dense oracle") {
    Rng rng(5);
    const auto edges = oracle::random_edges(50, 0.08, rng);
    // Duplicate and reverse a few on purpose.
    auto noisy = edges;
    for (std::size_t i = 0; i < edges.size(); i += 3) {
        noisy.push_back({edges[i].dst, edges[i].src});
    }
    const auto g = graph::build_graph(noisy, 50);
    CHECK(oracle::max_abs_diff(oracle::adjacency(edges, 50), g.to_dense()) == 0.0);
}

TEST_CASE("from_csr rejects broken invariants") {
    CHECK_THROWS_AS(SparseGraph::from_csr(2, {0, 1, 1}, {1}, {1.0}), DataError);  // asymmetric
    CHECK_THROWS_AS(SparseGraph::from_csr(2, {0, 1, 2}, {1, 5}, {1.0, 1.0}), DataError);
    CHECK_THROWS_AS(SparseGraph::from_csr(2, {0, 2, 2}, {1, 1}, {1.0, 1.0}), DataError);
    CHECK_THROWS_AS(SparseGraph::from_csr(2, {0, 1, 2}, {1, 0}, {1.0, 2.0}), DataError);
    CHECK_THROWS_AS(SparseGraph::from_csr(2, {1, 1, 2}, {1, 0}, {1.0, 1.0}), DataError);
    CHECK_NOTHROW(SparseGraph::from_csr(2, {0, 1, 2}, {1, 0}, {1.0, 1.0}));
}

TEST_CASE("sym_norm_adj on K3 and an isolated node") {
    const auto n = graph::sym_norm_adj(triangle());
    const Tensor d = n.to_dense();
    for (const double v : d.data()) {
        CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    const auto one = graph::sym_norm_adj(graph::build_graph({}, 1));
    CHECK(one.to_dense()(0, 0) == 1.0);
}

TEST_CASE("sym_norm_adj matches the dense oracle") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed);
        const auto edges = oracle::random_edges(30, 0.15, rng);
        const auto g = graph::build_graph(edges, 30);
        const auto expect = oracle::sym_norm(oracle::adjacency(edges, 30));
        CHECK(oracle::max_abs_diff(expect, graph::sym_norm_adj(g).to_dense()) <= 1e-12);
    }
}

TEST_CASE("sym_norm_adj is symmetric with spectral radius at most one") {
    Rng rng(11);
    const auto g = graph::build_graph(oracle::random_edges(25, 0.2, rng), 25);
    const Tensor a = graph::sym_norm_adj(g).to_dense();
    for (std::size_t i = 0; i < 25; ++i) {
        for (std::size_t j = 0; j < 25; ++j) {
            CHECK(a(i, j) == a(j, i));
        }
    }
    // Power iteration.
    std::vector<double> v(25, 1.0);
    double lambda = 0.0;
    for (int it = 0; it < 500; ++it) {
        std::vector<double> w(25, 0.0);
        for (std::size_t i = 0; i < 25; ++i) {
            for (std::size_t j = 0; j < 25; ++j) {
                w[i] += a(i, j) * v[j];
            }
        }
        const double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
        lambda = norm / std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
        for (std::size_t i = 0; i < 25; ++i) {
            v[i] = w[i] / norm;
        }
    }
    CHECK(lambda <= 1.0 + 1e-9);
}

TEST_CASE("spmm special cases") {
    const auto id = SparseGraph::from_csr(3, {0, 1, 2, 3}, {0, 1, 2}, {1.0, 1.0, 1.0});
    const Tensor x = Tensor::from_rows({{1, 2}, {3, 4}, {5, 6}});
    CHECK(forward_value(id, x, false) == x);

    const Tensor ones(3, 1, 1.0);
    const Tensor out = forward_value(graph::sym_norm_adj(triangle()), ones, false);
    for (const double v : out.data()) {
        CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    }
    nn::Tape tape;
    CHECK_THROWS_AS(graph::spmm(id, tape.constant(Tensor(2, 2))), ShapeError);
}

TEST_CASE("spmm matches the dense oracle") {
    Rng rng(3);
    const auto edges = oracle::random_edges(20, 0.2, rng);
    const auto g = graph::sym_norm_adj(graph::build_graph(edges, 20));
    const Tensor x = oracle::random_tensor(20, 5, rng);
    const auto expect = oracle::matmul(oracle::from_tensor(g.to_dense()), oracle::from_tensor(x));
    CHECK(oracle::max_abs_diff(expect, forward_value(g, x, false)) <= 1e-12);
}

TEST_CASE("spmm with identity reconstructs the adjacency") {
    Rng rng(4);
    const auto g = graph::build_graph(oracle::random_edges(12, 0.3, rng), 12);
    CHECK(forward_value(g, Tensor::identity(12), false) == g.to_dense());
}

TEST_CASE("mean_neighbor_aggregate cases") {
    const std::vector<Edge> star{{0, 1}, {0, 2}, {0, 3}};
    const auto g = graph::build_graph(star, 5);
    const Tensor x = Tensor::from_rows({{9}, {1}, {2}, {3}, {7}});
    const Tensor out = forward_value(g, x, true);
    CHECK(out(0, 0) == 2.0);
    CHECK(out(1, 0) == 9.0);
    CHECK(out(4, 0) == 0.0);

    Rng rng(8);
    const auto edges = oracle::random_edges(25, 0.1, rng);
    const auto h = graph::build_graph(edges, 25);
    const Tensor y = oracle::random_tensor(25, 4, rng);
    const auto expect = oracle::mean_aggregate(oracle::adjacency(edges, 25), oracle::from_tensor(y));
    CHECK(oracle::max_abs_diff(expect, forward_value(h, y, true)) <= 1e-12);
}

TEST_CASE("extract_ego on a path") {
    const auto g = path(5);
    const auto e = graph::extract_ego(g, 0, 3);
    CHECK(e.nodes == std::vector<NodeId>{0, 1, 2, 3});
    CHECK(e.hops == std::vector<std::uint32_t>{0, 1, 2, 3});
    CHECK(e.graph.n_undirected_edges() == 3);

    const auto z = graph::extract_ego(g, 2, 0);
    CHECK(z.nodes == std::vector<NodeId>{2});
    CHECK(z.graph.n_entries() == 0);

    CHECK_THROWS_AS(graph::extract_ego(g, 9, 1), DataError);
}

TEST_CASE("extract_ego matches the APSP oracle") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 20 + rng.below(60);
        const auto edges = oracle::random_edges(n, 2.5 / static_cast<double>(n), rng);
        const auto g = graph::build_graph(edges, n);
        const auto a = oracle::adjacency(edges, n);
        const auto root = static_cast<NodeId>(rng.below(n));
        const auto got = graph::extract_ego(g, root, 3);
        const auto want = oracle::ego(a, root, 3);
        REQUIRE(got.nodes == want.nodes);
        CHECK(oracle::max_abs_diff(want.adjacency, got.graph.to_dense()) == 0.0);
        for (std::size_t i = 0; i < want.hops.size(); ++i) {
            CHECK(got.hops[i] == want.hops[i]);
        }
    }
}

TEST_CASE("extract_ego is monotone in k and covers the component") {
    Rng rng(2);
    const std::size_t n = 40;
    const auto edges = oracle::random_edges(n, 0.05, rng);
    const auto g = graph::build_graph(edges, n);
    const auto dist = oracle::apsp(oracle::adjacency(edges, n));
    std::vector<NodeId> prev;
    for (std::size_t k = 0; k <= 6; ++k) {
        auto cur = graph::extract_ego(g, 0, k).nodes;
        std::sort(cur.begin(), cur.end());
        CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
        prev = cur;
    }
    auto all = graph::extract_ego(g, 0, n).nodes;
    std::sort(all.begin(), all.end());
    std::vector<NodeId> component;
    for (NodeId v = 0; v < n; ++v) {
        if (dist[0][v] != SIZE_MAX) {
            component.push_back(v);
        }
    }
    CHECK(all == component);
}

TEST_CASE("relabeled parent graph gives an isomorphic ego") {
    Rng rng(13);
    const std::size_t n = 18;
    const auto edges = oracle::random_edges(n, 0.15, rng);
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<NodeId>(perm));
    std::vector<Edge> moved;
    for (const auto& e : edges) {
        moved.push_back({perm[e.src], perm[e.dst]});
    }
    const auto a = graph::extract_ego(graph::build_graph(edges, n), 0, 2);
    const auto b = graph::extract_ego(graph::build_graph(moved, n), perm[0], 2);
    REQUIRE(a.nodes.size() == b.nodes.size());
    // Map each local node of a to the local node of b holding the same
    // parent vertex; the induced adjacency must agree under that map.
    std::vector<std::size_t> where(n);
    for (std::size_t i = 0; i < b.nodes.size(); ++i) {
        where[b.nodes[i]] = i;
    }
    const Tensor da = a.graph.to_dense();
    const Tensor db = b.graph.to_dense();
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.hops[i] == b.hops[where[perm[a.nodes[i]]]]);
        for (std::size_t j = 0; j < a.nodes.size(); ++j) {
            CHECK(da(i, j) == db(where[perm[a.nodes[i]]], where[perm[a.nodes[j]]]));
        }
    }
}

TEST_CASE("sample_neighbors respects the cap") {
    Rng rng(1);
    const auto g = graph::build_graph(oracle::random_edges(30, 0.4, rng), 30);
    Rng s(7);
    const auto sample = graph::sample_neighbors(g, 3, s);
    const auto view = sample.view();
    for (NodeId v = 0; v < 30; ++v) {
        const auto nb = view.neighbors(v);
        CHECK(nb.size() == std::min<std::size_t>(3, g.degree(v)));
        for (const auto u : nb) {
            CHECK(g.has_edge(v, u));
        }
    }
    Rng s2(7);
    const auto full = graph::sample_neighbors(g, 0, s2);
    CHECK(full.col_indices.size() == g.n_entries());
}

}  // TEST_SUITE
