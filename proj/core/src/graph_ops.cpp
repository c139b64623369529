#include "spreader_gnn/graph_ops.hpp"

#include <memory>
#include <string>
#include <vector>

#include "spreader_gnn/error.hpp"

namespace spreader_gnn::graph {

namespace {

void check_rows(const char* op, std::size_t n_nodes, const Tensor& x) {
    if (x.rows() != n_nodes) {
        throw ShapeError(std::string(op) + ": graph has " + std::to_string(n_nodes) + " nodes but features are " +
                         x.shape_string());
    }
}

// Owned CSR copy captured by backward rules.
struct Adjacency {
    std::vector<std::size_t> offsets;
    std::vector<NodeId> cols;
    std::vector<double> weights;
};

}  // namespace

nn::Var spmm(const SparseGraph& g, nn::Var x) {
    const Tensor& xv = x.value();
    check_rows("spmm", g.n_nodes(), xv);
    const std::size_t d = xv.cols();
    Tensor out(g.n_nodes(), d);
    for (NodeId u = 0; u < g.n_nodes(); ++u) {
        const auto cols = g.neighbors(u);
        const auto vals = g.values(u);
        double* orow = out.row(u).data();
        for (std::size_t e = 0; e < cols.size(); ++e) {
            const double w = vals[e];
            const double* xrow = xv.row(cols[e]).data();
            for (std::size_t c = 0; c < d; ++c) {
                orow[c] += w * xrow[c];
            }
        }
    }
    auto adj = std::make_shared<const Adjacency>(
        Adjacency{{g.row_offsets().begin(), g.row_offsets().end()},
                  {g.col_indices().begin(), g.col_indices().end()},
                  {g.edge_values().begin(), g.edge_values().end()}});
    const std::size_t xid = x.id();
    return x.tape().record("spmm", std::move(out), {x}, [xid, d, adj](nn::Tape& t, std::size_t self) {
        if (!t.requires_grad(xid)) {
            return;
        }
        const auto g_out = t.grad_if_present(self);
        auto gx = t.grad(xid);
        const std::size_t n = adj->offsets.size() - 1;
        for (std::size_t u = 0; u < n; ++u) {
            const double* grow = g_out.data() + u * d;
            for (std::size_t e = adj->offsets[u]; e < adj->offsets[u + 1]; ++e) {
                const double w = adj->weights[e];
                double* gxrow = gx.data() + static_cast<std::size_t>(adj->cols[e]) * d;
                for (std::size_t c = 0; c < d; ++c) {
                    gxrow[c] += w * grow[c];
                }
            }
        }
    });
}

nn::Var mean_neighbor_aggregate(CsrView adj, nn::Var x) {
    const Tensor& xv = x.value();
    const std::size_t n = adj.n_nodes();
    check_rows("mean_neighbor_aggregate", n, xv);
    const std::size_t d = xv.cols();
    Tensor out(n, d);
    for (NodeId u = 0; u < n; ++u) {
        const auto nbrs = adj.neighbors(u);
        if (nbrs.empty()) {
            continue;
        }
        double* orow = out.row(u).data();
        for (const NodeId v : nbrs) {
            const double* xrow = xv.row(v).data();
            for (std::size_t c = 0; c < d; ++c) {
                orow[c] += xrow[c];
            }
        }
        const double inv = 1.0 / static_cast<double>(nbrs.size());
        for (std::size_t c = 0; c < d; ++c) {
            orow[c] *= inv;
        }
    }
    auto owned = std::make_shared<const Adjacency>(Adjacency{
        {adj.row_offsets.begin(), adj.row_offsets.end()}, {adj.col_indices.begin(), adj.col_indices.end()}, {}});
    const std::size_t xid = x.id();
    return x.tape().record("mean_neighbor_aggregate", std::move(out), {x},
                           [xid, d, owned](nn::Tape& t, std::size_t self) {
                               if (!t.requires_grad(xid)) {
                                   return;
                               }
                               const auto g_out = t.grad_if_present(self);
                               auto gx = t.grad(xid);
                               const std::size_t n_rows = owned->offsets.size() - 1;
                               for (std::size_t u = 0; u < n_rows; ++u) {
                                   const std::size_t begin = owned->offsets[u];
                                   const std::size_t end = owned->offsets[u + 1];
                                   if (begin == end) {
                                       continue;
                                   }
                                   const double inv = 1.0 / static_cast<double>(end - begin);
                                   const double* grow = g_out.data() + u * d;
                                   for (std::size_t e = begin; e < end; ++e) {
                                       double* gxrow = gx.data() + static_cast<std::size_t>(owned->cols[e]) * d;
                                       for (std::size_t c = 0; c < d; ++c) {
                                           gxrow[c] += inv * grow[c];
                                       }
                                   }
                               }
                           });
}

nn::Var mean_neighbor_aggregate(const SparseGraph& g, nn::Var x) {
    return mean_neighbor_aggregate(g.view(), x);
}

}  // namespace spreader_gnn::graph
