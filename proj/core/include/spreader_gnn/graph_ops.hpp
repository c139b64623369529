#pragma once

#include "spreader_gnn/graph.hpp"
#include "spreader_gnn/tape.hpp"

namespace spreader_gnn::graph {

// Sparse (n x n) times dense (n x d). The backward rule multiplies by the
// transpose. The graph is copied into the recorded rule, so it need not
// outlive the tape.
nn::Var spmm(const SparseGraph& g, nn::Var x);

// Row v is the mean of x over the neighbours of v in adj; rows of nodes
// without neighbours are zero.
nn::Var mean_neighbor_aggregate(CsrView adj, nn::Var x);
nn::Var mean_neighbor_aggregate(const SparseGraph& g, nn::Var x);

}  // namespace spreader_gnn::graph
