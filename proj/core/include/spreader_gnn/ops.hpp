#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "spreader_gnn/rng.hpp"
#include "spreader_gnn/tape.hpp"

namespace spreader_gnn::nn {

// Differentiable operations over 2-D tensors. Each records its forward value
// on the operands' tape together with a backward rule that accumulates into
// the operands' gradients. Shape errors raise ShapeError.

Var matmul(Var a, Var b);
Var relu(Var x);
Var tanh(Var x);
Var sigmoid(Var x);
// x (n x c) plus a row vector b (1 x c) added to every row.
Var add_bias(Var x, Var b);
Var concat_cols(Var a, Var b);
Var add(Var a, Var b);
Var scale(Var x, double factor);
// Sum of all entries, 1x1.
Var sum(Var x);
// Reinterprets the row-major data under a new shape of equal size.
Var reshape(Var x, std::size_t rows, std::size_t cols);
// Row i of the result is row indices[i] of x; rows past indices.size() (up
// to out_rows) are zero. out_rows defaults to indices.size().
Var gather_rows(Var x, std::span<const std::size_t> indices, std::size_t out_rows);
Var gather_rows(Var x, std::span<const std::size_t> indices);

// Inverted dropout: in training mode each entry is zeroed with probability p
// and survivors are scaled by 1/(1-p). Eval mode (or p == 0) returns x
// itself. p must lie in [0, 1).
Var dropout(Var x, double p, bool training, Rng& rng);

// Mean over rows of softplus(z) - y*z for logits z (n x 1), in the stable
// form max(z,0) - y*z + log1p(exp(-|z|)). Labels must be 0 or 1.
Var bce_with_logits(Var logits, std::span<const std::uint8_t> labels);

// Valid cross-correlation over a (channels x length) sequence.
// kernels: out_ch x (in_ch * width), laid out [o][c][w].
// bias: out_ch x 1. Output: out_ch x ((length - width) / stride + 1).
Var conv1d(Var x, Var kernels, Var bias, std::size_t width, std::size_t stride);

// Windowed max per channel; gradient goes to the first maximal element.
Var maxpool1d(Var x, std::size_t window, std::size_t stride);

// Output length of a valid 1-D window; throws ShapeError if width > length
// or stride == 0.
std::size_t window_output_length(std::size_t length, std::size_t width, std::size_t stride);

}  // namespace spreader_gnn::nn
