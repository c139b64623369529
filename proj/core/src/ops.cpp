#include "spreader_gnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "spreader_gnn/error.hpp"

namespace spreader_gnn::nn {

namespace {

[[noreturn]] void shape_fail(std::string_view op, const Tensor& a, const Tensor& b) {
    throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " + b.shape_string());
}

double dot(const double* __restrict a, const double* __restrict b, std::size_t n) {
    double s0 = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    double s3 = 0.0;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    for (; j < n; ++j) {
        s0 += a[j] * b[j];
    }
    return (s0 + s1) + (s2 + s3);
}

// y += alpha * x
void axpy(double alpha, const double* __restrict x, double* __restrict y, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        y[j] += alpha * x[j];
    }
}

// c (n x m) += a (n x k) * b (k x m)
void gemm_nn(const double* a, const double* b, double* c, std::size_t n, std::size_t k, std::size_t m) {
    for (std::size_t i = 0; i < n; ++i) {
        double* crow = c + i * m;
        const double* arow = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) {
                continue;
            }
            axpy(av, b + p * m, crow, m);
        }
    }
}

// c (n x k) += a (n x m) * b^T, b is (k x m)
void gemm_nt(const double* a, const double* b, double* c, std::size_t n, std::size_t m, std::size_t k) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = a + i * m;
        double* crow = c + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            crow[p] += dot(arow, b + p * m, m);
        }
    }
}

// c (k x m) += a^T * b, a is (n x k), b is (n x m)
void gemm_tn(const double* a, const double* b, double* c, std::size_t n, std::size_t k, std::size_t m) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = a + i * k;
        const double* brow = b + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) {
                continue;
            }
            axpy(av, brow, c + p * m, m);
        }
    }
}

template <typename F, typename DF>
Var elementwise(std::string_view op, Var x, F f, DF df) {
    const Tensor& xv = x.value();
    Tensor out(xv.rows(), xv.cols());
    std::transform(xv.data().begin(), xv.data().end(), out.data().begin(), f);
    const std::size_t xid = x.id();
    // df receives (input, output) so rules can reuse the forward value.
    return x.tape().record(op, std::move(out), {x}, [xid, df](Tape& t, std::size_t self) {
        if (!t.requires_grad(xid)) {
            return;
        }
        const auto in = t.value(xid).data();
        const auto outv = t.value(self).data();
        const auto g = t.grad_if_present(self);
        auto gx = t.grad(xid);
        for (std::size_t i = 0; i < g.size(); ++i) {
            gx[i] += g[i] * df(in[i], outv[i]);
        }
    });
}

}  // namespace

std::size_t window_output_length(std::size_t length, std::size_t width, std::size_t stride) {
    if (stride == 0) {
        throw ShapeError("window stride must be >= 1");
    }
    if (width == 0 || width > length) {
        throw ShapeError("window of width " + std::to_string(width) + " does not fit sequence of length " +
                         std::to_string(length));
    }
    return (length - width) / stride + 1;
}

Var matmul(Var a, Var b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.cols() != bv.rows()) {
        shape_fail("matmul", av, bv);
    }
    const std::size_t n = av.rows();
    const std::size_t k = av.cols();
    const std::size_t m = bv.cols();
    Tensor out(n, m);
    gemm_nn(av.data().data(), bv.data().data(), out.data().data(), n, k, m);
    const std::size_t aid = a.id();
    const std::size_t bid = b.id();
    return a.tape().record("matmul", std::move(out), {a, b}, [aid, bid, n, k, m](Tape& t, std::size_t self) {
        const double* g = t.grad_if_present(self).data();
        if (t.requires_grad(aid)) {
            gemm_nt(g, t.value(bid).data().data(), t.grad(aid).data(), n, m, k);
        }
        if (t.requires_grad(bid)) {
            gemm_tn(t.value(aid).data().data(), g, t.grad(bid).data(), n, k, m);
        }
    });
}

Var relu(Var x) {
    return elementwise(
        "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
        [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var x) {
    return elementwise(
        "tanh", x, [](double v) { return std::tanh(v); }, [](double, double out) { return 1.0 - out * out; });
}

Var sigmoid(Var x) {
    return elementwise(
        "sigmoid", x,
        [](double v) {
            if (v >= 0.0) {
                return 1.0 / (1.0 + std::exp(-v));
            }
            const double e = std::exp(v);
            return e / (1.0 + e);
        },
        [](double, double out) { return out * (1.0 - out); });
}

Var add_bias(Var x, Var b) {
    const Tensor& xv = x.value();
    const Tensor& bv = b.value();
    if (bv.rows() != 1 || bv.cols() != xv.cols()) {
        shape_fail("add_bias", xv, bv);
    }
    Tensor out = xv;
    out.drop_grad();
    out.set_requires_grad(false);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] += bv(0, c);
        }
    }
    const std::size_t xid = x.id();
    const std::size_t bid = b.id();
    const std::size_t rows = xv.rows();
    const std::size_t cols = xv.cols();
    return x.tape().record("add_bias", std::move(out), {x, b}, [xid, bid, rows, cols](Tape& t, std::size_t self) {
        const auto g = t.grad_if_present(self);
        if (t.requires_grad(xid)) {
            auto gx = t.grad(xid);
            for (std::size_t i = 0; i < g.size(); ++i) {
                gx[i] += g[i];
            }
        }
        if (t.requires_grad(bid)) {
            auto gb = t.grad(bid);
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < cols; ++c) {
                    gb[c] += g[r * cols + c];
                }
            }
        }
    });
}

Var concat_cols(Var a, Var b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.rows() != bv.rows()) {
        shape_fail("concat_cols", av, bv);
    }
    const std::size_t rows = av.rows();
    const std::size_t ca = av.cols();
    const std::size_t cb = bv.cols();
    Tensor out(rows, ca + cb);
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(av.row(r).begin(), ca, out.row(r).begin());
        std::copy_n(bv.row(r).begin(), cb, out.row(r).begin() + static_cast<std::ptrdiff_t>(ca));
    }
    const std::size_t aid = a.id();
    const std::size_t bid = b.id();
    return a.tape().record("concat_cols", std::move(out), {a, b}, [aid, bid, rows, ca, cb](Tape& t, std::size_t self) {
        const auto g = t.grad_if_present(self);
        const std::size_t width = ca + cb;
        if (t.requires_grad(aid)) {
            auto ga = t.grad(aid);
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < ca; ++c) {
                    ga[r * ca + c] += g[r * width + c];
                }
            }
        }
        if (t.requires_grad(bid)) {
            auto gb = t.grad(bid);
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < cb; ++c) {
                    gb[r * cb + c] += g[r * width + ca + c];
                }
            }
        }
    });
}

Var add(Var a, Var b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
        shape_fail("add", av, bv);
    }
    Tensor out(av.rows(), av.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = av.data()[i] + bv.data()[i];
    }
    const std::size_t aid = a.id();
    const std::size_t bid = b.id();
    return a.tape().record("add", std::move(out), {a, b}, [aid, bid](Tape& t, std::size_t self) {
        const auto g = t.grad_if_present(self);
        for (const std::size_t id : {aid, bid}) {
            if (t.requires_grad(id)) {
                auto gi = t.grad(id);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    gi[i] += g[i];
                }
            }
        }
    });
}

Var scale(Var x, double factor) {
    return elementwise(
        "scale", x, [factor](double v) { return factor * v; }, [factor](double, double) { return factor; });
}

Var sum(Var x) {
    const Tensor& xv = x.value();
    double total = 0.0;
    for (const double v : xv.data()) {
        total += v;
    }
    const std::size_t xid = x.id();
    return x.tape().record("sum", Tensor(1, 1, total), {x}, [xid](Tape& t, std::size_t self) {
        if (!t.requires_grad(xid)) {
            return;
        }
        const double g = t.grad_if_present(self)[0];
        for (double& gx : t.grad(xid)) {
            gx += g;
        }
    });
}

Var reshape(Var x, std::size_t rows, std::size_t cols) {
    const Tensor& xv = x.value();
    if (rows * cols != xv.size()) {
        throw ShapeError("reshape: cannot view " + xv.shape_string() + " as (" + std::to_string(rows) + "x" +
                         std::to_string(cols) + ")");
    }
    Tensor out(rows, cols, std::vector<double>(xv.data().begin(), xv.data().end()));
    const std::size_t xid = x.id();
    return x.tape().record("reshape", std::move(out), {x}, [xid](Tape& t, std::size_t self) {
        if (!t.requires_grad(xid)) {
            return;
        }
        const auto g = t.grad_if_present(self);
        auto gx = t.grad(xid);
        for (std::size_t i = 0; i < g.size(); ++i) {
            gx[i] += g[i];
        }
    });
}

Var gather_rows(Var x, std::span<const std::size_t> indices, std::size_t out_rows) {
    const Tensor& xv = x.value();
    if (out_rows < indices.size()) {
        throw ShapeError("gather_rows: " + std::to_string(indices.size()) + " indices exceed " +
                         std::to_string(out_rows) + " output rows");
    }
    const std::size_t cols = xv.cols();
    Tensor out(out_rows, cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= xv.rows()) {
            throw ShapeError("gather_rows: row index " + std::to_string(indices[i]) + " out of range for " +
                             xv.shape_string());
        }
        std::copy_n(xv.row(indices[i]).begin(), cols, out.row(i).begin());
    }
    const std::size_t xid = x.id();
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    return x.tape().record("gather_rows", std::move(out), {x},
                           [xid, cols, idx = std::move(idx)](Tape& t, std::size_t self) {
                               if (!t.requires_grad(xid)) {
                                   return;
                               }
                               const auto g = t.grad_if_present(self);
                               auto gx = t.grad(xid);
                               for (std::size_t i = 0; i < idx.size(); ++i) {
                                   for (std::size_t c = 0; c < cols; ++c) {
                                       gx[idx[i] * cols + c] += g[i * cols + c];
                                   }
                               }
                           });
}

Var gather_rows(Var x, std::span<const std::size_t> indices) {
    return gather_rows(x, indices, indices.size());
}

Var dropout(Var x, double p, bool training, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0)) {
        throw ConfigError("dropout probability must lie in [0, 1), got " + std::to_string(p));
    }
    if (!training || p == 0.0) {
        return x;
    }
    const Tensor& xv = x.value();
    const double keep_scale = 1.0 / (1.0 - p);
    std::vector<double> mask(xv.size());
    for (double& m : mask) {
        m = rng.uniform() < p ? 0.0 : keep_scale;
    }
    Tensor out(xv.rows(), xv.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = xv.data()[i] * mask[i];
    }
    const std::size_t xid = x.id();
    return x.tape().record("dropout", std::move(out), {x}, [xid, mask = std::move(mask)](Tape& t, std::size_t self) {
        if (!t.requires_grad(xid)) {
            return;
        }
        const auto g = t.grad_if_present(self);
        auto gx = t.grad(xid);
        for (std::size_t i = 0; i < g.size(); ++i) {
            gx[i] += g[i] * mask[i];
        }
    });
}

Var bce_with_logits(Var logits, std::span<const std::uint8_t> labels) {
    const Tensor& z = logits.value();
    if (z.cols() != 1 || z.rows() != labels.size()) {
        throw ShapeError("bce_with_logits: logits " + z.shape_string() + " vs " + std::to_string(labels.size()) +
                         " labels");
    }
    if (labels.empty()) {
        throw DataError("bce_with_logits: no labeled examples");
    }
    const auto n = static_cast<double>(labels.size());
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 1) {
            throw DataError("bce_with_logits: label " + std::to_string(labels[i]) + " at position " +
                            std::to_string(i) + " is not 0 or 1");
        }
        const double zi = z(i, 0);
        total += std::max(zi, 0.0) - static_cast<double>(labels[i]) * zi + std::log1p(std::exp(-std::abs(zi)));
    }
    const std::size_t zid = logits.id();
    std::vector<std::uint8_t> y(labels.begin(), labels.end());
    return logits.tape().record("bce_with_logits", Tensor(1, 1, total / n), {logits},
                                [zid, n, y = std::move(y)](Tape& t, std::size_t self) {
                                    if (!t.requires_grad(zid)) {
                                        return;
                                    }
                                    const double g = t.grad_if_present(self)[0];
                                    const auto zv = t.value(zid).data();
                                    auto gz = t.grad(zid);
                                    for (std::size_t i = 0; i < y.size(); ++i) {
                                        const double s = zv[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-zv[i]))
                                                                      : std::exp(zv[i]) / (1.0 + std::exp(zv[i]));
                                        gz[i] += g * (s - static_cast<double>(y[i])) / n;
                                    }
                                });
}

Var conv1d(Var x, Var kernels, Var bias, std::size_t width, std::size_t stride) {
    const Tensor& xv = x.value();
    const Tensor& kv = kernels.value();
    const Tensor& bv = bias.value();
    const std::size_t in_ch = xv.rows();
    const std::size_t length = xv.cols();
    const std::size_t out_ch = kv.rows();
    if (kv.cols() != in_ch * width) {
        throw ShapeError("conv1d: kernels " + kv.shape_string() + " do not match " + std::to_string(in_ch) +
                         " input channels of width " + std::to_string(width));
    }
    if (bv.rows() != out_ch || bv.cols() != 1) {
        shape_fail("conv1d bias", kv, bv);
    }
    const std::size_t out_len = window_output_length(length, width, stride);
    const std::size_t span_w = in_ch * width;
    // im2col: row t holds every channel's window starting at t * stride.
    auto patches = std::make_shared<std::vector<double>>(out_len * span_w);
    for (std::size_t t = 0; t < out_len; ++t) {
        for (std::size_t c = 0; c < in_ch; ++c) {
            const double* xs = xv.row(c).data() + t * stride;
            std::copy(xs, xs + width, patches->data() + t * span_w + c * width);
        }
    }
    std::vector<double> kt(span_w * out_ch);
    for (std::size_t o = 0; o < out_ch; ++o) {
        for (std::size_t j = 0; j < span_w; ++j) {
            kt[j * out_ch + o] = kv(o, j);
        }
    }
    std::vector<double> y(out_len * out_ch, 0.0);
    gemm_nn(patches->data(), kt.data(), y.data(), out_len, span_w, out_ch);
    Tensor out(out_ch, out_len);
    for (std::size_t o = 0; o < out_ch; ++o) {
        for (std::size_t t = 0; t < out_len; ++t) {
            out(o, t) = y[t * out_ch + o] + bv(o, 0);
        }
    }
    const std::size_t xid = x.id();
    const std::size_t kid = kernels.id();
    const std::size_t bid = bias.id();
    return x.tape().record(
        "conv1d", std::move(out), {x, kernels, bias},
        [xid, kid, bid, in_ch, length, out_ch, out_len, width, stride, patches](Tape& t, std::size_t self) {
            const auto g = t.grad_if_present(self);
            const std::size_t span_w = in_ch * width;
            if (t.requires_grad(bid)) {
                auto gb = t.grad(bid);
                for (std::size_t o = 0; o < out_ch; ++o) {
                    for (std::size_t p = 0; p < out_len; ++p) {
                        gb[o] += g[o * out_len + p];
                    }
                }
            }
            const bool want_x = t.requires_grad(xid);
            const bool want_k = t.requires_grad(kid);
            if (!want_x && !want_k) {
                return;
            }
            std::vector<double> gt(out_len * out_ch);
            for (std::size_t o = 0; o < out_ch; ++o) {
                for (std::size_t p = 0; p < out_len; ++p) {
                    gt[p * out_ch + o] = g[o * out_len + p];
                }
            }
            if (want_k) {
                gemm_tn(gt.data(), patches->data(), t.grad(kid).data(), out_len, out_ch, span_w);
            }
            if (want_x) {
                std::vector<double> gp(out_len * span_w, 0.0);
                gemm_nn(gt.data(), t.value(kid).data().data(), gp.data(), out_len, out_ch, span_w);
                auto gx = t.grad(xid);
                for (std::size_t p = 0; p < out_len; ++p) {
                    for (std::size_t c = 0; c < in_ch; ++c) {
                        axpy(1.0, gp.data() + p * span_w + c * width, gx.data() + c * length + p * stride, width);
                    }
                }
            }
        });
}

Var maxpool1d(Var x, std::size_t window, std::size_t stride) {
    const Tensor& xv = x.value();
    const std::size_t channels = xv.rows();
    const std::size_t length = xv.cols();
    const std::size_t out_len = window_output_length(length, window, stride);
    Tensor out(channels, out_len);
    std::vector<std::size_t> argmax(channels * out_len);
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t p = 0; p < out_len; ++p) {
            const std::size_t start = p * stride;
            std::size_t best = start;
            for (std::size_t w = 1; w < window; ++w) {
                if (xv(c, start + w) > xv(c, best)) {
                    best = start + w;
                }
            }
            argmax[c * out_len + p] = c * length + best;
            out(c, p) = xv(c, best);
        }
    }
    const std::size_t xid = x.id();
    return x.tape().record("maxpool1d", std::move(out), {x}, [xid, argmax = std::move(argmax)](Tape& t, std::size_t self) {
        if (!t.requires_grad(xid)) {
            return;
        }
        const auto g = t.grad_if_present(self);
        auto gx = t.grad(xid);
        for (std::size_t i = 0; i < g.size(); ++i) {
            gx[argmax[i]] += g[i];
        }
    });
}

}  // namespace spreader_gnn::nn
