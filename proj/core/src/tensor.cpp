#include "spreader_gnn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "spreader_gnn/error.hpp"

namespace spreader_gnn {

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows * cols) {
        throw ShapeError("tensor data has " + std::to_string(data_.size()) + " values, expected " +
                         std::to_string(rows * cols));
    }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t n = rows.size();
    const std::size_t m = n == 0 ? 0 : rows.begin()->size();
    std::vector<double> values;
    values.reserve(n * m);
    for (const auto& r : rows) {
        if (r.size() != m) {
            throw ShapeError("ragged tensor literal");
        }
        values.insert(values.end(), r.begin(), r.end());
    }
    return Tensor(n, m, std::move(values));
}

Tensor Tensor::column(std::span<const double> values) {
    return Tensor(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        t(i, i) = 1.0;
    }
    return t;
}

void Tensor::ensure_grad() {
    if (!grad_present_ || grad_.size() != data_.size()) {
        grad_.assign(data_.size(), 0.0);
        grad_present_ = true;
    }
}

void Tensor::zero_grad() noexcept {
    std::fill(grad_.begin(), grad_.end(), 0.0);
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
    return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

}  // namespace spreader_gnn
