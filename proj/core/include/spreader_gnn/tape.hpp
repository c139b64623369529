#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "spreader_gnn/tensor.hpp"

namespace spreader_gnn::nn {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
// lives.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    // Gradient of the last backward() root w.r.t. this value. Empty when the
    // value does not require a gradient or received none.
    std::span<const double> grad() const;

    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    std::size_t id() const noexcept { return id_; }
    Tape& tape() const noexcept { return *tape_; }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) noexcept : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// Dynamic reverse-mode tape over 2-D tensors.
//
// Nodes are appended in evaluation order, so reverse insertion order is a
// valid topological order for backward(). Parameters are recorded by
// reference: their gradients accumulate straight into Tensor::grad() of the
// caller's tensor, which is how gradient accumulation across samples works.
class Tape {
public:
    // Called during backward() with the id of the node being processed.
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Leaf that never receives a gradient.
    Var constant(Tensor value);
    // Leaf whose gradient is kept on the tape (readable via Var::grad()).
    Var input(Tensor value);
    // Leaf bound to an external tensor. When param.requires_grad() is set its
    // grad slot is allocated and accumulated into; the tensor must outlive
    // the tape and must not be resized while recorded.
    Var parameter(Tensor& param);

    // Records the result of an operation. The node requires a gradient iff
    // any input does; backward is only kept in that case. Non-finite values
    // raise NumericError naming op.
    Var record(std::string_view op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);

    // Seeds d(root)/d(root) = 1 and runs every recorded backward rule in
    // reverse order. root must be 1x1.
    void backward(Var root);

    const Tensor& value(std::size_t id) const;
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    // Gradient buffer of a node, allocated (zeroed) on first access.
    std::span<double> grad(std::size_t id);
    // Read-only view; empty if the node never received a gradient.
    std::span<const double> grad_if_present(std::size_t id) const;

    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Tensor owned;
        Tensor* external = nullptr;
        std::vector<double> grad;
        bool requires_grad = false;
        BackwardFn backward;
    };

    Var push(Node node);

    std::vector<Node> nodes_;
};

}  // namespace spreader_gnn::nn
