#include "spreader_gnn/tape.hpp"

#include <string>

#include "spreader_gnn/error.hpp"

namespace spreader_gnn::nn {

const Tensor& Var::value() const {
    return tape_->value(id_);
}

std::span<const double> Var::grad() const {
    return tape_->grad_if_present(id_);
}

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
    Node node;
    node.owned = std::move(value);
    return push(std::move(node));
}

Var Tape::input(Tensor value) {
    Node node;
    node.owned = std::move(value);
    node.requires_grad = true;
    return push(std::move(node));
}

Var Tape::parameter(Tensor& param) {
    Node node;
    node.external = &param;
    node.requires_grad = param.requires_grad();
    if (node.requires_grad) {
        param.ensure_grad();
    }
    return push(std::move(node));
}

Var Tape::record(std::string_view op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
    if (!value.all_finite()) {
        throw NumericError(std::string(op) + ": non-finite value in output " + value.shape_string());
    }
    Node node;
    node.owned = std::move(value);
    for (const Var& in : inputs) {
        if (in.tape_ != this) {
            throw UsageError(std::string(op) + ": operand recorded on a different tape");
        }
        node.requires_grad = node.requires_grad || nodes_[in.id_].requires_grad;
    }
    if (node.requires_grad) {
        node.backward = std::move(backward);
    }
    return push(std::move(node));
}

const Tensor& Tape::value(std::size_t id) const {
    const Node& node = nodes_[id];
    return node.external != nullptr ? *node.external : node.owned;
}

std::span<double> Tape::grad(std::size_t id) {
    Node& node = nodes_[id];
    if (node.external != nullptr) {
        return node.external->grad();
    }
    if (node.grad.size() != node.owned.size()) {
        node.grad.assign(node.owned.size(), 0.0);
    }
    return node.grad;
}

std::span<const double> Tape::grad_if_present(std::size_t id) const {
    const Node& node = nodes_[id];
    if (node.external != nullptr) {
        return node.external->grad();
    }
    return node.grad;
}

void Tape::backward(Var root) {
    if (root.tape_ != this) {
        throw UsageError("backward: root recorded on a different tape");
    }
    const Tensor& out = value(root.id_);
    if (out.rows() != 1 || out.cols() != 1) {
        throw ShapeError("backward: root must be 1x1, got " + out.shape_string());
    }
    if (!nodes_[root.id_].requires_grad) {
        return;
    }
    grad(root.id_)[0] += 1.0;
    for (std::size_t id = root.id_ + 1; id-- > 0;) {
        Node& node = nodes_[id];
        if (!node.backward) {
            continue;
        }
        if (grad_if_present(id).empty()) {
            continue;
        }
        node.backward(*this, id);
    }
}

}  // namespace spreader_gnn::nn
