#include "spreader_gnn/optim.hpp"

#include <cmath>
#include <string>

#include "spreader_gnn/error.hpp"

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace spreader_gnn::nn {

namespace {

// Sets flush-to-zero and denormals-are-zero for the current thread and
// restores the previous mode on exit.
class FlushDenormals {
public:
#if defined(__SSE2__)
    FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
    ~FlushDenormals() { _mm_setcsr(saved_); }

private:
    unsigned int saved_;
#endif
};

}  // namespace

Adam::Adam(std::span<Tensor* const> params) : params_(params.begin(), params.end()) {
    states_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        states_[i].m.assign(params_[i]->size(), 0.0);
        states_[i].v.assign(params_[i]->size(), 0.0);
    }
}

void Adam::step(double lr) {
    const FlushDenormals guard;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Tensor& p = *params_[i];
        if (p.requires_grad() && !p.has_grad()) {
            throw UsageError("adam: parameter " + std::to_string(i) + " " + p.shape_string() +
                             " has no gradient; run backward first");
        }
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Tensor& p = *params_[i];
        if (!p.requires_grad()) {
            continue;
        }
        AdamState& s = states_[i];
        ++s.t;
        const double correction1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
        const double correction2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
        const double inv_c1 = 1.0 / correction1;
        const double inv_c2 = 1.0 / correction2;
        const double b1 = s.beta1;
        const double b2 = s.beta2;
        const double eps = s.eps;
        double* __restrict w = p.data().data();
        double* __restrict grad = p.grad().data();
        double* __restrict m = s.m.data();
        double* __restrict v = s.v.data();
        const std::size_t n = p.size();
        for (std::size_t j = 0; j < n; ++j) {
            const double g = grad[j];
            grad[j] = 0.0;
            m[j] = b1 * m[j] + (1.0 - b1) * g;
            v[j] = b2 * v[j] + (1.0 - b2) * g * g;
            w[j] -= lr * (m[j] * inv_c1) / (std::sqrt(v[j] * inv_c2) + eps);
        }
    }
}

}  // namespace spreader_gnn::nn
