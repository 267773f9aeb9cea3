#include "gfd/optim.hpp"

#include <stdexcept>

namespace gfd {

namespace {

void require_grads(std::span<Parameter* const> params) {
    for (const Parameter* p : params)
        if (!p->tensor.has_grad())
            throw std::logic_error("sgd: parameter '" + p->name + "' has no gradient");
}

}  // namespace

void sgd_step(std::span<Parameter* const> params, double lr) {
    require_grads(params);
    for (Parameter* p : params) {
        auto values = p->tensor.mutable_values();
        auto grad = p->tensor.grad();
        for (std::size_t i = 0; i < values.size(); ++i) values[i] -= lr * grad[i];
        p->tensor.zero_grad();
    }
}

SgdOptimizer::SgdOptimizer(double lr, double momentum) : lr_(lr), momentum_(momentum) {
    if (!(lr >= 0.0)) throw std::invalid_argument("sgd: learning rate must be non-negative");
    if (!(momentum >= 0.0 && momentum < 1.0))
        throw std::invalid_argument("sgd: momentum must lie in [0, 1)");
}

void SgdOptimizer::step(std::span<Parameter* const> params) {
    if (momentum_ == 0.0) {
        sgd_step(params, lr_);
        return;
    }
    require_grads(params);
    if (velocity_.size() != params.size()) {
        velocity_.assign(params.size(), {});
        for (std::size_t k = 0; k < params.size(); ++k)
            velocity_[k].assign(params[k]->tensor.numel(), 0.0);
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto values = params[k]->tensor.mutable_values();
        auto grad = params[k]->tensor.grad();
        auto& v = velocity_[k];
        for (std::size_t i = 0; i < values.size(); ++i) {
            v[i] = momentum_ * v[i] + grad[i];
            values[i] -= lr_ * v[i];
        }
        params[k]->tensor.zero_grad();
    }
}

}  // namespace gfd
