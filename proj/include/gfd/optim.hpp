#pragma once

#include <span>
#include <vector>

#include "gfd/tensor.hpp"

namespace gfd {

/// p <- p - lr * grad(p), then clears every gradient.
/// Throws std::logic_error if a parameter has no gradient.
void sgd_step(std::span<Parameter* const> params, double lr);

/// SGD with optional heavy-ball momentum. momentum = 0 is exactly sgd_step.
class SgdOptimizer {
public:
    SgdOptimizer(double lr, double momentum = 0.0);

    void step(std::span<Parameter* const> params);

    double learning_rate() const { return lr_; }
    double momentum() const { return momentum_; }

private:
    double lr_;
    double momentum_;
    std::vector<std::vector<double>> velocity_;
};

}  // namespace gfd
