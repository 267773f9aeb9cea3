#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "gfd/tensor.hpp"

namespace gfd::testing {

/// Uniform values in [-1, 1], resampled while |v| < 1e-3 so ReLU inputs
/// stay away from the kink.
inline std::vector<double> random_values(std::size_t n, std::mt19937_64& rng, double lo = -1.0,
                                         double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) {
        do x = u(rng);
        while (std::abs(x) < 1e-3);
    }
    return v;
}

inline Tensor random_tensor(Shape s, std::mt19937_64& rng, bool requires_grad = true) {
    return Tensor::from_values(s, random_values(s.numel(), rng), requires_grad);
}

}  // namespace gfd::testing
