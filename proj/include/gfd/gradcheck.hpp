#pragma once

#include <functional>
#include <span>

#include "gfd/tensor.hpp"

namespace gfd {

/// Compares analytic gradients of `build()` against central finite differences
/// (f(x+eps) - f(x-eps)) / (2 eps) for every element of every tensor in
/// `inputs`. Returns the largest relative error, where the denominator is
/// max(|analytic|, |numeric|, 1e-8). `build` must rebuild the scalar loss from
/// the current values of `inputs` each time it is called.
double check_gradients(const std::function<Tensor()>& build, std::span<Tensor> inputs,
                       double eps = 1e-5);

/// Finite differences cannot resolve a relative error for elements whose
/// gradient is comparable to the rounding noise of the loss itself,
/// resolution = 2 ulp(|f|) / eps. Elements with max(|analytic|, |numeric|)
/// >= resolution / rel_tol count toward max_rel_error; the rest must agree
/// to within `resolution` in absolute terms.
struct GradCheckReport {
    double max_rel_error = 0.0;
    double max_unresolved_abs_error = 0.0;
    double resolution = 0.0;
    std::size_t resolved = 0;
    std::size_t unresolved = 0;

    bool ok(double rel_tol) const {
        return max_rel_error < rel_tol && max_unresolved_abs_error <= resolution;
    }
};

GradCheckReport gradient_report(const std::function<Tensor()>& build, std::span<Tensor> inputs,
                                double eps = 1e-5, double rel_tol = 1e-4);

}  // namespace gfd
