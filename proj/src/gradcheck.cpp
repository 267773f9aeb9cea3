#include "gfd/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gfd {

namespace {

std::vector<std::vector<double>> analytic_gradients(const std::function<Tensor()>& build,
                                                    std::span<Tensor> inputs, double* value) {
    for (auto& t : inputs) t.zero_grad();
    Tensor loss = build();
    loss.backward();
    if (value) *value = loss.item();

    std::vector<std::vector<double>> analytic;
    analytic.reserve(inputs.size());
    for (auto& t : inputs) {
        if (t.has_grad())
            analytic.emplace_back(t.grad().begin(), t.grad().end());
        else
            analytic.emplace_back(t.numel(), 0.0);
        t.zero_grad();
    }
    return analytic;
}

template <class Visit>
void central_differences(const std::function<Tensor()>& build, std::span<Tensor> inputs,
                         double eps, const std::vector<std::vector<double>>& analytic,
                         Visit&& visit) {
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        auto values = inputs[k].mutable_values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + eps;
            const double up = build().item();
            values[i] = saved - eps;
            const double down = build().item();
            values[i] = saved;
            visit(analytic[k][i], (up - down) / (2.0 * eps));
        }
    }
}

}  // namespace

double check_gradients(const std::function<Tensor()>& build, std::span<Tensor> inputs,
                       double eps) {
    const auto analytic = analytic_gradients(build, inputs, nullptr);
    double worst = 0.0;
    central_differences(build, inputs, eps, analytic, [&](double a, double numeric) {
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
        worst = std::max(worst, std::abs(a - numeric) / denom);
    });
    return worst;
}

GradCheckReport gradient_report(const std::function<Tensor()>& build, std::span<Tensor> inputs,
                                double eps, double rel_tol) {
    double value = 0.0;
    const auto analytic = analytic_gradients(build, inputs, &value);
    const double f = std::abs(value);
    GradCheckReport r;
    r.resolution = 2.0 * (std::nextafter(f, INFINITY) - f) / eps;
    central_differences(build, inputs, eps, analytic, [&](double a, double numeric) {
        const double scale = std::max(std::abs(a), std::abs(numeric));
        const double diff = std::abs(a - numeric);
        if (scale >= r.resolution / rel_tol) {
            ++r.resolved;
            r.max_rel_error = std::max(r.max_rel_error, diff / scale);
        } else {
            ++r.unresolved;
            r.max_unresolved_abs_error = std::max(r.max_unresolved_abs_error, diff);
        }
    });
    return r;
}

}  // namespace gfd
