#include "gfd/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_set>

namespace gfd {

namespace {

std::uint64_t next_seq() {
    static std::atomic<std::uint64_t> counter{0};
    return ++counter;
}

}  // namespace

std::string Shape::str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) +
           "," + std::to_string(w) + ")";
}

std::vector<double>& detail::Node::ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    return from_values(shape, std::vector<double>(shape.numel(), 0.0), requires_grad);
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values, bool requires_grad) {
    if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0)
        throw ShapeError("negative extent in shape " + shape.str());
    if (values.size() != shape.numel())
        throw ShapeError("value count " + std::to_string(values.size()) +
                         " does not match shape " + shape.str());
    auto node = std::make_shared<detail::Node>();
    node->shape = shape;
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    node->seq = next_seq();
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_values({1, 1, 1, 1}, {value}, requires_grad);
}

Tensor Tensor::make_result(Shape shape, std::vector<double> values,
                           std::vector<Tensor> parents,
                           std::function<void(detail::Node&)> backward_fn) {
    Tensor out = from_values(shape, std::move(values), false);
    const bool any = std::any_of(parents.begin(), parents.end(),
                                 [](const Tensor& p) { return p.requires_grad(); });
    if (any) {
        auto& node = *out.node_;
        node.requires_grad = true;
        node.parents.reserve(parents.size());
        for (auto& p : parents) node.parents.push_back(p.node_);
        node.backward_fn = std::move(backward_fn);
    }
    return out;
}

detail::Node& Tensor::node() const {
    if (!node_) throw std::logic_error("use of an undefined tensor");
    return *node_;
}

const Shape& Tensor::shape() const { return node().shape; }

std::span<const double> Tensor::values() const { return node().value; }

std::span<double> Tensor::mutable_values() {
    auto& n = node();
    if (!n.is_leaf()) throw std::logic_error("mutable_values() on a non-leaf tensor");
    return n.value;
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("item() on non-scalar tensor " + shape().str());
    return node().value[0];
}

double Tensor::at(int n, int c, int h, int w) const {
    const Shape& s = shape();
    return node().value[((static_cast<std::size_t>(n) * s.c + c) * s.h + h) * s.w + w];
}

bool Tensor::requires_grad() const { return node().requires_grad; }

bool Tensor::has_grad() const { return !node().grad.empty(); }

std::span<const double> Tensor::grad() const { return node().grad; }

void Tensor::zero_grad() { node().grad.clear(); }

void Tensor::backward() const {
    auto& root = node();
    if (!(root.shape == Shape{1, 1, 1, 1}))
        throw ShapeError("backward() needs a scalar loss, got " + root.shape.str());
    if (!root.requires_grad) return;

    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> seen;
    std::vector<detail::Node*> stack{&root};
    while (!stack.empty()) {
        detail::Node* n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) continue;
        order.push_back(n);
        for (auto& p : n->parents)
            if (p->requires_grad) stack.push_back(p.get());
    }
    // Creation order is a valid topological order of the recorded graph.
    std::sort(order.begin(), order.end(),
              [](const detail::Node* a, const detail::Node* b) { return a->seq > b->seq; });

    for (auto* n : order) {
        if (n->is_leaf())
            n->ensure_grad();
        else
            n->grad.assign(n->value.size(), 0.0);
    }
    root.grad[0] += 1.0;
    for (auto* n : order)
        if (!n->is_leaf()) n->backward_fn(*n);
}

}  // namespace gfd
