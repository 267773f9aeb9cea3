#pragma once

// Dense rank-4 tensor with tape-style reverse-mode differentiation.
//
// A Tensor is a cheap handle to a shared node. Operations record their
// parents and a backward closure at forward time; calling backward() on a
// scalar walks the recorded nodes in reverse creation order. The graph lives
// as long as some handle to its output does.
//
// Graphs are confined to a single thread. Tensors with no pending graph may
// be read from several threads at once.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfd {

/// (batch, channels, height, width), row-major.
struct Shape {
    int n = 0;
    int c = 0;
    int h = 0;
    int w = 0;

    std::size_t numel() const {
        return static_cast<std::size_t>(n) * c * h * w;
    }
    bool operator==(const Shape&) const = default;
    std::string str() const;
};

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // empty until populated
    bool requires_grad = false;
    std::uint64_t seq = 0;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    bool is_leaf() const { return !backward_fn; }
    std::vector<double>& ensure_grad();
};

}  // namespace detail

class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor from_values(Shape shape, std::vector<double> values,
                              bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const;
    std::size_t numel() const { return shape().numel(); }

    std::span<const double> values() const;
    /// Writable view of a leaf's values (parameters, inputs). Throws for op outputs.
    std::span<double> mutable_values();
    double item() const;
    double at(int n, int c, int h, int w) const;

    bool requires_grad() const;
    bool has_grad() const;
    std::span<const double> grad() const;
    /// Drops the gradient buffer; has_grad() is false afterwards.
    void zero_grad();

    /// Reverse pass from a scalar (1,1,1,1) tensor. Leaf gradients accumulate
    /// across calls; intermediate gradients are recomputed each call.
    void backward() const;

    /// Builds an op output wired into the graph. Used by the op implementations.
    static Tensor make_result(Shape shape, std::vector<double> values,
                              std::vector<Tensor> parents,
                              std::function<void(detail::Node&)> backward_fn);

    detail::Node& node() const;

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
    std::shared_ptr<detail::Node> node_;
};

/// Weights are subject to L2 regularization, biases are not.
enum class ParamKind { Weight, Bias };

struct Parameter {
    std::string name;
    Tensor tensor;
    ParamKind kind = ParamKind::Weight;
};

}  // namespace gfd
