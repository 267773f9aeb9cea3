#include <doctest.h>

#include <random>
#include <vector>

#include "gfd/gradcheck.hpp"
#include "gfd/ops.hpp"
#include "gfd/optim.hpp"
#include "support.hpp"

using namespace gfd;
using gfd::testing::random_tensor;

namespace {

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

// Direct evaluation of a zero-padded convolution, one output at a time.
double conv_at(const Tensor& x, const Tensor& k, const Tensor& b, int stride, int pad, int n, int o,
               int i, int j) {
    const Shape xs = x.shape(), ks = k.shape();
    double acc = b.values()[o];
    for (int c = 0; c < xs.c; ++c)
        for (int u = 0; u < ks.h; ++u)
            for (int v = 0; v < ks.w; ++v) {
                const int y = i * stride - pad + u, z = j * stride - pad + v;
                if (y < 0 || z < 0 || y >= xs.h || z >= xs.w) continue;
                acc += k.at(o, c, u, v) * x.at(n, c, y, z);
            }
    return acc;
}

}  // namespace

TEST_CASE("shape bookkeeping") {
    const Tensor t = Tensor::zeros({2, 3, 4, 5});
    CHECK(t.numel() == 120);
    CHECK(t.values().size() == 120);
    CHECK_FALSE(t.has_grad());
    CHECK_THROWS_AS(Tensor::from_values({1, 1, 2, 2}, {1, 2, 3}), ShapeError);
}

TEST_CASE("conv2d: single pixel sees only the center tap") {
    const Tensor x = Tensor::from_values({1, 1, 1, 1}, {1.5});
    std::vector<double> kv(9, 7.0);
    kv[4] = 2.0;
    const Tensor k = Tensor::from_values({1, 1, 3, 3}, kv);
    const Tensor b = Tensor::from_values({1, 1, 1, 1}, {0.25});
    CHECK(conv2d(x, k, b, 1, 1).item() == doctest::Approx(2.0 * 1.5 + 0.25).epsilon(1e-15));
}

TEST_CASE("conv2d: all-ones 3x3 over a 2x2 image") {
    const Tensor x = Tensor::from_values({1, 1, 2, 2}, {1, 2, 3, 4});
    const Tensor k = Tensor::from_values({1, 1, 3, 3}, std::vector<double>(9, 1.0));
    const Tensor b = Tensor::zeros({1, 1, 1, 1});
    CHECK(to_vec(conv2d(x, k, b, 1, 1).values()) == std::vector<double>{10, 10, 10, 10});
}

TEST_CASE("conv2d: identity 1x1 kernel") {
    std::mt19937_64 rng(3);
    const Tensor x = random_tensor({2, 3, 4, 5}, rng, false);
    std::vector<double> kv(9, 0.0);
    for (int c = 0; c < 3; ++c) kv[c * 3 + c] = 1.0;
    const Tensor y = conv2d(x, Tensor::from_values({3, 3, 1, 1}, kv), Tensor::zeros({1, 3, 1, 1}), 1, 0);
    CHECK(to_vec(y.values()) == to_vec(x.values()));
}

TEST_CASE("conv2d matches direct evaluation for strides and paddings") {
    std::mt19937_64 rng(5);
    for (int stride : {1, 2})
        for (int pad : {0, 1, 2})
            for (int k : {1, 3}) {
                const Tensor x = random_tensor({2, 3, 7, 6}, rng, false);
                const Tensor w = random_tensor({4, 3, k, k}, rng, false);
                const Tensor b = random_tensor({1, 4, 1, 1}, rng, false);
                const Tensor y = conv2d(x, w, b, stride, pad);
                const int oh = (7 + 2 * pad - k) / stride + 1, ow = (6 + 2 * pad - k) / stride + 1;
                REQUIRE(y.shape() == Shape{2, 4, oh, ow});
                for (int n = 0; n < 2; ++n)
                    for (int o = 0; o < 4; ++o)
                        for (int i = 0; i < oh; ++i)
                            for (int j = 0; j < ow; ++j)
                                CHECK(y.at(n, o, i, j) ==
                                      doctest::Approx(conv_at(x, w, b, stride, pad, n, o, i, j))
                                          .epsilon(1e-12));
            }
}

TEST_CASE("conv2d: same padding preserves spatial size") {
    std::mt19937_64 rng(2);
    for (int k : {1, 3, 5}) {
        const Tensor x = random_tensor({1, 2, 9, 4}, rng, false);
        const Tensor y = conv2d(x, random_tensor({3, 2, k, k}, rng, false),
                                Tensor::zeros({1, 3, 1, 1}), 1, (k - 1) / 2);
        CHECK(y.shape() == Shape{1, 3, 9, 4});
    }
}

TEST_CASE("conv2d rejects mismatched shapes with a descriptive message") {
    const Tensor x = Tensor::zeros({1, 2, 4, 4});
    CHECK_THROWS_AS(conv2d(x, Tensor::zeros({1, 3, 3, 3}), Tensor::zeros({1, 1, 1, 1}), 1, 1), ShapeError);
    CHECK_THROWS_AS(conv2d(x, Tensor::zeros({1, 2, 3, 3}), Tensor::zeros({1, 2, 1, 1}), 1, 1), ShapeError);
    CHECK_THROWS_AS(conv2d(x, Tensor::zeros({1, 2, 3, 3}), Tensor::zeros({1, 1, 1, 1}), 0, 1), std::invalid_argument);
    try {
        conv2d(x, Tensor::zeros({1, 3, 3, 3}), Tensor::zeros({1, 1, 1, 1}), 1, 1);
    } catch (const ShapeError& e) {
        CHECK(std::string(e.what()).find("(1,2,4,4)") != std::string::npos);
    }
}

TEST_CASE("relu forward and subgradient at zero") {
    const Tensor x = Tensor::from_values({1, 1, 1, 3}, {-1, 0, 2}, true);
    const Tensor y = relu(x);
    CHECK(to_vec(y.values()) == std::vector<double>{0, 0, 2});
    sum(y).backward();
    CHECK(to_vec(x.grad()) == std::vector<double>{0, 0, 1});
}

TEST_CASE("relu of all-negative input passes no gradient") {
    const Tensor x = Tensor::from_values({1, 2, 1, 2}, {-1, -2, -0.5, -3}, true);
    const Tensor y = relu(x);
    for (double v : y.values()) CHECK(v == 0.0);
    sum(y).backward();
    for (double g : x.grad()) CHECK(g == 0.0);
}

TEST_CASE("relu gradient against finite differences") {
    Tensor x = Tensor::from_values({1, 1, 1, 2}, {-1, 3}, true);
    std::vector<Tensor> in{x};
    CHECK(check_gradients([&] { return sum(relu(x)); }, in) < 1e-10);
    sum(relu(x)).backward();
    CHECK(to_vec(x.grad()) == std::vector<double>{0, 1});
}

TEST_CASE("concat and slice") {
    std::mt19937_64 rng(1);
    const Tensor a = random_tensor({2, 2, 4, 4}, rng);
    const Tensor b = random_tensor({2, 3, 4, 4}, rng);
    const Tensor ab = concat_channels(a, b);
    CHECK(ab.shape() == Shape{2, 5, 4, 4});
    CHECK(to_vec(slice_channels(ab, 0, 2).values()) == to_vec(a.values()));
    CHECK(to_vec(slice_channels(ab, 2, 3).values()) == to_vec(b.values()));
    CHECK(to_vec(slice_channels(concat_channels(a, Tensor::zeros({2, 1, 4, 4})), 0, 2).values()) ==
          to_vec(a.values()));
    CHECK_THROWS_AS(concat_channels(a, Tensor::zeros({2, 1, 4, 3})), ShapeError);
    CHECK_THROWS_AS(concat_channels(a, Tensor::zeros({1, 1, 4, 4})), ShapeError);
}

TEST_CASE("concat routes gradient to its first operand only for first-half channels") {
    std::mt19937_64 rng(4);
    const Tensor a = random_tensor({1, 2, 3, 3}, rng);
    const Tensor b = random_tensor({1, 2, 3, 3}, rng);
    sum(slice_channels(concat_channels(a, b), 0, 2)).backward();
    for (double g : a.grad()) CHECK(g == 1.0);
    if (b.has_grad())
        for (double g : b.grad()) CHECK(g == 0.0);
}

TEST_CASE("add") {
    const Tensor a = Tensor::from_values({1, 1, 1, 2}, {1, 2}, true);
    const Tensor b = Tensor::from_values({1, 1, 1, 2}, {3, 4}, true);
    CHECK(to_vec(add(a, b).values()) == std::vector<double>{4, 6});
    CHECK(to_vec(add(a, Tensor::zeros({1, 1, 1, 2})).values()) == to_vec(a.values()));
    sum(add(a, b)).backward();
    CHECK(to_vec(a.grad()) == std::vector<double>{1, 1});
    CHECK(to_vec(b.grad()) == std::vector<double>{1, 1});
    CHECK_THROWS_AS(add(a, Tensor::zeros({1, 1, 2, 1})), ShapeError);
}

TEST_CASE("backward of sum gives ones; non-scalar backward is rejected") {
    std::mt19937_64 rng(8);
    const Tensor x = random_tensor({2, 3, 2, 2}, rng);
    sum(x).backward();
    for (double g : x.grad()) CHECK(g == 1.0);
    CHECK_THROWS_AS(x.backward(), ShapeError);
}

TEST_CASE("bias gradient counts contributing output positions") {
    const Tensor x = Tensor::from_values({1, 1, 2, 2}, {1, 1, 1, 1});
    const Tensor k = Tensor::from_values({1, 1, 3, 3}, std::vector<double>(9, 1.0), true);
    const Tensor b = Tensor::zeros({1, 1, 1, 1}, true);
    sum(relu(conv2d(x, k, b, 1, 1))).backward();
    CHECK(b.grad()[0] == 4.0);
}

TEST_CASE("two backward calls accumulate") {
    std::mt19937_64 rng(9);
    Tensor x = random_tensor({1, 2, 2, 2}, rng);
    const Tensor loss = sum(scale(x, 3.0));
    loss.backward();
    loss.backward();
    for (double g : x.grad()) CHECK(g == 6.0);
    x.zero_grad();
    CHECK_FALSE(x.has_grad());
}

TEST_CASE("shared subexpressions sum their contributions") {
    std::mt19937_64 rng(12);
    Tensor x = random_tensor({1, 2, 3, 3}, rng);
    Tensor k = random_tensor({2, 2, 3, 3}, rng);
    Tensor b = random_tensor({1, 2, 1, 1}, rng);

    const Tensor shared = relu(conv2d(x, k, b, 1, 1));
    sum(add(shared, shared)).backward();
    const std::vector<double> gx = to_vec(x.grad()), gk = to_vec(k.grad());
    x.zero_grad();
    k.zero_grad();
    b.zero_grad();

    const Tensor first = relu(conv2d(x, k, b, 1, 1));
    const Tensor second = relu(conv2d(x, k, b, 1, 1));
    sum(add(first, second)).backward();
    const std::vector<double> dx = to_vec(x.grad()), dk = to_vec(k.grad());
    REQUIRE(gx.size() == dx.size());
    for (std::size_t i = 0; i < gx.size(); ++i) CHECK(gx[i] == doctest::Approx(dx[i]).epsilon(1e-14));
    for (std::size_t i = 0; i < gk.size(); ++i) CHECK(gk[i] == doctest::Approx(dk[i]).epsilon(1e-14));
}

TEST_CASE("every requires_grad ancestor receives a gradient") {
    std::mt19937_64 rng(13);
    const Tensor x = random_tensor({1, 2, 4, 4}, rng);
    const Tensor k = random_tensor({3, 2, 3, 3}, rng);
    const Tensor b = random_tensor({1, 3, 1, 1}, rng);
    const Tensor c = Tensor::zeros({1, 2, 4, 4});
    sum(concat_channels(relu(conv2d(x, k, b, 1, 1)), c)).backward();
    CHECK(x.has_grad());
    CHECK(k.has_grad());
    CHECK(b.has_grad());
    CHECK_FALSE(c.has_grad());
}

TEST_CASE("check_gradients is exact for a linear loss") {
    std::mt19937_64 rng(21);
    Tensor x = random_tensor({1, 3, 2, 2}, rng);
    std::vector<Tensor> in{x};
    CHECK(check_gradients([&] { return sum(scale(x, 2.0)); }, in) < 1e-9);
}

TEST_CASE("conv + relu composite passes the finite-difference check") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(seed);
        Tensor x = random_tensor({2, 2, 5, 4}, rng);
        Tensor k = random_tensor({3, 2, 3, 3}, rng);
        Tensor b = random_tensor({1, 3, 1, 1}, rng);
        std::vector<Tensor> in{x, k, b};
        CHECK(check_gradients([&] { return sum(relu(conv2d(x, k, b, 2, 1))); }, in) < 1e-4);
    }
}

TEST_CASE("sgd_step") {
    Parameter p{"p", Tensor::from_values({1, 1, 1, 1}, {1.0}, true), ParamKind::Weight};
    std::vector<Parameter*> ps{&p};
    sum(scale(p.tensor, 2.0)).backward();
    sgd_step(ps, 0.1);
    CHECK(p.tensor.item() == doctest::Approx(0.8).epsilon(1e-15));
    CHECK_FALSE(p.tensor.has_grad());
    CHECK_THROWS_AS(sgd_step(ps, 0.1), std::logic_error);

    sum(scale(p.tensor, 5.0)).backward();
    const double before = p.tensor.item();
    sgd_step(ps, 0.0);
    CHECK(p.tensor.item() == before);
}

TEST_CASE("sgd on p^2 follows the closed-form contraction") {
    Parameter p{"p", Tensor::from_values({1, 1, 1, 1}, {3.0}, true), ParamKind::Weight};
    std::vector<Parameter*> ps{&p};
    double expected = 3.0;
    for (int i = 0; i < 50; ++i) {
        half_sum_squares(scale(p.tensor, std::sqrt(2.0))).backward();  // loss p^2, grad 2p
        sgd_step(ps, 0.1);
        expected *= 0.8;
        CHECK(p.tensor.item() == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(std::abs(p.tensor.item()) < 1e-4);
}

TEST_CASE("momentum optimizer with zero momentum equals plain sgd") {
    std::mt19937_64 rng(30);
    Parameter a{"a", random_tensor({1, 2, 2, 2}, rng), ParamKind::Weight};
    Parameter b{"b", Tensor::from_values(a.tensor.shape(), to_vec(a.tensor.values()), true), ParamKind::Weight};
    std::vector<Parameter*> pa{&a}, pb{&b};
    SgdOptimizer opt(0.05, 0.0);
    for (int i = 0; i < 5; ++i) {
        half_sum_squares(a.tensor).backward();
        opt.step(pa);
        half_sum_squares(b.tensor).backward();
        sgd_step(pb, 0.05);
    }
    CHECK(to_vec(a.tensor.values()) == to_vec(b.tensor.values()));
}

TEST_CASE("momentum accumulates velocity") {
    Parameter p{"p", Tensor::from_values({1, 1, 1, 1}, {1.0}, true), ParamKind::Weight};
    std::vector<Parameter*> ps{&p};
    SgdOptimizer opt(0.1, 0.5);
    sum(p.tensor).backward();  // grad 1
    opt.step(ps);              // v = 1, p = 0.9
    sum(p.tensor).backward();
    opt.step(ps);  // v = 1.5, p = 0.75
    CHECK(p.tensor.item() == doctest::Approx(0.75).epsilon(1e-15));
}
