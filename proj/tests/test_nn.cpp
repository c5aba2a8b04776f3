#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "leapgrid/errors.hpp"
#include "leapgrid/nn.hpp"
#include "leapgrid/rng.hpp"

using namespace leapgrid;

namespace {

std::vector<DenseLayer> random_mlp(const std::vector<int>& dims, Activation act,
                                   std::mt19937_64& rng) {
    std::vector<DenseLayer> layers;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        const Activation a = i + 2 == dims.size() ? Activation::identity : act;
        layers.push_back(make_dense(dims[i], dims[i + 1], a, rng));
    }
    return layers;
}

Tensor2 random_tensor(int r, int c, std::mt19937_64& rng) {
    Tensor2 t(r, c);
    for (double& v : t.data) v = 2.0 * uniform01(rng) - 1.0;
    return t;
}

double loss_of(const std::vector<DenseLayer>& layers, const Tensor2& x, const Tensor2& target) {
    return mse_loss(forward(layers, x), target).loss;
}

}  // namespace

TEST_CASE("forward: identity weights reproduce the input") {
    DenseLayer layer;
    layer.weight = Tensor2(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    layer.has_bias = true;
    layer.bias = {0, 0, 0};
    layer.act = Activation::identity;
    const Tensor2 x(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK(forward({layer}, x) == x);
}

TEST_CASE("forward: relu zeroes an all-negative input") {
    DenseLayer layer;
    layer.weight = Tensor2(2, 2, {1, 0, 0, 1});
    layer.has_bias = false;
    layer.act = Activation::relu;
    const Tensor2 x(1, 2, {-1.0, -5.0});
    const Tensor2 y = forward({layer}, x);
    CHECK(y(0, 0) == 0.0);
    CHECK(y(0, 1) == 0.0);
}

TEST_CASE("forward: 1x1 affine arithmetic") {
    DenseLayer layer;
    layer.weight = Tensor2(1, 1, {2.0});
    layer.has_bias = true;
    layer.bias = {1.0};
    layer.act = Activation::identity;
    const Tensor2 x(1, 1, {3.0});
    CHECK(forward({layer}, x)(0, 0) == 7.0);
}

TEST_CASE("forward: dimension mismatch raises ShapeError") {
    std::mt19937_64 rng(1);
    const auto layers = random_mlp({3, 4}, Activation::identity, rng);
    CHECK_THROWS_AS(forward(layers, Tensor2(2, 5)), ShapeError);
}

TEST_CASE("mse_loss basics") {
    const Tensor2 a(1, 2, {0.0, 2.0});
    const Tensor2 z(1, 2, {0.0, 0.0});
    CHECK(mse_loss(a, a).loss == 0.0);

    Tensor2 ones(2, 3);
    std::fill(ones.data.begin(), ones.data.end(), 1.0);
    CHECK(mse_loss(ones, Tensor2(2, 3)).loss == doctest::Approx(1.0));

    CHECK(mse_loss(a, z).loss == doctest::Approx(2.0));
    CHECK_THROWS_AS(mse_loss(a, Tensor2(2, 2)), ShapeError);

    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        const Tensor2 p = random_tensor(3, 4, rng);
        const Tensor2 q = random_tensor(3, 4, rng);
        const double l = mse_loss(p, q).loss;
        CHECK(l >= 0.0);
        if (p == q) {
            CHECK(l == 0.0);
        } else {
            CHECK(l > 0.0);
        }
    }
}

TEST_CASE("backward: zero upstream at the loss minimum gives zero grads") {
    std::mt19937_64 rng(5);
    const auto layers = random_mlp({3, 5, 2}, Activation::leaky_relu, rng);
    const Tensor2 x = random_tensor(4, 3, rng);
    const ForwardCache cache = forward_cached(layers, x);
    const MseResult mse = mse_loss(cache.output, cache.output);  // pred == target
    const BackwardResult back = backward(layers, cache, mse.grad);
    for (const LayerGrads& g : back.layers) {
        for (double v : g.d_weight.data) CHECK(v == 0.0);
        for (double v : g.d_bias) CHECK(v == 0.0);
    }
}

TEST_CASE("backward matches central finite differences on a random 2-layer net") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 4; ++trial) {
        auto layers = random_mlp({4, 6, 3}, Activation::leaky_relu, rng);
        const Tensor2 x = random_tensor(5, 4, rng);
        const Tensor2 target = random_tensor(5, 3, rng);

        const ForwardCache cache = forward_cached(layers, x);
        const MseResult mse = mse_loss(cache.output, target);
        BackwardResult back = backward(layers, cache, mse.grad);

        const auto params = layer_params(layers);
        const auto grads = grad_views(back.layers);
        REQUIRE(params.size() == grads.size());
        const double h = 1e-6;
        for (std::size_t blk = 0; blk < params.size(); ++blk) {
            for (std::size_t k = 0; k < params[blk].size; ++k) {
                double& p = params[blk].data[k];
                const double orig = p;
                p = orig + h;
                const double lp = loss_of(layers, x, target);
                p = orig - h;
                const double lm = loss_of(layers, x, target);
                p = orig;
                const double fd = (lp - lm) / (2.0 * h);
                const double an = grads[blk].data[k];
                CHECK(std::abs(an - fd) <= 1e-5 * std::max({1.0, std::abs(an), std::abs(fd)}));
            }
        }
    }
}

TEST_CASE("backward: linear chain gradient has the closed form") {
    // pred = w2 * w1 * x, L = (pred - t)^2  =>  dL/dw1 = 2(pred - t) w2 x.
    const double w1 = 0.7, w2 = -1.3, xv = 2.1, tv = 0.4;
    std::vector<DenseLayer> layers(2);
    layers[0].weight = Tensor2(1, 1, {w1});
    layers[0].has_bias = false;
    layers[1].weight = Tensor2(1, 1, {w2});
    layers[1].has_bias = false;
    const Tensor2 x(1, 1, {xv});
    const Tensor2 target(1, 1, {tv});
    const ForwardCache cache = forward_cached(layers, x);
    const MseResult mse = mse_loss(cache.output, target);
    const BackwardResult back = backward(layers, cache, mse.grad);
    const double pred = w2 * w1 * xv;
    CHECK(back.layers[0].d_weight(0, 0) == doctest::Approx(2.0 * (pred - tv) * w2 * xv));
    CHECK(back.layers[1].d_weight(0, 0) == doctest::Approx(2.0 * (pred - tv) * w1 * xv));
    CHECK(back.d_input(0, 0) == doctest::Approx(2.0 * (pred - tv) * w2 * w1));
}

TEST_CASE("backward rejects a mismatched cache") {
    std::mt19937_64 rng(13);
    const auto layers = random_mlp({3, 3}, Activation::identity, rng);
    const ForwardCache cache = forward_cached(layers, random_tensor(2, 3, rng));
    CHECK_THROWS_AS(backward(layers, cache, Tensor2(5, 3)), ShapeError);
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
    std::vector<double> param{1.5, -2.0};
    std::vector<double> grad{0.0, 0.0};
    std::vector<ParamView> p{{param.data(), param.size()}};
    std::vector<ParamView> g{{grad.data(), grad.size()}};
    AdamState state = make_adam_state(p);
    adam_step(p, g, state);
    CHECK(param[0] == 1.5);
    CHECK(param[1] == -2.0);
}

TEST_CASE("adam: first scalar step follows the hand-evaluated update") {
    double param = 1.0;
    double grad = 1.0;
    std::vector<ParamView> p{{&param, 1}};
    std::vector<ParamView> g{{&grad, 1}};
    AdamState state = make_adam_state(p, AdamConfig{0.1, 0.9, 0.999, 1e-8});
    adam_step(p, g, state);
    // t=1: mhat = 1, vhat = 1 -> delta = lr / (1 + eps).
    CHECK(param == doctest::Approx(1.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam: step magnitude is bounded by lr/(1-beta1)") {
    std::mt19937_64 rng(17);
    std::vector<double> param(8, 0.0);
    std::vector<double> grad(8, 0.0);
    std::vector<ParamView> p{{param.data(), param.size()}};
    std::vector<ParamView> g{{grad.data(), grad.size()}};
    const AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
    AdamState state = make_adam_state(p, cfg);
    const double bound = cfg.lr / (1.0 - cfg.beta1) * (1.0 + 1e-9);
    for (int step = 0; step < 200; ++step) {
        auto before = param;
        for (double& v : grad) v = 20.0 * (uniform01(rng) - 0.5);
        adam_step(p, g, state);
        for (std::size_t i = 0; i < param.size(); ++i) {
            CHECK(std::abs(param[i] - before[i]) <= bound);
        }
    }
}

TEST_CASE("adam: non-finite gradient raises NumericsError") {
    double param = 0.0;
    double grad = std::numeric_limits<double>::quiet_NaN();
    std::vector<ParamView> p{{&param, 1}};
    std::vector<ParamView> g{{&grad, 1}};
    AdamState state = make_adam_state(p);
    CHECK_THROWS_AS(adam_step(p, g, state), NumericsError);
}

TEST_CASE("seeded init and a short optimization are bit-reproducible") {
    auto run = [] {
        std::mt19937_64 rng(42);
        auto layers = random_mlp({3, 8, 2}, Activation::leaky_relu, rng);
        const Tensor2 x = random_tensor(16, 3, rng);
        const Tensor2 target = random_tensor(16, 2, rng);
        auto params = layer_params(layers);
        AdamState state = make_adam_state(params);
        for (int step = 0; step < 25; ++step) {
            const ForwardCache cache = forward_cached(layers, x);
            const MseResult mse = mse_loss(cache.output, target);
            BackwardResult back = backward(layers, cache, mse.grad);
            adam_step(params, grad_views(back.layers), state);
        }
        return layers;
    };
    const auto a = run();
    const auto b = run();
    CHECK(a == b);
}

TEST_CASE("layer JSON round-trip") {
    std::mt19937_64 rng(21);
    const DenseLayer layer = make_dense(4, 3, Activation::leaky_relu, rng);
    const DenseLayer back = layer_from_json(layer_to_json(layer));
    CHECK(back == layer);
}
