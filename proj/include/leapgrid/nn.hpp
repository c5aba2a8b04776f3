#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <json.hpp>

#include "leapgrid/tensor.hpp"

namespace leapgrid {

enum class Activation { identity, relu, leaky_relu };

struct DenseLayer {
    Tensor2 weight;  // in x out
    bool has_bias = true;
    std::vector<double> bias;  // size out (empty when has_bias is false)
    Activation act = Activation::identity;
    double leaky_slope = 0.01;

    int in_dim() const { return weight.rows; }
    int out_dim() const { return weight.cols; }

    bool operator==(const DenseLayer&) const = default;
};

// He-style uniform init: W ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)), bias 0.
DenseLayer make_dense(int in, int out, Activation act, std::mt19937_64& rng,
                      bool bias = true, double leaky_slope = 0.01);

struct LayerCache {
    Tensor2 input;    // batch x in
    Tensor2 pre_act;  // batch x out
};

struct ForwardCache {
    std::vector<LayerCache> layers;
    Tensor2 output;
};

// Affine + activation chain, batch along rows.
Tensor2 forward(const std::vector<DenseLayer>& layers, const Tensor2& x);
ForwardCache forward_cached(const std::vector<DenseLayer>& layers, const Tensor2& x);

struct LayerGrads {
    Tensor2 d_weight;
    std::vector<double> d_bias;
};

struct BackwardResult {
    std::vector<LayerGrads> layers;
    Tensor2 d_input;
};

// Exact reverse-mode gradients of forward_cached's composition.
BackwardResult backward(const std::vector<DenseLayer>& layers, const ForwardCache& cache,
                        const Tensor2& upstream);

struct MseResult {
    double loss = 0.0;
    Tensor2 grad;  // d loss / d pred = 2(pred - target)/N
};

MseResult mse_loss(const Tensor2& pred, const Tensor2& target);

// Flat mutable view over a parameter (or gradient) block.
struct ParamView {
    double* data = nullptr;
    std::size_t size = 0;
};

std::vector<ParamView> layer_params(std::vector<DenseLayer>& layers);
std::vector<ParamView> grad_views(std::vector<LayerGrads>& grads);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::int64_t t = 0;
    std::vector<std::vector<double>> m;  // one slot per parameter block
    std::vector<std::vector<double>> v;
    AdamConfig cfg;
};

AdamState make_adam_state(const std::vector<ParamView>& params, AdamConfig cfg = {});

// Standard Adam update with bias correction. Throws NumericsError on a
// non-finite gradient entry.
void adam_step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads,
               AdamState& state);

nlohmann::ordered_json layer_to_json(const DenseLayer& layer);
DenseLayer layer_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json adam_to_json(const AdamState& s);
AdamState adam_from_json(const nlohmann::ordered_json& j);

}  // namespace leapgrid
