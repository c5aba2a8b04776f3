#include "leapgrid/nn.hpp"

#include <cmath>
#include <string>

#include "leapgrid/errors.hpp"
#include "leapgrid/rng.hpp"

namespace leapgrid {

namespace {

double activate(Activation act, double z, double slope) {
    switch (act) {
        case Activation::identity: return z;
        case Activation::relu: return z > 0 ? z : 0.0;
        case Activation::leaky_relu: return z > 0 ? z : slope * z;
    }
    return z;
}

double activate_grad(Activation act, double z, double slope) {
    switch (act) {
        case Activation::identity: return 1.0;
        case Activation::relu: return z > 0 ? 1.0 : 0.0;
        case Activation::leaky_relu: return z > 0 ? 1.0 : slope;
    }
    return 1.0;
}

std::string activation_name(Activation act) {
    switch (act) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
    }
    return "identity";
}

Activation activation_from_name(const std::string& s) {
    if (s == "identity") return Activation::identity;
    if (s == "relu") return Activation::relu;
    if (s == "leaky_relu") return Activation::leaky_relu;
    throw ArtifactError("unknown activation '" + s + "'");
}

}  // namespace

DenseLayer make_dense(int in, int out, Activation act, std::mt19937_64& rng, bool bias,
                      double leaky_slope) {
    DenseLayer layer;
    layer.weight = Tensor2(in, out);
    const double limit = std::sqrt(6.0 / in);
    for (double& w : layer.weight.data) w = limit * (2.0 * uniform01(rng) - 1.0);
    layer.has_bias = bias;
    if (bias) layer.bias.assign(out, 0.0);
    layer.act = act;
    layer.leaky_slope = leaky_slope;
    return layer;
}

namespace {

// One affine+activation step; writes the pre-activation into cache when given.
Tensor2 layer_forward(const DenseLayer& layer, const Tensor2& x, LayerCache* cache) {
    if (x.cols != layer.in_dim()) {
        throw ShapeError("layer expects " + std::to_string(layer.in_dim()) + " inputs, got " +
                         std::to_string(x.cols));
    }
    Tensor2 z = matmul(x, layer.weight);
    if (layer.has_bias) {
        for (int i = 0; i < z.rows; ++i) {
            for (int j = 0; j < z.cols; ++j) z(i, j) += layer.bias[j];
        }
    }
    if (cache) {
        cache->input = x;
        cache->pre_act = z;
    }
    Tensor2 out = z;
    if (layer.act != Activation::identity) {
        for (double& v : out.data) v = activate(layer.act, v, layer.leaky_slope);
    }
    return out;
}

}  // namespace

Tensor2 forward(const std::vector<DenseLayer>& layers, const Tensor2& x) {
    Tensor2 h = x;
    for (const DenseLayer& layer : layers) h = layer_forward(layer, h, nullptr);
    return h;
}

ForwardCache forward_cached(const std::vector<DenseLayer>& layers, const Tensor2& x) {
    ForwardCache cache;
    cache.layers.resize(layers.size());
    Tensor2 h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        h = layer_forward(layers[i], h, &cache.layers[i]);
    }
    cache.output = h;
    return cache;
}

namespace {

// Shared single-layer backward: consumes d(out), emits d(in) and fills grads.
Tensor2 layer_backward(const DenseLayer& layer, const LayerCache& cache, const Tensor2& d_out,
                       LayerGrads& grads) {
    if (!d_out.same_shape(cache.pre_act)) {
        throw ShapeError("backward called with mismatched cache");
    }
    Tensor2 dz = d_out;
    if (layer.act != Activation::identity) {
        for (std::size_t i = 0; i < dz.data.size(); ++i) {
            dz.data[i] *= activate_grad(layer.act, cache.pre_act.data[i], layer.leaky_slope);
        }
    }
    grads.d_weight = matmul_tn(cache.input, dz);
    if (layer.has_bias) {
        grads.d_bias.assign(layer.bias.size(), 0.0);
        for (int i = 0; i < dz.rows; ++i) {
            for (int j = 0; j < dz.cols; ++j) grads.d_bias[j] += dz(i, j);
        }
    }
    return matmul_nt(dz, layer.weight);
}

}  // namespace

BackwardResult backward(const std::vector<DenseLayer>& layers, const ForwardCache& cache,
                        const Tensor2& upstream) {
    if (cache.layers.size() != layers.size()) {
        throw ShapeError("cache does not match layer stack");
    }
    BackwardResult result;
    result.layers.resize(layers.size());
    Tensor2 grad = upstream;
    for (std::size_t i = layers.size(); i-- > 0;) {
        grad = layer_backward(layers[i], cache.layers[i], grad, result.layers[i]);
    }
    result.d_input = grad;
    return result;
}

MseResult mse_loss(const Tensor2& pred, const Tensor2& target) {
    if (!pred.same_shape(target)) {
        throw ShapeError("mse_loss shape mismatch");
    }
    const double n = static_cast<double>(pred.size());
    MseResult res;
    res.grad = Tensor2(pred.rows, pred.cols);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double d = pred.data[i] - target.data[i];
        acc += d * d;
        res.grad.data[i] = 2.0 * d / n;
    }
    res.loss = acc / n;
    return res;
}

std::vector<ParamView> layer_params(std::vector<DenseLayer>& layers) {
    std::vector<ParamView> views;
    for (DenseLayer& layer : layers) {
        views.push_back({layer.weight.data.data(), layer.weight.data.size()});
        if (layer.has_bias) views.push_back({layer.bias.data(), layer.bias.size()});
    }
    return views;
}

std::vector<ParamView> grad_views(std::vector<LayerGrads>& grads) {
    std::vector<ParamView> views;
    for (LayerGrads& g : grads) {
        views.push_back({g.d_weight.data.data(), g.d_weight.data.size()});
        if (!g.d_bias.empty()) views.push_back({g.d_bias.data(), g.d_bias.size()});
    }
    return views;
}

AdamState make_adam_state(const std::vector<ParamView>& params, AdamConfig cfg) {
    AdamState s;
    s.cfg = cfg;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const ParamView& p : params) {
        s.m.emplace_back(p.size, 0.0);
        s.v.emplace_back(p.size, 0.0);
    }
    return s;
}

void adam_step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads,
               AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw ShapeError("adam_step parameter/gradient/state mismatch");
    }
    state.t += 1;
    const double b1 = state.cfg.beta1;
    const double b2 = state.cfg.beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k].size != grads[k].size || params[k].size != state.m[k].size()) {
            throw ShapeError("adam_step block size mismatch");
        }
        double* p = params[k].data;
        const double* g = grads[k].data;
        auto& m = state.m[k];
        auto& v = state.v[k];
        for (std::size_t i = 0; i < params[k].size; ++i) {
            if (!std::isfinite(g[i])) {
                throw NumericsError("non-finite gradient in adam_step");
            }
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] / corr1;
            const double vhat = v[i] / corr2;
            p[i] -= state.cfg.lr * mhat / (std::sqrt(vhat) + state.cfg.eps);
        }
    }
}

nlohmann::ordered_json layer_to_json(const DenseLayer& layer) {
    nlohmann::ordered_json j;
    j["in"] = layer.in_dim();
    j["out"] = layer.out_dim();
    j["activation"] = activation_name(layer.act);
    j["leaky_slope"] = layer.leaky_slope;
    j["weight"] = layer.weight.data;
    j["has_bias"] = layer.has_bias;
    j["bias"] = layer.bias;
    return j;
}

DenseLayer layer_from_json(const nlohmann::ordered_json& j) {
    DenseLayer layer;
    try {
        const int in = j.at("in").get<int>();
        const int out = j.at("out").get<int>();
        layer.weight = Tensor2(in, out);
        const auto w = j.at("weight").get<std::vector<double>>();
        if (w.size() != layer.weight.data.size()) {
            throw ArtifactError("checkpoint weight size mismatch");
        }
        layer.weight.data = w;
        layer.act = activation_from_name(j.at("activation").get<std::string>());
        layer.leaky_slope = j.at("leaky_slope").get<double>();
        layer.has_bias = j.at("has_bias").get<bool>();
        layer.bias = j.at("bias").get<std::vector<double>>();
        if (layer.has_bias && static_cast<int>(layer.bias.size()) != out) {
            throw ArtifactError("checkpoint bias size mismatch");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactError(std::string("bad layer JSON: ") + e.what());
    }
    return layer;
}

nlohmann::ordered_json adam_to_json(const AdamState& s) {
    nlohmann::ordered_json j;
    j["t"] = s.t;
    j["lr"] = s.cfg.lr;
    j["beta1"] = s.cfg.beta1;
    j["beta2"] = s.cfg.beta2;
    j["eps"] = s.cfg.eps;
    j["m"] = s.m;
    j["v"] = s.v;
    return j;
}

AdamState adam_from_json(const nlohmann::ordered_json& j) {
    AdamState s;
    try {
        s.t = j.at("t").get<std::int64_t>();
        s.cfg.lr = j.at("lr").get<double>();
        s.cfg.beta1 = j.at("beta1").get<double>();
        s.cfg.beta2 = j.at("beta2").get<double>();
        s.cfg.eps = j.at("eps").get<double>();
        s.m = j.at("m").get<std::vector<std::vector<double>>>();
        s.v = j.at("v").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactError(std::string("bad adam JSON: ") + e.what());
    }
    return s;
}

}  // namespace leapgrid
