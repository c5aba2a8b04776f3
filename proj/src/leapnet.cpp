#include "leapgrid/leapnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>

#include "leapgrid/errors.hpp"

namespace leapgrid {

Standardizer Standardizer::fit(const Tensor2& data) {
    if (data.rows == 0) throw ShapeError("cannot fit standardizer on empty data");
    Standardizer s;
    s.mean.assign(data.cols, 0.0);
    s.scale.assign(data.cols, 1.0);
    for (int j = 0; j < data.cols; ++j) {
        double acc = 0.0;
        for (int i = 0; i < data.rows; ++i) acc += data(i, j);
        s.mean[j] = acc / data.rows;
        double sq = 0.0;
        for (int i = 0; i < data.rows; ++i) {
            const double d = data(i, j) - s.mean[j];
            sq += d * d;
        }
        const double sd = std::sqrt(sq / data.rows);
        s.scale[j] = sd < 1e-12 ? 1.0 : sd;  // constant features pass through
    }
    return s;
}

Standardizer Standardizer::identity(int dim) {
    Standardizer s;
    s.mean.assign(dim, 0.0);
    s.scale.assign(dim, 1.0);
    return s;
}

Tensor2 Standardizer::transform(const Tensor2& x) const {
    if (x.cols != dim()) throw ShapeError("standardizer dimension mismatch");
    Tensor2 out = x;
    for (int i = 0; i < x.rows; ++i) {
        for (int j = 0; j < x.cols; ++j) out(i, j) = (x(i, j) - mean[j]) / scale[j];
    }
    return out;
}

Tensor2 Standardizer::inverse(const Tensor2& x) const {
    if (x.cols != dim()) throw ShapeError("standardizer dimension mismatch");
    Tensor2 out = x;
    for (int i = 0; i < x.rows; ++i) {
        for (int j = 0; j < x.cols; ++j) out(i, j) = x(i, j) * scale[j] + mean[j];
    }
    return out;
}

int LeapNetConfig::auto_hidden(int n_x) {
    const auto scaled = static_cast<int>(std::lround(200.0 * n_x / 153.0));
    return std::clamp(scaled, 48, 200);
}

LeapNet LeapNet::init(const LeapNetConfig& cfg, std::uint64_t seed) {
    if (cfg.n_x <= 0 || cfg.n_tau <= 0 || cfg.n_y <= 0) {
        throw ShapeError("LeapNetConfig dimensions must be positive");
    }
    LeapNet net;
    net.cfg = cfg;
    const int h = cfg.effective_hidden();
    const int lat = cfg.n_tau * cfg.units_per_action;
    std::mt19937_64 rng(seed);

    int in = cfg.n_x;
    for (int l = 0; l < cfg.encoder_layers; ++l) {
        net.encoder.push_back(make_dense(in, h, Activation::leaky_relu, rng, true, cfg.leaky_slope));
        in = h;
    }
    net.latent_encoder = make_dense(h, lat, Activation::identity, rng, true);
    net.latent_decoder = make_dense(lat, h, Activation::identity, rng, false);
    for (int l = 0; l < cfg.decoder_layers - 1; ++l) {
        net.decoder.push_back(make_dense(h, h, Activation::leaky_relu, rng, true, cfg.leaky_slope));
    }
    net.decoder.push_back(make_dense(h, cfg.n_y, Activation::identity, rng, true));

    net.x_std = Standardizer::identity(cfg.n_x);
    net.y_std = Standardizer::identity(cfg.n_y);
    return net;
}

namespace {

// Each topology bit covers `k` consecutive latent units.
Tensor2 expand_mask(const Tensor2& tau, int k) {
    Tensor2 mask(tau.rows, tau.cols * k);
    for (int i = 0; i < tau.rows; ++i) {
        for (int a = 0; a < tau.cols; ++a) {
            for (int u = 0; u < k; ++u) mask(i, a * k + u) = tau(i, a);
        }
    }
    return mask;
}

// Affine layer with identity activation (the e / d submodules).
Tensor2 linear_forward(const DenseLayer& layer, const Tensor2& x, LayerCache* cache) {
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
    return z;
}

Tensor2 linear_backward(const DenseLayer& layer, const LayerCache& cache, const Tensor2& d_out,
                        LayerGrads& grads) {
    grads.d_weight = matmul_tn(cache.input, d_out);
    if (layer.has_bias) {
        grads.d_bias.assign(layer.bias.size(), 0.0);
        for (int i = 0; i < d_out.rows; ++i) {
            for (int j = 0; j < d_out.cols; ++j) grads.d_bias[j] += d_out(i, j);
        }
    }
    return matmul_nt(d_out, layer.weight);
}

}  // namespace

Tensor2 LeapNet::forward_std(const Tensor2& x_std_in, const Tensor2& tau, Cache* cache) const {
    if (tau.cols != cfg.n_tau) {
        throw ShapeError("tau has " + std::to_string(tau.cols) + " columns, expected " +
                         std::to_string(cfg.n_tau));
    }
    if (tau.rows != x_std_in.rows) throw ShapeError("x / tau batch sizes differ");

    Cache local;
    Cache* c = cache ? cache : &local;
    c->enc = forward_cached(encoder, x_std_in);
    const Tensor2& h = c->enc.output;

    const Tensor2 e_out = linear_forward(latent_encoder, h, &c->lat_enc);
    c->mask = expand_mask(tau, cfg.units_per_action);
    c->masked = e_out;
    for (std::size_t i = 0; i < c->masked.data.size(); ++i) c->masked.data[i] *= c->mask.data[i];
    const Tensor2 leap = linear_forward(latent_decoder, c->masked, &c->lat_dec);

    c->latent_sum = h;
    for (std::size_t i = 0; i < c->latent_sum.data.size(); ++i) {
        c->latent_sum.data[i] += leap.data[i];
    }
    c->dec = forward_cached(decoder, c->latent_sum);
    return c->dec.output;
}

Tensor2 LeapNet::predict(const Tensor2& x_mw, const Tensor2& tau) const {
    return y_std.inverse(forward_std(x_std.transform(x_mw), tau, nullptr));
}

Tensor2 LeapNet::predict_reference(const Tensor2& x_mw) const {
    const Tensor2 h = forward(encoder, x_std.transform(x_mw));
    return y_std.inverse(forward(decoder, h));
}

LeapNet::Grads LeapNet::backward(const Cache& cache, const Tensor2& upstream) const {
    Grads g;
    const BackwardResult dec_back = leapgrid::backward(decoder, cache.dec, upstream);
    g.decoder = dec_back.layers;
    const Tensor2& d_latent_sum = dec_back.d_input;

    // Leap branch: latent_sum = h + d(e(h) * mask).
    Tensor2 d_masked = linear_backward(latent_decoder, cache.lat_dec, d_latent_sum, g.latent_decoder);
    for (std::size_t i = 0; i < d_masked.data.size(); ++i) d_masked.data[i] *= cache.mask.data[i];
    Tensor2 d_h = linear_backward(latent_encoder, cache.lat_enc, d_masked, g.latent_encoder);
    for (std::size_t i = 0; i < d_h.data.size(); ++i) d_h.data[i] += d_latent_sum.data[i];

    const BackwardResult enc_back = leapgrid::backward(encoder, cache.enc, d_h);
    g.encoder = enc_back.layers;
    return g;
}

std::vector<ParamView> LeapNet::params() {
    std::vector<ParamView> views = layer_params(encoder);
    views.push_back({latent_encoder.weight.data.data(), latent_encoder.weight.data.size()});
    views.push_back({latent_encoder.bias.data(), latent_encoder.bias.size()});
    views.push_back({latent_decoder.weight.data.data(), latent_decoder.weight.data.size()});
    auto dec = layer_params(decoder);
    views.insert(views.end(), dec.begin(), dec.end());
    return views;
}

std::vector<ParamView> LeapNet::grad_params(Grads& g) const {
    std::vector<ParamView> views = grad_views(g.encoder);
    views.push_back({g.latent_encoder.d_weight.data.data(), g.latent_encoder.d_weight.data.size()});
    views.push_back({g.latent_encoder.d_bias.data(), g.latent_encoder.d_bias.size()});
    views.push_back({g.latent_decoder.d_weight.data.data(), g.latent_decoder.d_weight.data.size()});
    auto dec = grad_views(g.decoder);
    views.insert(views.end(), dec.begin(), dec.end());
    return views;
}

std::size_t LeapNet::param_count() const {
    std::size_t count = latent_encoder.weight.size() + latent_encoder.bias.size() +
                        latent_decoder.weight.size();
    for (const DenseLayer& l : encoder) count += l.weight.size() + l.bias.size();
    for (const DenseLayer& l : decoder) count += l.weight.size() + l.bias.size();
    return count;
}

BaselineNet BaselineNet::init(const BaselineConfig& cfg, std::uint64_t seed) {
    if (cfg.n_x <= 0 || cfg.n_tau <= 0 || cfg.n_y <= 0) {
        throw ShapeError("BaselineConfig dimensions must be positive");
    }
    BaselineNet net;
    net.cfg = cfg;
    const int h = cfg.hidden;
    if (h <= 0) throw ShapeError("baseline hidden width must be resolved before init");
    std::mt19937_64 rng(seed);
    net.input_layer =
        make_dense(cfg.n_x + cfg.n_tau, h, Activation::leaky_relu, rng, true, cfg.leaky_slope);
    for (int b = 0; b < cfg.blocks; ++b) {
        net.blocks.push_back(make_dense(h, h, Activation::leaky_relu, rng, true, cfg.leaky_slope));
    }
    net.head = make_dense(h, cfg.n_y, Activation::identity, rng, true);
    net.x_std = Standardizer::identity(cfg.n_x);
    net.y_std = Standardizer::identity(cfg.n_y);
    return net;
}

namespace {

Tensor2 concat_cols(const Tensor2& a, const Tensor2& b) {
    if (a.rows != b.rows) throw ShapeError("concat row mismatch");
    Tensor2 out(a.rows, a.cols + b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int j = 0; j < a.cols; ++j) out(i, j) = a(i, j);
        for (int j = 0; j < b.cols; ++j) out(i, a.cols + j) = b(i, j);
    }
    return out;
}

double act_value(double z, double slope) { return z > 0 ? z : slope * z; }
double act_grad(double z, double slope) { return z > 0 ? 1.0 : slope; }

}  // namespace

Tensor2 BaselineNet::forward_std(const Tensor2& x_std_in, const Tensor2& tau, Cache* cache) const {
    if (tau.cols != cfg.n_tau) throw ShapeError("tau dimension mismatch");
    if (tau.rows != x_std_in.rows) throw ShapeError("x / tau batch sizes differ");
    Cache local;
    Cache* c = cache ? cache : &local;
    c->blocks.resize(blocks.size());

    const Tensor2 joined = concat_cols(x_std_in, tau);
    Tensor2 z = linear_forward(input_layer, joined, &c->input);
    for (double& v : z.data) v = act_value(v, cfg.leaky_slope);

    for (std::size_t b = 0; b < blocks.size(); ++b) {
        Tensor2 block_out = linear_forward(blocks[b], z, &c->blocks[b]);
        for (std::size_t i = 0; i < z.data.size(); ++i) {
            z.data[i] += act_value(block_out.data[i], cfg.leaky_slope);
        }
    }
    return linear_forward(head, z, &c->head);
}

Tensor2 BaselineNet::predict(const Tensor2& x_mw, const Tensor2& tau) const {
    return y_std.inverse(forward_std(x_std.transform(x_mw), tau, nullptr));
}

BaselineNet::Grads BaselineNet::backward(const Cache& cache, const Tensor2& upstream) const {
    Grads g;
    g.blocks.resize(blocks.size());
    Tensor2 d_z = linear_backward(head, cache.head, upstream, g.head);

    for (std::size_t b = blocks.size(); b-- > 0;) {
        Tensor2 d_block_out = d_z;
        for (std::size_t i = 0; i < d_block_out.data.size(); ++i) {
            d_block_out.data[i] *= act_grad(cache.blocks[b].pre_act.data[i], cfg.leaky_slope);
        }
        const Tensor2 d_block_in = linear_backward(blocks[b], cache.blocks[b], d_block_out, g.blocks[b]);
        for (std::size_t i = 0; i < d_z.data.size(); ++i) d_z.data[i] += d_block_in.data[i];
    }

    for (std::size_t i = 0; i < d_z.data.size(); ++i) {
        d_z.data[i] *= act_grad(cache.input.pre_act.data[i], cfg.leaky_slope);
    }
    linear_backward(input_layer, cache.input, d_z, g.input_layer);
    return g;
}

std::vector<ParamView> BaselineNet::params() {
    std::vector<ParamView> views;
    views.push_back({input_layer.weight.data.data(), input_layer.weight.data.size()});
    views.push_back({input_layer.bias.data(), input_layer.bias.size()});
    for (DenseLayer& l : blocks) {
        views.push_back({l.weight.data.data(), l.weight.data.size()});
        views.push_back({l.bias.data(), l.bias.size()});
    }
    views.push_back({head.weight.data.data(), head.weight.data.size()});
    views.push_back({head.bias.data(), head.bias.size()});
    return views;
}

std::vector<ParamView> BaselineNet::grad_params(Grads& g) const {
    std::vector<ParamView> views;
    views.push_back({g.input_layer.d_weight.data.data(), g.input_layer.d_weight.data.size()});
    views.push_back({g.input_layer.d_bias.data(), g.input_layer.d_bias.size()});
    for (LayerGrads& lg : g.blocks) {
        views.push_back({lg.d_weight.data.data(), lg.d_weight.data.size()});
        views.push_back({lg.d_bias.data(), lg.d_bias.size()});
    }
    views.push_back({g.head.d_weight.data.data(), g.head.d_weight.data.size()});
    views.push_back({g.head.d_bias.data(), g.head.d_bias.size()});
    return views;
}

std::size_t BaselineNet::param_count() const {
    std::size_t count = input_layer.weight.size() + input_layer.bias.size() + head.weight.size() +
                        head.bias.size();
    for (const DenseLayer& l : blocks) count += l.weight.size() + l.bias.size();
    return count;
}

namespace {

std::size_t leap_param_count_for(const LeapNetConfig& cfg) {
    const std::size_t h = static_cast<std::size_t>(cfg.effective_hidden());
    const std::size_t lat = static_cast<std::size_t>(cfg.n_tau) * cfg.units_per_action;
    std::size_t count = 0;
    std::size_t in = cfg.n_x;
    for (int l = 0; l < cfg.encoder_layers; ++l) {
        count += in * h + h;
        in = h;
    }
    count += h * lat + lat;  // e
    count += lat * h;        // d (no bias)
    for (int l = 0; l < cfg.decoder_layers - 1; ++l) count += h * h + h;
    count += h * cfg.n_y + cfg.n_y;
    return count;
}

}  // namespace

int baseline_parity_hidden(const LeapNetConfig& leap_cfg, int blocks) {
    const std::size_t target = leap_param_count_for(leap_cfg);
    const std::size_t n_in = static_cast<std::size_t>(leap_cfg.n_x) + leap_cfg.n_tau;
    int best = 1;
    std::size_t best_diff = std::numeric_limits<std::size_t>::max();
    for (int h = 1; h <= 4096; ++h) {
        const std::size_t hs = static_cast<std::size_t>(h);
        const std::size_t count = n_in * hs + hs + blocks * (hs * hs + hs) + hs * leap_cfg.n_y +
                                  static_cast<std::size_t>(leap_cfg.n_y);
        const std::size_t diff = count > target ? count - target : target - count;
        if (diff < best_diff) {
            best_diff = diff;
            best = h;
        }
    }
    return best;
}

namespace {

Tensor2 leap_at(const LeapNet& net, const Tensor2& e_out, const Tensor2& tau) {
    Tensor2 masked = e_out;
    const Tensor2 mask = expand_mask(tau, net.cfg.units_per_action);
    for (std::size_t i = 0; i < masked.data.size(); ++i) masked.data[i] *= mask.data[i];
    return matmul(masked, net.latent_decoder.weight);
}

double max_abs_diff(const Tensor2& a, const Tensor2& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
    }
    return worst;
}

}  // namespace

namespace {

Tensor2 latent_input_at(const LeapNet& net, const std::vector<double>& x_row) {
    if (static_cast<int>(x_row.size()) != net.cfg.n_x) {
        throw ShapeError("superposition check: x has wrong dimension");
    }
    Tensor2 x(1, net.cfg.n_x);
    std::copy(x_row.begin(), x_row.end(), x.data.begin());
    const Tensor2 h = forward(net.encoder, net.x_std.transform(x));
    Tensor2 e_b = matmul(h, net.latent_encoder.weight);
    for (int c = 0; c < e_b.cols; ++c) e_b(0, c) += net.latent_encoder.bias[c];
    return e_b;
}

Tensor2 tau_row(int n, std::initializer_list<std::size_t> ones) {
    Tensor2 t(1, n);
    for (std::size_t i : ones) t(0, static_cast<int>(i)) = 1.0;
    return t;
}

}  // namespace

double superposition_check(const LeapNet& net, const std::vector<double>& x_row, std::size_t i,
                           std::size_t j) {
    if (i == j) throw ValidationError("superposition_check requires i != j");
    const int n = net.cfg.n_tau;
    const Tensor2 e_b = latent_input_at(net, x_row);
    const Tensor2 union_leap = leap_at(net, e_b, tau_row(n, {i, j}));
    Tensor2 sum = leap_at(net, e_b, tau_row(n, {i}));
    const Tensor2 lj = leap_at(net, e_b, tau_row(n, {j}));
    for (std::size_t k = 0; k < sum.data.size(); ++k) sum.data[k] += lj.data[k];
    return max_abs_diff(union_leap, sum);
}

double superposition_check3(const LeapNet& net, const std::vector<double>& x_row, std::size_t i,
                            std::size_t j, std::size_t k) {
    if (i == j || j == k || i == k) {
        throw ValidationError("superposition_check3 requires distinct indices");
    }
    const int n = net.cfg.n_tau;
    const Tensor2 e_b = latent_input_at(net, x_row);
    const Tensor2 union_leap = leap_at(net, e_b, tau_row(n, {i, j, k}));
    Tensor2 sum = leap_at(net, e_b, tau_row(n, {i}));
    for (std::size_t u : {j, k}) {
        const Tensor2 lu = leap_at(net, e_b, tau_row(n, {u}));
        for (std::size_t a = 0; a < sum.data.size(); ++a) sum.data[a] += lu.data[a];
    }
    return max_abs_diff(union_leap, sum);
}

std::string to_string(ModelKind kind) { return kind == ModelKind::leap ? "leap" : "baseline"; }

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "leap") return ModelKind::leap;
    if (s == "baseline") return ModelKind::baseline;
    throw ValidationError("unknown model kind '" + s + "'");
}

ModelKind kind_of(const SurrogateModel& m) {
    return std::holds_alternative<LeapNet>(m) ? ModelKind::leap : ModelKind::baseline;
}

Tensor2 model_predict(const SurrogateModel& m, const Tensor2& x_mw, const Tensor2& tau) {
    return std::visit([&](const auto& net) { return net.predict(x_mw, tau); }, m);
}

std::size_t model_param_count(const SurrogateModel& m) {
    return std::visit([](const auto& net) { return net.param_count(); }, m);
}

namespace {

nlohmann::ordered_json standardizer_to_json(const Standardizer& s) {
    nlohmann::ordered_json j;
    j["mean"] = s.mean;
    j["scale"] = s.scale;
    return j;
}

Standardizer standardizer_from_json(const nlohmann::ordered_json& j) {
    Standardizer s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.scale = j.at("scale").get<std::vector<double>>();
    if (s.mean.size() != s.scale.size()) throw ArtifactError("bad standardizer block");
    return s;
}

}  // namespace

nlohmann::ordered_json checkpoint_to_json(const SurrogateModel& m, std::uint64_t seed,
                                          int epochs_trained, const AdamState* adam) {
    nlohmann::ordered_json j;
    j["schema"] = "leapgrid-checkpoint-v1";
    j["model"] = to_string(kind_of(m));
    j["seed"] = seed;
    j["epochs_trained"] = epochs_trained;
    if (const auto* leap = std::get_if<LeapNet>(&m)) {
        nlohmann::ordered_json cj;
        cj["n_x"] = leap->cfg.n_x;
        cj["n_tau"] = leap->cfg.n_tau;
        cj["n_y"] = leap->cfg.n_y;
        cj["hidden"] = leap->cfg.hidden;
        cj["encoder_layers"] = leap->cfg.encoder_layers;
        cj["decoder_layers"] = leap->cfg.decoder_layers;
        cj["units_per_action"] = leap->cfg.units_per_action;
        cj["leaky_slope"] = leap->cfg.leaky_slope;
        j["config"] = cj;
        j["x_std"] = standardizer_to_json(leap->x_std);
        j["y_std"] = standardizer_to_json(leap->y_std);
        auto& enc = j["encoder"] = nlohmann::ordered_json::array();
        for (const auto& l : leap->encoder) enc.push_back(layer_to_json(l));
        j["latent_encoder"] = layer_to_json(leap->latent_encoder);
        j["latent_decoder"] = layer_to_json(leap->latent_decoder);
        auto& dec = j["decoder"] = nlohmann::ordered_json::array();
        for (const auto& l : leap->decoder) dec.push_back(layer_to_json(l));
    } else {
        const auto& base = std::get<BaselineNet>(m);
        nlohmann::ordered_json cj;
        cj["n_x"] = base.cfg.n_x;
        cj["n_tau"] = base.cfg.n_tau;
        cj["n_y"] = base.cfg.n_y;
        cj["hidden"] = base.cfg.hidden;
        cj["blocks"] = base.cfg.blocks;
        cj["leaky_slope"] = base.cfg.leaky_slope;
        j["config"] = cj;
        j["x_std"] = standardizer_to_json(base.x_std);
        j["y_std"] = standardizer_to_json(base.y_std);
        j["input_layer"] = layer_to_json(base.input_layer);
        auto& blocks = j["blocks"] = nlohmann::ordered_json::array();
        for (const auto& l : base.blocks) blocks.push_back(layer_to_json(l));
        j["head"] = layer_to_json(base.head);
    }
    if (adam) {
        j["adam"] = adam_to_json(*adam);
    } else {
        j["adam"] = nullptr;
    }
    return j;
}

LoadedCheckpoint checkpoint_from_json(const nlohmann::ordered_json& j) {
    LoadedCheckpoint out;
    try {
        if (j.at("schema").get<std::string>() != "leapgrid-checkpoint-v1") {
            throw ArtifactError("unsupported checkpoint schema");
        }
        out.seed = j.at("seed").get<std::uint64_t>();
        out.epochs_trained = j.at("epochs_trained").get<int>();
        const ModelKind kind = model_kind_from_string(j.at("model").get<std::string>());
        const auto& cj = j.at("config");
        if (kind == ModelKind::leap) {
            LeapNet net;
            net.cfg.n_x = cj.at("n_x").get<int>();
            net.cfg.n_tau = cj.at("n_tau").get<int>();
            net.cfg.n_y = cj.at("n_y").get<int>();
            net.cfg.hidden = cj.at("hidden").get<int>();
            net.cfg.encoder_layers = cj.at("encoder_layers").get<int>();
            net.cfg.decoder_layers = cj.at("decoder_layers").get<int>();
            net.cfg.units_per_action = cj.at("units_per_action").get<int>();
            net.cfg.leaky_slope = cj.at("leaky_slope").get<double>();
            net.x_std = standardizer_from_json(j.at("x_std"));
            net.y_std = standardizer_from_json(j.at("y_std"));
            for (const auto& lj : j.at("encoder")) net.encoder.push_back(layer_from_json(lj));
            net.latent_encoder = layer_from_json(j.at("latent_encoder"));
            net.latent_decoder = layer_from_json(j.at("latent_decoder"));
            for (const auto& lj : j.at("decoder")) net.decoder.push_back(layer_from_json(lj));
            if (net.latent_decoder.has_bias) {
                throw ArtifactError("latent decoder must be bias-free");
            }
            out.model = std::move(net);
        } else {
            BaselineNet net;
            net.cfg.n_x = cj.at("n_x").get<int>();
            net.cfg.n_tau = cj.at("n_tau").get<int>();
            net.cfg.n_y = cj.at("n_y").get<int>();
            net.cfg.hidden = cj.at("hidden").get<int>();
            net.cfg.blocks = cj.at("blocks").get<int>();
            net.cfg.leaky_slope = cj.at("leaky_slope").get<double>();
            net.x_std = standardizer_from_json(j.at("x_std"));
            net.y_std = standardizer_from_json(j.at("y_std"));
            net.input_layer = layer_from_json(j.at("input_layer"));
            for (const auto& lj : j.at("blocks")) net.blocks.push_back(layer_from_json(lj));
            net.head = layer_from_json(j.at("head"));
            out.model = std::move(net);
        }
        if (!j.at("adam").is_null()) {
            out.has_adam = true;
            out.adam = adam_from_json(j.at("adam"));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactError(std::string("bad checkpoint JSON: ") + e.what());
    }
    return out;
}

void save_checkpoint(const std::string& path, const SurrogateModel& m, std::uint64_t seed,
                     int epochs_trained, const AdamState* adam) {
    std::ofstream out(path);
    if (!out) throw ArtifactError("cannot write checkpoint '" + path + "'");
    out << checkpoint_to_json(m, seed, epochs_trained, adam).dump() << "\n";
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open checkpoint '" + path + "'");
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactError(std::string("unparsable checkpoint: ") + e.what());
    }
    return checkpoint_from_json(j);
}

}  // namespace leapgrid
