#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "leapgrid/nn.hpp"
#include "leapgrid/tensor.hpp"

namespace leapgrid {

// Per-feature affine standardization fitted on source-domain data only.
// Features with (near) zero variance keep scale 1 so constants pass through.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Tensor2& data);
    static Standardizer identity(int dim);
    Tensor2 transform(const Tensor2& x) const;
    Tensor2 inverse(const Tensor2& x) const;
    int dim() const { return static_cast<int>(mean.size()); }

    bool operator==(const Standardizer&) const = default;
};

struct LeapNetConfig {
    int n_x = 0;
    int n_tau = 0;
    int n_y = 0;
    int hidden = 0;  // 0 -> auto_hidden(n_x)
    int encoder_layers = 2;
    int decoder_layers = 2;
    int units_per_action = 2;  // latent units per topology bit
    double leaky_slope = 0.01;

    // Reference sizing is two layers of 200 units at 153 inputs; smaller
    // cases shrink proportionally with a floor that keeps capacity usable.
    static int auto_hidden(int n_x);
    int effective_hidden() const { return hidden > 0 ? hidden : auto_hidden(n_x); }

    bool operator==(const LeapNetConfig&) const = default;
};

// y_hat = D((I + L_tau)(E(x))) with L_tau(h) = d(e(h) * mask(tau)), the
// mask repeating each bit `units_per_action` times. d is linear with no
// bias, so tau = 0 reproduces D(E(x)) bit-exactly and leaps over disjoint
// bits add exactly.
struct LeapNet {
    LeapNetConfig cfg;
    std::vector<DenseLayer> encoder;   // E: n_x -> hidden -> ... -> hidden
    DenseLayer latent_encoder;         // e: hidden -> n_tau*k, linear + bias
    DenseLayer latent_decoder;         // d: n_tau*k -> hidden, linear, NO bias
    std::vector<DenseLayer> decoder;   // D: hidden -> ... -> n_y
    Standardizer x_std, y_std;

    static LeapNet init(const LeapNetConfig& cfg, std::uint64_t seed);

    // Physical-units prediction (standardization handled internally).
    Tensor2 predict(const Tensor2& x_mw, const Tensor2& tau) const;
    // The tau-empty path D(E(x)); identical bits to predict(x, zeros).
    Tensor2 predict_reference(const Tensor2& x_mw) const;

    struct Cache {
        ForwardCache enc;
        LayerCache lat_enc;
        Tensor2 mask;      // batch x n_tau*k (expanded bits)
        Tensor2 masked;    // e(h) * mask
        LayerCache lat_dec;
        Tensor2 latent_sum;  // h + d(...)
        ForwardCache dec;
    };
    // Standardized-space forward; x already standardized. cache optional.
    Tensor2 forward_std(const Tensor2& x_std_in, const Tensor2& tau, Cache* cache) const;

    struct Grads {
        std::vector<LayerGrads> encoder;
        LayerGrads latent_encoder;
        LayerGrads latent_decoder;
        std::vector<LayerGrads> decoder;
    };
    Grads backward(const Cache& cache, const Tensor2& upstream) const;

    std::vector<ParamView> params();
    std::vector<ParamView> grad_params(Grads& g) const;
    std::size_t param_count() const;
};

struct BaselineConfig {
    int n_x = 0;
    int n_tau = 0;
    int n_y = 0;
    int hidden = 0;  // 0 -> width matched to the LEAP parameter count
    int blocks = 2;
    double leaky_slope = 0.01;

    bool operator==(const BaselineConfig&) const = default;
};

// Fig.-2-style residual network on the concatenation (standardized x, raw
// tau): input layer, `blocks` residual blocks z + act(Wz + b), linear head.
struct BaselineNet {
    BaselineConfig cfg;
    DenseLayer input_layer;
    std::vector<DenseLayer> blocks;
    DenseLayer head;
    Standardizer x_std, y_std;

    static BaselineNet init(const BaselineConfig& cfg, std::uint64_t seed);

    Tensor2 predict(const Tensor2& x_mw, const Tensor2& tau) const;

    struct Cache {
        LayerCache input;
        std::vector<LayerCache> blocks;
        LayerCache head;
    };
    Tensor2 forward_std(const Tensor2& x_std_in, const Tensor2& tau, Cache* cache) const;

    struct Grads {
        LayerGrads input_layer;
        std::vector<LayerGrads> blocks;
        LayerGrads head;
    };
    Grads backward(const Cache& cache, const Tensor2& upstream) const;

    std::vector<ParamView> params();
    std::vector<ParamView> grad_params(Grads& g) const;
    std::size_t param_count() const;
};

// Hidden width whose total baseline parameter count lands closest to the
// LEAP configuration's (fair-comparison contract, within 10%).
int baseline_parity_hidden(const LeapNetConfig& leap_cfg, int blocks = 2);

// Max abs difference between L_{tau_i OR tau_j} and L_{tau_i} + L_{tau_j}
// at the latent point E(std(x)). Exact up to rounding when d is linear
// without bias. Requires i != j.
double superposition_check(const LeapNet& net, const std::vector<double>& x_row,
                           std::size_t i, std::size_t j);
// Same, for a three-way union versus the sum of three single leaps.
double superposition_check3(const LeapNet& net, const std::vector<double>& x_row,
                            std::size_t i, std::size_t j, std::size_t k);

enum class ModelKind { leap, baseline };
std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

using SurrogateModel = std::variant<LeapNet, BaselineNet>;

ModelKind kind_of(const SurrogateModel& m);
Tensor2 model_predict(const SurrogateModel& m, const Tensor2& x_mw, const Tensor2& tau);
std::size_t model_param_count(const SurrogateModel& m);

// Versioned JSON checkpoint with explicit shapes, layer order, RNG seed
// and (optionally) optimizer state for exact resume.
nlohmann::ordered_json checkpoint_to_json(const SurrogateModel& m, std::uint64_t seed,
                                          int epochs_trained, const AdamState* adam);
struct LoadedCheckpoint {
    SurrogateModel model;
    std::uint64_t seed = 0;
    int epochs_trained = 0;
    bool has_adam = false;
    AdamState adam;
};
LoadedCheckpoint checkpoint_from_json(const nlohmann::ordered_json& j);
void save_checkpoint(const std::string& path, const SurrogateModel& m, std::uint64_t seed,
                     int epochs_trained, const AdamState* adam);
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace leapgrid
