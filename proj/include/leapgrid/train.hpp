#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "leapgrid/datagen.hpp"
#include "leapgrid/leapnet.hpp"
#include "leapgrid/tensor.hpp"

namespace leapgrid {

struct TrainConfig {
    int epochs = 100;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double lr_decay = 1.0;  // multiplicative per-epoch factor (1 = constant)
    std::uint64_t seed = 1;
    int eval_every = 1;  // evaluation cadence in epochs
    // When non-empty and the model is the baseline, a short cross-validation
    // pass picks the learning rate on a held-out source split.
    std::vector<double> cv_learning_rates;
    int cv_epochs = 10;
    double cv_holdout_fraction = 0.1;
};

struct DataMatrices {
    Tensor2 x;    // rows x n_x (MW)
    Tensor2 tau;  // rows x n_tau (0/1)
    Tensor2 y;    // rows x n_y (MW)
};

DataMatrices to_matrices(const Dataset& dataset);

struct EvalMetrics {
    double mse_std = 0.0;   // standardized targets
    double mse_mw2 = 0.0;   // physical MW^2
    double mape_pct = 0.0;  // over entries with |y| >= 1 MW
};

EvalMetrics evaluate_model(const SurrogateModel& model, const DataMatrices& data);

struct EpochRecord {
    int epoch = 0;
    EvalMetrics train;
    std::optional<EvalMetrics> regular_test;
    std::optional<EvalMetrics> super_test;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    double final_train_mse_std = 0.0;
    double chosen_learning_rate = 0.0;
    int epochs_trained = 0;  // cumulative, including any resumed epochs
};

// Minibatch Adam on the standardized MSE. Standardization statistics are
// fitted from `train_data` unless the model already carries them (resume).
// Deterministic for a fixed seed: shuffling, init and batch order all
// derive from config.seed. Throws NumericsError if the loss goes
// non-finite (message carries epoch/batch).
TrainResult train_model(SurrogateModel& model, const DataMatrices& train_data,
                        const DataMatrices* regular_test, const DataMatrices* super_test,
                        const TrainConfig& config, AdamState* resume_adam = nullptr,
                        int start_epoch = 0);

// Builds and trains a fresh model of the given kind on source data.
SurrogateModel make_model(ModelKind kind, int n_x, int n_tau, int n_y, int hidden,
                          int units_per_action, std::uint64_t seed);

}  // namespace leapgrid
