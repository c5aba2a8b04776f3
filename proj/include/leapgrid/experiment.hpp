#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "leapgrid/actions.hpp"
#include "leapgrid/datagen.hpp"
#include "leapgrid/train.hpp"

namespace leapgrid {

// Stable process exit codes (CLI contract).
enum ExitCode {
    kExitOk = 0,
    kExitInput = 2,     // missing files, unparsable case, bad config
    kExitNumerics = 3,  // non-finite loss / gradients
    kExitDims = 4,      // dimension or provenance mismatch
    kExitArtifact = 5,  // malformed dataset/CSV/checkpoint artifact
};

struct ExperimentConfig {
    std::string case_file;
    std::string out_dir = "out";
    ActionConfig actions;
    SamplingConfig sampling;

    struct Train {
        ModelKind model = ModelKind::leap;
        int epochs = 100;
        int batch_size = 32;
        double learning_rate = 1e-3;
        std::vector<std::uint64_t> seeds = {1};
        int eval_every = 1;
        int hidden = 0;
        int units_per_action = 2;
        std::vector<double> cv_learning_rates;
        int cv_epochs = 10;
        bool resume = false;
    } train;

    struct Bench {
        int n_samples = 10000;
        std::string checkpoint;  // optional; fresh default model when empty
    } bench;

    struct Eval {
        std::string checkpoint;
        std::string dataset;
    } eval;

    struct Report {
        std::vector<std::string> metrics;  // metrics CSV paths
        std::string out = "report.csv";
    } report;
};

ExperimentConfig load_experiment_config(const std::string& path);

// Paths produced by cmd_gen_data under cfg.out_dir.
struct GenDataPaths {
    std::string dictionary;
    std::string source_train;
    std::string source_test;
    std::string target_test;
    std::string manifest;
};
GenDataPaths gen_data_paths(const std::string& out_dir);

// Writes dictionary.json, source_train/source_test/target_test .jsonl and a
// manifest with row counts and FNV-1a content hashes.
GenDataPaths cmd_gen_data(const ExperimentConfig& cfg);

// Trains cfg.train.model for every seed; appends per-epoch MetricsRows to
// out_dir/metrics_<model>.csv and writes one checkpoint per seed.
struct TrainOutputs {
    std::string metrics_csv;
    std::vector<std::string> checkpoints;
};
TrainOutputs cmd_train(const ExperimentConfig& cfg);

// Deterministic evaluation summary of a checkpoint on a dataset, including
// the DC-approximation errors against the same AC-truth rows.
nlohmann::ordered_json cmd_eval(const ExperimentConfig& cfg);

// Wall-clock per-sample comparison: AC oracle vs batched neural inference.
nlohmann::ordered_json cmd_bench(const ExperimentConfig& cfg);

// Plot-ready per-epoch median / [20%, 80%] quantile bands across seeds.
std::string cmd_report(const ExperimentConfig& cfg);

}  // namespace leapgrid
