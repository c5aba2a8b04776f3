#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "leapgrid/actions.hpp"
#include "leapgrid/grid.hpp"
#include "leapgrid/powerflow.hpp"

namespace leapgrid {

struct SamplingConfig {
    std::uint64_t seed = 1;
    double load_scale_lo = 0.7;
    double load_scale_hi = 1.3;
    int n_unary_actions = 0;
    int n_ref_samples = 0;
    int n_per_unary = 0;
    int n_double_actions = 0;
    int n_per_double = 0;
    // Generation margin over total load. NaN means "auto": use the case's
    // nominal generation/load imbalance, so a degenerate [1, 1] range
    // reproduces the nominal injections exactly.
    double loss_allowance = std::numeric_limits<double>::quiet_NaN();
    double max_failure_fraction = 0.1;  // oracle failures beyond this abort
    int max_retries_per_row = 20;
};

enum class RowTag { reference, unary, double_action };
std::string to_string(RowTag tag);
RowTag row_tag_from_string(const std::string& s);

struct DatasetRow {
    std::vector<double> x;  // active power per injection, MW
    TopologyVector tau;
    std::vector<double> y;  // from-end flow per branch, MW
    RowTag tag = RowTag::reference;
};

struct DatasetHeader {
    std::string schema = "leapgrid-dataset-v1";
    std::string grid_name;
    std::string dict_hash;
    int n_x = 0;
    int n_tau = 0;
    int n_y = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> unary_actions;  // dictionary indices sampled
    nlohmann::ordered_json config;           // SamplingConfig echo
};

struct Dataset {
    DatasetHeader header;
    std::vector<DatasetRow> rows;
};

// The physical simulator interface rows are generated against.
using OracleFn = std::function<FlowVector(const TopologyVector&, const InjectionSample&)>;

// Wraps powerflow::oracle over a fixed grid/dictionary.
OracleFn ac_oracle(const GridCase& grid, const ActionDictionary& dict,
                   double tol = 1e-8, int max_iter = 20);

// Scales each load by an independent uniform draw from [lo, hi], rescales
// non-slack generation proportionally so total generation = (1 +
// loss_allowance) * total load, and derives load reactive power at the
// nominal power factor.
InjectionSample sample_injection(const GridCase& grid, std::mt19937_64& rng,
                                 const SamplingConfig& config);

// Unary actions sampled without replacement among the individually
// applicable dictionary entries (apply_topology succeeds).
std::vector<std::size_t> sample_unary_actions(const GridCase& grid, const ActionDictionary& dict,
                                              const SamplingConfig& config);

// n_ref_samples rows at tau-empty plus n_per_unary rows per sampled unary
// action. Rows whose oracle call fails are resampled; more than
// max_failure_fraction failures raise DataGenError.
Dataset build_source_dataset(const GridCase& grid, const ActionDictionary& dict,
                             const SamplingConfig& config, const OracleFn& oracle);
Dataset build_source_dataset(const GridCase& grid, const ActionDictionary& dict,
                             const SamplingConfig& config, const OracleFn& oracle,
                             const std::vector<std::size_t>& unary_actions);

// n_double_actions pairs (i, j) sampled without replacement among the
// compatible pairs of source unary actions, n_per_double rows each.
Dataset build_target_dataset(const GridCase& grid, const ActionDictionary& dict,
                             const SamplingConfig& config, const OracleFn& oracle,
                             const std::vector<std::size_t>& source_unary_set);

// Line-delimited persistence: one JSON header line, then one JSON object
// per row, floats in shortest round-trip form.
void write_dataset(const Dataset& dataset, const std::string& path);
Dataset read_dataset(const std::string& path);  // throws ArtifactError

nlohmann::ordered_json sampling_config_to_json(const SamplingConfig& c);
SamplingConfig sampling_config_from_json(const nlohmann::ordered_json& j);

}  // namespace leapgrid
