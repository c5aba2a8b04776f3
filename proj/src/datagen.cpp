#include "leapgrid/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "leapgrid/errors.hpp"
#include "leapgrid/rng.hpp"

namespace leapgrid {

std::string to_string(RowTag tag) {
    switch (tag) {
        case RowTag::reference: return "reference";
        case RowTag::unary: return "unary";
        case RowTag::double_action: return "double";
    }
    return "reference";
}

RowTag row_tag_from_string(const std::string& s) {
    if (s == "reference") return RowTag::reference;
    if (s == "unary") return RowTag::unary;
    if (s == "double") return RowTag::double_action;
    throw ArtifactError("unknown row tag '" + s + "'");
}

OracleFn ac_oracle(const GridCase& grid, const ActionDictionary& dict, double tol, int max_iter) {
    return [grid, dict, tol, max_iter](const TopologyVector& tau, const InjectionSample& x) {
        const GridCase modified = apply_topology(grid, tau, dict);
        return ac_solve(modified, x, tol, max_iter).flows_mw;
    };
}

namespace {

struct GenSplit {
    double total_nominal_load = 0.0;      // positive MW
    double slack_gen_nominal = 0.0;       // scheduled generation at the slack bus
    double nonslack_gen_nominal = 0.0;
    std::vector<std::size_t> nonslack_gens;
    std::vector<std::size_t> slack_gens;
};

GenSplit classify(const GridCase& grid) {
    GenSplit gs;
    const int slack_id = grid.buses[grid.slack_index()].id;
    for (std::size_t i = 0; i < grid.injections.size(); ++i) {
        const Injection& inj = grid.injections[i];
        if (inj.kind == InjectionKind::load) {
            gs.total_nominal_load -= inj.p_mw;
        } else if (inj.bus == slack_id) {
            gs.slack_gens.push_back(i);
            gs.slack_gen_nominal += inj.p_mw;
        } else {
            gs.nonslack_gens.push_back(i);
            gs.nonslack_gen_nominal += inj.p_mw;
        }
    }
    return gs;
}

// NaN means "auto": use the case's own nominal generation/load imbalance so
// the degenerate range lo = hi = 1 reproduces nominal injections exactly.
double effective_allowance(const GridCase& grid, const SamplingConfig& config) {
    if (!std::isnan(config.loss_allowance)) return config.loss_allowance;
    const GenSplit gs = classify(grid);
    if (gs.total_nominal_load <= 0.0) return 0.0;
    const double total_gen = gs.slack_gen_nominal + gs.nonslack_gen_nominal;
    return (total_gen - gs.total_nominal_load) / gs.total_nominal_load;
}

}  // namespace

InjectionSample sample_injection(const GridCase& grid, std::mt19937_64& rng,
                                 const SamplingConfig& config) {
    if (config.load_scale_lo <= 0 || config.load_scale_lo > config.load_scale_hi) {
        throw ValidationError("load scale range must satisfy 0 < lo <= hi");
    }
    std::vector<double> p;
    p.reserve(grid.injections.size());
    for (const Injection& inj : grid.injections) p.push_back(inj.p_mw);

    double sampled_load = 0.0;  // positive MW
    for (std::size_t i = 0; i < grid.injections.size(); ++i) {
        if (grid.injections[i].kind != InjectionKind::load) continue;
        const double s =
            config.load_scale_lo + (config.load_scale_hi - config.load_scale_lo) * uniform01(rng);
        p[i] = s * grid.injections[i].p_mw;
        sampled_load -= p[i];
    }

    const GenSplit gs = classify(grid);
    const double target_gen = (1.0 + effective_allowance(grid, config)) * sampled_load;
    if (!gs.nonslack_gens.empty() && gs.nonslack_gen_nominal != 0.0) {
        const double c = (target_gen - gs.slack_gen_nominal) / gs.nonslack_gen_nominal;
        for (std::size_t i : gs.nonslack_gens) p[i] = c * grid.injections[i].p_mw;
    } else if (!gs.slack_gens.empty()) {
        if (gs.slack_gen_nominal != 0.0) {
            const double c = target_gen / gs.slack_gen_nominal;
            for (std::size_t i : gs.slack_gens) p[i] = c * grid.injections[i].p_mw;
        } else {
            p[gs.slack_gens.front()] = target_gen;
        }
    }
    return injection_from_p(grid, p);
}

std::vector<std::size_t> sample_unary_actions(const GridCase& grid, const ActionDictionary& dict,
                                              const SamplingConfig& config) {
    if (config.n_unary_actions > static_cast<int>(dict.size())) {
        throw DataGenError("requested " + std::to_string(config.n_unary_actions) +
                           " unary actions from a dictionary of " + std::to_string(dict.size()));
    }
    std::vector<std::size_t> applicable;
    for (std::size_t i = 0; i < dict.size(); ++i) {
        try {
            apply_topology(grid, TopologyVector::unary(dict.size(), i), dict);
            applicable.push_back(i);
        } catch (const TopologyError&) {
        }
    }
    if (config.n_unary_actions > static_cast<int>(applicable.size())) {
        throw DataGenError("only " + std::to_string(applicable.size()) +
                           " applicable unary actions, requested " +
                           std::to_string(config.n_unary_actions));
    }
    std::mt19937_64 rng(mix_seed(config.seed, 0xA0));
    shuffle_vector(applicable, rng);
    applicable.resize(static_cast<std::size_t>(config.n_unary_actions));
    return applicable;
}

namespace {

DatasetHeader make_header(const GridCase& grid, const ActionDictionary& dict,
                          const SamplingConfig& config, const std::vector<std::size_t>& actions) {
    DatasetHeader h;
    h.grid_name = grid.name;
    h.dict_hash = dictionary_hash(dict);
    h.n_x = static_cast<int>(grid.injections.size());
    h.n_tau = static_cast<int>(dict.size());
    h.n_y = static_cast<int>(grid.branches.size());
    h.seed = config.seed;
    h.unary_actions = actions;
    h.config = sampling_config_to_json(config);
    return h;
}

// Draw -> solve with per-row retries; failures counted across the dataset.
struct RowSampler {
    const GridCase& grid;
    const SamplingConfig& config;
    const OracleFn& oracle;
    std::mt19937_64 rng;
    long failures = 0;
    long successes = 0;

    DatasetRow make_row(const TopologyVector& tau, RowTag tag) {
        for (int attempt = 0; attempt <= config.max_retries_per_row; ++attempt) {
            const InjectionSample x = sample_injection(grid, rng, config);
            try {
                DatasetRow row;
                row.y = oracle(tau, x);
                row.x = x.p_mw;
                row.tau = tau;
                row.tag = tag;
                ++successes;
                return row;
            } catch (const ConvergenceError&) {
                ++failures;
            } catch (const SolveError&) {
                ++failures;
            }
        }
        throw DataGenError("oracle failed " + std::to_string(config.max_retries_per_row + 1) +
                           " consecutive times for one row; sampling range looks unrealistic");
    }

    void check_failure_budget() const {
        const long total = failures + successes;
        if (total > 0 &&
            static_cast<double>(failures) > config.max_failure_fraction * static_cast<double>(total)) {
            throw DataGenError("oracle failure fraction " + std::to_string(failures) + "/" +
                               std::to_string(total) + " exceeds the configured budget");
        }
    }
};

}  // namespace

Dataset build_source_dataset(const GridCase& grid, const ActionDictionary& dict,
                             const SamplingConfig& config, const OracleFn& oracle) {
    return build_source_dataset(grid, dict, config, oracle,
                                sample_unary_actions(grid, dict, config));
}

Dataset build_source_dataset(const GridCase& grid, const ActionDictionary& dict,
                             const SamplingConfig& config, const OracleFn& oracle,
                             const std::vector<std::size_t>& unary_actions) {
    if (static_cast<int>(unary_actions.size()) != config.n_unary_actions) {
        throw DataGenError("unary action set does not match config.n_unary_actions");
    }
    Dataset ds;
    ds.header = make_header(grid, dict, config, unary_actions);
    ds.rows.reserve(static_cast<std::size_t>(config.n_ref_samples) +
                    static_cast<std::size_t>(config.n_per_unary) * unary_actions.size());

    RowSampler sampler{grid, config, oracle, std::mt19937_64(mix_seed(config.seed, 0xD5))};
    const TopologyVector tau0 = TopologyVector::zeros(dict.size());
    for (int r = 0; r < config.n_ref_samples; ++r) {
        ds.rows.push_back(sampler.make_row(tau0, RowTag::reference));
    }
    for (std::size_t action : unary_actions) {
        const TopologyVector tau = TopologyVector::unary(dict.size(), action);
        for (int r = 0; r < config.n_per_unary; ++r) {
            ds.rows.push_back(sampler.make_row(tau, RowTag::unary));
        }
    }
    sampler.check_failure_budget();
    return ds;
}

Dataset build_target_dataset(const GridCase& grid, const ActionDictionary& dict,
                             const SamplingConfig& config, const OracleFn& oracle,
                             const std::vector<std::size_t>& source_unary_set) {
    std::vector<std::pair<std::size_t, std::size_t>> compatible;
    for (std::size_t a = 0; a < source_unary_set.size(); ++a) {
        for (std::size_t b = a + 1; b < source_unary_set.size(); ++b) {
            const auto i = source_unary_set[a];
            const auto j = source_unary_set[b];
            try {
                apply_topology(grid, TopologyVector::pair(dict.size(), i, j), dict);
                compatible.emplace_back(i, j);
            } catch (const TopologyError&) {
            }
        }
    }
    if (config.n_double_actions > static_cast<int>(compatible.size())) {
        throw DataGenError("only " + std::to_string(compatible.size()) +
                           " compatible double actions, requested " +
                           std::to_string(config.n_double_actions));
    }
    std::mt19937_64 pair_rng(mix_seed(config.seed, 0xB2));
    shuffle_vector(compatible, pair_rng);
    compatible.resize(static_cast<std::size_t>(config.n_double_actions));

    Dataset ds;
    ds.header = make_header(grid, dict, config, source_unary_set);
    ds.rows.reserve(compatible.size() * static_cast<std::size_t>(config.n_per_double));
    RowSampler sampler{grid, config, oracle, std::mt19937_64(mix_seed(config.seed, 0xD6))};
    for (const auto& [i, j] : compatible) {
        const TopologyVector tau = TopologyVector::pair(dict.size(), i, j);
        for (int r = 0; r < config.n_per_double; ++r) {
            ds.rows.push_back(sampler.make_row(tau, RowTag::double_action));
        }
    }
    sampler.check_failure_budget();
    return ds;
}

nlohmann::ordered_json sampling_config_to_json(const SamplingConfig& c) {
    nlohmann::ordered_json j;
    j["seed"] = c.seed;
    j["load_scale_lo"] = c.load_scale_lo;
    j["load_scale_hi"] = c.load_scale_hi;
    j["n_unary_actions"] = c.n_unary_actions;
    j["n_ref_samples"] = c.n_ref_samples;
    j["n_per_unary"] = c.n_per_unary;
    j["n_double_actions"] = c.n_double_actions;
    j["n_per_double"] = c.n_per_double;
    if (std::isnan(c.loss_allowance)) {
        j["loss_allowance"] = nullptr;
    } else {
        j["loss_allowance"] = c.loss_allowance;
    }
    j["max_failure_fraction"] = c.max_failure_fraction;
    j["max_retries_per_row"] = c.max_retries_per_row;
    return j;
}

SamplingConfig sampling_config_from_json(const nlohmann::ordered_json& j) {
    SamplingConfig c;
    try {
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("load_scale_lo")) c.load_scale_lo = j.at("load_scale_lo").get<double>();
        if (j.contains("load_scale_hi")) c.load_scale_hi = j.at("load_scale_hi").get<double>();
        if (j.contains("n_unary_actions")) c.n_unary_actions = j.at("n_unary_actions").get<int>();
        if (j.contains("n_ref_samples")) c.n_ref_samples = j.at("n_ref_samples").get<int>();
        if (j.contains("n_per_unary")) c.n_per_unary = j.at("n_per_unary").get<int>();
        if (j.contains("n_double_actions")) c.n_double_actions = j.at("n_double_actions").get<int>();
        if (j.contains("n_per_double")) c.n_per_double = j.at("n_per_double").get<int>();
        if (j.contains("loss_allowance") && !j.at("loss_allowance").is_null()) {
            c.loss_allowance = j.at("loss_allowance").get<double>();
        }
        if (j.contains("max_failure_fraction")) {
            c.max_failure_fraction = j.at("max_failure_fraction").get<double>();
        }
        if (j.contains("max_retries_per_row")) {
            c.max_retries_per_row = j.at("max_retries_per_row").get<int>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactError(std::string("bad sampling config: ") + e.what());
    }
    return c;
}

void write_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ArtifactError("cannot write dataset '" + path + "'");
    nlohmann::ordered_json h;
    h["schema"] = dataset.header.schema;
    h["grid_name"] = dataset.header.grid_name;
    h["dict_hash"] = dataset.header.dict_hash;
    h["n_x"] = dataset.header.n_x;
    h["n_tau"] = dataset.header.n_tau;
    h["n_y"] = dataset.header.n_y;
    h["seed"] = dataset.header.seed;
    h["unary_actions"] = dataset.header.unary_actions;
    h["config"] = dataset.header.config;
    h["rows"] = dataset.rows.size();
    out << h.dump() << "\n";
    for (const DatasetRow& row : dataset.rows) {
        nlohmann::ordered_json rj;
        rj["x"] = row.x;
        auto& tau = rj["tau"] = nlohmann::ordered_json::array();
        for (auto b : row.tau.bits) tau.push_back(static_cast<int>(b));
        rj["y"] = row.y;
        rj["tag"] = to_string(row.tag);
        out << rj.dump() << "\n";
    }
}

Dataset read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ArtifactError("dataset '" + path + "' is empty");
    Dataset ds;
    try {
        const auto h = nlohmann::ordered_json::parse(line);
        ds.header.schema = h.at("schema").get<std::string>();
        if (ds.header.schema != "leapgrid-dataset-v1") {
            throw ArtifactError("unsupported dataset schema '" + ds.header.schema + "'");
        }
        ds.header.grid_name = h.at("grid_name").get<std::string>();
        ds.header.dict_hash = h.at("dict_hash").get<std::string>();
        ds.header.n_x = h.at("n_x").get<int>();
        ds.header.n_tau = h.at("n_tau").get<int>();
        ds.header.n_y = h.at("n_y").get<int>();
        ds.header.seed = h.at("seed").get<std::uint64_t>();
        ds.header.unary_actions = h.at("unary_actions").get<std::vector<std::size_t>>();
        ds.header.config = h.at("config");
        const auto expected_rows = h.at("rows").get<std::size_t>();

        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto rj = nlohmann::ordered_json::parse(line);
            DatasetRow row;
            row.x = rj.at("x").get<std::vector<double>>();
            for (const auto& b : rj.at("tau")) {
                row.tau.bits.push_back(static_cast<std::uint8_t>(b.get<int>()));
            }
            row.y = rj.at("y").get<std::vector<double>>();
            row.tag = row_tag_from_string(rj.at("tag").get<std::string>());
            if (static_cast<int>(row.x.size()) != ds.header.n_x ||
                static_cast<int>(row.tau.size()) != ds.header.n_tau ||
                static_cast<int>(row.y.size()) != ds.header.n_y) {
                throw ArtifactError("dataset row dimensions do not match header");
            }
            ds.rows.push_back(std::move(row));
        }
        if (ds.rows.size() != expected_rows) {
            throw ArtifactError("dataset row count " + std::to_string(ds.rows.size()) +
                                " does not match header (" + std::to_string(expected_rows) + ")");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactError(std::string("malformed dataset: ") + e.what());
    }
    return ds;
}

}  // namespace leapgrid
