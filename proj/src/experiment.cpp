#include "leapgrid/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "leapgrid/errors.hpp"
#include "leapgrid/matpower.hpp"
#include "leapgrid/metrics.hpp"
#include "leapgrid/powerflow.hpp"
#include "leapgrid/rng.hpp"

namespace fs = std::filesystem;

namespace leapgrid {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("bad config '" + path + "': " + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.case_file = j.at("case_file").get<std::string>();
        if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
        if (j.contains("actions")) {
            const auto& a = j.at("actions");
            if (a.contains("line_disconnects")) cfg.actions.line_disconnects = a.at("line_disconnects").get<bool>();
            if (a.contains("bus_splits")) cfg.actions.bus_splits = a.at("bus_splits").get<bool>();
            if (a.contains("min_split_elements")) cfg.actions.min_split_elements = a.at("min_split_elements").get<int>();
        }
        if (j.contains("sampling")) cfg.sampling = sampling_config_from_json(j.at("sampling"));
        if (j.contains("train")) {
            const auto& t = j.at("train");
            if (t.contains("model")) cfg.train.model = model_kind_from_string(t.at("model").get<std::string>());
            if (t.contains("epochs")) cfg.train.epochs = t.at("epochs").get<int>();
            if (t.contains("batch_size")) cfg.train.batch_size = t.at("batch_size").get<int>();
            if (t.contains("learning_rate")) cfg.train.learning_rate = t.at("learning_rate").get<double>();
            if (t.contains("seeds")) cfg.train.seeds = t.at("seeds").get<std::vector<std::uint64_t>>();
            if (t.contains("eval_every")) cfg.train.eval_every = t.at("eval_every").get<int>();
            if (t.contains("hidden")) cfg.train.hidden = t.at("hidden").get<int>();
            if (t.contains("units_per_action")) cfg.train.units_per_action = t.at("units_per_action").get<int>();
            if (t.contains("cv_learning_rates")) cfg.train.cv_learning_rates = t.at("cv_learning_rates").get<std::vector<double>>();
            if (t.contains("cv_epochs")) cfg.train.cv_epochs = t.at("cv_epochs").get<int>();
            if (t.contains("resume")) cfg.train.resume = t.at("resume").get<bool>();
        }
        if (j.contains("bench")) {
            const auto& b = j.at("bench");
            if (b.contains("n_samples")) cfg.bench.n_samples = b.at("n_samples").get<int>();
            if (b.contains("checkpoint")) cfg.bench.checkpoint = b.at("checkpoint").get<std::string>();
        }
        if (j.contains("eval")) {
            const auto& e = j.at("eval");
            if (e.contains("checkpoint")) cfg.eval.checkpoint = e.at("checkpoint").get<std::string>();
            if (e.contains("dataset")) cfg.eval.dataset = e.at("dataset").get<std::string>();
        }
        if (j.contains("report")) {
            const auto& r = j.at("report");
            if (r.contains("metrics")) cfg.report.metrics = r.at("metrics").get<std::vector<std::string>>();
            if (r.contains("out")) cfg.report.out = r.at("out").get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("bad config '" + path + "': " + e.what());
    }
    if (cfg.train.seeds.empty()) throw ParseError("config needs at least one training seed");
    {
        std::set<std::uint64_t> distinct(cfg.train.seeds.begin(), cfg.train.seeds.end());
        if (distinct.size() != cfg.train.seeds.size()) {
            throw ParseError("training seeds must be distinct");
        }
    }
    return cfg;
}

GenDataPaths gen_data_paths(const std::string& out_dir) {
    GenDataPaths p;
    p.dictionary = out_dir + "/dictionary.json";
    p.source_train = out_dir + "/source_train.jsonl";
    p.source_test = out_dir + "/source_test.jsonl";
    p.target_test = out_dir + "/target_test.jsonl";
    p.manifest = out_dir + "/manifest.json";
    return p;
}

GenDataPaths cmd_gen_data(const ExperimentConfig& cfg) {
    if (!fs::exists(cfg.case_file)) {
        throw ParseError("case file '" + cfg.case_file + "' does not exist");
    }
    const GridCase grid = load_matpower_file(cfg.case_file);
    const ActionDictionary dict = enumerate_actions(grid, cfg.actions);
    fs::create_directories(cfg.out_dir);
    const GenDataPaths paths = gen_data_paths(cfg.out_dir);

    {
        std::ofstream out(paths.dictionary);
        if (!out) throw ArtifactError("cannot write '" + paths.dictionary + "'");
        out << dictionary_to_json(dict).dump() << "\n";
    }

    const auto actions = sample_unary_actions(grid, dict, cfg.sampling);
    const OracleFn oracle = ac_oracle(grid, dict);

    SamplingConfig test_cfg = cfg.sampling;
    test_cfg.seed = cfg.sampling.seed + 1;
    SamplingConfig target_cfg = cfg.sampling;
    target_cfg.seed = cfg.sampling.seed + 2;

    const Dataset source_train = build_source_dataset(grid, dict, cfg.sampling, oracle, actions);
    const Dataset source_test = build_source_dataset(grid, dict, test_cfg, oracle, actions);
    const Dataset target_test = build_target_dataset(grid, dict, target_cfg, oracle, actions);

    write_dataset(source_train, paths.source_train);
    write_dataset(source_test, paths.source_test);
    write_dataset(target_test, paths.target_test);

    nlohmann::ordered_json manifest;
    manifest["schema"] = "leapgrid-manifest-v1";
    manifest["case"] = grid.name;
    manifest["dict_hash"] = dictionary_hash(dict);
    manifest["dict_size"] = dict.size();
    manifest["unary_actions"] = actions;
    auto file_entry = [](const std::string& path, std::size_t rows) {
        nlohmann::ordered_json f;
        f["path"] = fs::path(path).filename().string();
        f["rows"] = rows;
        f["fnv1a64"] = fnv1a64_hex(read_file(path));
        return f;
    };
    manifest["files"] = nlohmann::ordered_json::array(
        {file_entry(paths.source_train, source_train.rows.size()),
         file_entry(paths.source_test, source_test.rows.size()),
         file_entry(paths.target_test, target_test.rows.size())});
    manifest["sampling"] = sampling_config_to_json(cfg.sampling);
    std::ofstream mout(paths.manifest);
    if (!mout) throw ArtifactError("cannot write '" + paths.manifest + "'");
    mout << manifest.dump(1) << "\n";
    return paths;
}

namespace {

std::string checkpoint_path(const ExperimentConfig& cfg, std::uint64_t seed) {
    return cfg.out_dir + "/checkpoint_" + to_string(cfg.train.model) + "_seed" +
           std::to_string(seed) + ".json";
}

}  // namespace

TrainOutputs cmd_train(const ExperimentConfig& cfg) {
    const GenDataPaths paths = gen_data_paths(cfg.out_dir);
    for (const std::string& p : {paths.source_train, paths.source_test, paths.target_test}) {
        if (!fs::exists(p)) {
            throw ParseError("dataset '" + p + "' not found; run gen-data first");
        }
    }
    const Dataset source_train = read_dataset(paths.source_train);
    const Dataset source_test = read_dataset(paths.source_test);
    const Dataset target_test = read_dataset(paths.target_test);
    if (source_train.rows.empty()) throw ShapeError("source training set is empty");

    const DataMatrices train_m = to_matrices(source_train);
    const DataMatrices reg_m = to_matrices(source_test);
    const DataMatrices super_m = to_matrices(target_test);

    TrainOutputs out;
    out.metrics_csv = cfg.out_dir + "/metrics_" + to_string(cfg.train.model) + ".csv";
    std::vector<MetricsRow> all_rows;
    const std::string model_name = to_string(cfg.train.model);

    for (std::uint64_t seed : cfg.train.seeds) {
        TrainConfig tc;
        tc.epochs = cfg.train.epochs;
        tc.batch_size = cfg.train.batch_size;
        tc.learning_rate = cfg.train.learning_rate;
        tc.seed = seed;
        tc.eval_every = cfg.train.eval_every;
        tc.cv_learning_rates = cfg.train.cv_learning_rates;
        tc.cv_epochs = cfg.train.cv_epochs;

        SurrogateModel model = make_model(cfg.train.model, source_train.header.n_x,
                                          source_train.header.n_tau, source_train.header.n_y,
                                          cfg.train.hidden, cfg.train.units_per_action, seed);
        AdamState adam;
        int start_epoch = 0;
        const std::string ck_path = checkpoint_path(cfg, seed);
        if (cfg.train.resume && fs::exists(ck_path)) {
            LoadedCheckpoint ck = load_checkpoint(ck_path);
            model = std::move(ck.model);
            start_epoch = ck.epochs_trained;
            if (ck.has_adam) adam = std::move(ck.adam);
        }

        const TrainResult result =
            train_model(model, train_m, &reg_m, &super_m, tc, &adam, start_epoch);

        for (const EpochRecord& rec : result.history) {
            all_rows.push_back({model_name, seed, rec.epoch, "train", rec.train.mse_std,
                                rec.train.mse_mw2, rec.train.mape_pct});
            if (rec.regular_test) {
                all_rows.push_back({model_name, seed, rec.epoch, "regular_test",
                                    rec.regular_test->mse_std, rec.regular_test->mse_mw2,
                                    rec.regular_test->mape_pct});
            }
            if (rec.super_test) {
                all_rows.push_back({model_name, seed, rec.epoch, "super_test",
                                    rec.super_test->mse_std, rec.super_test->mse_mw2,
                                    rec.super_test->mape_pct});
            }
        }
        save_checkpoint(ck_path, model, seed, result.epochs_trained, &adam);
        out.checkpoints.push_back(ck_path);
    }
    write_metrics_csv(out.metrics_csv, all_rows, /*append=*/cfg.train.resume);
    return out;
}

nlohmann::ordered_json cmd_eval(const ExperimentConfig& cfg) {
    if (cfg.eval.checkpoint.empty() || cfg.eval.dataset.empty()) {
        throw ParseError("eval requires config keys eval.checkpoint and eval.dataset");
    }
    const LoadedCheckpoint ck = load_checkpoint(cfg.eval.checkpoint);
    const Dataset dataset = read_dataset(cfg.eval.dataset);
    if (dataset.rows.empty()) throw ShapeError("dataset has no rows");

    const DataMatrices m = to_matrices(dataset);
    const auto [n_x, n_tau, n_y] = std::visit(
        [](const auto& net) { return std::tuple(net.cfg.n_x, net.cfg.n_tau, net.cfg.n_y); },
        ck.model);
    if (n_x != dataset.header.n_x || n_tau != dataset.header.n_tau || n_y != dataset.header.n_y) {
        throw ShapeError("checkpoint dimensions do not match the dataset");
    }

    const EvalMetrics metrics = evaluate_model(ck.model, m);
    const Tensor2 pred = model_predict(ck.model, m.x, m.tau);
    double max_abs = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        max_abs = std::max(max_abs, std::abs(pred.data[i] - m.y.data[i]));
    }

    nlohmann::ordered_json out;
    out["checkpoint"] = cfg.eval.checkpoint;
    out["dataset"] = cfg.eval.dataset;
    out["model"] = to_string(kind_of(ck.model));
    out["rows"] = dataset.rows.size();
    out["mse_std"] = metrics.mse_std;
    out["mse_mw2"] = metrics.mse_mw2;
    out["mape_pct"] = metrics.mape_pct;
    out["per_line_max_abs_err_mw"] = max_abs;

    // DC baseline on the same rows, against the stored AC truth.
    if (!cfg.case_file.empty()) {
        if (!fs::exists(cfg.case_file)) {
            throw ParseError("case file '" + cfg.case_file + "' does not exist");
        }
        const GridCase grid = load_matpower_file(cfg.case_file);
        const GenDataPaths paths = gen_data_paths(cfg.out_dir);
        if (!fs::exists(paths.dictionary)) {
            throw ParseError("dictionary '" + paths.dictionary + "' not found; run gen-data first");
        }
        nlohmann::ordered_json dj;
        try {
            dj = nlohmann::ordered_json::parse(read_file(paths.dictionary));
        } catch (const nlohmann::json::exception& e) {
            throw ArtifactError(std::string("malformed dictionary: ") + e.what());
        }
        const ActionDictionary dict = dictionary_from_json(dj);
        if (dictionary_hash(dict) != dataset.header.dict_hash) {
            throw ShapeError("dictionary hash does not match the dataset provenance");
        }
        double acc = 0.0;
        double mape_acc = 0.0;
        long mape_n = 0;
        double dc_max = 0.0;
        for (const DatasetRow& row : dataset.rows) {
            const GridCase modified = apply_topology(grid, row.tau, dict);
            const FlowVector dc = dc_solve(modified, injection_from_p(grid, row.x));
            for (std::size_t b = 0; b < dc.size(); ++b) {
                const double diff = dc[b] - row.y[b];
                acc += diff * diff;
                dc_max = std::max(dc_max, std::abs(diff));
                if (std::abs(row.y[b]) >= 1.0) {
                    mape_acc += std::abs(diff) / std::abs(row.y[b]);
                    ++mape_n;
                }
            }
        }
        const double n_entries =
            static_cast<double>(dataset.rows.size()) * static_cast<double>(grid.branches.size());
        nlohmann::ordered_json dc;
        dc["mse_mw2"] = acc / n_entries;
        dc["mape_pct"] = mape_n > 0 ? 100.0 * mape_acc / static_cast<double>(mape_n) : 0.0;
        dc["per_line_max_abs_err_mw"] = dc_max;
        out["dc"] = dc;
    }
    return out;
}

namespace {

std::string cpu_description() {
    std::ifstream in("/proc/cpuinfo");
    std::string line;
    std::string model = "unknown cpu";
    while (std::getline(in, line)) {
        if (line.rfind("model name", 0) == 0) {
            const auto colon = line.find(':');
            if (colon != std::string::npos) model = line.substr(colon + 2);
            break;
        }
    }
    return model + " (" + std::to_string(std::thread::hardware_concurrency()) + " threads)";
}

}  // namespace

nlohmann::ordered_json cmd_bench(const ExperimentConfig& cfg) {
    if (cfg.bench.n_samples < 100) {
        throw ValidationError("bench requires n_samples >= 100");
    }
    if (!fs::exists(cfg.case_file)) {
        throw ParseError("case file '" + cfg.case_file + "' does not exist");
    }
    const GridCase grid = load_matpower_file(cfg.case_file);
    const ActionDictionary dict = enumerate_actions(grid, cfg.actions);

    SurrogateModel model = [&]() -> SurrogateModel {
        if (!cfg.bench.checkpoint.empty()) return load_checkpoint(cfg.bench.checkpoint).model;
        return make_model(ModelKind::leap, static_cast<int>(grid.injections.size()),
                          static_cast<int>(dict.size()), static_cast<int>(grid.branches.size()),
                          cfg.train.hidden, cfg.train.units_per_action, 1);
    }();

    const int n = cfg.bench.n_samples;
    std::mt19937_64 rng(mix_seed(cfg.sampling.seed, 0xBE));
    std::vector<InjectionSample> samples;
    samples.reserve(n);
    for (int i = 0; i < n; ++i) samples.push_back(sample_injection(grid, rng, cfg.sampling));

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    double checksum = 0.0;
    for (const InjectionSample& s : samples) {
        checksum += ac_solve(grid, s).flows_mw[0];
    }
    const auto t1 = clock::now();

    Tensor2 x(n, static_cast<int>(grid.injections.size()));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < x.cols; ++j) x(i, j) = samples[i].p_mw[j];
    }
    const Tensor2 tau(n, static_cast<int>(dict.size()));
    const auto t2 = clock::now();
    const Tensor2 pred = model_predict(model, x, tau);
    const auto t3 = clock::now();
    checksum += pred(0, 0);

    const double ac_us = std::chrono::duration<double, std::micro>(t1 - t0).count() / n;
    const double nn_us = std::chrono::duration<double, std::micro>(t3 - t2).count() / n;
    nlohmann::ordered_json out;
    out["case"] = grid.name;
    out["n_samples"] = n;
    out["ac_us_per_sample"] = ac_us;
    out["nn_us_per_sample"] = nn_us;
    out["speedup"] = ac_us / nn_us;
    out["hardware"] = cpu_description();
    out["checksum"] = checksum;  // keeps the timed work observable
    return out;
}

std::string cmd_report(const ExperimentConfig& cfg) {
    std::vector<std::string> paths = cfg.report.metrics;
    if (paths.empty()) {
        for (const char* name : {"metrics_leap.csv", "metrics_baseline.csv"}) {
            const std::string p = cfg.out_dir + "/" + name;
            if (fs::exists(p)) paths.push_back(p);
        }
    }
    if (paths.empty()) {
        throw ParseError("no metrics CSV found; pass report.metrics or run train first");
    }
    std::vector<MetricsRow> rows;
    for (const std::string& p : paths) {
        const auto part = read_metrics_csv(p);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    const std::string out_path = cfg.out_dir + "/" + cfg.report.out;
    write_report_csv(out_path, summarize_metrics(rows));
    return out_path;
}

}  // namespace leapgrid
