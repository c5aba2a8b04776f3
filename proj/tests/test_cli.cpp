#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "leapgrid/errors.hpp"
#include "leapgrid/metrics.hpp"

namespace fs = std::filesystem;
using namespace leapgrid;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(LEAPGRID_CLI_PATH) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(raw);
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

// Tiny case14 experiment: fast enough for unit-level CLI checks.
nlohmann::ordered_json tiny_config(const fs::path& dir) {
    nlohmann::ordered_json j;
    j["case_file"] = std::string(LEAPGRID_SOURCE_DIR) + "/data/cases/case14.m";
    j["out_dir"] = (dir / "out").string();
    j["sampling"] = {{"seed", 5},          {"n_unary_actions", 3}, {"n_ref_samples", 24},
                     {"n_per_unary", 4},   {"n_double_actions", 2}, {"n_per_double", 3}};
    j["train"] = {{"model", "leap"},  {"epochs", 3},   {"batch_size", 8}, {"learning_rate", 1e-3},
                  {"seeds", {1, 2}},  {"eval_every", 1}, {"hidden", 12}};
    j["bench"] = {{"n_samples", 120}};
    return j;
}

fs::path write_config(const fs::path& dir, const nlohmann::ordered_json& j) {
    fs::create_directories(dir);
    const fs::path p = dir / "config.json";
    std::ofstream out(p);
    out << j.dump(1) << "\n";
    return p;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::current_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("quantile convention: linear interpolation between order statistics") {
    CHECK(quantile_linear({1.0, 2.0, 3.0}, 0.5) == doctest::Approx(2.0));
    CHECK(quantile_linear({1.0, 2.0, 3.0}, 0.2) == doctest::Approx(1.4));
    CHECK(quantile_linear({1.0, 2.0, 3.0}, 0.8) == doctest::Approx(2.6));
    CHECK(quantile_linear({5.0}, 0.2) == 5.0);
}

TEST_CASE("single-seed report collapses the quantile band") {
    std::vector<MetricsRow> rows;
    rows.push_back({"leap", 1, 1, "train", 0.5, 2.0, 10.0});
    const auto report = summarize_metrics(rows);
    REQUIRE(report.size() == 1);
    CHECK(report[0].mse_std_median == 0.5);
    CHECK(report[0].mse_std_q20 == 0.5);
    CHECK(report[0].mse_std_q80 == 0.5);
}

TEST_CASE("metrics CSV round-trip and validation") {
    const std::string path = "metrics_roundtrip.csv";
    std::vector<MetricsRow> rows;
    rows.push_back({"leap", 7, 1, "train", 0.125, 3.5, 12.25});
    rows.push_back({"baseline", 8, 2, "super_test", 1e-9, 7e3, 0.5});
    write_metrics_csv(path, rows);
    const auto back = read_metrics_csv(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].model == "leap");
    CHECK(back[0].mse_std == 0.125);
    CHECK(back[1].seed == 8);
    CHECK(back[1].mse_mw2 == 7e3);
    std::remove(path.c_str());
}

TEST_CASE("missing case file exits 2 and names the path") {
    TempDir tmp("cli_missing_case");
    auto cfg = tiny_config(tmp.path);
    cfg["case_file"] = "/nonexistent/case999.m";
    const fs::path cfg_path = write_config(tmp.path, cfg);
    const RunResult r = run_cli("gen-data --config " + cfg_path.string(), tmp.path);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("/nonexistent/case999.m") != std::string::npos);
}

TEST_CASE("gen-data / train / eval / report pipeline") {
    TempDir tmp("cli_pipeline");
    const fs::path cfg_path = write_config(tmp.path, tiny_config(tmp.path));
    const std::string cfg_arg = " --config " + cfg_path.string();

    const RunResult gen = run_cli("gen-data" + cfg_arg, tmp.path);
    REQUIRE(gen.exit_code == 0);
    const fs::path out_dir = tmp.path / "out";
    for (const char* f : {"dictionary.json", "source_train.jsonl", "source_test.jsonl",
                          "target_test.jsonl", "manifest.json"}) {
        CHECK(fs::exists(out_dir / f));
    }
    const auto manifest = nlohmann::json::parse(slurp(out_dir / "manifest.json"));
    CHECK(manifest.at("files")[0].at("rows").get<int>() == 24 + 3 * 4);
    CHECK(manifest.at("files")[2].at("rows").get<int>() == 2 * 3);

    // Determinism: regenerating produces byte-identical datasets + manifest.
    const std::string train_bytes = slurp(out_dir / "source_train.jsonl");
    const std::string manifest_bytes = slurp(out_dir / "manifest.json");
    REQUIRE(run_cli("gen-data" + cfg_arg, tmp.path).exit_code == 0);
    CHECK(slurp(out_dir / "source_train.jsonl") == train_bytes);
    CHECK(slurp(out_dir / "manifest.json") == manifest_bytes);

    const RunResult train = run_cli("train" + cfg_arg, tmp.path);
    REQUIRE(train.exit_code == 0);
    const fs::path metrics_path = out_dir / "metrics_leap.csv";
    REQUIRE(fs::exists(metrics_path));
    const auto rows = read_metrics_csv(metrics_path.string());
    // 2 seeds x 3 epochs x 3 splits.
    CHECK(rows.size() == 2 * 3 * 3);
    CHECK(fs::exists(out_dir / "checkpoint_leap_seed1.json"));
    CHECK(fs::exists(out_dir / "checkpoint_leap_seed2.json"));

    //

    // eval on the model's own training set reproduces the final train MSE.
    auto cfg_eval = tiny_config(tmp.path);
    cfg_eval["eval"] = {{"checkpoint", (out_dir / "checkpoint_leap_seed1.json").string()},
                        {"dataset", (out_dir / "source_train.jsonl").string()}};
    const fs::path cfg_eval_path = tmp.path / "config_eval.json";
    {
        std::ofstream out(cfg_eval_path);
        out << cfg_eval.dump(1) << "\n";
    }
    const RunResult ev = run_cli("eval --config " + cfg_eval_path.string(), tmp.path);
    REQUIRE(ev.exit_code == 0);
    const auto summary = nlohmann::json::parse(ev.out);
    double final_train_mse = -1.0;
    for (const auto& row : rows) {
        if (row.seed == 1 && row.split == "train" && row.epoch == 3) final_train_mse = row.mse_std;
    }
    REQUIRE(final_train_mse >= 0.0);
    CHECK(std::abs(summary.at("mse_std").get<double>() - final_train_mse) <= 1e-10);
    CHECK(summary.contains("dc"));
    CHECK(summary.at("dc").at("mse_mw2").get<double>() > 0.0);

    const RunResult rep = run_cli("report" + cfg_arg, tmp.path);
    REQUIRE(rep.exit_code == 0);
    const fs::path report_path = out_dir / "report.csv";
    REQUIRE(fs::exists(report_path));
    const std::string report_text = slurp(report_path);
    CHECK(report_text.find("# quantiles: linear interpolation") != std::string::npos);
    CHECK(report_text.find("leap,train,1,") != std::string::npos);
}

TEST_CASE("train resume continues the epoch counter") {
    TempDir tmp("cli_resume");
    auto cfg = tiny_config(tmp.path);
    cfg["train"]["seeds"] = {1};
    const fs::path cfg_path = write_config(tmp.path, cfg);
    const std::string cfg_arg = " --config " + cfg_path.string();
    REQUIRE(run_cli("gen-data" + cfg_arg, tmp.path).exit_code == 0);
    REQUIRE(run_cli("train" + cfg_arg, tmp.path).exit_code == 0);

    cfg["train"]["resume"] = true;
    write_config(tmp.path, cfg);
    REQUIRE(run_cli("train" + cfg_arg, tmp.path).exit_code == 0);
    const auto rows = read_metrics_csv((tmp.path / "out" / "metrics_leap.csv").string());
    int max_epoch = 0;
    for (const auto& row : rows) max_epoch = std::max(max_epoch, row.epoch);
    CHECK(max_epoch == 6);  // 3 fresh + 3 resumed
}

TEST_CASE("empty dataset exits 4 on eval") {
    TempDir tmp("cli_empty_dataset");
    auto cfg = tiny_config(tmp.path);
    const fs::path cfg_path = write_config(tmp.path, cfg);
    REQUIRE(run_cli("gen-data --config " + cfg_path.string(), tmp.path).exit_code == 0);
    REQUIRE(run_cli("train --config " + cfg_path.string(), tmp.path).exit_code == 0);

    // Handcraft an empty dataset with a valid header.
    const fs::path empty = tmp.path / "out" / "empty.jsonl";
    {
        std::ifstream in(tmp.path / "out" / "source_train.jsonl");
        std::string header;
        std::getline(in, header);
        auto h = nlohmann::ordered_json::parse(header);
        h["rows"] = 0;
        std::ofstream out(empty);
        out << h.dump() << "\n";
    }
    auto cfg_eval = tiny_config(tmp.path);
    cfg_eval["eval"] = {
        {"checkpoint", (tmp.path / "out" / "checkpoint_leap_seed1.json").string()},
        {"dataset", empty.string()}};
    const fs::path cfg_eval_path = tmp.path / "config_eval.json";
    {
        std::ofstream out(cfg_eval_path);
        out << cfg_eval.dump(1) << "\n";
    }
    const RunResult ev = run_cli("eval --config " + cfg_eval_path.string(), tmp.path);
    CHECK(ev.exit_code == 4);
}

TEST_CASE("checkpoint/dataset dimension mismatch exits 4") {
    TempDir tmp("cli_dim_mismatch");
    auto cfg = tiny_config(tmp.path);
    const fs::path cfg_path = write_config(tmp.path, cfg);
    REQUIRE(run_cli("gen-data --config " + cfg_path.string(), tmp.path).exit_code == 0);
    REQUIRE(run_cli("train --config " + cfg_path.string(), tmp.path).exit_code == 0);

    // A dataset claiming different dimensions in its header.
    const fs::path other = tmp.path / "out" / "otherdims.jsonl";
    {
        std::ifstream in(tmp.path / "out" / "source_train.jsonl");
        std::string header;
        std::getline(in, header);
        auto h = nlohmann::ordered_json::parse(header);
        h["n_x"] = 99;
        h["rows"] = 0;
        std::ofstream out(other);
        out << h.dump() << "\n";
    }
    auto cfg_eval = tiny_config(tmp.path);
    cfg_eval["eval"] = {
        {"checkpoint", (tmp.path / "out" / "checkpoint_leap_seed1.json").string()},
        {"dataset", other.string()}};
    const fs::path cfg_eval_path = tmp.path / "config_eval.json";
    {
        std::ofstream out(cfg_eval_path);
        out << cfg_eval.dump(1) << "\n";
    }
    CHECK(run_cli("eval --config " + cfg_eval_path.string(), tmp.path).exit_code == 4);
}

TEST_CASE("malformed or empty metrics CSV exits 5 on report") {
    TempDir tmp("cli_bad_metrics");
    auto cfg = tiny_config(tmp.path);
    const fs::path bad = tmp.path / "bad.csv";
    {
        std::ofstream out(bad);  // empty file
    }
    cfg["report"] = {{"metrics", {bad.string()}}};
    fs::create_directories(tmp.path / "out");
    const fs::path cfg_path = write_config(tmp.path, cfg);
    CHECK(run_cli("report --config " + cfg_path.string(), tmp.path).exit_code == 5);

    {
        std::ofstream out(bad);
        out << "model,seed,epoch,split,mse_std,mse_mw2,mape\n";
        out << "leap,1,1,train,not_a_number,2,3\n";
    }
    CHECK(run_cli("report --config " + cfg_path.string(), tmp.path).exit_code == 5);
}

TEST_CASE("bench smoke: JSON report with the contract fields") {
    TempDir tmp("cli_bench");
    auto cfg = tiny_config(tmp.path);
    const fs::path cfg_path = write_config(tmp.path, cfg);
    const RunResult r = run_cli("bench --config " + cfg_path.string(), tmp.path);
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("ac_us_per_sample").get<double>() > 0.0);
    CHECK(j.at("nn_us_per_sample").get<double>() > 0.0);
    CHECK(j.at("speedup").get<double>() > 0.0);
    CHECK(j.contains("hardware"));

    // n_samples below the contract floor exits 2.
    cfg["bench"]["n_samples"] = 50;
    write_config(tmp.path, cfg);
    CHECK(run_cli("bench --config " + cfg_path.string(), tmp.path).exit_code == 2);
}
