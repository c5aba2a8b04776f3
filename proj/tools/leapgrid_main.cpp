#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "leapgrid/errors.hpp"
#include "leapgrid/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::int64_t seed = -1;
    std::string out;
};

leapgrid::ExperimentConfig load_with_overrides(const CommonArgs& args) {
    leapgrid::ExperimentConfig cfg = leapgrid::load_experiment_config(args.config);
    if (args.seed >= 0) {
        cfg.sampling.seed = static_cast<std::uint64_t>(args.seed);
        cfg.train.seeds = {static_cast<std::uint64_t>(args.seed)};
    }
    if (!args.out.empty()) cfg.out_dir = args.out;
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "experiment config (JSON)")->required();
    cmd->add_option("--seed", args.seed, "override sampling seed / train seed list");
    cmd->add_option("--out", args.out, "override output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"leapgrid: LEAP-net surrogate experiments on power grids"};
    app.require_subcommand(1);

    CommonArgs gen_args, train_args, eval_args, bench_args, report_args;
    CLI::App* gen = app.add_subcommand("gen-data", "generate source/target datasets");
    add_common(gen, gen_args);
    CLI::App* train = app.add_subcommand("train", "train a surrogate model per seed");
    add_common(train, train_args);
    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    add_common(eval, eval_args);
    CLI::App* bench = app.add_subcommand("bench", "AC oracle vs neural inference timing");
    add_common(bench, bench_args);
    CLI::App* report = app.add_subcommand("report", "median and quantile bands across seeds");
    add_common(report, report_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const auto cfg = load_with_overrides(gen_args);
            const auto paths = leapgrid::cmd_gen_data(cfg);
            std::cout << "wrote " << paths.source_train << "\n"
                      << "wrote " << paths.source_test << "\n"
                      << "wrote " << paths.target_test << "\n"
                      << "manifest " << paths.manifest << "\n";
        } else if (train->parsed()) {
            const auto cfg = load_with_overrides(train_args);
            const auto outputs = leapgrid::cmd_train(cfg);
            std::cout << "metrics " << outputs.metrics_csv << "\n";
            for (const auto& ck : outputs.checkpoints) std::cout << "checkpoint " << ck << "\n";
        } else if (eval->parsed()) {
            const auto cfg = load_with_overrides(eval_args);
            std::cout << leapgrid::cmd_eval(cfg).dump(1) << "\n";
        } else if (bench->parsed()) {
            const auto cfg = load_with_overrides(bench_args);
            std::cout << leapgrid::cmd_bench(cfg).dump(1) << "\n";
        } else if (report->parsed()) {
            const auto cfg = load_with_overrides(report_args);
            std::cout << "report " << leapgrid::cmd_report(cfg) << "\n";
        }
    } catch (const leapgrid::NumericsError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return leapgrid::kExitNumerics;
    } catch (const leapgrid::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return leapgrid::kExitNumerics;
    } catch (const leapgrid::SolveError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return leapgrid::kExitNumerics;
    } catch (const leapgrid::ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return leapgrid::kExitDims;
    } catch (const leapgrid::ArtifactError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return leapgrid::kExitArtifact;
    } catch (const leapgrid::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return leapgrid::kExitInput;
    } catch (const leapgrid::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return leapgrid::kExitInput;
    } catch (const leapgrid::TopologyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return leapgrid::kExitInput;
    } catch (const leapgrid::DataGenError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return leapgrid::kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return leapgrid::kExitInput;
    }
    return leapgrid::kExitOk;
}
