// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qewo/harness.hpp"

namespace {

bool parse_range(const std::string& text, int& lo, int& hi) {
    const auto pos = text.find("..");
    if (pos == std::string::npos) return false;
    try {
        lo = std::stoi(text.substr(0, pos));
        hi = std::stoi(text.substr(pos + 2));
    } catch (...) {
        return false;
    }
    return lo >= 2 && hi >= lo;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qewo: Grover-amplified discrete weight search for MLP training"};
    app.require_subcommand(1);

    std::string exp_id, out_dir = "out", config_file, data_dir, resolution = "17..32";
    std::uint64_t seed = 42;
    int runs = 0;
    int epochs = 10;
    bool noise = false, reduced = false;

    auto* run_cmd = app.add_subcommand("run", "run one of the experiments exp1..exp5");
    run_cmd->add_option("exp-id", exp_id, "experiment id (exp1..exp5)")->required();
    run_cmd->add_option("--seed", seed, "master seed");
    run_cmd->add_option("--runs", runs, "override the run count (0 = experiment default)");
    run_cmd->add_option("--epochs", epochs, "epochs per run");
    run_cmd->add_flag("--noise", noise, "enable the depolarizing noise model");
    run_cmd->add_flag("--reduced", reduced, "Digits subsampled to 600 rows");
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--config", config_file, "JSON config overlay");
    run_cmd->add_option("--data-dir", data_dir, "dataset directory");

    auto* sweep_cmd = app.add_subcommand("sweep", "exp2-style hidden resolution sweep");
    sweep_cmd->add_option("--resolution", resolution, "range A..B (default 17..32)");
    sweep_cmd->add_option("--seed", seed, "master seed");
    sweep_cmd->add_option("--runs", runs, "comparison runs (0 = default)");
    sweep_cmd->add_option("--epochs", epochs, "epochs per run");
    sweep_cmd->add_flag("--noise", noise, "enable the depolarizing noise model");
    sweep_cmd->add_flag("--reduced", reduced, "Digits subsampled to 600 rows");
    sweep_cmd->add_option("--out", out_dir, "output directory");
    sweep_cmd->add_option("--config", config_file, "JSON config overlay");
    sweep_cmd->add_option("--data-dir", data_dir, "dataset directory");

    std::string plot_dir;
    auto* plot_cmd = app.add_subcommand("plot", "render SVG charts for a results directory");
    plot_cmd->add_option("dir", plot_dir, "directory holding experiment CSVs")->required();

    auto* selftest_cmd = app.add_subcommand("selftest", "run the invariant suites");
    selftest_cmd->add_option("--data-dir", data_dir, "dataset directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed() || sweep_cmd->parsed()) {
            qewo::harness::ExperimentSpec spec;
            if (run_cmd->parsed()) {
                if (exp_id != "exp1" && exp_id != "exp2" && exp_id != "exp3" &&
                    exp_id != "exp4" && exp_id != "exp5") {
                    std::cerr << "unknown experiment id: " << exp_id
                              << " (expected exp1..exp5)\n";
                    return 2;
                }
                spec.id = exp_id;
            } else {
                spec.id = "exp2";
                if (!parse_range(resolution, spec.sweep_lo, spec.sweep_hi)) {
                    std::cerr << "bad --resolution range: " << resolution
                              << " (expected A..B with A >= 2)\n";
                    return 2;
                }
            }
            spec.seed = seed;
            spec.runs = runs;
            spec.epochs = epochs;
            spec.force_noise = noise;
            spec.reduced = reduced;
            spec.data_dir = data_dir;
            if (spec.id == "exp1") spec.qewo = qewo::harness::wine_qewo_config();
            if (!config_file.empty()) qewo::harness::load_config_file(config_file, spec);
            const int rc = qewo::harness::run_experiment(spec, out_dir);
            if (rc == 0) std::cout << "wrote results to " << out_dir << "\n";
            return rc;
        }
        if (plot_cmd->parsed()) {
            const int written = qewo::harness::emit_plots(plot_dir);
            std::cout << "wrote " << written << " chart(s)\n";
            return 0;
        }
        if (selftest_cmd->parsed()) {
            return qewo::harness::selftest(std::cout, data_dir) ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
