// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qewo/baselines.hpp"
#include "qewo/data.hpp"
#include "qewo/metrics.hpp"
#include "qewo/qewo.hpp"
#include "qewo/stats.hpp"

namespace qewo::harness {

/// Everything needed to reproduce one of the five experiments.
struct ExperimentSpec {
    std::string id = "exp1";  // exp1 | exp2 | exp3 | exp4 | exp5
    std::uint64_t seed = 42;
    int runs = 0;    // 0 = experiment default
    int epochs = 10;
    bool force_noise = false;
    bool reduced = false;  // Digits subsampled to 600 rows (documented variant)
    int sweep_lo = 17;
    int sweep_hi = 32;
    std::string data_dir;  // empty = resolve via QEWO_DATA_DIR / ./data
    QewoConfig qewo;
    baselines::AdamConfig adam;
    baselines::GaConfig ga;
    double noise_p1 = 0.005;
    double noise_p2 = 0.02;
};

/// JSON config overlay: objects "qewo", "adam", "ga", "noise" with fields
/// named after the config structs. Unknown keys are an error.
void load_config_file(const std::string& path, ExperimentSpec& spec);

/// Runs one experiment and writes its CSV artifacts. Returns 0 on success.
int run_experiment(const ExperimentSpec& spec, const std::string& out_dir);

/// Renders SVG charts for the CSVs found in dir. Returns the number of
/// charts written; malformed or empty CSVs are skipped with a warning.
int emit_plots(const std::string& dir);

/// Invariant suite: prints one line per check, returns true iff all pass.
bool selftest(std::ostream& out, const std::string& data_dir = "");

// ----- building blocks shared with the acceptance suite -----

struct PreparedData {
    nn::Matrix X_train, Y_train, X_test, Y_test;
    std::vector<int> y_train, y_test;
    int n_classes = 0;
    std::string checksum;
};

PreparedData prepare_wine(const std::string& data_dir, std::uint64_t split_seed);
PreparedData prepare_digits(const std::string& data_dir, std::uint64_t split_seed,
                            bool reduced);

struct RunOutput {
    std::vector<EpochMetrics> epochs;
    GroverStats grover;
};

RunOutput run_qewo(const PreparedData& data, const std::vector<int>& arch,
                   const QewoConfig& cfg, const qsim::NoiseModel& noise,
                   nn::InitScheme scheme, nn::ActivationKind activation,
                   std::uint64_t run_seed);
RunOutput run_adam(const PreparedData& data, const std::vector<int>& arch,
                   const baselines::AdamConfig& cfg, nn::ActivationKind activation,
                   std::uint64_t run_seed);
RunOutput run_ga(const PreparedData& data, const std::vector<int>& arch,
                 const baselines::GaConfig& cfg, nn::ActivationKind activation,
                 std::uint64_t run_seed);

/// Experiment-default configs.
QewoConfig wine_qewo_config();
QewoConfig digits_qewo_config(int hidden_resolution);
std::vector<int> wine_arch();
std::vector<int> digits_arch();

/// Loss improvement: reduction / classic * 100.
double improvement_pct_loss(double classic, double quantum);
/// Accuracy improvement: (quantum - classic) / classic * 100.
double improvement_pct_acc(double classic, double quantum);

/// Index of the best run: highest final test accuracy, ties broken by
/// lowest final test loss.
std::size_t best_run_index(const std::vector<RunOutput>& runs);

/// The CSV payload with '#' comment lines stripped (used by the
/// determinism checks; timestamps are confined to comments).
std::string csv_body(const std::string& path);

}  // namespace qewo::harness
