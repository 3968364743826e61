// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "qewo/grover.hpp"
#include "qewo/metrics.hpp"
#include "qewo/nn.hpp"
#include "qewo/qsim.hpp"
#include "qewo/rng.hpp"

namespace qewo {

/// How the winning candidate is drawn from the tolerance set M.
enum class SelectionRule {
    /// Grover minimum finding over the losses of M: the selected candidate
    /// is the argmin of M up to measurement noise. Default; this is what
    /// makes the per-weight update a descent step.
    kGroverMin,
    /// Single amplitude-amplification pass over M with a uniform measurement
    /// among the marked candidates. Ablation mode; selection carries no
    /// preference within the tolerance band.
    kUniform,
};

/// Hyperparameters of the Grover-based weight search.
struct QewoConfig {
    int n_candidates_hidden = 32;
    int n_candidates_output = 64;
    double alpha0 = 0.1;
    double gamma_down = 0.95;
    double gamma_up = 1.05;
    double alpha_min = 0.01;
    double alpha_max = 1.0;
    double tol_ratio_hidden = 0.05;
    double tol_ratio_output = 0.1;
    double initial_min_loss = 5.0;
    int epochs = 10;
    int batch_size = 0;  // 0 = full batch
    double dropout_p = 0.2;
    double l2_lambda = 1e-4;
    /// Unconditional update: the selected candidate replaces the weight even
    /// if the weight's own loss was lower (the grid need not contain it).
    /// Set false to keep the current weight when it beats the selection.
    bool keep_if_worse = true;
    double sigma_fallback = 1e-3;  // stands in when a layer's sigma is 0
    SelectionRule selection_rule = SelectionRule::kGroverMin;
    /// Cadence of the search-factor adjustment. Per-epoch keeps the interval
    /// from collapsing over many mini-batches; per-batch reacts faster and
    /// suits one-batch (full-batch) training, where the two coincide.
    enum class AlphaUpdate { kPerBatch, kPerEpoch };
    AlphaUpdate alpha_update = AlphaUpdate::kPerEpoch;
    grover::GroverConfig grover;

    void validate() const;
};

/// N equally spaced values over [center - alpha*sigma, center + alpha*sigma].
struct CandidateGrid {
    double center = 0.0;
    double sigma = 0.0;
    double alpha = 0.0;
    int n = 0;
    std::vector<double> values;
};

struct GroverStats {
    long searches = 0;
    long retries = 0;
    long fallbacks = 0;
};

struct TrainerState {
    nn::MlpModel model;
    std::vector<double> alpha_per_layer;
    /// Running minimum of the post-batch full-set loss, initialized to the
    /// configured sentinel; drives the alpha adjustment signal.
    double tracked_min_loss = 0.0;
    std::vector<EpochMetrics> epoch_metrics;
    GroverStats grover_stats;
};

TrainerState make_trainer(nn::MlpModel model, const QewoConfig& cfg);

/// Population standard deviation over all entries of W.
double layer_sigma(const nn::Matrix& weights);

CandidateGrid build_grid(double center, double alpha, double sigma, int n,
                         double sigma_fallback = 1e-3);

/// Loss of each candidate value for weight (i, j) of the given layer; the
/// model is left bit-identical. One forward pass per candidate, all sharing
/// the same dropout mask so losses stay comparable.
std::vector<double> evaluate_candidates(TrainerState& state, int layer, int i, int j,
                                        const CandidateGrid& grid, const nn::Matrix& X,
                                        const nn::Matrix& Y, const nn::DropoutMask& mask,
                                        const QewoConfig& cfg);

/// Marked set {k : losses[k] <= min + tol_ratio*min} and the grid minimum.
/// The argmin is always included.
std::pair<std::vector<std::size_t>, double> select_promising(const std::vector<double>& losses,
                                                             double tol_ratio);

/// Grover selection among the marked candidates; the returned index is
/// always a member of the marked set (retry + fallback path included).
std::size_t quantum_select(const std::vector<double>& losses,
                           const std::vector<std::size_t>& marked,
                           const grover::GroverConfig& cfg, const qsim::NoiseModel& noise,
                           RngStream& rng, GroverStats* stats = nullptr);

/// Shrinks alpha by gamma_down on improvement, grows it by gamma_up
/// otherwise, clamped to [alpha_min, alpha_max].
double update_alpha(double alpha, bool loss_decreased, const QewoConfig& cfg);

/// One pass over the training set: per batch, every weight of every layer
/// (input-adjacent layers first, row-major within a layer) is re-selected
/// from its candidate grid. select_promising narrows the grid to the
/// tolerance set M, then the configured SelectionRule picks the winner via
/// Grover. Appends one EpochMetrics entry.
void train_epoch(TrainerState& state, const nn::Matrix& X_train, const nn::Matrix& Y_train,
                 const QewoConfig& cfg, const qsim::NoiseModel& noise, RngStream& run_rng,
                 int epoch_index, const nn::Matrix* X_test = nullptr,
                 const nn::Matrix* Y_test = nullptr);

/// Full training loop (cfg.epochs epochs) from an initialized model.
TrainerState train(nn::MlpModel model, const nn::Matrix& X_train, const nn::Matrix& Y_train,
                   const nn::Matrix& X_test, const nn::Matrix& Y_test, const QewoConfig& cfg,
                   const qsim::NoiseModel& noise, RngStream& run_rng);

}  // namespace qewo
