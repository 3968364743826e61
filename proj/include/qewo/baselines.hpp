// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "qewo/metrics.hpp"
#include "qewo/nn.hpp"
#include "qewo/rng.hpp"

namespace qewo::baselines {

struct AdamConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int batch_size = 8;
    int epochs = 10;
    double l2_lambda = 1e-4;
    double dropout_p = 0.2;
};

struct GaConfig {
    int population_size = 50;
    int generations = 10;
    int tournament_size = 3;
    double crossover_rate = 0.9;
    double mutation_rate = 0.05;
    double mutation_sigma = 0.1;
    double l2_lambda = 1e-4;
};

/// Analytic gradients of loss(forward(model, X, mask), Y) with respect to
/// every weight matrix, including the L2 term. The finite-difference check
/// in the tests is the correctness gate for this function.
std::vector<nn::Matrix> backprop_gradients(const nn::MlpModel& model, const nn::Matrix& X,
                                           const nn::Matrix& Y, const nn::DropoutMask* mask,
                                           double l2_lambda);

/// ADAM moment estimates with bias correction over a list of matrices.
class AdamOptimizer {
public:
    explicit AdamOptimizer(const AdamConfig& cfg) : cfg_(cfg) {}

    void step(std::vector<nn::Matrix>& weights, const std::vector<nn::Matrix>& grads);
    long steps_taken() const { return step_count_; }

private:
    AdamConfig cfg_;
    std::vector<nn::Matrix> m_, v_;
    long step_count_ = 0;
};

/// Mini-batch backpropagation with ADAM. Fresh dropout masks per batch.
/// Throws on non-finite gradients.
std::pair<nn::MlpModel, std::vector<EpochMetrics>> adam_train(
    nn::MlpModel model, const nn::Matrix& X_train, const nn::Matrix& Y_train,
    const nn::Matrix& X_test, const nn::Matrix& Y_test, const AdamConfig& cfg, RngStream& rng);

/// Genetic algorithm over flattened weight vectors: tournament selection,
/// uniform crossover, additive Gaussian mutation, elitism of 1. Fitness is
/// the negated training loss. One generation is reported as one epoch.
std::pair<nn::MlpModel, std::vector<EpochMetrics>> ga_train(
    const std::vector<int>& layer_sizes, nn::ActivationKind activation,
    const nn::Matrix& X_train, const nn::Matrix& Y_train, const nn::Matrix& X_test,
    const nn::Matrix& Y_test, const GaConfig& cfg, RngStream& rng);

}  // namespace qewo::baselines
