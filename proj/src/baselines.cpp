// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#include "qewo/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace qewo::baselines {

namespace {

nn::Matrix activation_derivative_matrix(const nn::Matrix& pre, nn::ActivationKind kind) {
    nn::Matrix d(pre.rows(), pre.cols());
    switch (kind) {
        case nn::ActivationKind::kTanh: {
            nn::Matrix t = pre;
            nn::activate_inplace(t, nn::ActivationKind::kTanh);
            d = (1.0 - t.array().square()).matrix();
            break;
        }
        case nn::ActivationKind::kRelu:
            d = (pre.array() > 0.0).cast<double>().matrix();
            break;
        default:
            for (Eigen::Index r = 0; r < pre.rows(); ++r) {
                for (Eigen::Index c = 0; c < pre.cols(); ++c) {
                    d(r, c) = nn::activate_derivative(pre(r, c), kind);
                }
            }
    }
    return d;
}

}  // namespace

std::vector<nn::Matrix> backprop_gradients(const nn::MlpModel& model, const nn::Matrix& X,
                                           const nn::Matrix& Y, const nn::DropoutMask* mask,
                                           double l2_lambda) {
    const auto n_layers = static_cast<int>(model.n_layers());
    if (mask && mask->empty()) mask = nullptr;

    // Forward pass, keeping pre-activations and activations.
    std::vector<nn::Matrix> pre(static_cast<std::size_t>(n_layers));
    std::vector<nn::Matrix> act(static_cast<std::size_t>(n_layers));  // post mask
    nn::Matrix h = X;
    for (int t = 0; t < n_layers; ++t) {
        pre[t].noalias() = h * model.layers[t].transpose();
        if (t + 1 < n_layers) {
            act[t] = pre[t];
            nn::activate_inplace(act[t], model.activation);
            if (mask) act[t] = act[t].cwiseProduct(mask->masks[t]);
            h = act[t];
        }
    }
    nn::Matrix y_hat = pre[n_layers - 1];
    nn::softmax_rows(y_hat);

    const double inv_samples = 1.0 / static_cast<double>(X.rows());
    std::vector<nn::Matrix> grads(static_cast<std::size_t>(n_layers));
    nn::Matrix delta = (y_hat - Y) * inv_samples;  // dL/d logits
    for (int t = n_layers - 1; t >= 0; --t) {
        const nn::Matrix& layer_input = t == 0 ? X : act[t - 1];
        grads[t].noalias() = delta.transpose() * layer_input;
        grads[t] += 2.0 * l2_lambda * model.layers[t];
        if (t > 0) {
            nn::Matrix upstream = delta * model.layers[t];
            if (mask) upstream = upstream.cwiseProduct(mask->masks[t - 1]);
            delta = upstream.cwiseProduct(
                activation_derivative_matrix(pre[t - 1], model.activation));
        }
    }
    return grads;
}

void AdamOptimizer::step(std::vector<nn::Matrix>& weights,
                         const std::vector<nn::Matrix>& grads) {
    if (weights.size() != grads.size()) {
        throw std::invalid_argument("AdamOptimizer: weight/gradient count mismatch");
    }
    if (m_.empty()) {
        for (const auto& w : weights) {
            m_.push_back(nn::Matrix::Zero(w.rows(), w.cols()));
            v_.push_back(nn::Matrix::Zero(w.rows(), w.cols()));
        }
    }
    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    for (std::size_t t = 0; t < weights.size(); ++t) {
        if (!grads[t].allFinite()) {
            throw std::runtime_error("AdamOptimizer: non-finite gradient at layer " +
                                     std::to_string(t));
        }
        m_[t] = cfg_.beta1 * m_[t] + (1.0 - cfg_.beta1) * grads[t];
        v_[t] = cfg_.beta2 * v_[t] + (1.0 - cfg_.beta2) * grads[t].cwiseProduct(grads[t]);
        const nn::Matrix m_hat = m_[t] / bc1;
        const nn::Matrix v_hat = v_[t] / bc2;
        weights[t] -=
            cfg_.learning_rate *
            (m_hat.array() / (v_hat.array().sqrt() + cfg_.epsilon)).matrix();
    }
}

std::pair<nn::MlpModel, std::vector<EpochMetrics>> adam_train(
    nn::MlpModel model, const nn::Matrix& X_train, const nn::Matrix& Y_train,
    const nn::Matrix& X_test, const nn::Matrix& Y_test, const AdamConfig& cfg, RngStream& rng) {
    model.validate();
    AdamOptimizer optimizer(cfg);
    std::vector<EpochMetrics> history;
    const Eigen::Index n_samples = X_train.rows();
    const Eigen::Index batch_size =
        cfg.batch_size <= 0 ? n_samples : std::min<Eigen::Index>(cfg.batch_size, n_samples);

    nn::LossConfig loss_cfg;
    loss_cfg.l2_lambda = cfg.l2_lambda;
    loss_cfg.dropout_p = cfg.dropout_p;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_samples));
    for (Eigen::Index s = 0; s < n_samples; ++s) order[static_cast<std::size_t>(s)] = s;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto start_time = std::chrono::steady_clock::now();
        auto shuffle_rng = rng.child(1).child(static_cast<std::uint64_t>(epoch));
        for (std::size_t s = order.size(); s > 1; --s) {
            std::swap(order[s - 1], order[shuffle_rng.uniform_int(s)]);
        }
        auto mask_rng = rng.child(2).child(static_cast<std::uint64_t>(epoch));
        for (Eigen::Index lo = 0; lo < n_samples; lo += batch_size) {
            const Eigen::Index hi = std::min(lo + batch_size, n_samples);
            nn::Matrix Xb(hi - lo, X_train.cols());
            nn::Matrix Yb(hi - lo, Y_train.cols());
            for (Eigen::Index r = lo; r < hi; ++r) {
                Xb.row(r - lo) = X_train.row(order[static_cast<std::size_t>(r)]);
                Yb.row(r - lo) = Y_train.row(order[static_cast<std::size_t>(r)]);
            }
            const nn::DropoutMask mask =
                nn::sample_dropout_mask(model, Xb.rows(), cfg.dropout_p, mask_rng);
            const auto grads = backprop_gradients(model, Xb, Yb, &mask, cfg.l2_lambda);
            optimizer.step(model.layers, grads);
        }

        EpochMetrics metrics;
        metrics.epoch = epoch + 1;
        const nn::Matrix train_pred = nn::forward(model, X_train);
        metrics.train_loss = nn::loss(train_pred, Y_train, model, loss_cfg);
        metrics.train_acc = nn::accuracy(train_pred, Y_train);
        const nn::Matrix test_pred = nn::forward(model, X_test);
        metrics.test_loss = nn::loss(test_pred, Y_test, model, loss_cfg);
        metrics.test_acc = nn::accuracy(test_pred, Y_test);
        metrics.wall_time_ms = std::chrono::duration<double, std::milli>(
                                   std::chrono::steady_clock::now() - start_time)
                                   .count();
        history.push_back(metrics);
    }
    return {std::move(model), std::move(history)};
}

namespace {

struct GenomeLayout {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes;
    std::size_t total = 0;
};

GenomeLayout layout_for(const std::vector<int>& layer_sizes) {
    GenomeLayout layout;
    for (std::size_t t = 0; t + 1 < layer_sizes.size(); ++t) {
        const Eigen::Index rows = layer_sizes[t + 1];
        const Eigen::Index cols = layer_sizes[t];
        layout.shapes.emplace_back(rows, cols);
        layout.total += static_cast<std::size_t>(rows * cols);
    }
    return layout;
}

nn::MlpModel genome_to_model(const std::vector<double>& genome, const GenomeLayout& layout,
                             nn::ActivationKind activation) {
    nn::MlpModel model;
    model.activation = activation;
    std::size_t offset = 0;
    for (const auto& [rows, cols] : layout.shapes) {
        nn::Matrix w(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = genome[offset++];
        }
        model.layers.push_back(std::move(w));
    }
    return model;
}

}  // namespace

std::pair<nn::MlpModel, std::vector<EpochMetrics>> ga_train(
    const std::vector<int>& layer_sizes, nn::ActivationKind activation,
    const nn::Matrix& X_train, const nn::Matrix& Y_train, const nn::Matrix& X_test,
    const nn::Matrix& Y_test, const GaConfig& cfg, RngStream& rng) {
    if (cfg.population_size < 2) throw std::invalid_argument("ga_train: population_size < 2");
    const GenomeLayout layout = layout_for(layer_sizes);

    nn::LossConfig loss_cfg;
    loss_cfg.l2_lambda = cfg.l2_lambda;

    auto fitness = [&](const std::vector<double>& genome) {
        const nn::MlpModel model = genome_to_model(genome, layout, activation);
        return -nn::loss(nn::forward(model, X_train), Y_train, model, loss_cfg);
    };

    std::vector<std::vector<double>> population(static_cast<std::size_t>(cfg.population_size));
    for (auto& genome : population) {
        genome.resize(layout.total);
        for (auto& gene : genome) gene = rng.uniform(-1.0, 1.0);
    }
    std::vector<double> scores(population.size());
    for (std::size_t p = 0; p < population.size(); ++p) scores[p] = fitness(population[p]);

    auto best_index = [&]() {
        return static_cast<std::size_t>(
            std::max_element(scores.begin(), scores.end()) - scores.begin());
    };
    auto tournament = [&]() {
        std::size_t winner = rng.uniform_int(population.size());
        for (int k = 1; k < cfg.tournament_size; ++k) {
            const std::size_t rival = rng.uniform_int(population.size());
            if (scores[rival] > scores[winner]) winner = rival;
        }
        return winner;
    };

    std::vector<EpochMetrics> history;
    for (int gen = 0; gen < cfg.generations; ++gen) {
        const auto start_time = std::chrono::steady_clock::now();
        std::vector<std::vector<double>> next;
        next.reserve(population.size());
        next.push_back(population[best_index()]);  // elitism
        while (next.size() < population.size()) {
            const auto& parent_a = population[tournament()];
            const auto& parent_b = population[tournament()];
            std::vector<double> child = parent_a;
            if (rng.uniform() < cfg.crossover_rate) {
                for (std::size_t g = 0; g < child.size(); ++g) {
                    if (rng.uniform() < 0.5) child[g] = parent_b[g];
                }
            }
            for (auto& gene : child) {
                if (rng.uniform() < cfg.mutation_rate) {
                    gene += rng.normal(0.0, cfg.mutation_sigma);
                }
            }
            next.push_back(std::move(child));
        }
        population = std::move(next);
        for (std::size_t p = 0; p < population.size(); ++p) scores[p] = fitness(population[p]);

        const nn::MlpModel best = genome_to_model(population[best_index()], layout, activation);
        EpochMetrics metrics;
        metrics.epoch = gen + 1;
        const nn::Matrix train_pred = nn::forward(best, X_train);
        metrics.train_loss = nn::loss(train_pred, Y_train, best, loss_cfg);
        metrics.train_acc = nn::accuracy(train_pred, Y_train);
        const nn::Matrix test_pred = nn::forward(best, X_test);
        metrics.test_loss = nn::loss(test_pred, Y_test, best, loss_cfg);
        metrics.test_acc = nn::accuracy(test_pred, Y_test);
        metrics.wall_time_ms = std::chrono::duration<double, std::milli>(
                                   std::chrono::steady_clock::now() - start_time)
                                   .count();
        history.push_back(metrics);
    }
    return {genome_to_model(population[best_index()], layout, activation), std::move(history)};
}

}  // namespace qewo::baselines
