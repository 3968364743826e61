// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#include "qewo/qewo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qewo {

namespace {

constexpr double kLogEps = 1e-12;

// Child-stream roots so unrelated draws never perturb each other.
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kMaskStream = 2;
constexpr std::uint64_t kWeightStream = 3;

/// Candidate losses without full forward passes.
///
/// For the layer being tuned, activations of all earlier layers are cached
/// (they do not depend on this layer's weights), along with the layer's
/// pre-activations and, for hidden layers, the next layer's pre-activations.
/// A candidate for weight (i, j) then only perturbs column i, so its loss
/// needs one column update plus the forward suffix. Candidates of one grid
/// are evaluated as a stacked batch so the activation/exp work vectorizes.
/// Weight updates go through commit(), which refreshes the caches; results
/// match a from-scratch forward pass to roundoff.
class CandidateEvaluator {
public:
    CandidateEvaluator(nn::MlpModel& model, const nn::Matrix& X, const nn::Matrix& Y,
                       const nn::DropoutMask* mask, double l2_lambda)
        : model_(model), X_(X), Y_(Y), mask_(mask), l2_lambda_(l2_lambda) {
        if (mask_ && mask_->empty()) mask_ = nullptr;
        labels_.resize(Y_.rows());
        for (Eigen::Index r = 0; r < Y_.rows(); ++r) {
            Eigen::Index best = 0;
            for (Eigen::Index c = 1; c < Y_.cols(); ++c) {
                if (Y_(r, c) > Y_(r, best)) best = c;
            }
            labels_[r] = static_cast<int>(best);
        }
    }

    void begin_layer(int t) {
        const auto n_layers = static_cast<int>(model_.n_layers());
        if (t < 0 || t >= n_layers) throw std::invalid_argument("begin_layer: layer out of range");
        t_ = t;
        nn::Matrix h = X_;
        for (int u = 0; u < t; ++u) {
            nn::Matrix pre = h * model_.layers[u].transpose();
            nn::activate_inplace(pre, model_.activation);
            if (mask_) pre = pre.cwiseProduct(mask_->masks[u]);
            h = std::move(pre);
        }
        input_ = std::move(h);
        pre_.noalias() = input_ * model_.layers[t].transpose();
        if (t + 1 < n_layers) {
            act_ = pre_;
            nn::activate_inplace(act_, model_.activation);
            if (mask_) act_ = act_.cwiseProduct(mask_->masks[t]);
            next_pre_.noalias() = act_ * model_.layers[t + 1].transpose();
        }
        l2_base_ = 0.0;
        for (const auto& w : model_.layers) l2_base_ += w.squaredNorm();
    }

    int layer() const { return t_; }

    void eval(int i, int j, const std::vector<double>& values, std::vector<double>& losses) const {
        check_weight(i, j);
        const auto n_layers = static_cast<int>(model_.n_layers());
        const auto n = static_cast<Eigen::Index>(values.size());
        const Eigen::Index n_samples = X_.rows();
        const double w_cur = model_.layers[t_](i, j);
        losses.resize(values.size());

        Eigen::RowVectorXd delta_w(n);
        for (Eigen::Index k = 0; k < n; ++k) delta_w(k) = values[k] - w_cur;

        if (t_ == n_layers - 1) {
            eval_output_layer(i, j, values, delta_w, losses);
            return;
        }

        // Candidate columns of this layer's pre-activation and activation.
        nn::Matrix cols = pre_.col(i).replicate(1, n);
        cols.noalias() += input_.col(j) * delta_w;
        nn::activate_inplace(cols, model_.activation);
        if (mask_) cols.array().colwise() *= mask_->masks[t_].col(i).array();
        cols.colwise() -= act_.col(i);  // now holds activation deltas

        // Stacked next-layer pre-activations, one block of rows per candidate.
        const auto& next_w_col = model_.layers[t_ + 1].col(i);
        nn::Matrix stacked(n * n_samples, next_pre_.cols());
        for (Eigen::Index k = 0; k < n; ++k) {
            auto block = stacked.middleRows(k * n_samples, n_samples);
            block = next_pre_;
            block.noalias() += cols.col(k) * next_w_col.transpose();
        }

        for (int u = t_ + 1; u < n_layers - 1; ++u) {
            nn::activate_inplace(stacked, model_.activation);
            if (mask_) {
                for (Eigen::Index k = 0; k < n; ++k) {
                    stacked.middleRows(k * n_samples, n_samples).array() *=
                        mask_->masks[u].array();
                }
            }
            nn::Matrix next(stacked.rows(), model_.layers[u + 1].rows());
            next.noalias() = stacked * model_.layers[u + 1].transpose();
            stacked = std::move(next);
        }

        // stacked now holds logits; per-block softmax cross-entropy.
        const Eigen::VectorXd row_max = stacked.rowwise().maxCoeff();
        stacked = (stacked.colwise() - row_max).array().exp().matrix();
        const Eigen::VectorXd row_sum = stacked.rowwise().sum();
        for (Eigen::Index k = 0; k < n; ++k) {
            double ce = 0.0;
            const Eigen::Index base = k * n_samples;
            for (Eigen::Index s = 0; s < n_samples; ++s) {
                const double p_true = stacked(base + s, labels_[s]) / row_sum(base + s);
                ce -= std::log(p_true + kLogEps);
            }
            losses[static_cast<std::size_t>(k)] =
                ce / static_cast<double>(n_samples) + l2_term(w_cur, values[k]);
        }
    }

    double eval_single(int i, int j, double value) const {
        std::vector<double> one;
        eval(i, j, {value}, one);
        return one[0];
    }

    void commit(int i, int j, double value) {
        check_weight(i, j);
        auto& weights = model_.layers[t_];
        const double old = weights(i, j);
        l2_base_ += value * value - old * old;
        weights(i, j) = value;
        pre_.col(i).noalias() = input_ * weights.row(i).transpose();
        if (t_ + 1 < static_cast<int>(model_.n_layers())) {
            nn::Vector new_act = pre_.col(i);
            nn::activate_inplace(new_act, model_.activation);
            if (mask_) new_act.array() *= mask_->masks[t_].col(i).array();
            next_pre_.noalias() +=
                (new_act - act_.col(i)) * model_.layers[t_ + 1].col(i).transpose();
            act_.col(i) = new_act;
        }
    }

private:
    void check_weight(int i, int j) const {
        if (t_ < 0) throw std::logic_error("CandidateEvaluator: begin_layer not called");
        const auto& w = model_.layers[t_];
        if (i < 0 || i >= w.rows() || j < 0 || j >= w.cols()) {
            throw std::invalid_argument("CandidateEvaluator: weight index out of range");
        }
    }

    double l2_term(double w_cur, double candidate) const {
        return l2_lambda_ * (l2_base_ - w_cur * w_cur + candidate * candidate);
    }

    // Output layer: only logit column i moves, so per sample we keep the
    // max and exp-sum over the other columns and fold the new logit in.
    void eval_output_layer(int i, int j, const std::vector<double>& values,
                           const Eigen::RowVectorXd& delta_w, std::vector<double>& losses) const {
        const Eigen::Index n_samples = X_.rows();
        const Eigen::Index n_classes = pre_.cols();
        const double w_cur = model_.layers[t_](i, j);

        Eigen::VectorXd other_max(n_samples), other_sum(n_samples), true_exp(n_samples);
        for (Eigen::Index s = 0; s < n_samples; ++s) {
            double m = -std::numeric_limits<double>::infinity();
            for (Eigen::Index c = 0; c < n_classes; ++c) {
                if (c != i && pre_(s, c) > m) m = pre_(s, c);
            }
            double sum = 0.0;
            for (Eigen::Index c = 0; c < n_classes; ++c) {
                if (c != i) sum += std::exp(pre_(s, c) - m);
            }
            other_max(s) = m;
            other_sum(s) = sum;
            true_exp(s) = labels_[s] == i ? 0.0 : std::exp(pre_(s, labels_[s]) - m);
        }

        for (std::size_t k = 0; k < values.size(); ++k) {
            double ce = 0.0;
            for (Eigen::Index s = 0; s < n_samples; ++s) {
                const double logit = pre_(s, i) + delta_w(static_cast<Eigen::Index>(k)) * input_(s, j);
                const double m = std::max(other_max(s), logit);
                const double scale = std::exp(other_max(s) - m);
                const double denom = other_sum(s) * scale + std::exp(logit - m);
                const double numer =
                    labels_[s] == i ? std::exp(logit - m) : true_exp(s) * scale;
                ce -= std::log(numer / denom + kLogEps);
            }
            losses[k] = ce / static_cast<double>(n_samples) + l2_term(w_cur, values[k]);
        }
    }

    nn::MlpModel& model_;
    const nn::Matrix& X_;
    const nn::Matrix& Y_;
    const nn::DropoutMask* mask_;
    double l2_lambda_;
    std::vector<int> labels_;

    int t_ = -1;
    double l2_base_ = 0.0;
    nn::Matrix input_;     // activations feeding layer t
    nn::Matrix pre_;       // layer t pre-activation under current weights
    nn::Matrix act_;       // layer t masked activation (hidden layers only)
    nn::Matrix next_pre_;  // layer t+1 pre-activation (hidden layers only)
};

double full_set_loss(const nn::MlpModel& model, const nn::Matrix& X, const nn::Matrix& Y,
                     double l2_lambda) {
    nn::LossConfig loss_cfg;
    loss_cfg.l2_lambda = l2_lambda;
    return nn::loss(nn::forward(model, X), Y, model, loss_cfg);
}

}  // namespace

void QewoConfig::validate() const {
    if (n_candidates_hidden < 2 || n_candidates_output < 2) {
        throw std::invalid_argument("QewoConfig: candidate counts must be >= 2");
    }
    if (!(gamma_down > 0.0 && gamma_down < 1.0 && gamma_up > 1.0)) {
        throw std::invalid_argument("QewoConfig: need 0 < gamma_down < 1 < gamma_up");
    }
    if (!(alpha_min > 0.0 && alpha_min <= alpha0 && alpha0 <= alpha_max)) {
        throw std::invalid_argument("QewoConfig: need 0 < alpha_min <= alpha0 <= alpha_max");
    }
    if (tol_ratio_hidden <= 0.0 || tol_ratio_output <= 0.0) {
        throw std::invalid_argument("QewoConfig: tolerance ratios must be positive");
    }
    if (epochs < 0 || batch_size < 0) {
        throw std::invalid_argument("QewoConfig: negative epochs or batch size");
    }
    if (dropout_p < 0.0 || dropout_p >= 1.0) {
        throw std::invalid_argument("QewoConfig: dropout_p must be in [0,1)");
    }
    if (sigma_fallback <= 0.0) {
        throw std::invalid_argument("QewoConfig: sigma_fallback must be positive");
    }
}

TrainerState make_trainer(nn::MlpModel model, const QewoConfig& cfg) {
    cfg.validate();
    model.validate();
    TrainerState state;
    state.alpha_per_layer.assign(model.n_layers(), cfg.alpha0);
    state.tracked_min_loss = cfg.initial_min_loss;
    state.model = std::move(model);
    return state;
}

double layer_sigma(const nn::Matrix& weights) {
    if (weights.size() == 0) throw std::invalid_argument("layer_sigma: empty matrix");
    const double mean = weights.mean();
    return std::sqrt((weights.array() - mean).square().sum() /
                     static_cast<double>(weights.size()));
}

CandidateGrid build_grid(double center, double alpha, double sigma, int n,
                         double sigma_fallback) {
    if (n < 2) throw std::invalid_argument("build_grid: need at least 2 candidates");
    CandidateGrid grid;
    grid.center = center;
    grid.alpha = alpha;
    grid.n = n;
    grid.sigma = sigma == 0.0 ? sigma_fallback : sigma;
    const double half_width = alpha * grid.sigma;
    const double dx = 2.0 * half_width / static_cast<double>(n - 1);
    grid.values.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        grid.values[static_cast<std::size_t>(k)] = center - half_width + k * dx;
    }
    return grid;
}

std::vector<double> evaluate_candidates(TrainerState& state, int layer, int i, int j,
                                        const CandidateGrid& grid, const nn::Matrix& X,
                                        const nn::Matrix& Y, const nn::DropoutMask& mask,
                                        const QewoConfig& cfg) {
    CandidateEvaluator evaluator(state.model, X, Y, &mask, cfg.l2_lambda);
    evaluator.begin_layer(layer);
    std::vector<double> losses;
    evaluator.eval(i, j, grid.values, losses);
    return losses;
}

std::pair<std::vector<std::size_t>, double> select_promising(const std::vector<double>& losses,
                                                             double tol_ratio) {
    if (losses.empty()) throw std::invalid_argument("select_promising: empty loss vector");
    for (double v : losses) {
        if (!std::isfinite(v)) throw std::invalid_argument("select_promising: non-finite loss");
    }
    const double grid_min = *std::min_element(losses.begin(), losses.end());
    const double threshold = grid_min + tol_ratio * grid_min;
    std::vector<std::size_t> marked;
    for (std::size_t k = 0; k < losses.size(); ++k) {
        if (losses[k] <= threshold) marked.push_back(k);
    }
    return {std::move(marked), grid_min};
}

std::size_t quantum_select(const std::vector<double>& losses,
                           const std::vector<std::size_t>& marked,
                           const grover::GroverConfig& cfg, const qsim::NoiseModel& noise,
                           RngStream& rng, GroverStats* stats) {
    if (marked.empty()) throw std::invalid_argument("quantum_select: empty marked set");
    if (losses.size() < 2) return marked.front();
    const auto outcome = grover::grover_search(losses.size(), marked, cfg, noise, rng);
    if (stats) {
        ++stats->searches;
        stats->retries += outcome.retries_used;
        if (!outcome.measured_in_marked) ++stats->fallbacks;
    }
    return outcome.index;
}

double update_alpha(double alpha, bool loss_decreased, const QewoConfig& cfg) {
    return loss_decreased ? std::max(cfg.gamma_down * alpha, cfg.alpha_min)
                          : std::min(cfg.gamma_up * alpha, cfg.alpha_max);
}

void train_epoch(TrainerState& state, const nn::Matrix& X_train, const nn::Matrix& Y_train,
                 const QewoConfig& cfg, const qsim::NoiseModel& noise, RngStream& run_rng,
                 int epoch_index, const nn::Matrix* X_test, const nn::Matrix* Y_test) {
    const auto start_time = std::chrono::steady_clock::now();
    const long fallbacks_before = state.grover_stats.fallbacks;
    const auto epoch = static_cast<std::uint64_t>(epoch_index);

    const Eigen::Index n_samples = X_train.rows();
    const auto n_layers = static_cast<int>(state.model.n_layers());

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_samples));
    for (Eigen::Index s = 0; s < n_samples; ++s) order[static_cast<std::size_t>(s)] = s;
    auto shuffle_rng = run_rng.child(kShuffleStream).child(epoch);
    for (std::size_t s = order.size(); s > 1; --s) {
        std::swap(order[s - 1], order[shuffle_rng.uniform_int(s)]);
    }

    const Eigen::Index batch_size =
        cfg.batch_size == 0 ? n_samples : std::min<Eigen::Index>(cfg.batch_size, n_samples);
    const auto n_batches =
        static_cast<Eigen::Index>((n_samples + batch_size - 1) / batch_size);

    for (Eigen::Index b = 0; b < n_batches; ++b) {
        const Eigen::Index lo = b * batch_size;
        const Eigen::Index hi = std::min(lo + batch_size, n_samples);
        nn::Matrix Xb(hi - lo, X_train.cols());
        nn::Matrix Yb(hi - lo, Y_train.cols());
        for (Eigen::Index r = lo; r < hi; ++r) {
            Xb.row(r - lo) = X_train.row(order[static_cast<std::size_t>(r)]);
            Yb.row(r - lo) = Y_train.row(order[static_cast<std::size_t>(r)]);
        }

        auto mask_rng = run_rng.child(kMaskStream).child(epoch).child(static_cast<std::uint64_t>(b));
        const nn::DropoutMask mask =
            nn::sample_dropout_mask(state.model, Xb.rows(), cfg.dropout_p, mask_rng);

        CandidateEvaluator evaluator(state.model, Xb, Yb, &mask, cfg.l2_lambda);
        for (int t = 0; t < n_layers; ++t) {
            evaluator.begin_layer(t);
            const double sigma = layer_sigma(state.model.layers[t]);
            const bool output_layer = t == n_layers - 1;
            const int n_candidates =
                output_layer ? cfg.n_candidates_output : cfg.n_candidates_hidden;
            const double tol_ratio =
                output_layer ? cfg.tol_ratio_output : cfg.tol_ratio_hidden;
            const auto rows = state.model.layers[t].rows();
            const auto cols = state.model.layers[t].cols();
            std::vector<double> losses;
            for (Eigen::Index i = 0; i < rows; ++i) {
                for (Eigen::Index j = 0; j < cols; ++j) {
                    const double current = state.model.layers[t](i, j);
                    const CandidateGrid grid = build_grid(current, state.alpha_per_layer[t],
                                                          sigma, n_candidates,
                                                          cfg.sigma_fallback);
                    evaluator.eval(static_cast<int>(i), static_cast<int>(j), grid.values,
                                   losses);
                    const auto& marked = select_promising(losses, tol_ratio).first;
                    auto weight_rng = run_rng.child(kWeightStream)
                                          .child(epoch)
                                          .child(static_cast<std::uint64_t>(b))
                                          .child(static_cast<std::uint64_t>(t))
                                          .child(static_cast<std::uint64_t>(i * cols + j));
                    std::size_t selected;
                    if (cfg.selection_rule == SelectionRule::kGroverMin) {
                        // Minimum finding over the tolerance set: the oracle
                        // marks candidates below the provisional minimum, so
                        // the winner is M's argmin up to measurement noise.
                        std::vector<double> marked_losses(marked.size());
                        for (std::size_t m = 0; m < marked.size(); ++m) {
                            marked_losses[m] = losses[marked[m]];
                        }
                        grover::MinFindStats find_stats;
                        const std::size_t local = grover::grover_min(
                            marked_losses, cfg.grover, noise, weight_rng, nullptr,
                            &find_stats);
                        state.grover_stats.searches += find_stats.searches;
                        state.grover_stats.retries += find_stats.retries;
                        state.grover_stats.fallbacks += find_stats.fallbacks;
                        selected = marked[local];
                    } else {
                        selected = quantum_select(losses, marked, cfg.grover, noise,
                                                  weight_rng, &state.grover_stats);
                    }
                    double chosen = grid.values[selected];
                    if (!cfg.keep_if_worse) {
                        const double current_loss =
                            evaluator.eval_single(static_cast<int>(i), static_cast<int>(j),
                                                  current);
                        if (current_loss < losses[selected]) chosen = current;
                    }
                    evaluator.commit(static_cast<int>(i), static_cast<int>(j), chosen);
                }
            }
        }

        const bool last_batch = b + 1 == n_batches;
        if (cfg.alpha_update == QewoConfig::AlphaUpdate::kPerBatch || last_batch) {
            const double post_batch_loss =
                full_set_loss(state.model, X_train, Y_train, cfg.l2_lambda);
            const bool decreased = post_batch_loss < state.tracked_min_loss;
            for (int t = 0; t < n_layers; ++t) {
                state.alpha_per_layer[static_cast<std::size_t>(t)] = update_alpha(
                    state.alpha_per_layer[static_cast<std::size_t>(t)], decreased, cfg);
            }
            state.tracked_min_loss = std::min(state.tracked_min_loss, post_batch_loss);
        }
    }

    nn::LossConfig loss_cfg;
    loss_cfg.l2_lambda = cfg.l2_lambda;
    loss_cfg.dropout_p = cfg.dropout_p;
    EpochMetrics metrics;
    metrics.epoch = epoch_index + 1;
    const nn::Matrix train_pred = nn::forward(state.model, X_train);
    metrics.train_loss = nn::loss(train_pred, Y_train, state.model, loss_cfg);
    metrics.train_acc = nn::accuracy(train_pred, Y_train);
    if (X_test && Y_test) {
        const nn::Matrix test_pred = nn::forward(state.model, *X_test);
        metrics.test_loss = nn::loss(test_pred, *Y_test, state.model, loss_cfg);
        metrics.test_acc = nn::accuracy(test_pred, *Y_test);
    }
    metrics.grover_fallback_count = state.grover_stats.fallbacks - fallbacks_before;
    metrics.wall_time_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - start_time)
                               .count();
    state.epoch_metrics.push_back(metrics);
}

TrainerState train(nn::MlpModel model, const nn::Matrix& X_train, const nn::Matrix& Y_train,
                   const nn::Matrix& X_test, const nn::Matrix& Y_test, const QewoConfig& cfg,
                   const qsim::NoiseModel& noise, RngStream& run_rng) {
    TrainerState state = make_trainer(std::move(model), cfg);
    for (int e = 0; e < cfg.epochs; ++e) {
        train_epoch(state, X_train, Y_train, cfg, noise, run_rng, e, &X_test, &Y_test);
    }
    return state;
}

}  // namespace qewo
