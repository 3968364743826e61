// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#include "qewo/nn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qewo::nn {

namespace {

constexpr double kLogEps = 1e-12;
const double kGeluCoef = std::sqrt(2.0 / std::numbers::pi);

}  // namespace

ActivationKind activation_from_string(const std::string& name) {
    if (name == "tanh") return ActivationKind::kTanh;
    if (name == "relu") return ActivationKind::kRelu;
    if (name == "gelu") return ActivationKind::kGelu;
    if (name == "swish") return ActivationKind::kSwish;
    throw std::invalid_argument("unknown activation: " + name);
}

const char* to_string(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::kTanh: return "tanh";
        case ActivationKind::kRelu: return "relu";
        case ActivationKind::kGelu: return "gelu";
        case ActivationKind::kSwish: return "swish";
    }
    return "?";
}

InitScheme init_scheme_from_string(const std::string& name) {
    if (name == "uniform") return InitScheme::kUniform;
    if (name == "xavier") return InitScheme::kXavier;
    if (name == "kaiming") return InitScheme::kKaiming;
    throw std::invalid_argument("unknown init scheme: " + name);
}

const char* to_string(InitScheme scheme) {
    switch (scheme) {
        case InitScheme::kUniform: return "uniform";
        case InitScheme::kXavier: return "xavier";
        case InitScheme::kKaiming: return "kaiming";
    }
    return "?";
}

void MlpModel::validate() const {
    if (layers.empty()) throw std::invalid_argument("MlpModel: no layers");
    for (std::size_t t = 0; t + 1 < layers.size(); ++t) {
        if (layers[t + 1].cols() != layers[t].rows()) {
            throw std::invalid_argument("MlpModel: layer shapes do not chain at layer " +
                                        std::to_string(t));
        }
    }
    for (const auto& w : layers) {
        if (!w.allFinite()) throw std::invalid_argument("MlpModel: non-finite weight");
    }
}

double activate_scalar(double x, ActivationKind kind) {
    switch (kind) {
        case ActivationKind::kTanh:
            return std::tanh(x);
        case ActivationKind::kRelu:
            return x > 0.0 ? x : 0.0;
        case ActivationKind::kGelu:
            return 0.5 * x * (1.0 + std::tanh(kGeluCoef * (x + 0.044715 * x * x * x)));
        case ActivationKind::kSwish:
            return x / (1.0 + std::exp(-x));
    }
    return 0.0;
}

double activate_derivative(double x, ActivationKind kind) {
    switch (kind) {
        case ActivationKind::kTanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case ActivationKind::kRelu:
            return x > 0.0 ? 1.0 : 0.0;
        case ActivationKind::kGelu: {
            const double u = kGeluCoef * (x + 0.044715 * x * x * x);
            const double t = std::tanh(u);
            const double du = kGeluCoef * (1.0 + 3.0 * 0.044715 * x * x);
            return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
        }
        case ActivationKind::kSwish: {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return s + x * s * (1.0 - s);
        }
    }
    return 0.0;
}

namespace {

// tanh written through exp: Eigen's packet exp vectorizes for doubles while
// its tanh does not. Agrees with std::tanh to a couple of ulp and saturates
// correctly at +/-1.
template <typename Array>
auto vec_tanh(const Array& arr) {
    return 1.0 - 2.0 / ((2.0 * arr).exp() + 1.0);
}

template <typename Derived>
void activate_eigen(Eigen::MatrixBase<Derived>& values, ActivationKind kind) {
    auto arr = values.array();
    switch (kind) {
        case ActivationKind::kTanh:
            values = vec_tanh(arr).matrix();
            break;
        case ActivationKind::kRelu:
            values = arr.max(0.0).matrix();
            break;
        case ActivationKind::kGelu:
            values =
                (0.5 * arr * (1.0 + vec_tanh(kGeluCoef * (arr + 0.044715 * arr.cube())))).matrix();
            break;
        case ActivationKind::kSwish:
            values = (arr / (1.0 + (-arr).exp())).matrix();
            break;
    }
}

}  // namespace

void activate_inplace(Matrix& values, ActivationKind kind) { activate_eigen(values, kind); }
void activate_inplace(Vector& values, ActivationKind kind) { activate_eigen(values, kind); }

void softmax_rows(Matrix& logits) {
    const Vector row_max = logits.rowwise().maxCoeff();
    logits = (logits.colwise() - row_max).array().exp().matrix();
    const Vector row_sum = logits.rowwise().sum();
    logits.array().colwise() /= row_sum.array();
}

Matrix forward(const MlpModel& model, const Matrix& X, const DropoutMask* mask) {
    const std::size_t n_layers = model.n_layers();
    if (n_layers == 0) throw std::invalid_argument("forward: model has no layers");
    if (X.cols() != model.layers.front().cols()) {
        throw std::invalid_argument("forward: feature count mismatch");
    }
    if (mask && !mask->empty() && mask->masks.size() != n_layers - 1) {
        throw std::invalid_argument("forward: dropout mask layer count mismatch");
    }

    Matrix h = X;
    for (std::size_t t = 0; t < n_layers; ++t) {
        Matrix pre = h * model.layers[t].transpose();
        if (t + 1 < n_layers) {
            activate_inplace(pre, model.activation);
            if (mask && !mask->empty()) {
                if (mask->masks[t].rows() != pre.rows() || mask->masks[t].cols() != pre.cols()) {
                    throw std::invalid_argument("forward: dropout mask shape mismatch");
                }
                pre = pre.cwiseProduct(mask->masks[t]);
            }
            h = std::move(pre);
        } else {
            softmax_rows(pre);
            return pre;
        }
    }
    return h;  // unreachable
}

double loss(const Matrix& y_hat, const Matrix& y_onehot, const MlpModel& model,
            const LossConfig& cfg) {
    if (y_hat.rows() != y_onehot.rows() || y_hat.cols() != y_onehot.cols()) {
        throw std::invalid_argument("loss: prediction/label shape mismatch");
    }
    const Vector p_true = (y_hat.array() * y_onehot.array()).rowwise().sum();
    const double cross_entropy = -(p_true.array() + kLogEps).log().mean();
    double frobenius_sq = 0.0;
    for (const auto& w : model.layers) frobenius_sq += w.squaredNorm();
    return cross_entropy + cfg.l2_lambda * frobenius_sq;
}

double accuracy(const Matrix& y_hat, const Matrix& y_onehot) {
    if (y_hat.rows() != y_onehot.rows() || y_hat.cols() != y_onehot.cols()) {
        throw std::invalid_argument("accuracy: prediction/label shape mismatch");
    }
    const Eigen::Index n = y_hat.rows();
    Eigen::Index correct = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
        Eigen::Index pred = 0, truth = 0;
        for (Eigen::Index c = 1; c < y_hat.cols(); ++c) {
            if (y_hat(r, c) > y_hat(r, pred)) pred = c;
            if (y_onehot(r, c) > y_onehot(r, truth)) truth = c;
        }
        if (pred == truth) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(n);
}

MlpModel init_weights(const std::vector<int>& layer_sizes, InitScheme scheme,
                      ActivationKind activation, RngStream& rng) {
    if (layer_sizes.size() < 2) {
        throw std::invalid_argument("init_weights: need at least input and output sizes");
    }
    MlpModel model;
    model.activation = activation;
    for (std::size_t t = 0; t + 1 < layer_sizes.size(); ++t) {
        const int fan_in = layer_sizes[t];
        const int fan_out = layer_sizes[t + 1];
        if (fan_in < 1 || fan_out < 1) throw std::invalid_argument("init_weights: bad layer size");
        Matrix w(fan_out, fan_in);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                switch (scheme) {
                    case InitScheme::kUniform:
                        w(i, j) = rng.uniform(-1.0, 1.0);
                        break;
                    case InitScheme::kXavier: {
                        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
                        w(i, j) = rng.uniform(-bound, bound);
                        break;
                    }
                    case InitScheme::kKaiming:
                        w(i, j) = rng.normal(0.0, std::sqrt(2.0 / fan_in));
                        break;
                }
            }
        }
        model.layers.push_back(std::move(w));
    }
    return model;
}

DropoutMask sample_dropout_mask(const MlpModel& model, Eigen::Index n_rows, double p,
                                RngStream& rng) {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("sample_dropout_mask: p must be in [0,1)");
    DropoutMask mask;
    const double keep_value = 1.0 / (1.0 - p);
    for (std::size_t t = 0; t + 1 < model.n_layers(); ++t) {
        Matrix m(n_rows, model.layers[t].rows());
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                m(i, j) = rng.uniform() < p ? 0.0 : keep_value;
            }
        }
        mask.masks.push_back(std::move(m));
    }
    return mask;
}

}  // namespace qewo::nn
