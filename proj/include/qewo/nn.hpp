// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qewo/rng.hpp"

namespace qewo::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ActivationKind { kTanh, kRelu, kGelu, kSwish };

ActivationKind activation_from_string(const std::string& name);
const char* to_string(ActivationKind kind);

/// A bias-free MLP: an ordered list of weight matrices W^(t), each shaped
/// fan_out x fan_in, with one activation applied to every hidden layer and
/// softmax on the final layer's output.
struct MlpModel {
    std::vector<Matrix> layers;
    ActivationKind activation = ActivationKind::kTanh;

    std::size_t n_layers() const { return layers.size(); }
    /// Throws if adjacent shapes do not chain or any weight is non-finite.
    void validate() const;
};

struct LossConfig {
    double l2_lambda = 1e-4;
    double dropout_p = 0.2;
};

/// Inverted-dropout masks, one per hidden layer, shaped like the hidden
/// activations (samples x fan_out). Entries are 0 or 1/(1-p), so evaluation
/// needs no rescaling.
struct DropoutMask {
    std::vector<Matrix> masks;

    bool empty() const { return masks.empty(); }
};

double activate_scalar(double x, ActivationKind kind);
double activate_derivative(double x, ActivationKind kind);
void activate_inplace(Matrix& values, ActivationKind kind);
void activate_inplace(Vector& values, ActivationKind kind);

/// Row-wise softmax with log-sum-exp stabilization.
void softmax_rows(Matrix& logits);

/// Forward pass: hidden layers get the activation (and the dropout mask when
/// provided); the final layer output goes through softmax. Rows of the
/// result sum to 1.
Matrix forward(const MlpModel& model, const Matrix& X, const DropoutMask* mask = nullptr);

/// Mean cross-entropy -ln(y_hat[true] + 1e-12) plus l2_lambda * sum of
/// squared Frobenius norms of all weight matrices.
double loss(const Matrix& y_hat, const Matrix& y_onehot, const MlpModel& model,
            const LossConfig& cfg);

/// Percentage of rows whose argmax matches; ties broken by lowest index.
double accuracy(const Matrix& y_hat, const Matrix& y_onehot);

enum class InitScheme { kUniform, kXavier, kKaiming };

InitScheme init_scheme_from_string(const std::string& name);
const char* to_string(InitScheme scheme);

/// Builds a model for layer sizes [n0, n1, ..., nL]; weights drawn per
/// scheme: uniform U(-1,1), xavier U(+/- sqrt(6/(fan_in+fan_out))), kaiming
/// N(0, sqrt(2/fan_in)). Deterministic per RngStream seed.
MlpModel init_weights(const std::vector<int>& layer_sizes, InitScheme scheme,
                      ActivationKind activation, RngStream& rng);

/// Samples one inverted-dropout mask per hidden layer for a batch of
/// n_rows samples. Each unit is kept independently with probability 1-p.
DropoutMask sample_dropout_mask(const MlpModel& model, Eigen::Index n_rows, double p,
                                RngStream& rng);

}  // namespace qewo::nn
