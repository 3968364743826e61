// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "qewo/nn.hpp"
#include "qewo/rng.hpp"

namespace qewo::data {

enum class Schema { kWine, kDigits };

struct Dataset {
    nn::Matrix X;  // samples x features
    std::vector<int> y;
    int n_classes = 0;
    std::vector<std::string> feature_names;
    std::string source_path;
    std::string checksum;  // FNV-1a 64 of the raw file bytes, hex

    Eigen::Index n_samples() const { return X.rows(); }
    Eigen::Index n_features() const { return X.cols(); }
};

struct SplitDataset {
    Dataset train;
    Dataset test;
    std::uint64_t seed = 0;
};

struct FeatureStats {
    nn::Vector mean;
    nn::Vector stddev;
};

/// Comma-separated numeric rows, features first, integer label last, no
/// header. Wine: 178 x 13, 3 classes. Digits: 1797 x 64 (8x8 flattened
/// row-major, pixel values 0..16), 10 classes. Malformed input fails with
/// the offending line number.
Dataset load_csv(const std::string& path, Schema schema);

/// Z-score using train-set statistics only; the test set is transformed
/// with the same stats. Zero-variance features map to 0.
FeatureStats normalize(Dataset& train, Dataset& test);

nn::Matrix one_hot(const std::vector<int>& labels, int n_classes);

/// Stratified split: per-class train count = floor(fraction * class size),
/// remainders assigned by largest fractional part until the global
/// floor(fraction * n) is reached. Deterministic per seed.
SplitDataset split(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// Stratified subsample of n_rows samples (used for the reduced Digits
/// protocol). Deterministic per seed.
Dataset subsample(const Dataset& ds, Eigen::Index n_rows, std::uint64_t seed);

/// FNV-1a 64 over a byte buffer, lowercase hex.
std::string fnv1a_hex(const std::string& bytes);

/// Dataset directory resolution: QEWO_DATA_DIR env var wins, then the
/// given fallback (default "data").
std::string resolve_data_dir(const std::string& fallback = "data");

}  // namespace qewo::data
