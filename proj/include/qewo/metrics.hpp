// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace qewo {

/// One row of every per-epoch table. Accuracies are percentages in [0,100].
struct EpochMetrics {
    int epoch = 0;
    double train_loss = 0.0;
    double test_loss = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;
    double wall_time_ms = 0.0;
    long grover_fallback_count = 0;
};

}  // namespace qewo
