// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

namespace qewo::harness {

struct ConfidenceInterval {
    double mean = 0.0;
    double margin = 0.0;
    int n = 0;
    double t_value = 0.0;

    double lo() const { return mean - margin; }
    double hi() const { return mean + margin; }
};

/// Margin of error t * s / sqrt(n) with the sample (n-1) standard deviation.
ConfidenceInterval student_t_ci(const std::vector<double>& samples, double t_value);

/// Two-tailed 95% t value for df in [1, 30].
double t_value_95(int degrees_of_freedom);

double sample_mean(const std::vector<double>& samples);
/// n-1 denominator.
double sample_stddev(const std::vector<double>& samples);

}  // namespace qewo::harness
