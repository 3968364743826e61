// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#include "qewo/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace qewo::harness {

double sample_mean(const std::vector<double>& samples) {
    if (samples.empty()) throw std::invalid_argument("sample_mean: no samples");
    double sum = 0.0;
    for (double v : samples) sum += v;
    return sum / static_cast<double>(samples.size());
}

double sample_stddev(const std::vector<double>& samples) {
    if (samples.size() < 2) throw std::invalid_argument("sample_stddev: need n >= 2");
    const double mean = sample_mean(samples);
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(samples.size() - 1));
}

ConfidenceInterval student_t_ci(const std::vector<double>& samples, double t_value) {
    if (samples.size() < 2) throw std::invalid_argument("student_t_ci: need n >= 2");
    ConfidenceInterval ci;
    ci.n = static_cast<int>(samples.size());
    ci.t_value = t_value;
    ci.mean = sample_mean(samples);
    ci.margin = t_value * sample_stddev(samples) / std::sqrt(static_cast<double>(ci.n));
    return ci;
}

double t_value_95(int degrees_of_freedom) {
    static constexpr double kTable[] = {
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
        2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
        2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    };
    if (degrees_of_freedom < 1 || degrees_of_freedom > 30) {
        throw std::invalid_argument("t_value_95: df must be in [1, 30]");
    }
    return kTable[degrees_of_freedom - 1];
}

}  // namespace qewo::harness
