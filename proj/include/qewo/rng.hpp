// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace qewo {

/// Deterministic random stream: identical seed => identical draw sequence.
///
/// Parallel or per-task streams are derived with child(), which mixes the
/// parent seed with an ordinal. Chaining child() calls yields a stable
/// hierarchy, e.g. run.child(epoch).child(batch).child(weight), so adding
/// or reordering unrelated draws never perturbs another task's sequence.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t draw_count() const { return draws_; }

    /// Uniform double in [0, 1).
    double uniform();
    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n), n >= 1.
    std::uint64_t uniform_int(std::uint64_t n);
    double normal(double mean, double stddev);

    RngStream child(std::uint64_t ordinal) const;

private:
    std::uint64_t seed_ = 0;
    std::uint64_t draws_ = 0;
    std::mt19937_64 engine_;
};

}  // namespace qewo
