// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "qewo/qsim.hpp"
#include "qewo/rng.hpp"

namespace qewo::grover {

enum class IterationRule {
    kFixedOptimal,  // floor(pi/4 * sqrt(N/m)); |marked| known classically
    kRandomized,    // Boyer-style growing schedule for unknown marked count
};

struct GroverConfig {
    int max_retries = 5;
    IterationRule iteration_rule = IterationRule::kFixedOptimal;
};

struct SearchOutcome {
    std::size_t index = 0;
    int grover_iterations_used = 0;
    int retries_used = 0;
    bool measured_in_marked = false;
};

/// ceil(log2(n_candidates)); n_candidates >= 2.
int register_width(std::size_t n_candidates);

/// Optimal iteration count floor(pi/4 * sqrt(n_states/n_marked)), at least 1
/// when n_marked < n_states; 0 when everything is marked.
int iteration_count(std::size_t n_states, std::size_t n_marked);

/// Amplitude amplification over a marked index set.
///
/// The register is padded up to the next power of two; padding indices are
/// never marked, and measuring one counts as a failed shot. After
/// max_retries re-runs the search falls back to a uniformly random marked
/// index with measured_in_marked = false, so callers always receive a
/// member of the marked set.
SearchOutcome grover_search(std::size_t n_candidates, const std::vector<std::size_t>& marked,
                            const GroverConfig& cfg, const qsim::NoiseModel& noise,
                            RngStream& rng);

struct MinFindStats {
    long searches = 0;
    long retries = 0;
    long fallbacks = 0;
};

/// Minimum finding over a classical value table.
///
/// Repeats Grover searches with an oracle marking every value strictly
/// below the provisional minimum, updating the provisional index after each
/// measurement until no value is lower. Always uses the randomized
/// iteration schedule internally (the count below the threshold is treated
/// as unknown). Capped at ceil(3*sqrt(len)) + 10 threshold updates.
/// `trace`, when non-null, receives the provisional index sequence.
std::size_t grover_min(const std::vector<double>& values, const GroverConfig& cfg,
                       const qsim::NoiseModel& noise, RngStream& rng,
                       std::vector<std::size_t>* trace = nullptr,
                       MinFindStats* stats = nullptr);

}  // namespace qewo::grover
