// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#include "qewo/grover.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qewo::grover {

namespace {

// Spec'd noise accounting per Grover iteration: the oracle and diffusion are
// applied algebraically, so depolarizing events are charged per logical
// operation instead of per decomposed gate. Each diffusion is charged one
// single-qubit event per qubit (one Hadamard-layer equivalent) plus one
// two-qubit event on qubits (0,1) standing in for the multi-controlled gate.
void charge_iteration_noise(qsim::StateVector& state, const qsim::NoiseModel& noise,
                            RngStream& rng) {
    if (!noise.enabled) return;
    for (int q = 0; q < state.n_qubits; ++q) {
        qsim::apply_depolarizing(state, {q}, noise, rng);
    }
    if (state.n_qubits >= 2) {
        qsim::apply_depolarizing(state, {0, 1}, noise, rng);
    }
}

std::size_t run_shot(int width, const std::vector<std::size_t>& marked, int iterations,
                     const qsim::NoiseModel& noise, RngStream& rng) {
    auto state = qsim::init_uniform(width);
    for (int it = 0; it < iterations; ++it) {
        qsim::apply_phase_oracle(state, marked);
        qsim::apply_diffusion(state);
        charge_iteration_noise(state, noise, rng);
    }
    return qsim::measure(state, rng);
}

}  // namespace

int register_width(std::size_t n_candidates) {
    if (n_candidates < 2) {
        throw std::invalid_argument("register_width: need at least 2 candidates, got " +
                                    std::to_string(n_candidates));
    }
    int width = 0;
    while ((std::size_t{1} << width) < n_candidates) ++width;
    return width;
}

int iteration_count(std::size_t n_states, std::size_t n_marked) {
    if (n_marked == 0) throw std::invalid_argument("iteration_count: empty oracle");
    if (n_marked > n_states) {
        throw std::invalid_argument("iteration_count: n_marked exceeds n_states");
    }
    if (n_marked == n_states) return 0;
    const double ratio = static_cast<double>(n_states) / static_cast<double>(n_marked);
    const int k = static_cast<int>(std::floor(std::numbers::pi / 4.0 * std::sqrt(ratio)));
    return std::max(k, 1);
}

SearchOutcome grover_search(std::size_t n_candidates, const std::vector<std::size_t>& marked,
                            const GroverConfig& cfg, const qsim::NoiseModel& noise,
                            RngStream& rng) {
    if (marked.empty()) throw std::invalid_argument("grover_search: empty marked set");
    for (std::size_t k : marked) {
        if (k >= n_candidates) {
            throw std::invalid_argument("grover_search: marked index " + std::to_string(k) +
                                        " >= n_candidates " + std::to_string(n_candidates));
        }
    }
    const int width = register_width(n_candidates);
    const std::size_t dim = std::size_t{1} << width;

    std::vector<bool> is_marked(dim, false);
    for (std::size_t k : marked) is_marked[k] = true;

    const int fixed_iterations = iteration_count(dim, marked.size());
    double boyer_bound = 1.0;
    const double boyer_cap = std::sqrt(static_cast<double>(dim));

    SearchOutcome outcome;
    const int attempts = 1 + std::max(cfg.max_retries, 0);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        int iterations = fixed_iterations;
        if (cfg.iteration_rule == IterationRule::kRandomized) {
            const auto bound = static_cast<std::uint64_t>(std::ceil(boyer_bound));
            iterations = static_cast<int>(rng.uniform_int(std::max<std::uint64_t>(bound, 1)));
            boyer_bound = std::min(boyer_bound * 6.0 / 5.0, boyer_cap);
        }
        const std::size_t result = run_shot(width, marked, iterations, noise, rng);
        outcome.grover_iterations_used = iterations;
        outcome.retries_used = attempt;
        if (is_marked[result]) {
            outcome.index = result;
            outcome.measured_in_marked = true;
            return outcome;
        }
    }
    // Classical fallback: training must not abort on an unlucky streak.
    outcome.index = marked[rng.uniform_int(marked.size())];
    outcome.measured_in_marked = false;
    return outcome;
}

std::size_t grover_min(const std::vector<double>& values, const GroverConfig& cfg,
                       const qsim::NoiseModel& noise, RngStream& rng,
                       std::vector<std::size_t>* trace, MinFindStats* stats) {
    if (values.empty()) throw std::invalid_argument("grover_min: empty value table");
    const std::size_t len = values.size();
    std::size_t provisional = rng.uniform_int(len);
    if (trace) trace->push_back(provisional);
    if (len == 1) return provisional;

    GroverConfig inner = cfg;
    inner.iteration_rule = IterationRule::kRandomized;

    const int max_updates =
        static_cast<int>(std::ceil(3.0 * std::sqrt(static_cast<double>(len)))) + 10;
    int updates = 0;
    while (true) {
        std::vector<std::size_t> below;
        for (std::size_t i = 0; i < len; ++i) {
            if (values[i] < values[provisional]) below.push_back(i);
        }
        if (below.empty()) return provisional;
        const auto outcome = grover_search(len, below, inner, noise, rng);
        if (stats) {
            ++stats->searches;
            stats->retries += outcome.retries_used;
            if (!outcome.measured_in_marked) ++stats->fallbacks;
        }
        if (values[outcome.index] < values[provisional]) {
            provisional = outcome.index;
            if (trace) trace->push_back(provisional);
            if (++updates >= max_updates) return provisional;
        }
    }
}

}  // namespace qewo::grover
