// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "qewo/rng.hpp"

namespace qewo::qsim {

/// Depolarizing error rates per logical gate: p1 for single-qubit gates,
/// p2 for two-qubit gates. Errors are realized as Monte-Carlo trajectories
/// (a random Pauli applied with the given probability), not density matrices.
struct NoiseModel {
    double p1 = 0.0;
    double p2 = 0.0;
    bool enabled = false;

    static NoiseModel off() { return {}; }
    static NoiseModel depolarizing(double p1, double p2) { return {p1, p2, true}; }
};

/// Exact amplitudes over n index qubits.
///
/// Phase oracles are applied as direct sign flips, i.e. the usual oracle
/// ancilla is absorbed through phase kickback and never materialized here.
/// It still counts toward the reported qubit budget (index qubits + 1).
struct StateVector {
    int n_qubits = 0;
    std::vector<std::complex<double>> amplitudes;

    std::size_t size() const { return amplitudes.size(); }
    double norm_sq() const;
    double probability(std::size_t k) const { return std::norm(amplitudes[k]); }
};

/// Pauli labels used by the depolarizing channel.
enum class Pauli { X = 1, Y = 2, Z = 3 };

/// |s> = H^n |0>: every amplitude 1/sqrt(2^n). 1 <= n_qubits <= 16.
StateVector init_uniform(int n_qubits);

/// Negates the amplitude of every index in `marked`.
void apply_phase_oracle(StateVector& state, const std::vector<std::size_t>& marked);

/// Reflection about the uniform state: 2|s><s| - I.
void apply_diffusion(StateVector& state);

/// Applies a single Pauli to one qubit.
void apply_pauli(StateVector& state, Pauli p, int qubit);

/// One depolarizing event on 1 or 2 qubits. With probability p1 (p2) a
/// uniformly chosen non-identity Pauli (pair) is applied; otherwise no-op.
/// Disabled noise is a no-op. Returns true iff an error fired.
bool apply_depolarizing(StateVector& state, const std::vector<int>& qubits,
                        const NoiseModel& noise, RngStream& rng);

/// Samples a basis index with probability |amplitude|^2. Non-destructive;
/// callers never need the post-measurement state.
std::size_t measure(const StateVector& state, RngStream& rng);

}  // namespace qewo::qsim
