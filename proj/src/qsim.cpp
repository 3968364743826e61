// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#include "qewo/qsim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qewo::qsim {

double StateVector::norm_sq() const {
    double total = 0.0;
    for (const auto& a : amplitudes) total += std::norm(a);
    return total;
}

StateVector init_uniform(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 16) {
        throw std::invalid_argument("init_uniform: n_qubits must be in [1, 16], got " +
                                    std::to_string(n_qubits));
    }
    StateVector state;
    state.n_qubits = n_qubits;
    const std::size_t dim = std::size_t{1} << n_qubits;
    state.amplitudes.assign(dim, {1.0 / std::sqrt(static_cast<double>(dim)), 0.0});
    return state;
}

void apply_phase_oracle(StateVector& state, const std::vector<std::size_t>& marked) {
    const std::size_t dim = state.size();
    for (std::size_t k : marked) {
        if (k >= dim) {
            throw std::invalid_argument("apply_phase_oracle: marked index " + std::to_string(k) +
                                        " out of range for " + std::to_string(dim) + " states");
        }
    }
    for (std::size_t k : marked) state.amplitudes[k] = -state.amplitudes[k];
}

void apply_diffusion(StateVector& state) {
    // 2|s><s| - I reduces to a[k] <- 2*mean(a) - a[k].
    std::complex<double> sum{0.0, 0.0};
    for (const auto& a : state.amplitudes) sum += a;
    const std::complex<double> twice_mean = 2.0 * sum / static_cast<double>(state.size());
    for (auto& a : state.amplitudes) a = twice_mean - a;
}

void apply_pauli(StateVector& state, Pauli p, int qubit) {
    if (qubit < 0 || qubit >= state.n_qubits) {
        throw std::invalid_argument("apply_pauli: qubit index out of range");
    }
    const std::size_t mask = std::size_t{1} << qubit;
    const std::size_t dim = state.size();
    const std::complex<double> imag_unit{0.0, 1.0};
    for (std::size_t i0 = 0; i0 < dim; ++i0) {
        if (i0 & mask) continue;
        const std::size_t i1 = i0 | mask;
        auto& a0 = state.amplitudes[i0];
        auto& a1 = state.amplitudes[i1];
        switch (p) {
            case Pauli::X:
                std::swap(a0, a1);
                break;
            case Pauli::Y: {
                const auto t0 = a0;
                a0 = -imag_unit * a1;
                a1 = imag_unit * t0;
                break;
            }
            case Pauli::Z:
                a1 = -a1;
                break;
        }
    }
}

bool apply_depolarizing(StateVector& state, const std::vector<int>& qubits,
                        const NoiseModel& noise, RngStream& rng) {
    if (!noise.enabled) return false;
    if (qubits.size() != 1 && qubits.size() != 2) {
        throw std::invalid_argument("apply_depolarizing: expected 1 or 2 qubit indices");
    }
    if (qubits.size() == 1) {
        const double u = rng.uniform();
        const double p = noise.p1;
        if (u < p / 3.0) {
            apply_pauli(state, Pauli::X, qubits[0]);
        } else if (u < 2.0 * p / 3.0) {
            apply_pauli(state, Pauli::Y, qubits[0]);
        } else if (u < p) {
            apply_pauli(state, Pauli::Z, qubits[0]);
        } else {
            return false;
        }
        return true;
    }
    if (rng.uniform() >= noise.p2) return false;
    // One of the 15 non-identity Pauli pairs, uniformly.
    const auto code = static_cast<int>(rng.uniform_int(15)) + 1;
    const int first = code >> 2;
    const int second = code & 3;
    if (first != 0) apply_pauli(state, static_cast<Pauli>(first), qubits[0]);
    if (second != 0) apply_pauli(state, static_cast<Pauli>(second), qubits[1]);
    return true;
}

std::size_t measure(const StateVector& state, RngStream& rng) {
    const double total = state.norm_sq();
    const double r = rng.uniform() * total;
    double cumulative = 0.0;
    const std::size_t dim = state.size();
    for (std::size_t k = 0; k < dim; ++k) {
        cumulative += state.probability(k);
        if (r < cumulative) return k;
    }
    return dim - 1;  // rounding guard
}

}  // namespace qewo::qsim
