// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#include "qewo/rng.hpp"

#include <stdexcept>

namespace qewo {

namespace {

// splitmix64; used both to seed the engine and to derive child seeds.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

double RngStream::uniform() {
    ++draws_;
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(engine_);
}

double RngStream::uniform(double lo, double hi) {
    ++draws_;
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(engine_);
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RngStream::uniform_int: n must be >= 1");
    ++draws_;
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    return dist(engine_);
}

double RngStream::normal(double mean, double stddev) {
    ++draws_;
    std::normal_distribution<double> dist(mean, stddev);
    return dist(engine_);
}

RngStream RngStream::child(std::uint64_t ordinal) const {
    return RngStream(mix64(seed_ ^ mix64(ordinal + 1)));
}

}  // namespace qewo
