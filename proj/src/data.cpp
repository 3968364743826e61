// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#include "qewo/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qewo::data {

namespace {

struct SchemaInfo {
    const char* name;
    Eigen::Index n_features;
    int n_classes;
    Eigen::Index n_rows;
};

SchemaInfo schema_info(Schema schema) {
    switch (schema) {
        case Schema::kWine: return {"wine", 13, 3, 178};
        case Schema::kDigits: return {"digits", 64, 10, 1797};
    }
    throw std::invalid_argument("unknown schema");
}

[[noreturn]] void parse_fail(const std::string& path, Eigen::Index line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string resolve_data_dir(const std::string& fallback) {
    if (const char* env = std::getenv("QEWO_DATA_DIR"); env && *env) return env;
    return fallback;
}

Dataset load_csv(const std::string& path, Schema schema) {
    const SchemaInfo info = schema_info(schema);
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open dataset file: " + path);
    std::stringstream buffer;
    buffer << file.rdbuf();
    const std::string bytes = buffer.str();

    Dataset ds;
    ds.source_path = path;
    ds.checksum = fnv1a_hex(bytes);
    ds.n_classes = info.n_classes;
    ds.X.resize(info.n_rows, info.n_features);
    ds.y.reserve(static_cast<std::size_t>(info.n_rows));

    std::istringstream lines(bytes);
    std::string line;
    Eigen::Index row = 0;
    Eigen::Index line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (row >= info.n_rows) {
            parse_fail(path, line_no, std::string("expected ") + std::to_string(info.n_rows) +
                                          " rows for schema '" + info.name + "'");
        }
        std::vector<double> cells;
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            const std::string cell =
                line.substr(start, comma == std::string::npos ? std::string::npos
                                                              : comma - start);
            char* end = nullptr;
            const double value = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                parse_fail(path, line_no, "malformed numeric cell '" + cell + "'");
            }
            cells.push_back(value);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (static_cast<Eigen::Index>(cells.size()) != info.n_features + 1) {
            parse_fail(path, line_no,
                       "expected " + std::to_string(info.n_features + 1) + " values, got " +
                           std::to_string(cells.size()));
        }
        const double label_raw = cells.back();
        const int label = static_cast<int>(label_raw);
        if (label_raw != label || label < 0 || label >= info.n_classes) {
            parse_fail(path, line_no, "label out of range: " + std::to_string(label_raw));
        }
        for (Eigen::Index c = 0; c < info.n_features; ++c) {
            if (!std::isfinite(cells[static_cast<std::size_t>(c)])) {
                parse_fail(path, line_no, "non-finite feature value");
            }
            ds.X(row, c) = cells[static_cast<std::size_t>(c)];
        }
        ds.y.push_back(label);
        ++row;
    }
    if (row != info.n_rows) {
        parse_fail(path, line_no, "expected " + std::to_string(info.n_rows) + " rows for schema '" +
                                      info.name + "', got " + std::to_string(row));
    }
    return ds;
}

FeatureStats normalize(Dataset& train, Dataset& test) {
    if (train.n_features() != test.n_features()) {
        throw std::invalid_argument("normalize: feature count mismatch");
    }
    FeatureStats stats;
    stats.mean = train.X.colwise().mean();
    stats.stddev.resize(train.n_features());
    for (Eigen::Index c = 0; c < train.n_features(); ++c) {
        stats.stddev(c) = std::sqrt((train.X.col(c).array() - stats.mean(c)).square().mean());
    }
    auto apply = [&](nn::Matrix& X) {
        for (Eigen::Index c = 0; c < X.cols(); ++c) {
            if (stats.stddev(c) == 0.0) {
                X.col(c).setZero();
            } else {
                X.col(c) = (X.col(c).array() - stats.mean(c)) / stats.stddev(c);
            }
        }
    };
    apply(train.X);
    apply(test.X);
    return stats;
}

nn::Matrix one_hot(const std::vector<int>& labels, int n_classes) {
    nn::Matrix onehot = nn::Matrix::Zero(static_cast<Eigen::Index>(labels.size()), n_classes);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        if (labels[r] < 0 || labels[r] >= n_classes) {
            throw std::invalid_argument("one_hot: label " + std::to_string(labels[r]) +
                                        " out of range");
        }
        onehot(static_cast<Eigen::Index>(r), labels[r]) = 1.0;
    }
    return onehot;
}

namespace {

Dataset gather(const Dataset& ds, const std::vector<Eigen::Index>& rows) {
    Dataset out;
    out.n_classes = ds.n_classes;
    out.feature_names = ds.feature_names;
    out.source_path = ds.source_path;
    out.checksum = ds.checksum;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), ds.n_features());
    out.y.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.X.row(static_cast<Eigen::Index>(r)) = ds.X.row(rows[r]);
        out.y.push_back(ds.y[static_cast<std::size_t>(rows[r])]);
    }
    return out;
}

/// Per-class index lists, each shuffled with its own child stream.
std::vector<std::vector<Eigen::Index>> shuffled_class_indices(const Dataset& ds,
                                                              std::uint64_t seed) {
    std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(ds.n_classes));
    for (Eigen::Index s = 0; s < ds.n_samples(); ++s) {
        by_class[static_cast<std::size_t>(ds.y[static_cast<std::size_t>(s)])].push_back(s);
    }
    RngStream rng(seed);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto class_rng = rng.child(c);
        auto& indices = by_class[c];
        for (std::size_t s = indices.size(); s > 1; --s) {
            std::swap(indices[s - 1], indices[class_rng.uniform_int(s)]);
        }
    }
    return by_class;
}

/// Largest-remainder apportionment of `target` picks across classes, with
/// floor(fraction * class size) guaranteed per class.
std::vector<Eigen::Index> per_class_counts(const std::vector<std::vector<Eigen::Index>>& by_class,
                                           double fraction, Eigen::Index target) {
    std::vector<Eigen::Index> counts(by_class.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    Eigen::Index assigned = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        const double exact = fraction * static_cast<double>(by_class[c].size());
        counts[c] = static_cast<Eigen::Index>(std::floor(exact));
        assigned += counts[c];
        remainders.emplace_back(exact - std::floor(exact), c);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (const auto& [rem, c] : remainders) {
        if (assigned >= target) break;
        if (counts[c] < static_cast<Eigen::Index>(by_class[c].size())) {
            ++counts[c];
            ++assigned;
        }
    }
    return counts;
}

}  // namespace

SplitDataset split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw std::invalid_argument("split: fraction must be in (0,1)");
    }
    auto by_class = shuffled_class_indices(ds, seed);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].size() < 2) {
            throw std::runtime_error("split: class " + std::to_string(c) +
                                     " has fewer than 2 samples; cannot stratify");
        }
    }
    const auto target = static_cast<Eigen::Index>(
        std::floor(train_fraction * static_cast<double>(ds.n_samples())));
    const auto counts = per_class_counts(by_class, train_fraction, target);

    std::vector<Eigen::Index> train_rows, test_rows;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        for (std::size_t s = 0; s < by_class[c].size(); ++s) {
            if (static_cast<Eigen::Index>(s) < counts[c]) {
                train_rows.push_back(by_class[c][s]);
            } else {
                test_rows.push_back(by_class[c][s]);
            }
        }
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());

    SplitDataset out;
    out.seed = seed;
    out.train = gather(ds, train_rows);
    out.test = gather(ds, test_rows);
    return out;
}

Dataset subsample(const Dataset& ds, Eigen::Index n_rows, std::uint64_t seed) {
    if (n_rows <= 0 || n_rows > ds.n_samples()) {
        throw std::invalid_argument("subsample: bad row count");
    }
    auto by_class = shuffled_class_indices(ds, seed);
    const double fraction = static_cast<double>(n_rows) / static_cast<double>(ds.n_samples());
    const auto counts = per_class_counts(by_class, fraction, n_rows);
    std::vector<Eigen::Index> rows;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        for (Eigen::Index s = 0; s < counts[c]; ++s) {
            rows.push_back(by_class[c][static_cast<std::size_t>(s)]);
        }
    }
    std::sort(rows.begin(), rows.end());
    return gather(ds, rows);
}

}  // namespace qewo::data
