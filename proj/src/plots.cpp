// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "qewo/harness.hpp"

namespace fs = std::filesystem;

namespace qewo::harness {

namespace {

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t col(const std::string& name) const {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (columns[c] == name) return c;
        }
        throw std::runtime_error("missing column: " + name);
    }

    std::vector<double> numbers(const std::string& name) const {
        const std::size_t c = col(name);
        std::vector<double> values;
        values.reserve(rows.size());
        for (const auto& row : rows) values.push_back(std::stod(row.at(c)));
        return values;
    }

    /// Row whose first cell equals `label`, or nullopt.
    std::optional<std::vector<std::string>> labeled_row(const std::string& label) const {
        for (const auto& row : rows) {
            if (!row.empty() && row[0] == label) return row;
        }
        return std::nullopt;
    }
};

std::optional<CsvTable> read_table(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    CsvTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(
                start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (table.columns.empty()) {
            table.columns = std::move(cells);
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

struct Series {
    std::string label;
    std::vector<double> x, y;
    std::string color;
    bool dashed = false;
    bool markers = false;
};

struct HBand {
    double lo = 0.0, hi = 0.0;
    std::string color;
};

double nice_step(double range) {
    if (range <= 0.0) return 1.0;
    const double raw = range / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double mult : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (raw <= mult * mag) return mult * mag;
    }
    return 10.0 * mag;
}

std::string trim_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void write_line_chart(const fs::path& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series, const std::vector<HBand>& bands = {}) {
    constexpr double kWidth = 720, kHeight = 480;
    constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : series) {
        for (double v : s.x) { x_min = std::min(x_min, v); x_max = std::max(x_max, v); }
        for (double v : s.y) { y_min = std::min(y_min, v); y_max = std::max(y_max, v); }
    }
    for (const auto& b : bands) {
        y_min = std::min(y_min, b.lo);
        y_max = std::max(y_max, b.hi);
    }
    if (!(x_min < x_max)) { x_min -= 0.5; x_max += 0.5; }
    if (!(y_min < y_max)) { y_min -= 0.5; y_max += 0.5; }
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) { return kTop + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h; };

    std::ofstream svg(path);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

    for (const auto& b : bands) {
        svg << "<rect x=\"" << px(x_min) << "\" y=\"" << py(b.hi) << "\" width=\"" << plot_w
            << "\" height=\"" << py(b.lo) - py(b.hi) << "\" fill=\"" << b.color
            << "\" fill-opacity=\"0.15\"/>\n";
    }

    const double x_step = nice_step(x_max - x_min);
    const double y_step = nice_step(y_max - y_min);
    svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">\n";
    for (double x = std::ceil(x_min / x_step) * x_step; x <= x_max + 1e-9; x += x_step) {
        svg << "<line x1=\"" << px(x) << "\" y1=\"" << kTop << "\" x2=\"" << px(x) << "\" y2=\""
            << kTop + plot_h << "\" stroke=\"#ddd\"/>\n";
        svg << "<text x=\"" << px(x) << "\" y=\"" << kTop + plot_h + 16
            << "\" text-anchor=\"middle\">" << trim_number(x) << "</text>\n";
    }
    for (double y = std::ceil(y_min / y_step) * y_step; y <= y_max + 1e-9; y += y_step) {
        svg << "<line x1=\"" << kLeft << "\" y1=\"" << py(y) << "\" x2=\"" << kLeft + plot_w
            << "\" y2=\"" << py(y) << "\" stroke=\"#ddd\"/>\n";
        svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(y) + 4
            << "\" text-anchor=\"end\">" << trim_number(y) << "</text>\n";
    }
    svg << "</g>\n";
    svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xlabel
        << "</text>\n";
    svg << "<text x=\"18\" y=\"" << kTop + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << kTop + plot_h / 2 << ")\">" << ylabel
        << "</text>\n";

    for (const auto& s : series) {
        svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
        if (s.dashed) svg << " stroke-dasharray=\"6 4\"";
        svg << " points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            svg << px(s.x[i]) << "," << py(s.y[i]) << " ";
        }
        svg << "\"/>\n";
        if (s.markers) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                svg << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
                    << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
            }
        }
    }

    const double legend_x = kLeft + plot_w - 215;
    double legend_y = kTop + 14;
    for (const auto& s : series) {
        svg << "<line x1=\"" << legend_x << "\" y1=\"" << legend_y - 4 << "\" x2=\""
            << legend_x + 26 << "\" y2=\"" << legend_y - 4 << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "")
            << "/>\n";
        svg << "<text x=\"" << legend_x + 32 << "\" y=\"" << legend_y
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
        legend_y += 17;
    }
    svg << "</svg>\n";
}

bool table_usable(const std::optional<CsvTable>& table, const fs::path& source) {
    if (!table) return false;
    if (table->rows.empty()) {
        std::cerr << "plot: skipping empty CSV " << source << "\n";
        return false;
    }
    return true;
}

int plot_exp1(const fs::path& dir) {
    const auto table = read_table(dir / "exp1_best.csv");
    if (!table_usable(table, dir / "exp1_best.csv")) return 0;
    const auto epoch = table->numbers("epoch");
    write_line_chart(
        dir / "exp1_loss.svg", "Training and test loss per epoch (best runs)", "epoch",
        "loss",
        {{"classic train", epoch, table->numbers("classic_train_loss"), "#1f77b4", false, true},
         {"quantum train", epoch, table->numbers("quantum_train_loss"), "#d62728", false, true},
         {"classic test", epoch, table->numbers("classic_test_loss"), "#1f77b4", true, false},
         {"quantum test", epoch, table->numbers("quantum_test_loss"), "#d62728", true, false}});
    write_line_chart(
        dir / "exp1_accuracy.svg", "Training and test accuracy per epoch (best runs)",
        "epoch", "accuracy (%)",
        {{"classic train", epoch, table->numbers("classic_train_acc"), "#1f77b4", false, true},
         {"quantum train", epoch, table->numbers("quantum_train_acc"), "#d62728", false, true},
         {"classic test", epoch, table->numbers("classic_test_acc"), "#1f77b4", true, false},
         {"quantum test", epoch, table->numbers("quantum_test_acc"), "#d62728", true, false}});
    return 2;
}

int plot_exp2(const fs::path& dir) {
    int written = 0;
    const auto sweep = read_table(dir / "exp2_sweep.csv");
    const auto ci = read_table(dir / "exp2_ci.csv");
    if (table_usable(sweep, dir / "exp2_sweep.csv")) {
        const auto res = sweep->numbers("resolution");
        std::vector<HBand> acc_bands, loss_bands;
        std::vector<Series> acc_extra, loss_extra;
        if (ci && !ci->rows.empty()) {
            if (const auto row = ci->labeled_row("final_test_acc")) {
                const double lo = std::stod((*row)[ci->col("lo")]);
                const double hi = std::stod((*row)[ci->col("hi")]);
                const double mean = std::stod((*row)[ci->col("mean")]);
                acc_bands.push_back({lo, hi, "#d62728"});
                acc_extra.push_back({"mean (17..31)", {res.front(), res.back()},
                                     {mean, mean}, "#d62728", true, false});
            }
            if (const auto row = ci->labeled_row("final_test_loss")) {
                const double lo = std::stod((*row)[ci->col("lo")]);
                const double hi = std::stod((*row)[ci->col("hi")]);
                const double mean = std::stod((*row)[ci->col("mean")]);
                loss_bands.push_back({lo, hi, "#1f77b4"});
                loss_extra.push_back({"mean (17..31)", {res.front(), res.back()},
                                      {mean, mean}, "#1f77b4", true, false});
            }
        }
        std::vector<Series> acc_series = {
            {"final test acc", res, sweep->numbers("final_test_acc"), "#1f77b4", false, true}};
        acc_series.insert(acc_series.end(), acc_extra.begin(), acc_extra.end());
        write_line_chart(dir / "exp2_test_accuracy.svg",
                         "Final test accuracy vs hidden resolution", "hidden resolution",
                         "accuracy (%)", acc_series, acc_bands);
        std::vector<Series> loss_series = {
            {"final test loss", res, sweep->numbers("final_test_loss"), "#d62728", false,
             true}};
        loss_series.insert(loss_series.end(), loss_extra.begin(), loss_extra.end());
        write_line_chart(dir / "exp2_test_loss.svg", "Final test loss vs hidden resolution",
                         "hidden resolution", "loss", loss_series, loss_bands);
        written += 2;
    }
    const auto fig7 = read_table(dir / "exp2_fig7.csv");
    if (table_usable(fig7, dir / "exp2_fig7.csv")) {
        const auto epoch = fig7->numbers("epoch");
        write_line_chart(
            dir / "exp2_convergence.svg", "Mean test accuracy per epoch", "epoch",
            "accuracy (%)",
            {{"quantum", epoch, fig7->numbers("quantum_mean_test_acc"), "#1f77b4", false, true},
             {"classic", epoch, fig7->numbers("classic_mean_test_acc"), "#ff7f0e", false, true},
             {"genetic", epoch, fig7->numbers("genetic_mean_test_acc"), "#2ca02c", false,
              true}});
        ++written;
    }
    return written;
}

int plot_exp3(const fs::path& dir) {
    const auto table = read_table(dir / "exp3_init.csv");
    if (!table_usable(table, dir / "exp3_init.csv")) return 0;
    const auto epoch = table->numbers("epoch");
    write_line_chart(
        dir / "exp3_init.svg", "Mean test accuracy per epoch by initialization", "epoch",
        "accuracy (%)",
        {{"random", epoch, table->numbers("uniform_mean_test_acc"), "#a0522d", false, true},
         {"xavier", epoch, table->numbers("xavier_mean_test_acc"), "#4b0082", false, true},
         {"kaiming", epoch, table->numbers("kaiming_mean_test_acc"), "#808000", false, true}});
    return 1;
}

int plot_exp4(const fs::path& dir) {
    const auto table = read_table(dir / "exp4_activations.csv");
    if (!table_usable(table, dir / "exp4_activations.csv")) return 0;
    const auto epoch = table->numbers("epoch");
    write_line_chart(
        dir / "exp4_activations.svg", "Mean test accuracy per epoch by activation", "epoch",
        "accuracy (%)",
        {{"tanh", epoch, table->numbers("tanh_mean_test_acc"), "#1f77b4", false, true},
         {"gelu", epoch, table->numbers("gelu_mean_test_acc"), "#ff7f0e", false, true},
         {"swish", epoch, table->numbers("swish_mean_test_acc"), "#2ca02c", false, true}});
    return 1;
}

int plot_exp5(const fs::path& dir) {
    const auto table = read_table(dir / "exp5_curve.csv");
    if (!table_usable(table, dir / "exp5_curve.csv")) return 0;
    std::vector<HBand> bands;
    if (const auto ci = read_table(dir / "exp5_ci.csv"); ci && !ci->rows.empty()) {
        if (const auto row = ci->labeled_row("final_test_acc")) {
            bands.push_back({std::stod((*row)[ci->col("lo")]),
                             std::stod((*row)[ci->col("hi")]), "#d62728"});
        }
    }
    write_line_chart(dir / "exp5_noise.svg",
                     "Mean test accuracy per epoch under depolarizing noise", "epoch",
                     "accuracy (%)",
                     {{"noisy runs mean", table->numbers("epoch"),
                       table->numbers("mean_test_acc"), "#d62728", false, true}},
                     bands);
    return 1;
}

}  // namespace

int emit_plots(const std::string& dir_string) {
    const fs::path dir(dir_string);
    if (!fs::is_directory(dir)) {
        std::cerr << "plot: no such directory: " << dir << "\n";
        return 0;
    }
    int written = 0;
    const std::vector<int (*)(const fs::path&)> plotters = {plot_exp1, plot_exp2, plot_exp3,
                                                            plot_exp4, plot_exp5};
    for (auto plotter : plotters) {
        try {
            written += plotter(dir);
        } catch (const std::exception& e) {
            std::cerr << "plot: skipping malformed CSV (" << e.what() << ")\n";
        }
    }
    return written;
}

}  // namespace qewo::harness
