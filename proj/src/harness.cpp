// Copyright 2026 The qewo authors
// SPDX-License-Identifier: Apache-2.0
#include "qewo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fs = std::filesystem;

namespace qewo::harness {

namespace {

// Stream ids under the experiment master seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kRunStream = 2;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

/// CSV with a '#'-prefixed header block; data rows are written with fixed
/// formatting so identical runs produce byte-identical bodies. Files are
/// written to a temp path and renamed into place.
class CsvWriter {
public:
    explicit CsvWriter(fs::path path) : path_(std::move(path)), tmp_(path_.string() + ".tmp") {
        out_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!out_) throw std::runtime_error("cannot open " + tmp_.string() + " for writing");
    }

    void comment(const std::string& text) { out_ << "# " << text << "\n"; }

    void comment_kv(const std::string& key, const std::string& value) {
        out_ << "# " << key << "=" << value << "\n";
    }

    void columns(const std::vector<std::string>& names) {
        for (std::size_t c = 0; c < names.size(); ++c) {
            out_ << (c ? "," : "") << names[c];
        }
        out_ << "\n";
    }

    void row(const std::vector<double>& values) {
        for (std::size_t c = 0; c < values.size(); ++c) {
            out_ << (c ? "," : "") << format_double(values[c]);
        }
        out_ << "\n";
    }

    void row_labeled(const std::string& label, const std::vector<double>& values) {
        out_ << label;
        for (double v : values) out_ << "," << format_double(v);
        out_ << "\n";
    }

    void close() {
        if (closed_) return;
        out_.close();
        fs::rename(tmp_, path_);
        closed_ = true;
    }

    ~CsvWriter() {
        if (!closed_) {
            out_.close();
            std::error_code ec;
            fs::remove(tmp_, ec);
        }
    }

private:
    fs::path path_;
    fs::path tmp_;
    std::ofstream out_;
    bool closed_ = false;
};

std::string now_string() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string arch_string(const std::vector<int>& arch) {
    std::string s;
    for (std::size_t i = 0; i < arch.size(); ++i) {
        if (i) s += "-";
        s += std::to_string(arch[i]);
    }
    return s;
}

void write_common_header(CsvWriter& csv, const ExperimentSpec& spec,
                         const std::vector<int>& arch, const std::string& optimizer,
                         const qsim::NoiseModel& noise) {
    csv.comment_kv("experiment", spec.id);
    csv.comment_kv("generated_at", now_string());
    csv.comment_kv("architecture", arch_string(arch));
    csv.comment_kv("optimizer", optimizer);
    csv.comment_kv("master_seed", std::to_string(spec.seed));
    csv.comment_kv("epochs", std::to_string(spec.epochs));
    csv.comment_kv("reduced", spec.reduced ? "true" : "false");
    if (optimizer == "qewo") {
        const auto& q = spec.qewo;
        csv.comment_kv("n_candidates_hidden", std::to_string(q.n_candidates_hidden));
        csv.comment_kv("n_candidates_output", std::to_string(q.n_candidates_output));
        csv.comment_kv("alpha0", format_double(q.alpha0));
        csv.comment_kv("gamma_down", format_double(q.gamma_down));
        csv.comment_kv("gamma_up", format_double(q.gamma_up));
        csv.comment_kv("alpha_min", format_double(q.alpha_min));
        csv.comment_kv("alpha_max", format_double(q.alpha_max));
        csv.comment_kv("tol_ratio_hidden", format_double(q.tol_ratio_hidden));
        csv.comment_kv("tol_ratio_output", format_double(q.tol_ratio_output));
        csv.comment_kv("initial_min_loss", format_double(q.initial_min_loss));
        csv.comment_kv("batch_size", std::to_string(q.batch_size));
        csv.comment_kv("dropout_p", format_double(q.dropout_p));
        csv.comment_kv("l2_lambda", format_double(q.l2_lambda));
        csv.comment_kv("keep_if_worse", q.keep_if_worse ? "true" : "false");
    } else if (optimizer == "adam") {
        const auto& a = spec.adam;
        csv.comment_kv("learning_rate", format_double(a.learning_rate));
        csv.comment_kv("beta1", format_double(a.beta1));
        csv.comment_kv("beta2", format_double(a.beta2));
        csv.comment_kv("adam_epsilon", format_double(a.epsilon));
        csv.comment_kv("batch_size", std::to_string(a.batch_size));
        csv.comment_kv("dropout_p", format_double(a.dropout_p));
        csv.comment_kv("l2_lambda", format_double(a.l2_lambda));
    } else if (optimizer == "ga") {
        const auto& g = spec.ga;
        csv.comment_kv("population_size", std::to_string(g.population_size));
        csv.comment_kv("generations", std::to_string(g.generations));
        csv.comment_kv("tournament_size", std::to_string(g.tournament_size));
        csv.comment_kv("crossover_rate", format_double(g.crossover_rate));
        csv.comment_kv("mutation_rate", format_double(g.mutation_rate));
        csv.comment_kv("mutation_sigma", format_double(g.mutation_sigma));
    }
    if (noise.enabled) {
        csv.comment_kv("noise_p1", format_double(noise.p1));
        csv.comment_kv("noise_p2", format_double(noise.p2));
    } else {
        csv.comment_kv("noise", "off");
    }
}

void write_epoch_csv(const fs::path& path, const ExperimentSpec& spec,
                     const std::vector<int>& arch, const std::string& optimizer,
                     const qsim::NoiseModel& noise, std::uint64_t run_seed,
                     const RunOutput& run) {
    CsvWriter csv(path);
    write_common_header(csv, spec, arch, optimizer, noise);
    csv.comment_kv("run_seed", std::to_string(run_seed));
    double total_ms = 0.0;
    for (const auto& m : run.epochs) total_ms += m.wall_time_ms;
    csv.comment_kv("wall_time_ms_total", format_double(total_ms));
    csv.comment_kv("grover_fallbacks_total", std::to_string(run.grover.fallbacks));
    csv.columns({"epoch", "train_loss", "test_loss", "train_acc", "test_acc",
                 "grover_fallbacks"});
    for (const auto& m : run.epochs) {
        csv.row({static_cast<double>(m.epoch), m.train_loss, m.test_loss, m.train_acc,
                 m.test_acc, static_cast<double>(m.grover_fallback_count)});
    }
    csv.close();
}

std::string run_suffix(int run) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d", run);
    return buf;
}

std::vector<double> final_test_accs(const std::vector<RunOutput>& runs) {
    std::vector<double> accs;
    accs.reserve(runs.size());
    for (const auto& r : runs) accs.push_back(r.epochs.back().test_acc);
    return accs;
}

std::vector<double> final_test_losses(const std::vector<RunOutput>& runs) {
    std::vector<double> losses;
    losses.reserve(runs.size());
    for (const auto& r : runs) losses.push_back(r.epochs.back().test_loss);
    return losses;
}

std::vector<double> mean_test_acc_per_epoch(const std::vector<RunOutput>& runs) {
    const std::size_t n_epochs = runs.front().epochs.size();
    std::vector<double> means(n_epochs, 0.0);
    for (const auto& r : runs) {
        for (std::size_t e = 0; e < n_epochs; ++e) means[e] += r.epochs[e].test_acc;
    }
    for (auto& m : means) m /= static_cast<double>(runs.size());
    return means;
}

}  // namespace

double improvement_pct_loss(double classic, double quantum) {
    return (classic - quantum) / classic * 100.0;
}

double improvement_pct_acc(double classic, double quantum) {
    return (quantum - classic) / classic * 100.0;
}

std::size_t best_run_index(const std::vector<RunOutput>& runs) {
    if (runs.empty()) throw std::invalid_argument("best_run_index: no runs");
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        const auto& cur = runs[r].epochs.back();
        const auto& top = runs[best].epochs.back();
        if (cur.test_acc > top.test_acc ||
            (cur.test_acc == top.test_acc && cur.test_loss < top.test_loss)) {
            best = r;
        }
    }
    return best;
}

std::string csv_body(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("csv_body: cannot open " + path);
    std::string body, line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        body += line;
        body += '\n';
    }
    return body;
}

std::vector<int> wine_arch() { return {13, 32, 3}; }
std::vector<int> digits_arch() { return {64, 64, 32, 16, 10}; }

QewoConfig wine_qewo_config() {
    QewoConfig cfg;
    cfg.n_candidates_hidden = 32;
    cfg.n_candidates_output = 64;
    cfg.batch_size = 0;  // 142 training rows: full batch
    return cfg;
}

QewoConfig digits_qewo_config(int hidden_resolution) {
    QewoConfig cfg;
    cfg.n_candidates_hidden = hidden_resolution;
    cfg.n_candidates_output = 64;
    cfg.batch_size = 128;
    return cfg;
}

PreparedData prepare_wine(const std::string& data_dir, std::uint64_t split_seed) {
    const std::string dir = data_dir.empty() ? data::resolve_data_dir() : data_dir;
    const std::string path = (fs::path(dir) / "wine.csv").string();
    if (!fs::exists(path)) {
        throw std::runtime_error("dataset not found: " + path +
                                 " (set QEWO_DATA_DIR to the directory holding wine.csv)");
    }
    data::Dataset ds = data::load_csv(path, data::Schema::kWine);
    data::SplitDataset parts = data::split(ds, 0.8, split_seed);
    data::normalize(parts.train, parts.test);
    PreparedData out;
    out.n_classes = ds.n_classes;
    out.checksum = ds.checksum;
    out.X_train = std::move(parts.train.X);
    out.X_test = std::move(parts.test.X);
    out.Y_train = data::one_hot(parts.train.y, ds.n_classes);
    out.Y_test = data::one_hot(parts.test.y, ds.n_classes);
    out.y_train = std::move(parts.train.y);
    out.y_test = std::move(parts.test.y);
    return out;
}

PreparedData prepare_digits(const std::string& data_dir, std::uint64_t split_seed,
                            bool reduced) {
    const std::string dir = data_dir.empty() ? data::resolve_data_dir() : data_dir;
    const std::string path = (fs::path(dir) / "digits.csv").string();
    if (!fs::exists(path)) {
        throw std::runtime_error("dataset not found: " + path +
                                 " (set QEWO_DATA_DIR to the directory holding digits.csv)");
    }
    data::Dataset ds = data::load_csv(path, data::Schema::kDigits);
    if (reduced) ds = data::subsample(ds, 600, split_seed);
    data::SplitDataset parts = data::split(ds, 0.8, split_seed);
    data::normalize(parts.train, parts.test);
    PreparedData out;
    out.n_classes = ds.n_classes;
    out.checksum = ds.checksum;
    out.X_train = std::move(parts.train.X);
    out.X_test = std::move(parts.test.X);
    out.Y_train = data::one_hot(parts.train.y, ds.n_classes);
    out.Y_test = data::one_hot(parts.test.y, ds.n_classes);
    out.y_train = std::move(parts.train.y);
    out.y_test = std::move(parts.test.y);
    return out;
}

RunOutput run_qewo(const PreparedData& data, const std::vector<int>& arch,
                   const QewoConfig& cfg, const qsim::NoiseModel& noise,
                   nn::InitScheme scheme, nn::ActivationKind activation,
                   std::uint64_t run_seed) {
    RngStream run_rng(run_seed);
    auto init_rng = run_rng.child(0);
    nn::MlpModel model = nn::init_weights(arch, scheme, activation, init_rng);
    TrainerState state = train(std::move(model), data.X_train, data.Y_train, data.X_test,
                               data.Y_test, cfg, noise, run_rng);
    return {std::move(state.epoch_metrics), state.grover_stats};
}

RunOutput run_adam(const PreparedData& data, const std::vector<int>& arch,
                   const baselines::AdamConfig& cfg, nn::ActivationKind activation,
                   std::uint64_t run_seed) {
    RngStream run_rng(run_seed);
    auto init_rng = run_rng.child(0);
    nn::MlpModel model =
        nn::init_weights(arch, nn::InitScheme::kUniform, activation, init_rng);
    auto [trained, metrics] = baselines::adam_train(std::move(model), data.X_train,
                                                    data.Y_train, data.X_test, data.Y_test,
                                                    cfg, run_rng);
    (void)trained;
    return {std::move(metrics), {}};
}

RunOutput run_ga(const PreparedData& data, const std::vector<int>& arch,
                 const baselines::GaConfig& cfg, nn::ActivationKind activation,
                 std::uint64_t run_seed) {
    RngStream run_rng(run_seed);
    auto [model, metrics] = baselines::ga_train(arch, activation, data.X_train, data.Y_train,
                                                data.X_test, data.Y_test, cfg, run_rng);
    (void)model;
    return {std::move(metrics), {}};
}

namespace {

std::uint64_t run_seed_for(const ExperimentSpec& spec, std::uint64_t group, int run) {
    return RngStream(spec.seed)
        .child(kRunStream)
        .child(group)
        .child(static_cast<std::uint64_t>(run))
        .seed();
}

std::uint64_t split_seed_for(const ExperimentSpec& spec) {
    return RngStream(spec.seed).child(kSplitStream).seed();
}

// ---------- experiment 1: Wine 13-32-3, QEWO vs ADAM ----------

int run_exp1(const ExperimentSpec& spec, const fs::path& out) {
    const int runs = spec.runs > 0 ? spec.runs : 10;
    const auto arch = wine_arch();
    QewoConfig qewo_cfg = spec.qewo;
    qewo_cfg.epochs = spec.epochs;
    baselines::AdamConfig adam_cfg = spec.adam;
    adam_cfg.epochs = spec.epochs;
    const qsim::NoiseModel noise = spec.force_noise
                                       ? qsim::NoiseModel::depolarizing(spec.noise_p1,
                                                                        spec.noise_p2)
                                       : qsim::NoiseModel::off();

    const PreparedData data = prepare_wine(spec.data_dir, split_seed_for(spec));

    std::vector<RunOutput> quantum_runs, classic_runs;
    std::vector<std::uint64_t> quantum_seeds, classic_seeds;
    for (int r = 0; r < runs; ++r) {
        const std::uint64_t qs = run_seed_for(spec, 1, r);
        const std::uint64_t cs = run_seed_for(spec, 2, r);
        quantum_seeds.push_back(qs);
        classic_seeds.push_back(cs);
        quantum_runs.push_back(run_qewo(data, arch, qewo_cfg, noise,
                                        nn::InitScheme::kUniform,
                                        nn::ActivationKind::kTanh, qs));
        classic_runs.push_back(run_adam(data, arch, adam_cfg,
                                        nn::ActivationKind::kTanh, cs));
        write_epoch_csv(out / ("exp1_quantum_run" + run_suffix(r) + ".csv"), spec, arch,
                        "qewo", noise, qs, quantum_runs.back());
        write_epoch_csv(out / ("exp1_classic_run" + run_suffix(r) + ".csv"), spec, arch,
                        "adam", qsim::NoiseModel::off(), cs, classic_runs.back());
    }

    const std::size_t best_q = best_run_index(quantum_runs);
    const std::size_t best_c = best_run_index(classic_runs);

    {
        CsvWriter csv(out / "exp1_best.csv");
        write_common_header(csv, spec, arch, "qewo-vs-adam", noise);
        csv.comment_kv("best_quantum_run", std::to_string(best_q));
        csv.comment_kv("best_quantum_seed", std::to_string(quantum_seeds[best_q]));
        csv.comment_kv("best_classic_run", std::to_string(best_c));
        csv.comment_kv("best_classic_seed", std::to_string(classic_seeds[best_c]));
        csv.comment("best run = highest final test accuracy, ties by lowest final test loss");
        csv.columns({"epoch",
                     "classic_train_loss", "quantum_train_loss", "train_loss_reduction",
                     "train_loss_improvement_pct",
                     "classic_test_loss", "quantum_test_loss", "test_loss_reduction",
                     "test_loss_improvement_pct",
                     "classic_train_acc", "quantum_train_acc", "train_acc_improvement",
                     "train_acc_improvement_pct",
                     "classic_test_acc", "quantum_test_acc", "test_acc_improvement",
                     "test_acc_improvement_pct"});
        const auto& q = quantum_runs[best_q].epochs;
        const auto& c = classic_runs[best_c].epochs;
        for (std::size_t e = 0; e < q.size(); ++e) {
            csv.row({static_cast<double>(e + 1),
                     c[e].train_loss, q[e].train_loss, c[e].train_loss - q[e].train_loss,
                     improvement_pct_loss(c[e].train_loss, q[e].train_loss),
                     c[e].test_loss, q[e].test_loss, c[e].test_loss - q[e].test_loss,
                     improvement_pct_loss(c[e].test_loss, q[e].test_loss),
                     c[e].train_acc, q[e].train_acc, q[e].train_acc - c[e].train_acc,
                     improvement_pct_acc(c[e].train_acc, q[e].train_acc),
                     c[e].test_acc, q[e].test_acc, q[e].test_acc - c[e].test_acc,
                     improvement_pct_acc(c[e].test_acc, q[e].test_acc)});
        }
        csv.close();
    }

    {
        CsvWriter csv(out / "exp1_summary.csv");
        write_common_header(csv, spec, arch, "qewo-vs-adam", noise);
        csv.columns({"run", "quantum_seed", "quantum_final_test_acc",
                     "quantum_final_test_loss", "classic_seed", "classic_final_test_acc",
                     "classic_final_test_loss"});
        for (int r = 0; r < runs; ++r) {
            csv.row({static_cast<double>(r), static_cast<double>(quantum_seeds[r]),
                     quantum_runs[r].epochs.back().test_acc,
                     quantum_runs[r].epochs.back().test_loss,
                     static_cast<double>(classic_seeds[r]),
                     classic_runs[r].epochs.back().test_acc,
                     classic_runs[r].epochs.back().test_loss});
        }
        csv.close();
    }
    return 0;
}

// ---------- experiment 2: Digits deep net, resolution sweep + comparison ----------

int run_exp2(const ExperimentSpec& spec, const fs::path& out) {
    const auto arch = digits_arch();
    const qsim::NoiseModel noise = spec.force_noise
                                       ? qsim::NoiseModel::depolarizing(spec.noise_p1,
                                                                        spec.noise_p2)
                                       : qsim::NoiseModel::off();
    const PreparedData data = prepare_digits(spec.data_dir, split_seed_for(spec),
                                             spec.reduced);

    // Resolution sweep, one run per hidden resolution, fixed 64 output.
    std::vector<int> resolutions;
    for (int r = spec.sweep_lo; r <= spec.sweep_hi; ++r) resolutions.push_back(r);
    std::vector<RunOutput> sweep_runs;
    for (std::size_t idx = 0; idx < resolutions.size(); ++idx) {
        QewoConfig cfg = spec.qewo;
        cfg.n_candidates_hidden = resolutions[idx];
        cfg.epochs = spec.epochs;
        const std::uint64_t seed = run_seed_for(spec, 1, static_cast<int>(idx));
        sweep_runs.push_back(run_qewo(data, arch, cfg, noise, nn::InitScheme::kUniform,
                                      nn::ActivationKind::kTanh, seed));
        ExperimentSpec header_spec = spec;
        header_spec.qewo = cfg;
        write_epoch_csv(out / ("exp2_res" + std::to_string(resolutions[idx]) + ".csv"),
                        header_spec, arch, "qewo", noise, seed, sweep_runs.back());
        std::cout << "exp2: resolution " << resolutions[idx] << " final test acc "
                  << format_double(sweep_runs.back().epochs.back().test_acc) << "\n";
    }

    {
        CsvWriter csv(out / "exp2_sweep.csv");
        write_common_header(csv, spec, arch, "qewo", noise);
        csv.columns({"resolution", "final_train_loss", "final_train_acc", "final_test_loss",
                     "final_test_acc"});
        for (std::size_t idx = 0; idx < resolutions.size(); ++idx) {
            const auto& last = sweep_runs[idx].epochs.back();
            csv.row({static_cast<double>(resolutions[idx]), last.train_loss, last.train_acc,
                     last.test_loss, last.test_acc});
        }
        csv.close();
    }

    // Confidence intervals over the stable 17..31 portion of the sweep.
    {
        std::vector<double> accs, losses;
        for (std::size_t idx = 0; idx < resolutions.size(); ++idx) {
            if (resolutions[idx] >= 17 && resolutions[idx] <= 31) {
                accs.push_back(sweep_runs[idx].epochs.back().test_acc);
                losses.push_back(sweep_runs[idx].epochs.back().test_loss);
            }
        }
        if (accs.size() >= 2) {
            const double t = t_value_95(static_cast<int>(accs.size()) - 1);
            const auto acc_ci = student_t_ci(accs, t);
            const auto loss_ci = student_t_ci(losses, t);
            CsvWriter csv(out / "exp2_ci.csv");
            write_common_header(csv, spec, arch, "qewo", noise);
            csv.columns({"metric", "n", "mean", "stddev", "t_value", "margin", "lo", "hi"});
            csv.row_labeled("final_test_acc",
                            {static_cast<double>(acc_ci.n), acc_ci.mean, sample_stddev(accs),
                             acc_ci.t_value, acc_ci.margin, acc_ci.lo(), acc_ci.hi()});
            csv.row_labeled("final_test_loss",
                            {static_cast<double>(loss_ci.n), loss_ci.mean,
                             sample_stddev(losses), loss_ci.t_value, loss_ci.margin,
                             loss_ci.lo(), loss_ci.hi()});
            csv.close();
        }
    }

    // Convergence comparison at resolution 19: QEWO vs ADAM vs GA, averaged
    // over `runs` trainings each.
    const int comparison_runs = spec.runs > 0 ? spec.runs : 10;
    QewoConfig best_cfg = spec.qewo;
    best_cfg.n_candidates_hidden = 19;
    best_cfg.epochs = spec.epochs;
    baselines::AdamConfig adam_cfg = spec.adam;
    adam_cfg.epochs = spec.epochs;
    adam_cfg.batch_size = 128;
    baselines::GaConfig ga_cfg = spec.ga;
    ga_cfg.generations = spec.epochs;

    std::vector<RunOutput> quantum_runs, classic_runs, genetic_runs;
    for (int r = 0; r < comparison_runs; ++r) {
        quantum_runs.push_back(run_qewo(data, arch, best_cfg, noise,
                                        nn::InitScheme::kUniform,
                                        nn::ActivationKind::kTanh,
                                        run_seed_for(spec, 2, r)));
        classic_runs.push_back(run_adam(data, arch, adam_cfg, nn::ActivationKind::kTanh,
                                        run_seed_for(spec, 3, r)));
        genetic_runs.push_back(run_ga(data, arch, ga_cfg, nn::ActivationKind::kTanh,
                                      run_seed_for(spec, 4, r)));
    }

    {
        CsvWriter csv(out / "exp2_fig7.csv");
        write_common_header(csv, spec, arch, "qewo-vs-adam-vs-ga", noise);
        csv.comment_kv("comparison_runs", std::to_string(comparison_runs));
        csv.comment_kv("hidden_resolution", "19");
        csv.comment("one GA generation is aligned to one epoch");
        csv.columns({"epoch", "quantum_mean_test_acc", "classic_mean_test_acc",
                     "genetic_mean_test_acc"});
        const auto q = mean_test_acc_per_epoch(quantum_runs);
        const auto c = mean_test_acc_per_epoch(classic_runs);
        const auto g = mean_test_acc_per_epoch(genetic_runs);
        for (std::size_t e = 0; e < q.size(); ++e) {
            csv.row({static_cast<double>(e + 1), q[e], c[e], g[e]});
        }
        csv.close();
    }
    return 0;
}

// ---------- experiment 3: weight initialization schemes ----------

int run_exp3(const ExperimentSpec& spec, const fs::path& out) {
    const auto arch = digits_arch();
    const int runs = spec.runs > 0 ? spec.runs : 10;
    const qsim::NoiseModel noise = spec.force_noise
                                       ? qsim::NoiseModel::depolarizing(spec.noise_p1,
                                                                        spec.noise_p2)
                                       : qsim::NoiseModel::off();
    const PreparedData data = prepare_digits(spec.data_dir, split_seed_for(spec),
                                             spec.reduced);
    QewoConfig cfg = spec.qewo;
    cfg.n_candidates_hidden = 19;
    cfg.epochs = spec.epochs;

    const std::vector<nn::InitScheme> schemes = {nn::InitScheme::kUniform,
                                                 nn::InitScheme::kXavier,
                                                 nn::InitScheme::kKaiming};
    std::vector<std::vector<RunOutput>> all_runs;
    for (std::size_t s = 0; s < schemes.size(); ++s) {
        std::vector<RunOutput> scheme_runs;
        for (int r = 0; r < runs; ++r) {
            scheme_runs.push_back(run_qewo(data, arch, cfg, noise, schemes[s],
                                           nn::ActivationKind::kTanh,
                                           run_seed_for(spec, s + 1, r)));
        }
        all_runs.push_back(std::move(scheme_runs));
        std::cout << "exp3: " << nn::to_string(schemes[s]) << " mean final test acc "
                  << format_double(sample_mean(final_test_accs(all_runs.back()))) << "\n";
    }

    {
        CsvWriter csv(out / "exp3_init.csv");
        write_common_header(csv, spec, arch, "qewo", noise);
        csv.comment_kv("runs_per_scheme", std::to_string(runs));
        csv.columns({"epoch", "uniform_mean_test_acc", "xavier_mean_test_acc",
                     "kaiming_mean_test_acc"});
        const auto u = mean_test_acc_per_epoch(all_runs[0]);
        const auto x = mean_test_acc_per_epoch(all_runs[1]);
        const auto k = mean_test_acc_per_epoch(all_runs[2]);
        for (std::size_t e = 0; e < u.size(); ++e) {
            csv.row({static_cast<double>(e + 1), u[e], x[e], k[e]});
        }
        csv.close();
    }
    {
        CsvWriter csv(out / "exp3_summary.csv");
        write_common_header(csv, spec, arch, "qewo", noise);
        csv.columns({"scheme", "runs", "mean_final_test_acc", "stddev", "margin", "lo", "hi"});
        for (std::size_t s = 0; s < schemes.size(); ++s) {
            const auto accs = final_test_accs(all_runs[s]);
            const double t = t_value_95(static_cast<int>(accs.size()) - 1);
            const auto ci = student_t_ci(accs, t);
            csv.row_labeled(nn::to_string(schemes[s]),
                            {static_cast<double>(runs), ci.mean, sample_stddev(accs),
                             ci.margin, ci.lo(), ci.hi()});
        }
        csv.close();
    }
    return 0;
}

// ---------- experiment 4: activation functions ----------

int run_exp4(const ExperimentSpec& spec, const fs::path& out) {
    const auto arch = digits_arch();
    const int runs = spec.runs > 0 ? spec.runs : 10;
    const qsim::NoiseModel noise = spec.force_noise
                                       ? qsim::NoiseModel::depolarizing(spec.noise_p1,
                                                                        spec.noise_p2)
                                       : qsim::NoiseModel::off();
    const PreparedData data = prepare_digits(spec.data_dir, split_seed_for(spec),
                                             spec.reduced);
    QewoConfig cfg = spec.qewo;
    cfg.n_candidates_hidden = 19;
    cfg.epochs = spec.epochs;

    const std::vector<nn::ActivationKind> activations = {nn::ActivationKind::kTanh,
                                                         nn::ActivationKind::kGelu,
                                                         nn::ActivationKind::kSwish};
    std::vector<std::vector<RunOutput>> all_runs;
    for (std::size_t a = 0; a < activations.size(); ++a) {
        std::vector<RunOutput> act_runs;
        for (int r = 0; r < runs; ++r) {
            act_runs.push_back(run_qewo(data, arch, cfg, noise, nn::InitScheme::kUniform,
                                        activations[a], run_seed_for(spec, a + 1, r)));
        }
        all_runs.push_back(std::move(act_runs));
        std::cout << "exp4: " << nn::to_string(activations[a]) << " mean final test acc "
                  << format_double(sample_mean(final_test_accs(all_runs.back()))) << "\n";
    }

    {
        CsvWriter csv(out / "exp4_activations.csv");
        write_common_header(csv, spec, arch, "qewo", noise);
        csv.comment_kv("runs_per_activation", std::to_string(runs));
        csv.columns({"epoch", "tanh_mean_test_acc", "gelu_mean_test_acc",
                     "swish_mean_test_acc"});
        const auto t = mean_test_acc_per_epoch(all_runs[0]);
        const auto g = mean_test_acc_per_epoch(all_runs[1]);
        const auto s = mean_test_acc_per_epoch(all_runs[2]);
        for (std::size_t e = 0; e < t.size(); ++e) {
            csv.row({static_cast<double>(e + 1), t[e], g[e], s[e]});
        }
        csv.close();
    }
    {
        CsvWriter csv(out / "exp4_summary.csv");
        write_common_header(csv, spec, arch, "qewo", noise);
        csv.columns({"activation", "runs", "mean_final_test_acc", "stddev", "margin", "lo",
                     "hi"});
        for (std::size_t a = 0; a < activations.size(); ++a) {
            const auto accs = final_test_accs(all_runs[a]);
            const double t = t_value_95(static_cast<int>(accs.size()) - 1);
            const auto ci = student_t_ci(accs, t);
            csv.row_labeled(nn::to_string(activations[a]),
                            {static_cast<double>(runs), ci.mean, sample_stddev(accs),
                             ci.margin, ci.lo(), ci.hi()});
        }
        csv.close();
    }
    return 0;
}

// ---------- experiment 5: depolarizing noise at the best configuration ----------

int run_exp5(const ExperimentSpec& spec, const fs::path& out) {
    const auto arch = digits_arch();
    const int runs = spec.runs > 0 ? spec.runs : 15;
    const qsim::NoiseModel noise =
        qsim::NoiseModel::depolarizing(spec.noise_p1, spec.noise_p2);
    const PreparedData data = prepare_digits(spec.data_dir, split_seed_for(spec),
                                             spec.reduced);
    QewoConfig cfg = spec.qewo;
    cfg.n_candidates_hidden = 19;
    cfg.epochs = spec.epochs;

    std::vector<RunOutput> noisy_runs;
    std::vector<std::uint64_t> seeds;
    for (int r = 0; r < runs; ++r) {
        seeds.push_back(run_seed_for(spec, 1, r));
        noisy_runs.push_back(run_qewo(data, arch, cfg, noise, nn::InitScheme::kUniform,
                                      nn::ActivationKind::kTanh, seeds.back()));
        std::cout << "exp5: run " << r << " final test acc "
                  << format_double(noisy_runs.back().epochs.back().test_acc) << "\n";
    }

    {
        CsvWriter csv(out / "exp5_runs.csv");
        write_common_header(csv, spec, arch, "qewo", noise);
        csv.columns({"run", "seed", "final_test_acc", "final_test_loss",
                     "grover_fallbacks"});
        for (int r = 0; r < runs; ++r) {
            csv.row({static_cast<double>(r), static_cast<double>(seeds[r]),
                     noisy_runs[r].epochs.back().test_acc,
                     noisy_runs[r].epochs.back().test_loss,
                     static_cast<double>(noisy_runs[r].grover.fallbacks)});
        }
        csv.close();
    }
    {
        const auto accs = final_test_accs(noisy_runs);
        const auto losses = final_test_losses(noisy_runs);
        const double t = t_value_95(static_cast<int>(accs.size()) - 1);
        const auto acc_ci = student_t_ci(accs, t);
        const auto loss_ci = student_t_ci(losses, t);
        CsvWriter csv(out / "exp5_ci.csv");
        write_common_header(csv, spec, arch, "qewo", noise);
        csv.columns({"metric", "n", "mean", "stddev", "t_value", "margin", "lo", "hi"});
        csv.row_labeled("final_test_acc",
                        {static_cast<double>(acc_ci.n), acc_ci.mean, sample_stddev(accs),
                         acc_ci.t_value, acc_ci.margin, acc_ci.lo(), acc_ci.hi()});
        csv.row_labeled("final_test_loss",
                        {static_cast<double>(loss_ci.n), loss_ci.mean, sample_stddev(losses),
                         loss_ci.t_value, loss_ci.margin, loss_ci.lo(), loss_ci.hi()});
        csv.close();
    }
    {
        CsvWriter csv(out / "exp5_curve.csv");
        write_common_header(csv, spec, arch, "qewo", noise);
        csv.columns({"epoch", "mean_test_acc"});
        const auto means = mean_test_acc_per_epoch(noisy_runs);
        for (std::size_t e = 0; e < means.size(); ++e) {
            csv.row({static_cast<double>(e + 1), means[e]});
        }
        csv.close();
    }
    return 0;
}

}  // namespace

int run_experiment(const ExperimentSpec& spec, const std::string& out_dir) {
    const fs::path out(out_dir);
    fs::create_directories(out);
    ExperimentSpec effective = spec;
    if (effective.id == "exp1") {
        effective.qewo = spec.qewo;
        return run_exp1(effective, out);
    }
    // Digits experiments share the 128-row mini-batch default.
    if (effective.qewo.batch_size == 0) effective.qewo.batch_size = 128;
    if (effective.id == "exp2") return run_exp2(effective, out);
    if (effective.id == "exp3") return run_exp3(effective, out);
    if (effective.id == "exp4") return run_exp4(effective, out);
    if (effective.id == "exp5") return run_exp5(effective, out);
    std::cerr << "unknown experiment id: " << spec.id << " (expected exp1..exp5)\n";
    return 2;
}

void load_config_file(const std::string& path, ExperimentSpec& spec) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;

    auto take = [](nlohmann::json& obj, const char* key, auto& target) {
        if (obj.contains(key)) {
            target = obj.at(key).get<std::decay_t<decltype(target)>>();
            obj.erase(key);
        }
    };
    auto expect_empty = [&](const nlohmann::json& obj, const std::string& section) {
        if (!obj.empty()) {
            throw std::runtime_error("config file " + path + ": unknown key '" +
                                     obj.begin().key() + "' in section '" + section + "'");
        }
    };

    if (j.contains("qewo")) {
        auto q = j.at("qewo");
        take(q, "n_candidates_hidden", spec.qewo.n_candidates_hidden);
        take(q, "n_candidates_output", spec.qewo.n_candidates_output);
        take(q, "alpha0", spec.qewo.alpha0);
        take(q, "gamma_down", spec.qewo.gamma_down);
        take(q, "gamma_up", spec.qewo.gamma_up);
        take(q, "alpha_min", spec.qewo.alpha_min);
        take(q, "alpha_max", spec.qewo.alpha_max);
        take(q, "tol_ratio_hidden", spec.qewo.tol_ratio_hidden);
        take(q, "tol_ratio_output", spec.qewo.tol_ratio_output);
        take(q, "initial_min_loss", spec.qewo.initial_min_loss);
        take(q, "epochs", spec.qewo.epochs);
        take(q, "batch_size", spec.qewo.batch_size);
        take(q, "dropout_p", spec.qewo.dropout_p);
        take(q, "l2_lambda", spec.qewo.l2_lambda);
        take(q, "keep_if_worse", spec.qewo.keep_if_worse);
        take(q, "sigma_fallback", spec.qewo.sigma_fallback);
        take(q, "max_retries", spec.qewo.grover.max_retries);
        expect_empty(q, "qewo");
        j.erase("qewo");
    }
    if (j.contains("adam")) {
        auto a = j.at("adam");
        take(a, "learning_rate", spec.adam.learning_rate);
        take(a, "beta1", spec.adam.beta1);
        take(a, "beta2", spec.adam.beta2);
        take(a, "epsilon", spec.adam.epsilon);
        take(a, "batch_size", spec.adam.batch_size);
        take(a, "epochs", spec.adam.epochs);
        take(a, "l2_lambda", spec.adam.l2_lambda);
        take(a, "dropout_p", spec.adam.dropout_p);
        expect_empty(a, "adam");
        j.erase("adam");
    }
    if (j.contains("ga")) {
        auto g = j.at("ga");
        take(g, "population_size", spec.ga.population_size);
        take(g, "generations", spec.ga.generations);
        take(g, "tournament_size", spec.ga.tournament_size);
        take(g, "crossover_rate", spec.ga.crossover_rate);
        take(g, "mutation_rate", spec.ga.mutation_rate);
        take(g, "mutation_sigma", spec.ga.mutation_sigma);
        expect_empty(g, "ga");
        j.erase("ga");
    }
    if (j.contains("noise")) {
        auto n = j.at("noise");
        take(n, "p1", spec.noise_p1);
        take(n, "p2", spec.noise_p2);
        expect_empty(n, "noise");
        j.erase("noise");
    }
    if (!j.empty()) {
        throw std::runtime_error("config file " + path + ": unknown top-level key '" +
                                 j.begin().key() + "'");
    }
}

}  // namespace qewo::harness
