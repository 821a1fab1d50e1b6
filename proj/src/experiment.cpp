#include "lri/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lri {

RunResult run_training(const Dataset& ds, const ModelConfig& cfg, const TrainConfig& tcfg) {
    auto t0 = std::chrono::steady_clock::now();
    TrainResult tr = train(ds, cfg, tcfg);
    RunResult r;
    r.cfg = cfg;
    r.seed = tcfg.seed;
    r.n_params = count_parameters(cfg);
    r.test_acc = tr.trace.empty() ? 0.0 : tr.trace.back().test_acc;
    r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.trace = std::move(tr.trace);
    return r;
}

static std::string degree_label(const ModelConfig& cfg) {
    return variant_is_voxel(cfg.variant) ? "-" : std::to_string(cfg.N);
}

static std::string rotation_label(const ModelConfig& cfg) {
    if (variant_uses_rotations(cfg.variant) || cfg.variant == Variant::z3_augm)
        return cfg.rot_label;
    return "-";
}

TableRow aggregate_runs(const ModelConfig& cfg, const std::vector<RunResult>& runs) {
    TableRow row;
    row.model = variant_name(cfg);
    row.N = degree_label(cfg);
    row.M = rotation_label(cfg);
    row.n_f = cfg.n_f;
    row.n_params = count_parameters(cfg);
    for (const RunResult& r : runs) row.accs.push_back(r.test_acc);
    double n = double(row.accs.size());
    for (double a : row.accs) row.mean_acc += a / n;
    if (row.accs.size() > 1) {
        double ss = 0;
        for (double a : row.accs) ss += (a - row.mean_acc) * (a - row.mean_acc);
        row.std_acc = std::sqrt(ss / (n - 1.0));
    }
    return row;
}

std::vector<TableRow> run_grid(const Dataset& ds, const std::vector<ModelConfig>& grid,
                               int repetitions, const TrainConfig& proto, bool verbose) {
    std::vector<TableRow> rows;
    for (const ModelConfig& cfg : grid) {
        validate_config(cfg);
        std::vector<RunResult> runs;
        for (int r = 0; r < repetitions; ++r) {
            TrainConfig tcfg = proto;
            tcfg.seed = proto.seed + uint64_t(r);
            runs.push_back(run_training(ds, cfg, tcfg));
            if (verbose)
                std::fprintf(stderr, "[grid] %-10s rep %d/%d  acc %.3f  (%.0f s)\n",
                             variant_name(cfg).c_str(), r + 1, repetitions, runs.back().test_acc,
                             runs.back().wall_s);
        }
        rows.push_back(aggregate_runs(cfg, runs));
    }
    return rows;
}

std::string format_table(const std::vector<TableRow>& rows) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf, "%-12s %3s %5s %4s %8s  %s\n", "model", "N", "M", "#f",
                  "#param", "accuracy");
    out += buf;
    for (const TableRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%-12s %3s %5s %4d %8ld  %.3f +/- %.3f\n", r.model.c_str(),
                      r.N.c_str(), r.M.c_str(), r.n_f, r.n_params, r.mean_acc, r.std_acc);
        out += buf;
    }
    return out;
}

void write_table_csv(const std::string& path, const std::vector<TableRow>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "model,N,M,n_filters,n_params,mean_acc,std_acc,accs\n";
    char buf[64];
    for (const TableRow& r : rows) {
        os << r.model << ',' << r.N << ',' << r.M << ',' << r.n_f << ',' << r.n_params << ',';
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,", r.mean_acc, r.std_acc);
        os << buf;
        for (size_t i = 0; i < r.accs.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.6f", i ? ";" : "", r.accs[i]);
            os << buf;
        }
        os << '\n';
    }
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& trace) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "iteration,train_loss,train_acc,test_acc,wall_ms\n";
    char buf[160];
    for (const MetricsRow& m : trace) {
        std::snprintf(buf, sizeof buf, "%ld,%.6f,%.6f,%.6f,%.1f\n", m.iteration, m.train_loss,
                      m.train_acc, m.test_acc, m.wall_ms);
        os << buf;
    }
}

std::vector<BenchRow> run_bench(const Dataset& ds, const std::vector<ModelConfig>& grid,
                                int iters, int reps, uint64_t seed, bool verbose) {
    std::vector<BenchRow> rows;
    for (const ModelConfig& cfg : grid) {
        validate_config(cfg);
        std::vector<double> times;
        for (int r = 0; r < reps; ++r) {
            TrainConfig tcfg;
            tcfg.iterations = iters;
            tcfg.eval_every = iters + 1;  // only the final trace row
            tcfg.seed = seed + uint64_t(r);
            auto t0 = std::chrono::steady_clock::now();
            train(ds, cfg, tcfg);
            times.push_back(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        std::sort(times.begin(), times.end());
        BenchRow row;
        row.model = variant_name(cfg);
        row.N = degree_label(cfg);
        row.seconds_1k = times[times.size() / 2] * 1000.0 / double(iters);
        rows.push_back(row);
        if (verbose)
            std::fprintf(stderr, "[bench] %-10s N=%-2s %.1f s / 1k iters\n", row.model.c_str(),
                         row.N.c_str(), row.seconds_1k);
    }
    double z3 = 0;
    for (const BenchRow& r : rows)
        if (r.model == "z3") z3 = r.seconds_1k;
    for (BenchRow& r : rows) r.ratio_z3 = z3 > 0 ? r.seconds_1k / z3 : 1.0;
    return rows;
}

std::string format_bench(const std::vector<BenchRow>& rows) {
    char buf[128];
    std::string out;
    std::snprintf(buf, sizeof buf, "%-12s %3s %12s %8s\n", "model", "N", "s/1k-iters", "x z3");
    out += buf;
    for (const BenchRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%-12s %3s %12.1f %8.2f\n", r.model.c_str(), r.N.c_str(),
                      r.seconds_1k, r.ratio_z3);
        out += buf;
    }
    return out;
}

}  // namespace lri
