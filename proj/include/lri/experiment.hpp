#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "lri/dataset.hpp"
#include "lri/network.hpp"

namespace lri {

// One (config, seed) training run.
struct RunResult {
    ModelConfig cfg;
    uint64_t seed = 0;
    long n_params = 0;
    double test_acc = 0;  // final trace row
    double wall_s = 0;
    std::vector<MetricsRow> trace;
};

RunResult run_training(const Dataset& ds, const ModelConfig& cfg, const TrainConfig& tcfg);

// Aggregate over repetitions of one grid entry. N and M hold "-" where the
// variant has no degree / rotation set.
struct TableRow {
    std::string model;
    std::string N, M;
    int n_f = 0;
    long n_params = 0;
    std::vector<double> accs;  // final test accuracy per repetition
    double mean_acc = 0, std_acc = 0;
};

TableRow aggregate_runs(const ModelConfig& cfg, const std::vector<RunResult>& runs);

// Repetition r of every entry trains with seed proto.seed + r; other train
// settings are taken from proto as-is. verbose prints one stderr line per
// finished run.
std::vector<TableRow> run_grid(const Dataset& ds, const std::vector<ModelConfig>& grid,
                               int repetitions, const TrainConfig& proto, bool verbose = false);

std::string format_table(const std::vector<TableRow>& rows);
void write_table_csv(const std::string& path, const std::vector<TableRow>& rows);
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& trace);

// Median-of-reps wall time of `iters` training iterations, reported as
// seconds per 1000 iterations plus the ratio to the z3 row (1 when absent).
// Pass a dataset with a small test split: the final in-loop evaluation is
// part of what gets timed.
struct BenchRow {
    std::string model;
    std::string N;
    double seconds_1k = 0;
    double ratio_z3 = 0;
};
std::vector<BenchRow> run_bench(const Dataset& ds, const std::vector<ModelConfig>& grid,
                                int iters, int reps, uint64_t seed, bool verbose = false);
std::string format_bench(const std::vector<BenchRow>& rows);

}  // namespace lri
