#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lri/dataset.hpp"
#include "lri/experiment.hpp"
#include "lri/network.hpp"
#include "lri/verify.hpp"

using namespace lri;

namespace {

std::string normalize_rot(std::string m) {
    if (!m.empty() && (m[0] == 'm' || m[0] == 'M')) m = m.substr(1);
    return "M" + m;
}

ModelConfig config_from_flags(const std::string& model, int N, const std::string& M, int n_f,
                              int c, int stride, int n_c, int hidden) {
    ModelConfig cfg = parse_model_name(model);
    cfg.N = N;
    cfg.rot_label = normalize_rot(M);
    cfg.n_f = n_f;
    cfg.c = c;
    cfg.stride = stride;
    cfg.n_c = n_c;
    cfg.hidden = hidden;
    validate_config(cfg);
    return cfg;
}

Dataset load_dataset(const std::string& dir) {
    try {
        return read_dataset(dir);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(e.what()) +
                                 "\nhint: generate one first, e.g. `lri3d gen-dataset --out " +
                                 dir + "`");
    }
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    size_t b = 0;
    while (b <= s.size()) {
        size_t e = s.find(',', b);
        if (e == std::string::npos) e = s.size();
        if (e > b) out.push_back(s.substr(b, e - b));
        b = e + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"locally rotation invariant 3D texture operators"};
    app.require_subcommand(1);
    int rc = 0;

    // gen-dataset
    uint64_t g_seed = 7;
    int g_train = 200, g_test = 100;
    std::string g_out = "data";
    auto* gen = app.add_subcommand("gen-dataset", "generate the synthetic two-class 3D dataset");
    gen->add_option("--seed", g_seed, "master seed");
    gen->add_option("--train", g_train, "training samples");
    gen->add_option("--test", g_test, "test samples");
    gen->add_option("--out", g_out, "output directory");
    gen->callback([&]() {
        Dataset ds = generate_dataset(g_train, g_test, g_seed);
        write_dataset(ds, g_out);
        std::printf("wrote %s: %d train / %d test (seed %llu)\n", g_out.c_str(), g_train, g_test,
                    (unsigned long long)g_seed);
    });

    // shared model/train flags
    std::string t_model = "s-lri-hn", t_M = "24", t_data = "data";
    int t_N = 3, t_filters = 2, t_c = 7, t_stride = 1, t_classes = 2, t_hidden = 0;
    int t_iters = 5000, t_batch = 8, t_eval = 1000;
    double t_lr = 1e-3;
    uint64_t t_seed = 1;
    bool t_augment = false;
    std::string t_ckpt = "model.ckpt", t_metrics = "metrics.csv";

    auto* tr = app.add_subcommand("train", "train one model and write checkpoint + metrics CSV");
    tr->add_option("--model", t_model,
                   "z3 | z3-augm | g-lri | g-ri | s-lri-h | s-lri-hn | s-ri-h | s-ri-hn | sse-h | "
                   "sse-hn");
    tr->add_option("--N", t_N, "max spherical harmonic degree");
    tr->add_option("--M", t_M, "rotation set (1|4|24|72)");
    tr->add_option("--filters", t_filters, "number of filters");
    tr->add_option("--c", t_c, "kernel side (odd)");
    tr->add_option("--stride", t_stride, "convolution stride");
    tr->add_option("--classes", t_classes, "output classes");
    tr->add_option("--hidden", t_hidden, "hidden FC width (0 = none)");
    tr->add_option("--iterations", t_iters, "training iterations");
    tr->add_option("--batch", t_batch, "batch size");
    tr->add_option("--lr", t_lr, "Adam learning rate");
    tr->add_option("--seed", t_seed, "training seed");
    tr->add_flag("--augment", t_augment, "right-angle rotation augmentation");
    tr->add_option("--eval-every", t_eval, "iterations between metric rows");
    tr->add_option("--data", t_data, "dataset directory");
    tr->add_option("--checkpoint", t_ckpt, "checkpoint output path");
    tr->add_option("--metrics", t_metrics, "metrics CSV output path");
    tr->callback([&]() {
        ModelConfig cfg = config_from_flags(t_model, t_N, t_M, t_filters, t_c, t_stride,
                                            t_classes, t_hidden);
        std::string deg = variant_is_voxel(cfg.variant) ? "-" : std::to_string(cfg.N);
        std::printf("model %s  N %s  M %s  filters %d  parameters %ld\n",
                    variant_name(cfg).c_str(), deg.c_str(), cfg.rot_label.c_str(), cfg.n_f,
                    count_parameters(cfg));
        Dataset ds = load_dataset(t_data);
        TrainConfig tcfg;
        tcfg.batch = t_batch;
        tcfg.iterations = t_iters;
        tcfg.lr = t_lr;
        tcfg.seed = t_seed;
        tcfg.augment = t_augment;
        tcfg.eval_every = t_eval;
        TrainResult res = train(ds, cfg, tcfg);
        for (const MetricsRow& m : res.trace)
            std::printf("it %6ld  loss %.4f  train acc %.3f  test acc %.3f  %.0f ms\n",
                        m.iteration, m.train_loss, m.train_acc, m.test_acc, m.wall_ms);
        write_metrics_csv(t_metrics, res.trace);
        write_checkpoint(t_ckpt, cfg, res.state, tcfg.seed);
        std::printf("checkpoint %s  metrics %s\n", t_ckpt.c_str(), t_metrics.c_str());
    });

    // eval
    std::string e_ckpt = "model.ckpt", e_data = "data";
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    ev->add_option("--checkpoint", e_ckpt, "checkpoint path");
    ev->add_option("--data", e_data, "dataset directory");
    ev->callback([&]() {
        Checkpoint ck = read_checkpoint(e_ckpt);
        Dataset ds = load_dataset(e_data);
        ModelContext ctx = build_context(ck.cfg);
        EvalResult r = evaluate(ds.test, ck.state.theta, ctx);
        std::printf("model %s  test accuracy %.4f  loss %.4f  (%zu samples)\n",
                    variant_name(ck.cfg).c_str(), r.acc, r.loss, ds.test.size());
    });

    // table
    std::string b_models = "z3,sse-h,sse-hn,s-lri-hn", b_compare, b_data = "data", b_out;
    int b_reps = 3, b_iters = 5000, b_N = 3, b_filters = 2, b_c = 7, b_hidden = 0;
    std::string b_M = "24";
    uint64_t b_seed = 1;
    auto* tb = app.add_subcommand("table", "train a model grid and aggregate accuracies");
    tb->add_option("--models", b_models, "comma-separated model names");
    tb->add_option("--compare", b_compare, "'ri' appends s-ri-hn, g-ri and z3-augm rows");
    tb->add_option("--reps", b_reps, "repetitions per model");
    tb->add_option("--iterations", b_iters, "training iterations");
    tb->add_option("--N", b_N, "max degree for steerable rows");
    tb->add_option("--M", b_M, "rotation set");
    tb->add_option("--filters", b_filters, "filters per model");
    tb->add_option("--c", b_c, "kernel side");
    tb->add_option("--hidden", b_hidden, "hidden FC width");
    tb->add_option("--seed", b_seed, "base seed (rep r trains with seed+r)");
    tb->add_option("--data", b_data, "dataset directory");
    tb->add_option("--out", b_out, "table CSV output path");
    tb->callback([&]() {
        std::vector<std::string> names = split_csv(b_models);
        if (b_compare == "ri") {
            names.push_back("s-ri-hn");
            names.push_back("g-ri");
            names.push_back("z3-augm");
        } else if (!b_compare.empty()) {
            throw std::runtime_error("unknown --compare mode: " + b_compare);
        }
        std::vector<ModelConfig> grid;
        for (const std::string& n : names)
            grid.push_back(config_from_flags(n, b_N, b_M, b_filters, b_c, 1, 2, b_hidden));
        Dataset ds = load_dataset(b_data);
        TrainConfig proto;
        proto.iterations = b_iters;
        proto.seed = b_seed;
        std::vector<TableRow> rows = run_grid(ds, grid, b_reps, proto, true);
        std::printf("%s", format_table(rows).c_str());
        if (!b_out.empty()) write_table_csv(b_out, rows);
    });

    // bench
    int n_iters = 200, n_reps = 3, n_c = 9;
    uint64_t n_seed = 7;
    std::string n_out;
    bool n_no_g = false;
    auto* bn = app.add_subcommand("bench", "time training iterations per variant");
    bn->add_option("--iters", n_iters, "iterations per timed run");
    bn->add_option("--reps", n_reps, "runs per variant (median reported)");
    bn->add_option("--c", n_c, "kernel side");
    bn->add_option("--seed", n_seed, "seed for the generated bench dataset");
    bn->add_flag("--no-g", n_no_g, "skip the slow g-lri row");
    bn->add_option("--out", n_out, "bench CSV output path");
    bn->callback([&]() {
        Dataset ds = generate_dataset(16, 4, n_seed);
        std::vector<ModelConfig> grid;
        grid.push_back(config_from_flags("z3", 0, "24", 2, n_c, 1, 2, 0));
        for (int N : {0, 3, 6}) grid.push_back(config_from_flags("sse-hn", N, "24", 2, n_c, 1, 2, 0));
        for (int N : {0, 3, 6})
            grid.push_back(config_from_flags("s-lri-hn", N, "24", 2, n_c, 1, 2, 0));
        if (!n_no_g) grid.push_back(config_from_flags("g-lri", 0, "24", 2, n_c, 1, 2, 0));
        std::vector<BenchRow> rows = run_bench(ds, grid, n_iters, n_reps, n_seed, true);
        std::printf("%s", format_bench(rows).c_str());
        if (!n_out.empty()) {
            std::FILE* f = std::fopen(n_out.c_str(), "w");
            if (!f) throw std::runtime_error("cannot write " + n_out);
            std::fprintf(f, "model,N,seconds_per_1k,ratio_z3\n");
            for (const BenchRow& r : rows)
                std::fprintf(f, "%s,%s,%.3f,%.3f\n", r.model.c_str(), r.N.c_str(), r.seconds_1k,
                             r.ratio_z3);
            std::fclose(f);
        }
    });

    // verify
    auto* vf = app.add_subcommand("verify", "run the oracle suites");
    vf->callback([&]() {
        std::vector<SuiteResult> rs = run_all_suites();
        std::printf("%s", format_suites(rs).c_str());
        rc = all_pass(rs) ? 0 : 1;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return rc;
}
