#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "lri/network.hpp"
#include "oracle_data.hpp"

using namespace lri;

namespace {

ModelConfig table_config(const std::string& name) {
    ModelConfig cfg = parse_model_name(name);
    cfg.N = 3;
    cfg.rot_label = "M24";
    cfg.n_f = 2;
    cfg.c = 7;
    cfg.stride = 1;
    cfg.n_c = 2;
    cfg.hidden = 0;
    return cfg;
}

Volume zero_volume(int side) { return Volume(side, side, side); }

void stamp_max(Volume& vol, const Volume& mask, int cx, int cy, int cz) {
    for (int x = 0; x < mask.dx; ++x)
        for (int y = 0; y < mask.dy; ++y)
            for (int z = 0; z < mask.dz; ++z) {
                double v = mask.at(x, y, z);
                double& dst = vol.at(cx + x, cy + y, cz + z);
                if (v > dst) dst = v;
            }
}

}  // namespace

TEST_CASE("parameter counts for the reference configurations") {
    CHECK(count_parameters(table_config("s-lri-h")) == 54);
    CHECK(count_parameters(table_config("s-lri-hn")) == 96);
    CHECK(count_parameters(table_config("sse-h")) == 40);
    CHECK(count_parameters(table_config("sse-hn")) == 82);
    CHECK(count_parameters(table_config("z3")) == 694);
    CHECK(count_parameters(table_config("s-ri-hn")) == 94);
}

TEST_CASE("theta layout is self-consistent") {
    for (const char* name : {"z3", "z3-augm", "g-lri", "g-ri", "s-lri-h", "s-lri-hn", "s-ri-hn",
                             "sse-h", "sse-hn"}) {
        for (int hidden : {0, 6}) {
            ModelConfig cfg = table_config(name);
            cfg.hidden = hidden;
            ThetaLayout L = theta_layout(cfg);
            CHECK(long(L.total) == count_parameters(cfg));
            CHECK(L.bias_off == size_t(cfg.n_f) * size_t(L.per_filter));
            CHECK(L.fc_off == L.bias_off + size_t(L.n_bias));
            ParameterState st = init_parameters(cfg, 3);
            CHECK(st.theta.size() == L.total);
            CHECK(st.m.size() == L.total);
            CHECK(st.v.size() == L.total);
        }
    }
    // SSE exposes one channel per filter-degree pair
    ModelConfig cfg = table_config("sse-hn");
    CHECK(cfg.channels() == cfg.n_f * (cfg.N + 1));
    CHECK(table_config("z3").channels() == 2);
}

TEST_CASE("degree validation cites the Nyquist bound") {
    ModelConfig cfg = table_config("s-lri-hn");
    cfg.N = 6;  // > floor(pi*7/4) = 5
    try {
        validate_config(cfg);
        FAIL("expected a validation error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("Nyquist") != std::string::npos);
    }
}

TEST_CASE("initialization: zero biases, reproducible, sane coefficient scale") {
    ModelConfig cfg = table_config("s-lri-hn");
    ThetaLayout L = theta_layout(cfg);
    ParameterState a = init_parameters(cfg, 11);
    ParameterState b = init_parameters(cfg, 11);
    CHECK(a.theta == b.theta);
    ParameterState c = init_parameters(cfg, 12);
    CHECK(a.theta != c.theta);
    CHECK(a.step == 0);
    for (double v : a.m) CHECK(v == 0.0);
    for (double v : a.v) CHECK(v == 0.0);
    for (int ch = 0; ch < L.n_bias; ++ch) CHECK(a.theta[L.bias_off + size_t(ch)] == 0.0);
    if (cfg.hidden == 0) {
        size_t b_off = L.fc_off + size_t(cfg.n_c) * size_t(L.n_feat);
        for (int o = 0; o < cfg.n_c; ++o) CHECK(a.theta[b_off + size_t(o)] == 0.0);
        // the output layer starts silent: zero weights, so initial logits
        // vanish and no gradient reaches filters or biases on step one
        for (int j = 0; j < cfg.n_c * L.n_feat; ++j)
            CHECK(a.theta[L.fc_off + size_t(j)] == 0.0);
    }

    // every C DOF at var = 2/(N+1)^2 = 0.125 at N = 3: theta[0] is the n=0
    // m=0 entry, theta[2] the real part of the n=1 m=1 coefficient
    for (size_t slot : {size_t(0), size_t(2)}) {
        double acc = 0.0, acc2 = 0.0;
        const int reps = 3000;
        for (int s = 0; s < reps; ++s) {
            double v = init_parameters(cfg, uint64_t(1000 + s)).theta[slot];
            acc += v;
            acc2 += v * v;
        }
        double mean = acc / reps;
        double var = acc2 / reps - mean * mean;
        CHECK(var > 0.125 * 0.85);
        CHECK(var < 0.125 * 1.15);
    }
}

TEST_CASE("zero input maps to the classifier bias") {
    for (const char* name : {"z3", "s-lri-hn", "sse-hn", "g-lri", "s-ri-hn"}) {
        ModelConfig cfg = table_config(name);
        cfg.c = 5;
        cfg.N = 2;
        ModelContext ctx = build_context(cfg);
        ParameterState st = init_parameters(cfg, 21);
        ThetaLayout L = theta_layout(cfg);
        size_t b_off = L.fc_off + size_t(cfg.n_c) * size_t(L.n_feat);
        st.theta[b_off] = 0.7;
        st.theta[b_off + 1] = -0.3;
        Volume I = zero_volume(12);
        ForwardCache cache;
        std::vector<double> logits = forward(I, nullptr, st.theta, ctx, &cache);
        REQUIRE(logits.size() == 2);
        CHECK(std::abs(logits[0] - 0.7) < 1e-14);
        CHECK(std::abs(logits[1] + 0.3) < 1e-14);
        for (double f : cache.feat) CHECK(f == 0.0);
        if (std::string(name) == "sse-hn") CHECK(cache.feat.size() == 2 * 3);  // n_f * (N+1)
    }
}

TEST_CASE("forward is a pure function; dense and sparse paths agree") {
    ModelConfig cfg = table_config("s-lri-hn");
    cfg.c = 5;
    cfg.N = 2;
    ModelContext ctx = build_context(cfg);
    ParameterState st = init_parameters(cfg, 31);
    Rng rng(derive_stream(31, 3, 0));
    Volume I(12, 12, 12);
    for (double& e : I.data)
        if (rng.uniform() < 0.3) e = rng.uniform();
    NzList nz = nonzeros(I);

    std::vector<double> a = forward(I, nullptr, st.theta, ctx, nullptr);
    std::vector<double> b = forward(I, nullptr, st.theta, ctx, nullptr);
    CHECK(a == b);
    ForwardCache cache;
    std::vector<double> c = forward(I, &nz, st.theta, ctx, &cache);
    REQUIRE(a.size() == c.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - c[i]) < 1e-12);
}

TEST_CASE("backward: zero cotangent, linearity") {
    ModelConfig cfg = table_config("sse-hn");
    cfg.c = 5;
    cfg.N = 2;
    cfg.hidden = 3;
    ModelContext ctx = build_context(cfg);
    ParameterState st = init_parameters(cfg, 41);
    Rng rng(derive_stream(41, 3, 0));
    Volume I(12, 12, 12);
    for (double& e : I.data) e = rng.uniform();
    ForwardCache cache;
    forward(I, nullptr, st.theta, ctx, &cache);

    std::vector<double> zero = backward(cache, {0.0, 0.0}, ctx);
    for (double g : zero) CHECK(g == 0.0);

    std::vector<double> g1 = backward(cache, {0.3, -1.1}, ctx);
    std::vector<double> g2 = backward(cache, {0.6, -2.2}, ctx);
    REQUIRE(g1.size() == g2.size());
    for (size_t i = 0; i < g1.size(); ++i) CHECK(std::abs(g2[i] - 2.0 * g1[i]) < 1e-12);
}

TEST_CASE("softmax cross-entropy") {
    SoftmaxLoss sm = softmax_ce({1.0, 1.0}, 0);
    CHECK(std::abs(sm.loss - std::log(2.0)) < 1e-14);
    CHECK(std::abs(sm.dlogits[0] + 0.5) < 1e-14);
    CHECK(std::abs(sm.dlogits[1] - 0.5) < 1e-14);
    CHECK(sm.pred == 0);  // argmax ties to the lowest index
    sm = softmax_ce({-2.0, 3.0}, 1);
    CHECK(sm.pred == 1);
    CHECK(sm.loss < 0.01);
    // gradients sum to zero
    CHECK(std::abs(sm.dlogits[0] + sm.dlogits[1]) < 1e-15);
    CHECK_THROWS_AS(softmax_ce({0.0, 0.0}, 2), std::invalid_argument);
}

TEST_CASE("Adam matches the frozen scalar trajectory") {
    ParameterState st;
    st.theta = {0.5};
    st.m = {0.0};
    st.v = {0.0};
    TrainConfig tcfg;  // lr 1e-3, beta1 0.99, beta2 0.9999, eps 1e-8
    adam_step(st, {0.3}, tcfg);
    CHECK(st.step == 1);
    CHECK(std::abs(st.theta[0] - oracle::adam_scalar_after_1) < 1e-15);
    adam_step(st, {0.3}, tcfg);
    CHECK(std::abs(st.theta[0] - oracle::adam_scalar_after_2) < 1e-15);

    // zero gradient from a fresh state is a no-op
    ParameterState fresh;
    fresh.theta = {1.5, -2.0};
    fresh.m = {0.0, 0.0};
    fresh.v = {0.0, 0.0};
    adam_step(fresh, {0.0, 0.0}, tcfg);
    CHECK(fresh.theta[0] == 1.5);
    CHECK(fresh.theta[1] == -2.0);

    CHECK_THROWS_AS(adam_step(fresh, {0.0}, tcfg), std::invalid_argument);
}

TEST_CASE("training is deterministic; zero iterations is the identity") {
    Dataset ds = generate_dataset(4, 2, 7);
    ModelConfig cfg = table_config("z3");
    cfg.c = 5;
    TrainConfig tcfg;
    tcfg.iterations = 5;
    tcfg.eval_every = 2;
    tcfg.seed = 3;

    TrainResult a = train(ds, cfg, tcfg);
    TrainResult b = train(ds, cfg, tcfg);
    CHECK(a.state.theta == b.state.theta);
    CHECK(a.state.step == 5);
    REQUIRE(a.trace.size() == 3);  // iterations 2, 4 and the final 5
    CHECK(a.trace[0].iteration == 2);
    CHECK(a.trace[1].iteration == 4);
    CHECK(a.trace[2].iteration == 5);
    for (size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].iteration == b.trace[i].iteration);
        CHECK(a.trace[i].train_loss == b.trace[i].train_loss);
        CHECK(a.trace[i].train_acc == b.trace[i].train_acc);
        CHECK(a.trace[i].test_acc == b.trace[i].test_acc);
    }

    tcfg.iterations = 0;
    TrainResult none = train(ds, cfg, tcfg);
    CHECK(none.trace.empty());
    CHECK(none.state.theta == init_parameters(cfg, tcfg.seed).theta);
}

TEST_CASE("a small network overfits two samples") {
    Dataset ds = generate_dataset(2, 2, 13);
    ModelConfig cfg = table_config("z3");
    TrainConfig tcfg;
    tcfg.iterations = 2000;
    tcfg.eval_every = 100;
    tcfg.seed = 7;  // some seeds ReLU-die at this lr on two binary samples
    tcfg.lr = 1e-2;  // memorization test: step fast, no generalization at stake
    TrainResult res = train(ds, cfg, tcfg);
    double best = 1e300;
    for (const auto& row : res.trace) best = std::min(best, row.train_loss);
    CHECK(best < 0.01);
}

TEST_CASE("checkpoint round trip") {
    namespace fs = std::filesystem;
    ModelConfig cfg = table_config("s-lri-hn");
    cfg.hidden = 4;
    ParameterState st = init_parameters(cfg, 17);
    st.step = 321;
    for (size_t i = 0; i < st.m.size(); ++i) {
        st.m[i] = 0.01 * double(i);
        st.v[i] = 1e-4 * double(i);
    }
    fs::path path = fs::temp_directory_path() / "lri3d_ckpt_test.bin";
    write_checkpoint(path.string(), cfg, st, 4242);
    Checkpoint back = read_checkpoint(path.string());
    fs::remove(path);

    CHECK(back.seed == 4242);
    CHECK(back.cfg.variant == cfg.variant);
    CHECK(back.cfg.shared_h == cfg.shared_h);
    CHECK(back.cfg.N == cfg.N);
    CHECK(back.cfg.rot_label == cfg.rot_label);
    CHECK(back.cfg.n_f == cfg.n_f);
    CHECK(back.cfg.c == cfg.c);
    CHECK(back.cfg.stride == cfg.stride);
    CHECK(back.cfg.n_c == cfg.n_c);
    CHECK(back.cfg.hidden == cfg.hidden);
    CHECK(back.state.step == 321);
    CHECK(back.state.theta == st.theta);
    CHECK(back.state.m == st.m);
    CHECK(back.state.v == st.v);
}

TEST_CASE("pooled features ignore the local orientation of isolated patterns") {
    // two patterns stamped far apart, then the same patterns rotated in
    // place: the LRI feature vectors must match, the plain voxel model's
    // must not
    auto [seg, cross] = canonical_patterns();
    RotationSet M24 = build_rotation_set("M24");
    // first two rotations that actually move each mask
    size_t q_seg = 0, q_cross = 0;
    for (size_t r = 1; r < M24.size() && !q_seg; ++r)
        if (max_abs_diff(rotate_volume_exact(seg.mask, M24.matrices[r]), seg.mask) > 0.5)
            q_seg = r;
    for (size_t r = q_seg + 1; r < M24.size() && !q_cross; ++r)
        if (max_abs_diff(rotate_volume_exact(cross.mask, M24.matrices[r]), cross.mask) > 0.5)
            q_cross = r;
    REQUIRE(q_seg > 0);
    REQUIRE(q_cross > q_seg);

    Volume A = zero_volume(32), B = zero_volume(32);
    stamp_max(A, seg.mask, 6, 6, 6);
    stamp_max(A, cross.mask, 19, 6, 6);
    stamp_max(B, rotate_volume_exact(seg.mask, M24.matrices[q_seg]), 6, 6, 6);
    stamp_max(B, rotate_volume_exact(cross.mask, M24.matrices[q_cross]), 19, 6, 6);

    auto feature_gap = [&](const char* name) {
        ModelConfig cfg = table_config(name);
        ModelContext ctx = build_context(cfg);
        ParameterState st = init_parameters(cfg, 23);
        ForwardCache ca, cb;
        forward(A, nullptr, st.theta, ctx, &ca);
        forward(B, nullptr, st.theta, ctx, &cb);
        double worst = 0.0, scale = 0.0;
        for (size_t i = 0; i < ca.feat.size(); ++i) {
            worst = std::max(worst, std::abs(ca.feat[i] - cb.feat[i]));
            scale = std::max(scale, std::abs(ca.feat[i]));
        }
        return worst / std::max(scale, 1e-300);
    };

    CHECK(feature_gap("g-lri") < 1e-6);
    CHECK(feature_gap("s-lri-hn") < 1e-6);
    CHECK(feature_gap("sse-hn") < 1e-6);
    CHECK(feature_gap("z3") > 1e-3);
}

TEST_CASE("trained coefficients remain exactly real-synthesizable") {
    Dataset ds = generate_dataset(4, 0, 19);
    ModelConfig cfg = table_config("s-lri-hn");
    TrainConfig tcfg;
    tcfg.iterations = 5;
    tcfg.seed = 29;
    TrainResult res = train(ds, cfg, tcfg);

    ThetaLayout L = theta_layout(cfg);
    int nr = radial_param_count(cfg.c);
    for (int f = 0; f < cfg.n_f; ++f) {
        const double* blk = res.state.theta.data() + L.filter_off(f);
        HarmonicCoefficients C = HarmonicCoefficients::zeros(cfg.N);
        size_t p = 0;
        for (int n = 0; n <= cfg.N; ++n)
            for (size_t i = 0; i < C.dof[size_t(n)].size(); ++i) C.dof[size_t(n)][i] = blk[p++];
        RadialProfileSet H = RadialProfileSet::ones(cfg.c, cfg.N, cfg.shared_h);
        for (size_t d = 0; d < H.h.size(); ++d)
            for (int k = 0; k < nr; ++k) H.h[d][size_t(k)] = blk[L.c_dof + long(d) * nr + k];
        double residue = -1.0;
        synthesize_kernel(C, H, &residue);
        CHECK(residue >= 0.0);
        CHECK(residue < 1e-12);
    }
}
