#include "lri/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <vector>

#include "lri/harmonics.hpp"
#include "lri/kernels.hpp"
#include "lri/network.hpp"
#include "lri/operators.hpp"
#include "lri/rng.hpp"
#include "lri/rotations.hpp"
#include "lri/volume.hpp"

namespace lri {

namespace {

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

EulerTriple random_rotation(Rng& rng) {
    return {rng.uniform(0, 2 * M_PI), std::acos(rng.uniform(-1.0, 1.0)), rng.uniform(0, 2 * M_PI)};
}

Vec3 random_unit(Rng& rng) {
    double ct = rng.uniform(-1.0, 1.0);
    double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    double ph = rng.uniform(0, 2 * M_PI);
    return {st * std::cos(ph), st * std::sin(ph), ct};
}

void sph_coords(const Vec3& p, double& theta, double& phi) {
    theta = std::acos(std::clamp(p.z, -1.0, 1.0));
    phi = std::atan2(p.y, p.x);
}

Volume random_volume(int d, Rng& rng) {
    Volume v(d, d, d);
    for (double& x : v.data) x = rng.uniform();
    return v;
}

double max_abs(const Volume& v) {
    double m = 0;
    for (double x : v.data) m = std::max(m, std::abs(x));
    return m;
}

double rel_linf(const Volume& a, const Volume& b) {
    return max_abs_diff(a, b) / std::max(max_abs(b), 1e-300);
}

double rel_l2(const Volume& a, const Volume& b) {
    double d2 = 0, n2 = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double d = a.data[i] - b.data[i];
        d2 += d * d;
        n2 += b.data[i] * b.data[i];
    }
    return std::sqrt(d2 / std::max(n2, 1e-300));
}

HarmonicCoefficients random_coeffs(int N, Rng& rng) {
    HarmonicCoefficients C = HarmonicCoefficients::zeros(N);
    for (int n = 0; n <= N; ++n)
        for (double& d : C.dof[size_t(n)]) d = rng.normal();
    return C;
}

RadialProfileSet random_profiles(int c, int N, bool shared, Rng& rng) {
    RadialProfileSet H = RadialProfileSet::ones(c, N, shared);
    for (auto& hn : H.h)
        for (double& x : hn) x = rng.normal();
    return H;
}

}  // namespace

SuiteResult verify_wigner() {
    Rng rng(derive_stream(2026, 50, 0));
    const int n_rot = 50, n_pts = 200, n_max = 6;
    std::vector<Vec3> pts(n_pts);
    for (auto& p : pts) p = random_unit(rng);

    double worst_steer = 0, worst_unit = 0;
    for (int r = 0; r < n_rot; ++r) {
        EulerTriple rot = random_rotation(rng);
        Mat3 R = euler_to_matrix(rot);
        for (int n = 0; n <= n_max; ++n) {
            WignerBlock D = wigner_block(n, rot);
            for (int m = -n; m <= n; ++m)
                for (int k = -n; k <= n; ++k) {
                    cplx s = 0;
                    for (int mp = -n; mp <= n; ++mp) s += D.at(m, mp) * std::conj(D.at(k, mp));
                    if (m == k) s -= 1.0;
                    worst_unit = std::max(worst_unit, std::abs(s));
                }
            for (const Vec3& p : pts) {
                double th, ph, thr, phr;
                sph_coords(p, th, ph);
                Vec3 rp = mat_apply(R, p);
                sph_coords(rp, thr, phr);
                std::vector<cplx> y(size_t(2 * n + 1));
                for (int mp = -n; mp <= n; ++mp) y[size_t(mp + n)] = sh_eval(n, mp, th, ph);
                for (int m = -n; m <= n; ++m) {
                    cplx rhs = 0;
                    for (int mp = -n; mp <= n; ++mp) rhs += D.at(m, mp) * y[size_t(mp + n)];
                    worst_steer = std::max(worst_steer, std::abs(sh_eval(n, m, thr, phr) - rhs));
                }
            }
        }
    }
    bool pass = worst_steer < 1e-8 && worst_unit < 1e-10;
    return {"wigner-steering", pass,
            fmt("steer %.2e (tol 1e-8)  unitary %.2e (tol 1e-10)", worst_steer, worst_unit)};
}

SuiteResult verify_realness() {
    Rng rng(derive_stream(2026, 51, 0));
    const int c = 7;
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        int N = i % (max_degree(c) + 1);
        HarmonicCoefficients C = random_coeffs(N, rng);
        RadialProfileSet H = random_profiles(c, N, i % 2 == 0, rng);
        double res = 0;
        synthesize_kernel(C, H, &res);
        worst = std::max(worst, std::abs(res));
    }
    return {"kernel-realness", worst < 1e-12, fmt("imag residue %.2e (tol 1e-12)", worst)};
}

SuiteResult verify_isotropy() {
    Rng rng(derive_stream(2026, 52, 0));
    RotationSet B = build_rotation_set("M24");
    Volume I = random_volume(16, rng);

    HarmonicCoefficients C = HarmonicCoefficients::zeros(0);
    C.set_coeff(0, 0, cplx(1.3, 0.0));
    RadialProfileSet H = RadialProfileSet::ones(7, 0, true);
    H.profile(0) = {1.0, 0.8, 0.5, 0.3, 0.15, 0.05, 0.0};
    VoxelKernel iso = synthesize_kernel(C, H);

    Volume base = conv3d(I, iso);
    double worst_iso = 0;
    for (const Mat3& R : B.matrices) {
        Volume a = conv3d(rotate_volume_exact(I, R), iso);
        Volume b = rotate_volume_exact(base, R);
        worst_iso = std::max(worst_iso, rel_linf(a, b));
    }

    VoxelKernel aniso;
    aniso.v = Volume(7, 7, 7);
    for (double& x : aniso.v.data) x = rng.normal();
    Volume abase = conv3d(I, aniso.v);
    int violated = 0;
    for (size_t r = 1; r < B.size(); ++r) {
        Volume a = conv3d(rotate_volume_exact(I, B.matrices[r]), aniso.v);
        Volume b = rotate_volume_exact(abase, B.matrices[r]);
        if (rel_linf(a, b) > 1e-6) ++violated;
    }
    bool pass = worst_iso < 1e-12 && violated >= 1;
    return {"isotropy-commutation", pass,
            fmt("isotropic err %.2e (tol 1e-12)  anisotropic violations %d/23", worst_iso,
                violated)};
}

SuiteResult verify_equivariance() {
    Rng rng(derive_stream(2026, 53, 0));
    RotationSet B = build_rotation_set("M24");
    Volume I = random_volume(16, rng);
    const int N = 3;

    VoxelKernel k;
    k.v = Volume(7, 7, 7);
    for (double& x : k.v.data) x = rng.normal();
    HarmonicCoefficients C = random_coeffs(N, rng);
    RadialProfileSet H = random_profiles(7, N, false, rng);

    Volume g_base = g_lri(I, k, B);
    Volume s_base = s_lri(I, C, H, B);
    std::vector<Volume> e_base;
    for (int n = 0; n <= N; ++n) e_base.push_back(sse(I, H, n));

    double worst_g = 0, worst_s = 0, worst_e = 0;
    for (const Mat3& R : B.matrices) {
        Volume Ir = rotate_volume_exact(I, R);
        worst_g = std::max(worst_g, rel_linf(g_lri(Ir, k, B), rotate_volume_exact(g_base, R)));
        worst_s = std::max(worst_s, rel_linf(s_lri(Ir, C, H, B), rotate_volume_exact(s_base, R)));
        for (int n = 0; n <= N; ++n)
            worst_e = std::max(
                worst_e, rel_linf(sse(Ir, H, n), rotate_volume_exact(e_base[size_t(n)], R)));
    }
    bool pass = worst_g < 1e-12 && worst_s < 1e-12 && worst_e < 1e-12;
    return {"operator-equivariance", pass,
            fmt("g-lri %.2e  s-lri %.2e  sse %.2e (tol 1e-12)", worst_g, worst_s, worst_e)};
}

SuiteResult verify_steering_vs_rotation() {
    Rng rng(derive_stream(2026, 54, 0));
    RotationSet B = build_rotation_set("M24");
    Volume I = random_volume(16, rng);
    const int N = 3;
    HarmonicCoefficients C = random_coeffs(N, rng);
    RadialProfileSet H = random_profiles(7, N, false, rng);
    VoxelKernel k0 = synthesize_kernel(C, H);

    BaseResponses resp = s_lri_base_responses(I, H, N);
    Volume s(resp.re[0].dx, resp.re[0].dy, resp.re[0].dz);
    double worst = 0;
    for (size_t r = 0; r < B.size(); ++r) {
        std::vector<WignerBlock> blocks;
        for (int n = 0; n <= N; ++n) blocks.push_back(wigner_block(n, B.triples[r]));
        SteerWeights w = steer_weights(steer_full(C, blocks), N);
        steered_combination(resp, w, s);
        Volume g = conv3d(I, rotate_voxel_kernel(k0, B.triples[r]).v);
        worst = std::max(worst, rel_l2(s, g));
    }
    double pooled = rel_l2(s_lri(I, C, H, B), g_lri(I, k0, B));
    bool pass = worst < 1e-10 && pooled < 1e-10;
    return {"steering-vs-rotation", pass,
            fmt("per-rotation relL2 %.2e  pooled %.2e (tol 1e-10)", worst, pooled)};
}

namespace {

struct ClassRegion {
    std::string name;
    size_t b = 0, e = 0;
};

std::vector<ClassRegion> parameter_classes(const ModelConfig& cfg) {
    ThetaLayout L = theta_layout(cfg);
    std::vector<ClassRegion> cs;
    size_t f0 = L.filter_off(0);
    if (cfg.variant == Variant::sse) {
        cs.push_back({"H", f0, f0 + size_t(L.per_filter)});
    } else if (variant_is_steerable(cfg.variant)) {
        cs.push_back({"Cdof", f0, f0 + size_t(L.c_dof)});
        cs.push_back({"H", f0 + size_t(L.c_dof), f0 + size_t(L.per_filter)});
    } else {
        cs.push_back({"K", f0, f0 + size_t(L.per_filter)});
    }
    if (L.n_bias > 0) cs.push_back({"bias", L.bias_off, L.bias_off + size_t(L.n_bias)});
    size_t off = L.fc_off;
    size_t nf = size_t(L.n_feat), nh = size_t(cfg.hidden), nc = size_t(cfg.n_c);
    if (cfg.hidden > 0) {
        cs.push_back({"W1", off, off + nh * nf});
        off += nh * nf;
        cs.push_back({"b1", off, off + nh});
        off += nh;
        cs.push_back({"W2", off, off + nc * nh});
        off += nc * nh;
        cs.push_back({"b2", off, off + nc});
    } else {
        cs.push_back({"W", off, off + nc * nf});
        off += nc * nf;
        cs.push_back({"b", off, off + nc});
    }
    return cs;
}

// Complete discrete state of a forward pass: winning rotations (global and
// per voxel), the signs inside every |.| and the ReLU masks. The loss is
// smooth in theta exactly while this signature is constant, so a central
// difference is only meaningful over a window where it does not change;
// kinked windows are skipped (next-strongest index, then a finer step).
std::vector<int8_t> discrete_signature(const ForwardCache& c) {
    std::vector<int8_t> s;
    auto push_signs = [&](const Volume& v) {
        for (double x : v.data) s.push_back(x > 0 ? 1 : (x < 0 ? -1 : 0));
    };
    for (const FilterCache& f : c.filt) {
        s.push_back(int8_t(f.arg_rot));
        for (uint8_t a : f.argmax) s.push_back(int8_t(a));
        push_signs(f.winner);
        push_signs(f.ri_map);
        for (const Volume& r : f.relu_in) push_signs(r);
    }
    for (double h : c.hid_pre) s.push_back(h > 0 ? 1 : 0);
    return s;
}

double gradcheck_variant(Variant v, std::string& who) {
    ModelConfig cfg;
    cfg.variant = v;
    cfg.shared_h = false;
    cfg.N = 2;
    cfg.rot_label = "M4";
    cfg.n_f = 1;
    cfg.c = 5;
    cfg.n_c = 2;
    cfg.hidden = 3;
    validate_config(cfg);
    ModelContext ctx = build_context(cfg);

    Rng rng(derive_stream(2026, 55, uint64_t(int(v))));
    Volume I = random_volume(12, rng);
    std::vector<double> theta = init_parameters(cfg, 777).theta;
    // move to a generic point: init leaves biases and the output layer at
    // zero, where every upstream gradient vanishes and the check is vacuous
    for (double& t : theta) t += 0.1 * rng.normal();
    const int label = 0;

    ForwardCache cache;
    auto sm0 = softmax_ce(forward(I, nullptr, theta, ctx, &cache), label);
    std::vector<double> g = backward(cache, sm0.dlogits, ctx);
    std::vector<int8_t> sig0 = discrete_signature(cache);

    auto probe = [&](size_t i, double x, std::vector<int8_t>& sig) {
        std::vector<double> th = theta;
        th[i] = x;
        ForwardCache c;
        auto sm = softmax_ce(forward(I, nullptr, th, ctx, &c), label);
        sig = discrete_signature(c);
        return sm.loss;
    };

    double worst = 0;
    for (const ClassRegion& cr : parameter_classes(cfg)) {
        std::vector<size_t> order;
        for (size_t i = cr.b; i < cr.e; ++i) order.push_back(i);
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return std::abs(g[a]) > std::abs(g[b]); });
        if (order.size() > 8) order.resize(8);

        double rel = -1;
        for (double h : {1e-3, 1e-4, 1e-5}) {
            for (size_t i : order) {
                std::vector<int8_t> sp, sm_;
                double fp = probe(i, theta[i] + h, sp);
                double fm = probe(i, theta[i] - h, sm_);
                if (sp != sig0 || sm_ != sig0) continue;
                double fd = (fp - fm) / (2 * h);
                rel = std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-8});
                break;
            }
            if (rel >= 0) break;
        }
        if (rel < 0) rel = 1.0;  // no kink-free window found at any step
        if (rel > worst) {
            worst = rel;
            who = variant_name(cfg) + ":" + cr.name;
        }
    }
    return worst;
}

}  // namespace

SuiteResult verify_gradients() {
    const Variant all[] = {Variant::z3,   Variant::z3_augm, Variant::g_lri, Variant::g_ri,
                           Variant::s_lri, Variant::s_ri,    Variant::sse};
    double worst = 0;
    std::string who = "-";
    for (Variant v : all) {
        std::string w;
        double r = gradcheck_variant(v, w);
        if (r > worst) {
            worst = r;
            who = w;
        }
    }
    return {"gradient-check", worst < 1e-4, fmt("worst rel err %.2e at %s (tol 1e-4)", worst, who.c_str())};
}

SuiteResult verify_param_counts() {
    const struct {
        const char* name;
        long want;
    } rows[] = {{"s-lri-h", 54}, {"s-lri-hn", 96}, {"sse-h", 40},
                {"sse-hn", 82},  {"z3", 694},      {"s-ri-hn", 94}};
    bool pass = true;
    std::string detail;
    for (const auto& r : rows) {
        long got = count_parameters(parse_model_name(r.name));
        if (got != r.want) pass = false;
        detail += fmt("%s %ld/%ld  ", r.name, got, r.want);
    }
    return {"parameter-counts", pass, detail};
}

std::vector<SuiteResult> run_all_suites() {
    return {verify_wigner(),     verify_realness(),  verify_isotropy(), verify_equivariance(),
            verify_steering_vs_rotation(), verify_gradients(), verify_param_counts()};
}

std::string format_suites(const std::vector<SuiteResult>& rs) {
    std::string out;
    for (const SuiteResult& r : rs)
        out += fmt("[%s] %-22s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    return out;
}

bool all_pass(const std::vector<SuiteResult>& rs) {
    for (const SuiteResult& r : rs)
        if (!r.pass) return false;
    return true;
}

}  // namespace lri
