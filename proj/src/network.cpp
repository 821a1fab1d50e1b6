#include "lri/network.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "lri/simd.hpp"
#include "lri/threading.hpp"

namespace lri {

bool variant_is_steerable(Variant v) {
    return v == Variant::s_lri || v == Variant::s_ri || v == Variant::sse;
}
bool variant_is_voxel(Variant v) { return !variant_is_steerable(v); }
bool variant_uses_rotations(Variant v) {
    return v == Variant::g_lri || v == Variant::g_ri || v == Variant::s_lri || v == Variant::s_ri;
}
bool variant_is_global_ri(Variant v) { return v == Variant::g_ri || v == Variant::s_ri; }
bool variant_has_bias(Variant v) { return v != Variant::s_ri; }

int ModelConfig::channels() const { return variant == Variant::sse ? n_f * (N + 1) : n_f; }

std::string variant_name(const ModelConfig& cfg) {
    switch (cfg.variant) {
        case Variant::z3: return "z3";
        case Variant::z3_augm: return "z3-augm";
        case Variant::g_lri: return "g-lri";
        case Variant::g_ri: return "g-ri";
        case Variant::s_lri: return cfg.shared_h ? "s-lri-h" : "s-lri-hn";
        case Variant::s_ri: return cfg.shared_h ? "s-ri-h" : "s-ri-hn";
        case Variant::sse: return cfg.shared_h ? "sse-h" : "sse-hn";
    }
    return "?";
}

ModelConfig parse_model_name(const std::string& name) {
    ModelConfig cfg;
    auto set = [&](Variant v, bool shared) {
        cfg.variant = v;
        cfg.shared_h = shared;
    };
    if (name == "z3") set(Variant::z3, false);
    else if (name == "z3-augm") set(Variant::z3_augm, false);
    else if (name == "g-lri") set(Variant::g_lri, false);
    else if (name == "g-ri") set(Variant::g_ri, false);
    else if (name == "s-lri-h") set(Variant::s_lri, true);
    else if (name == "s-lri-hn") set(Variant::s_lri, false);
    else if (name == "s-ri-h") set(Variant::s_ri, true);
    else if (name == "s-ri-hn") set(Variant::s_ri, false);
    else if (name == "sse-h") set(Variant::sse, true);
    else if (name == "sse-hn") set(Variant::sse, false);
    else throw std::invalid_argument("unknown model name: " + name);
    return cfg;
}

void validate_config(const ModelConfig& cfg) {
    if (cfg.c < 1 || cfg.c % 2 == 0)
        throw std::invalid_argument("kernel side must be odd and positive");
    if (cfg.n_f < 1) throw std::invalid_argument("need at least one filter");
    if (cfg.n_c < 2) throw std::invalid_argument("need at least two classes");
    if (cfg.stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (cfg.N < 0) throw std::invalid_argument("max degree must be >= 0");
    if (cfg.hidden < 0) throw std::invalid_argument("hidden width must be >= 0");
    if (variant_is_steerable(cfg.variant) && cfg.N > max_degree(cfg.c))
        throw std::invalid_argument(
            "max degree N=" + std::to_string(cfg.N) +
            " exceeds the spherical Nyquist bound floor(pi*c/4) = " +
            std::to_string(max_degree(cfg.c)) + " for kernel side " + std::to_string(cfg.c));
    if (variant_uses_rotations(cfg.variant)) {
        const std::string& M = cfg.rot_label;
        if (M != "M1" && M != "M4" && M != "M24" && M != "M72")
            throw std::invalid_argument("unknown rotation set: " + M);
        if ((cfg.variant == Variant::g_lri || cfg.variant == Variant::g_ri) && M == "M72")
            throw std::invalid_argument(
                "voxel-kernel variants support right-angle rotation sets only (M1/M4/M24)");
    }
}

ThetaLayout theta_layout(const ModelConfig& cfg) {
    ThetaLayout L;
    if (variant_is_steerable(cfg.variant)) {
        if (cfg.variant != Variant::sse) L.c_dof = (cfg.N + 1) * (cfg.N + 1);
        int nr = radial_param_count(cfg.c);
        L.h_len = cfg.shared_h ? nr : (cfg.N + 1) * nr;
        L.per_filter = L.c_dof + L.h_len;
    } else {
        L.k_len = cfg.c * cfg.c * cfg.c;
        L.per_filter = L.k_len;
    }
    L.n_feat = cfg.channels();
    L.n_bias = variant_has_bias(cfg.variant) ? L.n_feat : 0;
    L.bias_off = size_t(cfg.n_f) * size_t(L.per_filter);
    L.fc_off = L.bias_off + size_t(L.n_bias);
    size_t fc = cfg.hidden > 0 ? size_t(cfg.hidden) * L.n_feat + size_t(cfg.hidden) +
                                     size_t(cfg.n_c) * cfg.hidden + size_t(cfg.n_c)
                               : size_t(cfg.n_c) * L.n_feat + size_t(cfg.n_c);
    L.total = L.fc_off + fc;
    return L;
}

long count_parameters(const ModelConfig& cfg) { return long(theta_layout(cfg).total); }

ModelContext build_context(const ModelConfig& cfg) {
    validate_config(cfg);
    ModelContext ctx;
    ctx.cfg = cfg;
    if (variant_is_steerable(cfg.variant)) ctx.basis = &BasisKernelCache::get(cfg.c, cfg.N);
    if (variant_uses_rotations(cfg.variant)) {
        ctx.rots = build_rotation_set(cfg.rot_label);
        if (cfg.variant == Variant::s_lri || cfg.variant == Variant::s_ri) {
            ctx.blocks.resize(ctx.rots.size());
            for (size_t r = 0; r < ctx.rots.size(); ++r)
                for (int n = 0; n <= cfg.N; ++n)
                    ctx.blocks[r].push_back(wigner_block(n, ctx.rots.triples[r]));
        } else {
            // index-gather maps: rotK.data[j] = K.data[kperm[r][j]]
            int c3 = cfg.c * cfg.c * cfg.c;
            Volume idx(cfg.c, cfg.c, cfg.c);
            for (int j = 0; j < c3; ++j) idx.data[size_t(j)] = double(j);
            ctx.kperm.resize(ctx.rots.size());
            for (size_t r = 0; r < ctx.rots.size(); ++r) {
                Volume rot = rotate_volume_exact(idx, ctx.rots.matrices[r]);
                ctx.kperm[r].resize(size_t(c3));
                for (int j = 0; j < c3; ++j)
                    ctx.kperm[r][size_t(j)] = int32_t(rot.data[size_t(j)] + 0.5);
            }
        }
    }
    ctx.aug = build_rotation_set("M24");
    return ctx;
}

ParameterState init_parameters(const ModelConfig& cfg, uint64_t seed) {
    validate_config(cfg);
    ThetaLayout L = theta_layout(cfg);
    ParameterState st;
    st.theta.assign(L.total, 0.0);
    st.m.assign(L.total, 0.0);
    st.v.assign(L.total, 0.0);
    Rng rng(derive_stream(seed, 7, 0));

    for (int i = 0; i < cfg.n_f; ++i) {
        double* f = st.theta.data() + L.filter_off(i);
        if (L.c_dof > 0) {
            // every real DOF at sigma^2 = 2/(n_in (N+1)^2), n_in = 1; scaling the
            // real/imag parts down would flatten the orientation contrast at init
            double sigma = std::sqrt(2.0) / (cfg.N + 1);
            for (size_t p = 0; p < size_t(L.c_dof); ++p) f[p] = sigma * rng.normal();
            f += L.c_dof;
        }
        for (int k = 0; k < L.h_len; ++k) f[k] = rng.normal();
        if (L.k_len > 0) {
            double s = std::sqrt(2.0 / L.k_len);
            for (int k = 0; k < L.k_len; ++k) f[k] = s * rng.normal();
        }
    }
    // biases stay zero, and so does the output layer: with zero logits the
    // softmax sends no gradient into features or biases until the classifier
    // has picked up a label-correlated direction. A random output layer feeds
    // the uninformative early transient into the per-filter biases, and with
    // beta1 = 0.99 the integrated excursion can push a bias below the pooled
    // response range, silencing a channel's ReLU for good.
    if (cfg.hidden > 0) {
        double* fc = st.theta.data() + L.fc_off;
        double s1 = std::sqrt(2.0 / L.n_feat);
        for (int j = 0; j < cfg.hidden * L.n_feat; ++j) fc[j] = s1 * rng.normal();
    }
    return st;
}

// ---------------------------------------------------------------------------
// forward

static HarmonicCoefficients unpack_C(const double* p, int N) {
    HarmonicCoefficients C = HarmonicCoefficients::zeros(N);
    for (int n = 0; n <= N; ++n)
        for (int j = 0; j < 2 * n + 1; ++j) C.dof[size_t(n)][size_t(j)] = *p++;
    return C;
}

static RadialProfileSet unpack_H(const double* p, const ModelConfig& cfg) {
    RadialProfileSet H = RadialProfileSet::ones(cfg.c, cfg.N, cfg.shared_h);
    for (auto& hn : H.h)
        for (double& x : hn) x = *p++;
    return H;
}

static void conv_into(const Volume& I, const NzList* nz, const double* ker, int c, int stride,
                      Volume& out) {
    if (nz && stride == 1) {
        out.fill(0.0);
        simd::corr3d_sparse(*nz, ker, c, out.data.data(), out.dx, out.dy, out.dz);
    } else {
        simd::corr3d(I.data.data(), I.dx, I.dy, I.dz, ker, c, stride, out.data.data(), out.dx,
                     out.dy, out.dz);
    }
}

static void adjoint_into(const Volume& I, const NzList* nz, const Volume& g, int c, int stride,
                         double* kbar) {
    if (nz && stride == 1)
        simd::corr3d_sparse_adjoint(*nz, g.data.data(), g.dx, g.dy, g.dz, c, kbar);
    else
        simd::corr3d_adjoint(I.data.data(), I.dx, I.dy, I.dz, g.data.data(), g.dx, g.dy, g.dz, c,
                             stride, kbar);
}

static inline double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

// bias + ReLU + GAP of one response map, keeping the pre-activation
static double bias_relu_gap(const Volume& resp, double bias, Volume& relu_in) {
    relu_in = resp;
    double acc = 0.0;
    for (double& v : relu_in.data) {
        v += bias;
        if (v > 0) acc += v;
    }
    return acc / double(relu_in.size());
}

std::vector<double> forward(const Volume& I, const NzList* nz, const std::vector<double>& theta,
                            const ModelContext& ctx, ForwardCache* cache) {
    const ModelConfig& cfg = ctx.cfg;
    ThetaLayout L = theta_layout(cfg);
    if (theta.size() != L.total) throw std::invalid_argument("forward: parameter size mismatch");

    ForwardCache local;
    ForwardCache& cc = cache ? *cache : local;
    cc = ForwardCache{};
    cc.I = &I;
    cc.nz = nz;
    cc.theta = &theta;
    cc.filt.resize(size_t(cfg.n_f));
    cc.feat.assign(size_t(L.n_feat), 0.0);

    const double* th = theta.data();
    const double* biases = th + L.bias_off;  // dereferenced only when n_bias > 0
    int ox = (I.dx - cfg.c) / cfg.stride + 1;
    int oy = (I.dy - cfg.c) / cfg.stride + 1;
    int oz = (I.dz - cfg.c) / cfg.stride + 1;
    size_t V = size_t(ox) * oy * oz;
    size_t R = ctx.rots.size();

    if (cfg.variant == Variant::s_lri || cfg.variant == Variant::s_ri) {
        cc.sw.resize(size_t(cfg.n_f));
        for (int i = 0; i < cfg.n_f; ++i) {
            const double* f = th + L.filter_off(i);
            cc.C.push_back(unpack_C(f, cfg.N));
            cc.H.push_back(unpack_H(f + L.c_dof, cfg));
            FilterCache& fc = cc.filt[size_t(i)];
            fc.resp = s_lri_base_responses(I, cc.H.back(), cfg.N, cfg.stride, nz);
            auto& sw = cc.sw[size_t(i)];
            sw.reserve(R);
            for (size_t r = 0; r < R; ++r)
                sw.push_back(steer_weights(steer_full(cc.C.back(), ctx.blocks[r]), cfg.N));

            Volume s(ox, oy, oz);
            if (cfg.variant == Variant::s_lri) {
                Volume pooled(ox, oy, oz), winner(ox, oy, oz);
                fc.argmax.assign(V, 0);
                for (size_t r = 0; r < R; ++r) {
                    steered_combination(fc.resp, sw[r], s);
                    for (size_t j = 0; j < V; ++j) {
                        double a = std::abs(s.data[j]);
                        if (r == 0 || a > pooled.data[j]) {
                            pooled.data[j] = a;
                            winner.data[j] = s.data[j];
                            fc.argmax[j] = uint8_t(r);
                        }
                    }
                }
                fc.winner = std::move(winner);
                fc.relu_in.resize(1);
                cc.feat[size_t(i)] = bias_relu_gap(pooled, biases[i], fc.relu_in[0]);
            } else {  // s_ri: spatial mean of |s|, then max over rotations
                double best = -1.0;
                for (size_t r = 0; r < R; ++r) {
                    steered_combination(fc.resp, sw[r], s);
                    double acc = 0.0;
                    for (double v : s.data) acc += std::abs(v);
                    double mean = acc / double(V);
                    if (mean > best) {
                        best = mean;
                        fc.arg_rot = int(r);
                    }
                }
                steered_combination(fc.resp, sw[size_t(fc.arg_rot)], s);
                fc.ri_map = std::move(s);
                fc.ri_pre = best;  // this variant carries no bias
                cc.feat[size_t(i)] = fc.ri_pre > 0 ? fc.ri_pre : 0.0;
            }
        }
    } else if (cfg.variant == Variant::sse) {
        for (int i = 0; i < cfg.n_f; ++i) {
            cc.H.push_back(unpack_H(th + L.filter_off(i), cfg));
            FilterCache& fc = cc.filt[size_t(i)];
            fc.resp = s_lri_base_responses(I, cc.H.back(), cfg.N, cfg.stride, nz);
            fc.relu_in.resize(size_t(cfg.N) + 1);
            Volume e(ox, oy, oz);
            for (int n = 0; n <= cfg.N; ++n) {
                const double* re0 = fc.resp.re[size_t(sh_pair_index(n, 0))].data.data();
                for (size_t j = 0; j < V; ++j) e.data[j] = re0[j] * re0[j];
                for (int m = 1; m <= n; ++m) {
                    int p = sh_pair_index(n, m);
                    const double* re = fc.resp.re[size_t(p)].data.data();
                    const double* im = fc.resp.im[size_t(p)].data.data();
                    for (size_t j = 0; j < V; ++j)
                        e.data[j] += 2.0 * (re[j] * re[j] + im[j] * im[j]);
                }
                int ch = i * (cfg.N + 1) + n;
                cc.feat[size_t(ch)] = bias_relu_gap(e, biases[ch], fc.relu_in[size_t(n)]);
            }
        }
    } else {  // voxel-kernel variants
        std::vector<double> rotk(size_t(L.k_len));
        Volume map(ox, oy, oz);
        for (int i = 0; i < cfg.n_f; ++i) {
            const double* K = th + L.filter_off(i);
            FilterCache& fc = cc.filt[size_t(i)];
            if (cfg.variant == Variant::z3 || cfg.variant == Variant::z3_augm) {
                conv_into(I, nz, K, cfg.c, cfg.stride, map);
                fc.relu_in.resize(1);
                cc.feat[size_t(i)] = bias_relu_gap(map, biases[i], fc.relu_in[0]);
            } else if (cfg.variant == Variant::g_lri) {
                Volume pooled(ox, oy, oz), winner(ox, oy, oz);
                fc.argmax.assign(V, 0);
                for (size_t r = 0; r < R; ++r) {
                    for (int j = 0; j < L.k_len; ++j) rotk[size_t(j)] = K[ctx.kperm[r][size_t(j)]];
                    conv_into(I, nz, rotk.data(), cfg.c, cfg.stride, map);
                    for (size_t j = 0; j < V; ++j) {
                        double a = std::abs(map.data[j]);
                        if (r == 0 || a > pooled.data[j]) {
                            pooled.data[j] = a;
                            winner.data[j] = map.data[j];
                            fc.argmax[j] = uint8_t(r);
                        }
                    }
                }
                fc.winner = std::move(winner);
                fc.relu_in.resize(1);
                cc.feat[size_t(i)] = bias_relu_gap(pooled, biases[i], fc.relu_in[0]);
            } else {  // g_ri
                double best = -1.0;
                for (size_t r = 0; r < R; ++r) {
                    for (int j = 0; j < L.k_len; ++j) rotk[size_t(j)] = K[ctx.kperm[r][size_t(j)]];
                    conv_into(I, nz, rotk.data(), cfg.c, cfg.stride, map);
                    double acc = 0.0;
                    for (double v : map.data) acc += std::abs(v);
                    double mean = acc / double(V);
                    if (mean > best) {
                        best = mean;
                        fc.arg_rot = int(r);
                    }
                }
                size_t rb = size_t(fc.arg_rot);
                for (int j = 0; j < L.k_len; ++j) rotk[size_t(j)] = K[ctx.kperm[rb][size_t(j)]];
                conv_into(I, nz, rotk.data(), cfg.c, cfg.stride, map);
                fc.ri_map = map;
                fc.ri_pre = best + biases[i];
                cc.feat[size_t(i)] = fc.ri_pre > 0 ? fc.ri_pre : 0.0;
            }
        }
    }

    // FC stage
    const double* fcp = th + L.fc_off;
    cc.logits.assign(size_t(cfg.n_c), 0.0);
    if (cfg.hidden > 0) {
        const double* W1 = fcp;
        const double* b1 = fcp + size_t(cfg.hidden) * L.n_feat;
        const double* W2 = b1 + cfg.hidden;
        const double* b2 = W2 + size_t(cfg.n_c) * cfg.hidden;
        cc.hid_pre.resize(size_t(cfg.hidden));
        cc.hid_act.resize(size_t(cfg.hidden));
        for (int h = 0; h < cfg.hidden; ++h) {
            double z = b1[h] + simd::dot(W1 + size_t(h) * L.n_feat, cc.feat.data(), size_t(L.n_feat));
            cc.hid_pre[size_t(h)] = z;
            cc.hid_act[size_t(h)] = z > 0 ? z : 0.0;
        }
        for (int o = 0; o < cfg.n_c; ++o)
            cc.logits[size_t(o)] =
                b2[o] + simd::dot(W2 + size_t(o) * cfg.hidden, cc.hid_act.data(), size_t(cfg.hidden));
    } else {
        const double* W = fcp;
        const double* b = fcp + size_t(cfg.n_c) * L.n_feat;
        for (int o = 0; o < cfg.n_c; ++o)
            cc.logits[size_t(o)] =
                b[o] + simd::dot(W + size_t(o) * L.n_feat, cc.feat.data(), size_t(L.n_feat));
    }
    return cc.logits;
}

// ---------------------------------------------------------------------------
// backward

// Radial-profile gradient of one stored (n,m) slice: adjoint-convolve the
// slice's upstream gradient, then project onto the degree's basis grids.
static void project_dh(const ModelContext& ctx, const ForwardCache& cc, const Volume& dmap,
                       int n, int m, bool imag_part, double* gh_degree) {
    const ModelConfig& cfg = ctx.cfg;
    size_t c3 = size_t(cfg.c) * cfg.c * cfg.c;
    thread_local std::vector<double> kbar;
    kbar.assign(c3, 0.0);
    adjoint_into(*cc.I, cc.nz, dmap, cfg.c, cfg.stride, kbar.data());
    for (int k = 0; k < ctx.basis->nr(); ++k) {
        const double* grid = imag_part ? ctx.basis->im(n, m, k) : ctx.basis->re(n, m, k);
        gh_degree[k] += simd::dot(kbar.data(), grid, c3);
    }
}

// DOF gradient of one degree from the full-spectrum response adjoint
// q[m'] = sum_x ds(x) B_{n,m'}(x). With c' = D^T C and the realness pairing
// of the DOF parameterization:
//   dc[m]  = sum_{m'} q[m'] D(m,m')
//   du0   += Re dc[0]
//   da_m  += Re dc[m] + (-1)^m Re dc[-m]
//   db_m  += -Im dc[m] + (-1)^m Im dc[-m]
static void dof_grad_from_q(const WignerBlock& D, int n, const std::vector<cplx>& q, double* gC) {
    for (int m = -n; m <= n; ++m) {
        cplx dc(0, 0);
        for (int mp = -n; mp <= n; ++mp) dc += q[size_t(mp + n)] * D.at(m, mp);
        if (m == 0) {
            gC[0] += dc.real();
        } else {
            double s = (m % 2 == 0 || m % 2 == -2) ? 1.0 : -1.0;
            int a = std::abs(m);
            if (m > 0) {
                gC[2 * a - 1] += dc.real();
                gC[2 * a] += -dc.imag();
            } else {
                gC[2 * a - 1] += s * dc.real();
                gC[2 * a] += s * dc.imag();
            }
        }
    }
}

// Builds q for one degree from per-pair accumulators (m >= 0 stored).
static std::vector<cplx> build_q(const std::vector<double>& dwre, const std::vector<double>& dwim,
                                 int n) {
    std::vector<cplx> q(size_t(2 * n + 1));
    for (int m = 0; m <= n; ++m) {
        int p = sh_pair_index(n, m);
        cplx v(dwre[size_t(p)], m > 0 ? dwim[size_t(p)] : 0.0);
        q[size_t(m + n)] = v;
        if (m > 0) q[size_t(-m + n)] = (m % 2 ? -1.0 : 1.0) * std::conj(v);
    }
    return q;
}

std::vector<double> backward(const ForwardCache& cc, const std::vector<double>& dlogits,
                             const ModelContext& ctx) {
    const ModelConfig& cfg = ctx.cfg;
    ThetaLayout L = theta_layout(cfg);
    if (!cc.theta || !cc.I) throw std::invalid_argument("backward: stale cache");
    if (dlogits.size() != size_t(cfg.n_c))
        throw std::invalid_argument("backward: logits gradient size mismatch");
    const double* th = cc.theta->data();
    std::vector<double> grad(L.total, 0.0);
    double* g = grad.data();

    // FC stage
    std::vector<double> dfeat(size_t(L.n_feat), 0.0);
    if (cfg.hidden > 0) {
        size_t w1 = L.fc_off, b1 = w1 + size_t(cfg.hidden) * L.n_feat, w2 = b1 + cfg.hidden,
               b2 = w2 + size_t(cfg.n_c) * cfg.hidden;
        std::vector<double> dact(size_t(cfg.hidden), 0.0);
        for (int o = 0; o < cfg.n_c; ++o) {
            double dl = dlogits[size_t(o)];
            g[b2 + o] += dl;
            for (int h = 0; h < cfg.hidden; ++h) {
                g[w2 + size_t(o) * cfg.hidden + h] += dl * cc.hid_act[size_t(h)];
                dact[size_t(h)] += dl * th[w2 + size_t(o) * cfg.hidden + h];
            }
        }
        for (int h = 0; h < cfg.hidden; ++h) {
            double dhp = cc.hid_pre[size_t(h)] > 0 ? dact[size_t(h)] : 0.0;
            if (dhp == 0.0) continue;
            g[b1 + h] += dhp;
            for (int j = 0; j < L.n_feat; ++j) {
                g[w1 + size_t(h) * L.n_feat + j] += dhp * cc.feat[size_t(j)];
                dfeat[size_t(j)] += dhp * th[w1 + size_t(h) * L.n_feat + j];
            }
        }
    } else {
        size_t w = L.fc_off, b = w + size_t(cfg.n_c) * L.n_feat;
        for (int o = 0; o < cfg.n_c; ++o) {
            double dl = dlogits[size_t(o)];
            g[b + o] += dl;
            for (int j = 0; j < L.n_feat; ++j) {
                g[w + size_t(o) * L.n_feat + j] += dl * cc.feat[size_t(j)];
                dfeat[size_t(j)] += dl * th[w + size_t(o) * L.n_feat + j];
            }
        }
    }

    int P = sh_pair_count(cfg.N);
    std::vector<int> n_of(size_t(P), 0), m_of(size_t(P), 0);
    if (variant_is_steerable(cfg.variant))
        for (int n = 0; n <= cfg.N; ++n)
            for (int m = 0; m <= n; ++m) {
                n_of[size_t(sh_pair_index(n, m))] = n;
                m_of[size_t(sh_pair_index(n, m))] = m;
            }
    int nr = variant_is_steerable(cfg.variant) ? radial_param_count(cfg.c) : 0;
    size_t R = ctx.rots.size();

    for (int i = 0; i < cfg.n_f; ++i) {
        const FilterCache& fc = cc.filt[size_t(i)];
        double* gF = g + L.filter_off(i);

        if (cfg.variant == Variant::s_lri) {
            const Volume& relu = fc.relu_in[0];
            size_t V = relu.size();
            double dgap = dfeat[size_t(i)] / double(V);
            double db = 0.0;
            Volume ds(relu.dx, relu.dy, relu.dz);
            bool any = false;
            for (size_t j = 0; j < V; ++j) {
                if (relu.data[j] > 0) {
                    db += dgap;
                    double d = dgap * sgn(fc.winner.data[j]);
                    ds.data[j] = d;
                    any |= d != 0.0;
                }
            }
            g[L.bias_off + size_t(i)] += db;
            if (!any) continue;

            std::vector<std::vector<double>> dwre(R, std::vector<double>(size_t(P), 0.0));
            std::vector<std::vector<double>> dwim(R, std::vector<double>(size_t(P), 0.0));
            std::vector<char> used(R, 0);
            std::vector<Volume> dre{size_t(P)}, dim{size_t(P)};
            for (int t = 0; t < P; ++t) {
                dre[size_t(t)] = Volume(relu.dx, relu.dy, relu.dz);
                if (m_of[size_t(t)] > 0) dim[size_t(t)] = Volume(relu.dx, relu.dy, relu.dz);
            }
            for (size_t j = 0; j < V; ++j) {
                double d = ds.data[j];
                if (d == 0.0) continue;
                size_t r = fc.argmax[j];
                used[r] = 1;
                const SteerWeights& w = cc.sw[size_t(i)][r];
                for (int t = 0; t < P; ++t) {
                    dwre[r][size_t(t)] += d * fc.resp.re[size_t(t)].data[j];
                    dre[size_t(t)].data[j] = w.wre[size_t(t)] * d;
                    if (m_of[size_t(t)] > 0) {
                        dwim[r][size_t(t)] += d * fc.resp.im[size_t(t)].data[j];
                        dim[size_t(t)].data[j] = w.wim[size_t(t)] * d;
                    }
                }
            }
            for (size_t r = 0; r < R; ++r) {
                if (!used[r]) continue;
                for (int n = 0; n <= cfg.N; ++n)
                    dof_grad_from_q(ctx.blocks[r][size_t(n)], n, build_q(dwre[r], dwim[r], n),
                                    gF + n * n);
            }
            double* gH = gF + L.c_dof;
            for (int t = 0; t < P; ++t) {
                int n = n_of[size_t(t)], m = m_of[size_t(t)];
                double* gh = gH + (cfg.shared_h ? 0 : n * nr);
                project_dh(ctx, cc, dre[size_t(t)], n, m, false, gh);
                if (m > 0) project_dh(ctx, cc, dim[size_t(t)], n, m, true, gh);
            }

        } else if (cfg.variant == Variant::s_ri) {
            if (fc.ri_pre <= 0) continue;
            double dpre = dfeat[size_t(i)];
            if (dpre == 0.0) continue;
            const Volume& map = fc.ri_map;
            size_t V = map.size();
            Volume ds(map.dx, map.dy, map.dz);
            for (size_t j = 0; j < V; ++j) ds.data[j] = dpre * sgn(map.data[j]) / double(V);
            size_t r = size_t(fc.arg_rot);
            const SteerWeights& w = cc.sw[size_t(i)][r];
            std::vector<double> dwre(size_t(P), 0.0), dwim(size_t(P), 0.0);
            Volume dm(map.dx, map.dy, map.dz);
            double* gH = gF + L.c_dof;
            for (int t = 0; t < P; ++t) {
                int n = n_of[size_t(t)], m = m_of[size_t(t)];
                double* gh = gH + (cfg.shared_h ? 0 : n * nr);
                const double* re = fc.resp.re[size_t(t)].data.data();
                for (size_t j = 0; j < V; ++j) {
                    dwre[size_t(t)] += ds.data[j] * re[j];
                    dm.data[j] = w.wre[size_t(t)] * ds.data[j];
                }
                project_dh(ctx, cc, dm, n, m, false, gh);
                if (m > 0) {
                    const double* im = fc.resp.im[size_t(t)].data.data();
                    for (size_t j = 0; j < V; ++j) {
                        dwim[size_t(t)] += ds.data[j] * im[j];
                        dm.data[j] = w.wim[size_t(t)] * ds.data[j];
                    }
                    project_dh(ctx, cc, dm, n, m, true, gh);
                }
            }
            for (int n = 0; n <= cfg.N; ++n)
                dof_grad_from_q(ctx.blocks[r][size_t(n)], n, build_q(dwre, dwim, n), gF + n * n);

        } else if (cfg.variant == Variant::sse) {
            const Volume& first = fc.relu_in[0];
            size_t V = first.size();
            std::vector<Volume> dre{size_t(P)}, dim{size_t(P)};
            for (int t = 0; t < P; ++t) {
                dre[size_t(t)] = Volume(first.dx, first.dy, first.dz);
                if (m_of[size_t(t)] > 0) dim[size_t(t)] = Volume(first.dx, first.dy, first.dz);
            }
            for (int n = 0; n <= cfg.N; ++n) {
                int ch = i * (cfg.N + 1) + n;
                double dgap = dfeat[size_t(ch)] / double(V);
                const Volume& relu = fc.relu_in[size_t(n)];
                double db = 0.0;
                for (int m = 0; m <= n; ++m) {
                    int p = sh_pair_index(n, m);
                    const double* re = fc.resp.re[size_t(p)].data.data();
                    const double* im = m > 0 ? fc.resp.im[size_t(p)].data.data() : nullptr;
                    double fac = m == 0 ? 2.0 : 4.0;
                    for (size_t j = 0; j < V; ++j) {
                        if (relu.data[j] <= 0) continue;
                        dre[size_t(p)].data[j] += fac * dgap * re[j];
                        if (m > 0) dim[size_t(p)].data[j] += fac * dgap * im[j];
                    }
                }
                for (size_t j = 0; j < V; ++j)
                    if (relu.data[j] > 0) db += dgap;
                g[L.bias_off + size_t(ch)] += db;
            }
            for (int t = 0; t < P; ++t) {
                int n = n_of[size_t(t)], m = m_of[size_t(t)];
                double* gh = gF + (cfg.shared_h ? 0 : n * nr);
                project_dh(ctx, cc, dre[size_t(t)], n, m, false, gh);
                if (m > 0) project_dh(ctx, cc, dim[size_t(t)], n, m, true, gh);
            }

        } else if (cfg.variant == Variant::z3 || cfg.variant == Variant::z3_augm) {
            const Volume& relu = fc.relu_in[0];
            size_t V = relu.size();
            double dgap = dfeat[size_t(i)] / double(V);
            Volume dpre(relu.dx, relu.dy, relu.dz);
            double db = 0.0;
            bool any = false;
            for (size_t j = 0; j < V; ++j) {
                if (relu.data[j] > 0) {
                    dpre.data[j] = dgap;
                    db += dgap;
                    any = true;
                }
            }
            g[L.bias_off + size_t(i)] += db;
            if (!any) continue;
            std::vector<double> kbar(size_t(L.k_len), 0.0);
            adjoint_into(*cc.I, cc.nz, dpre, cfg.c, cfg.stride, kbar.data());
            simd::axpy(1.0, kbar.data(), gF, size_t(L.k_len));

        } else if (cfg.variant == Variant::g_lri) {
            const Volume& relu = fc.relu_in[0];
            size_t V = relu.size();
            double dgap = dfeat[size_t(i)] / double(V);
            Volume ds(relu.dx, relu.dy, relu.dz);
            double db = 0.0;
            bool any = false;
            for (size_t j = 0; j < V; ++j) {
                if (relu.data[j] > 0) {
                    db += dgap;
                    double d = dgap * sgn(fc.winner.data[j]);
                    ds.data[j] = d;
                    any |= d != 0.0;
                }
            }
            g[L.bias_off + size_t(i)] += db;
            if (!any) continue;
            Volume dmap(relu.dx, relu.dy, relu.dz);
            std::vector<double> kbar(size_t(L.k_len));
            for (size_t r = 0; r < R; ++r) {
                bool used = false;
                for (size_t j = 0; j < V; ++j) {
                    double d = (fc.argmax[j] == r) ? ds.data[j] : 0.0;
                    dmap.data[j] = d;
                    used |= d != 0.0;
                }
                if (!used) continue;
                adjoint_into(*cc.I, cc.nz, dmap, cfg.c, cfg.stride, kbar.data());
                for (int j = 0; j < L.k_len; ++j) gF[ctx.kperm[r][size_t(j)]] += kbar[size_t(j)];
            }

        } else {  // g_ri
            if (fc.ri_pre <= 0) continue;
            double dpre = dfeat[size_t(i)];
            g[L.bias_off + size_t(i)] += dpre;
            if (dpre == 0.0) continue;
            const Volume& map = fc.ri_map;
            size_t V = map.size();
            Volume ds(map.dx, map.dy, map.dz);
            for (size_t j = 0; j < V; ++j) ds.data[j] = dpre * sgn(map.data[j]) / double(V);
            std::vector<double> kbar(size_t(L.k_len));
            adjoint_into(*cc.I, cc.nz, ds, cfg.c, cfg.stride, kbar.data());
            size_t r = size_t(fc.arg_rot);
            for (int j = 0; j < L.k_len; ++j) gF[ctx.kperm[r][size_t(j)]] += kbar[size_t(j)];
        }
    }
    return grad;
}

// ---------------------------------------------------------------------------
// optimizer, loss, training

void adam_step(ParameterState& st, const std::vector<double>& grad, const TrainConfig& tcfg) {
    if (grad.size() != st.theta.size())
        throw std::invalid_argument("adam_step: gradient size mismatch");
    st.step += 1;
    double b1c = 1.0 - std::pow(tcfg.beta1, double(st.step));
    double b2c = 1.0 - std::pow(tcfg.beta2, double(st.step));
    for (size_t j = 0; j < st.theta.size(); ++j) {
        double gj = grad[j];
        st.m[j] = tcfg.beta1 * st.m[j] + (1.0 - tcfg.beta1) * gj;
        st.v[j] = tcfg.beta2 * st.v[j] + (1.0 - tcfg.beta2) * gj * gj;
        st.theta[j] -= tcfg.lr * (st.m[j] / b1c) / (std::sqrt(st.v[j] / b2c) + tcfg.eps);
    }
}

SoftmaxLoss softmax_ce(const std::vector<double>& logits, int label_index) {
    SoftmaxLoss out;
    size_t n = logits.size();
    if (label_index < 0 || size_t(label_index) >= n)
        throw std::invalid_argument("softmax_ce: label out of range");
    double mx = logits[0];
    out.pred = 0;
    for (size_t o = 1; o < n; ++o)
        if (logits[o] > mx) {
            mx = logits[o];
            out.pred = int(o);
        }
    double z = 0.0;
    for (double l : logits) z += std::exp(l - mx);
    out.loss = -(logits[size_t(label_index)] - mx - std::log(z));
    out.dlogits.resize(n);
    for (size_t o = 0; o < n; ++o)
        out.dlogits[o] = std::exp(logits[o] - mx) / z - (int(o) == label_index ? 1.0 : 0.0);
    return out;
}

EvalResult evaluate(const std::vector<SyntheticSample>& split, const std::vector<double>& theta,
                    const ModelContext& ctx) {
    EvalResult ev;
    if (split.empty()) return ev;
    size_t n = split.size();
    std::vector<double> losses(n);
    std::vector<char> hits(n);
    parallel_for(n, [&](size_t i) {
        NzList nz = nonzeros(split[i].vol);
        auto logits = forward(split[i].vol, &nz, theta, ctx, nullptr);
        auto sm = softmax_ce(logits, split[i].label - 1);
        losses[i] = sm.loss;
        hits[i] = sm.pred == split[i].label - 1;
    });
    for (size_t i = 0; i < n; ++i) {
        ev.loss += losses[i];
        ev.acc += hits[i];
    }
    ev.loss /= double(n);
    ev.acc /= double(n);
    return ev;
}

static void shuffle_indices(std::vector<size_t>& v, Rng& rng) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

TrainResult train(const Dataset& ds, const ModelConfig& cfg, const TrainConfig& tcfg) {
    ModelContext ctx = build_context(cfg);
    ParameterState st = init_parameters(cfg, tcfg.seed);
    ThetaLayout L = theta_layout(cfg);
    const auto& tr = ds.train;
    if (tr.empty()) throw std::invalid_argument("train: empty training split");
    bool aug = tcfg.augment || cfg.variant == Variant::z3_augm;

    std::vector<NzList> nzs;
    nzs.reserve(tr.size());
    for (const auto& s : tr) nzs.push_back(nonzeros(s.vol));

    Rng order_rng(derive_stream(tcfg.seed, 8, 0));
    Rng aug_rng(derive_stream(tcfg.seed, 9, 0));
    std::vector<size_t> perm(tr.size());
    std::iota(perm.begin(), perm.end(), size_t(0));
    size_t pos = perm.size();

    TrainResult res;
    size_t B = size_t(tcfg.batch);
    std::vector<size_t> idx(B), rotidx(B);
    std::vector<std::vector<double>> grads(B);
    std::vector<double> losses(B);
    std::vector<char> hits(B);
    std::vector<Volume> rvol(B);
    std::vector<NzList> rnz(B);

    double run_loss = 0.0, run_acc = 0.0;
    long run_n = 0;
    auto t0 = std::chrono::steady_clock::now();

    for (long it = 1; it <= tcfg.iterations; ++it) {
        for (size_t b = 0; b < B; ++b) {
            if (pos == perm.size()) {
                shuffle_indices(perm, order_rng);
                pos = 0;
            }
            idx[b] = perm[pos++];
            rotidx[b] = aug ? aug_rng.uniform_index(ctx.aug.size()) : 0;
        }
        parallel_for(B, [&](size_t b) {
            const SyntheticSample& s = tr[idx[b]];
            const Volume* I = &s.vol;
            const NzList* nz = &nzs[idx[b]];
            if (aug && rotidx[b] != 0) {
                rvol[b] = rotate_volume_exact(s.vol, ctx.aug.matrices[rotidx[b]]);
                rnz[b] = nonzeros(rvol[b]);
                I = &rvol[b];
                nz = &rnz[b];
            }
            ForwardCache cache;
            auto logits = forward(*I, nz, st.theta, ctx, &cache);
            auto sm = softmax_ce(logits, s.label - 1);
            losses[b] = sm.loss;
            hits[b] = sm.pred == s.label - 1;
            grads[b] = backward(cache, sm.dlogits, ctx);
        });
        std::vector<double> gavg(L.total, 0.0);
        for (size_t b = 0; b < B; ++b) {
            simd::axpy(1.0 / double(B), grads[b].data(), gavg.data(), L.total);
            run_loss += losses[b];
            run_acc += hits[b];
        }
        run_n += long(B);
        adam_step(st, gavg, tcfg);

        if (it % tcfg.eval_every == 0 || it == tcfg.iterations) {
            EvalResult ev = evaluate(ds.test, st.theta, ctx);
            double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
            res.trace.push_back(
                {it, run_loss / double(run_n), run_acc / double(run_n), ev.acc, ms});
            run_loss = run_acc = 0.0;
            run_n = 0;
        }
    }
    res.state = std::move(st);
    return res;
}

// ---------------------------------------------------------------------------
// checkpoints: magic, u32 header length, JSON header, then f64 LE blobs
// (theta, first moment, second moment) in layout order

static constexpr char kCkptMagic[8] = {'L', 'R', 'I', '3', 'D', 'C', 'K', 'P'};

static void put_u32(std::ostream& os, uint32_t v) {
    char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
                 char((v >> 24) & 0xff)};
    os.write(b, 4);
}

static uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

static void put_f64(std::ostream& os, double d) {
    uint64_t v;
    std::memcpy(&v, &d, 8);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

static double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

void write_checkpoint(const std::string& path, const ModelConfig& cfg, const ParameterState& st,
                      uint64_t seed) {
    nlohmann::json hdr;
    hdr["schema_version"] = 1;
    hdr["model"] = variant_name(cfg);
    hdr["N"] = cfg.N;
    hdr["M"] = cfg.rot_label;
    hdr["n_f"] = cfg.n_f;
    hdr["c"] = cfg.c;
    hdr["stride"] = cfg.stride;
    hdr["n_c"] = cfg.n_c;
    hdr["hidden"] = cfg.hidden;
    hdr["step"] = st.step;
    hdr["seed"] = seed;
    hdr["n_params"] = st.theta.size();
    std::string js = hdr.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os.write(kCkptMagic, 8);
    put_u32(os, uint32_t(js.size()));
    os.write(js.data(), std::streamsize(js.size()));
    for (const auto* blob : {&st.theta, &st.m, &st.v})
        for (double d : *blob) put_f64(os, d);
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    char magic[8];
    is.read(magic, 8);
    if (std::memcmp(magic, kCkptMagic, 8) != 0)
        throw std::runtime_error("bad checkpoint magic in " + path);
    uint32_t len = get_u32(is);
    std::string js(len, '\0');
    is.read(js.data(), std::streamsize(len));
    nlohmann::json hdr = nlohmann::json::parse(js);

    Checkpoint ck;
    ck.cfg = parse_model_name(hdr.at("model").get<std::string>());
    ck.cfg.N = hdr.at("N").get<int>();
    ck.cfg.rot_label = hdr.at("M").get<std::string>();
    ck.cfg.n_f = hdr.at("n_f").get<int>();
    ck.cfg.c = hdr.at("c").get<int>();
    ck.cfg.stride = hdr.at("stride").get<int>();
    ck.cfg.n_c = hdr.at("n_c").get<int>();
    ck.cfg.hidden = hdr.at("hidden").get<int>();
    ck.state.step = hdr.at("step").get<long>();
    ck.seed = hdr.at("seed").get<uint64_t>();

    size_t n = hdr.at("n_params").get<size_t>();
    if (n != size_t(count_parameters(ck.cfg)))
        throw std::runtime_error("checkpoint parameter count does not match its config");
    ck.state.theta.resize(n);
    ck.state.m.resize(n);
    ck.state.v.resize(n);
    for (auto* blob : {&ck.state.theta, &ck.state.m, &ck.state.v})
        for (double& d : *blob) d = get_f64(is);
    if (!is) throw std::runtime_error("truncated checkpoint " + path);
    return ck;
}

}  // namespace lri
