#include "lri/operators.hpp"

#include <cmath>
#include <stdexcept>

#include "lri/simd.hpp"

namespace lri {

static void check_conv_args(const Volume& I, int c, int stride) {
    if (stride < 1) throw std::invalid_argument("conv3d: stride must be >= 1");
    if (c > I.dx || c > I.dy || c > I.dz)
        throw std::invalid_argument("conv3d: kernel larger than input");
}

Volume conv3d(const Volume& I, const Volume& kernel, int stride) {
    int c = kernel.dx;
    check_conv_args(I, c, stride);
    Volume out((I.dx - c) / stride + 1, (I.dy - c) / stride + 1, (I.dz - c) / stride + 1);
    simd::corr3d(I.data.data(), I.dx, I.dy, I.dz, kernel.data.data(), c, stride,
                 out.data.data(), out.dx, out.dy, out.dz);
    return out;
}

Volume conv3d(const Volume& I, const VoxelKernel& k, int stride) {
    return conv3d(I, k.v, stride);
}

std::pair<Volume, std::vector<uint8_t>> orientation_max_pool(const OrientationStack& st) {
    if (st.maps.empty()) throw std::invalid_argument("orientation_max_pool: empty stack");
    const Volume& first = st.maps.front();
    Volume pooled(first.dx, first.dy, first.dz);
    std::vector<uint8_t> arg(first.size(), 0);
    for (size_t i = 0; i < first.size(); ++i) pooled.data[i] = std::abs(first.data[i]);
    for (size_t r = 1; r < st.maps.size(); ++r) {
        const auto& m = st.maps[r];
        for (size_t i = 0; i < m.data.size(); ++i) {
            double a = std::abs(m.data[i]);
            if (a > pooled.data[i]) {
                pooled.data[i] = a;
                arg[i] = uint8_t(r);
            }
        }
    }
    return {std::move(pooled), std::move(arg)};
}

Volume g_lri(const Volume& I, const VoxelKernel& k, const RotationSet& B, int stride) {
    OrientationStack st;
    st.maps.reserve(B.size());
    for (const auto& rot : B.triples)
        st.maps.push_back(conv3d(I, rotate_voxel_kernel(k, rot), stride));
    return orientation_max_pool(st).first;
}

BaseResponses s_lri_base_responses(const Volume& I, const RadialProfileSet& H, int N,
                                   int stride, const NzList* nz) {
    const BasisKernelCache& cache = BasisKernelCache::get(H.c, N);
    int c = H.c;
    check_conv_args(I, c, stride);
    int ox = (I.dx - c) / stride + 1, oy = (I.dy - c) / stride + 1, oz = (I.dz - c) / stride + 1;
    bool sparse = nz != nullptr && stride == 1;

    BaseResponses out;
    out.N = N;
    out.re.resize(sh_pair_count(N));
    out.im.resize(sh_pair_count(N));
    std::vector<double> b_re(cache.grid_size()), b_im(cache.grid_size());
    for (int n = 0; n <= N; ++n)
        for (int m = 0; m <= n; ++m) {
            cache.basis_kernel(n, m, H.profile(n), b_re.data(), b_im.data());
            int p = sh_pair_index(n, m);
            out.re[p] = Volume(ox, oy, oz);
            if (sparse)
                simd::corr3d_sparse(*nz, b_re.data(), c, out.re[p].data.data(), ox, oy, oz);
            else
                simd::corr3d(I.data.data(), I.dx, I.dy, I.dz, b_re.data(), c, stride,
                             out.re[p].data.data(), ox, oy, oz);
            if (m > 0) {
                out.im[p] = Volume(ox, oy, oz);
                if (sparse)
                    simd::corr3d_sparse(*nz, b_im.data(), c, out.im[p].data.data(), ox, oy, oz);
                else
                    simd::corr3d(I.data.data(), I.dx, I.dy, I.dz, b_im.data(), c, stride,
                                 out.im[p].data.data(), ox, oy, oz);
            }
        }
    return out;
}

std::vector<std::vector<cplx>> steer_full(const HarmonicCoefficients& C,
                                          const std::vector<WignerBlock>& blocks) {
    std::vector<std::vector<cplx>> cs(size_t(C.N) + 1);
    for (int n = 0; n <= C.N; ++n) {
        const WignerBlock& D = blocks[size_t(n)];
        cs[size_t(n)].resize(size_t(2 * n + 1));
        for (int mp = -n; mp <= n; ++mp) {
            cplx acc(0, 0);
            for (int m = -n; m <= n; ++m) acc += D.at(m, mp) * C.coeff(n, m);
            cs[size_t(n)][size_t(mp + n)] = acc;
        }
    }
    return cs;
}

SteerWeights steer_weights(const std::vector<std::vector<cplx>>& csteer_full, int N) {
    SteerWeights w;
    w.wre.assign(sh_pair_count(N), 0.0);
    w.wim.assign(sh_pair_count(N), 0.0);
    for (int n = 0; n <= N; ++n)
        for (int m = 0; m <= n; ++m) {
            cplx c = csteer_full[size_t(n)][size_t(m + n)];
            int p = sh_pair_index(n, m);
            if (m == 0) {
                w.wre[p] = c.real();
            } else {
                w.wre[p] = 2.0 * c.real();
                w.wim[p] = -2.0 * c.imag();
            }
        }
    return w;
}

void steered_combination(const BaseResponses& resp, const SteerWeights& w, Volume& out) {
    out.fill(0.0);
    size_t nvox = out.size();
    for (int n = 0; n <= resp.N; ++n)
        for (int m = 0; m <= n; ++m) {
            int p = sh_pair_index(n, m);
            if (w.wre[p] != 0.0) simd::axpy(w.wre[p], resp.re[p].data.data(), out.data.data(), nvox);
            if (m > 0 && w.wim[p] != 0.0)
                simd::axpy(w.wim[p], resp.im[p].data.data(), out.data.data(), nvox);
        }
}

Volume s_lri(const Volume& I, const HarmonicCoefficients& C, const RadialProfileSet& H,
             const RotationSet& B, int stride) {
    BaseResponses resp = s_lri_base_responses(I, H, C.N, stride);
    std::vector<WignerBlock> blocks;
    OrientationStack st;
    st.maps.reserve(B.size());
    Volume s(resp.re[0].dx, resp.re[0].dy, resp.re[0].dz);
    for (const auto& rot : B.triples) {
        blocks.clear();
        for (int n = 0; n <= C.N; ++n) blocks.push_back(wigner_block(n, rot));
        steered_combination(resp, steer_weights(steer_full(C, blocks), C.N), s);
        st.maps.push_back(s);
    }
    return orientation_max_pool(st).first;
}

Volume sse(const Volume& I, const RadialProfileSet& H, int degree, int stride) {
    if (degree > H.N) throw std::invalid_argument("sse: degree exceeds profile set");
    BaseResponses resp = s_lri_base_responses(I, H, H.N, stride);
    int p0 = sh_pair_index(degree, 0);
    Volume e(resp.re[p0].dx, resp.re[p0].dy, resp.re[p0].dz);
    for (size_t i = 0; i < e.size(); ++i) {
        double v = resp.re[p0].data[i];
        e.data[i] = v * v;
    }
    for (int m = 1; m <= degree; ++m) {
        int p = sh_pair_index(degree, m);
        for (size_t i = 0; i < e.size(); ++i) {
            double re = resp.re[p].data[i], im = resp.im[p].data[i];
            e.data[i] += 2.0 * (re * re + im * im);
        }
    }
    return e;
}

std::pair<double, int> global_ri_reduce(const OrientationStack& st) {
    if (st.maps.empty()) throw std::invalid_argument("global_ri_reduce: empty stack");
    double best = -1.0;
    int arg = 0;
    for (size_t r = 0; r < st.maps.size(); ++r) {
        const auto& m = st.maps[r];
        double acc = 0.0;
        for (double v : m.data) acc += std::abs(v);
        double mean = acc / double(m.size());
        if (mean > best) {
            best = mean;
            arg = int(r);
        }
    }
    return {best, arg};
}

double g_ri_feature(const Volume& I, const VoxelKernel& k, const RotationSet& B, int stride) {
    OrientationStack st;
    for (const auto& rot : B.triples)
        st.maps.push_back(conv3d(I, rotate_voxel_kernel(k, rot), stride));
    return global_ri_reduce(st).first;
}

double s_ri_feature(const Volume& I, const HarmonicCoefficients& C, const RadialProfileSet& H,
                    const RotationSet& B, int stride) {
    BaseResponses resp = s_lri_base_responses(I, H, C.N, stride);
    OrientationStack st;
    std::vector<WignerBlock> blocks;
    Volume s(resp.re[0].dx, resp.re[0].dy, resp.re[0].dz);
    for (const auto& rot : B.triples) {
        blocks.clear();
        for (int n = 0; n <= C.N; ++n) blocks.push_back(wigner_block(n, rot));
        steered_combination(resp, steer_weights(steer_full(C, blocks), C.N), s);
        st.maps.push_back(s);
    }
    return global_ri_reduce(st).first;
}

Volume rotate_volume_exact(const Volume& v, const Mat3& signed_perm) {
    if (v.dx != v.dy || v.dy != v.dz)
        throw std::invalid_argument("rotate_volume_exact: cubic volumes only");
    int d = v.dx;
    int p[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            p[i][j] = int(std::round(signed_perm.m[i][j]));
            if (std::abs(signed_perm.m[i][j] - p[i][j]) > 1e-9)
                throw std::invalid_argument("rotate_volume_exact: not a signed permutation");
        }
    // integer-exact rotation about the box center via doubled offsets
    Volume out(d, d, d);
    for (int x = 0; x < d; ++x)
        for (int y = 0; y < d; ++y)
            for (int z = 0; z < d; ++z) {
                int ux = 2 * x - (d - 1), uy = 2 * y - (d - 1), uz = 2 * z - (d - 1);
                int sx = p[0][0] * ux + p[0][1] * uy + p[0][2] * uz;
                int sy = p[1][0] * ux + p[1][1] * uy + p[1][2] * uz;
                int sz = p[2][0] * ux + p[2][1] * uy + p[2][2] * uz;
                out.at(x, y, z) = v.at((sx + d - 1) / 2, (sy + d - 1) / 2, (sz + d - 1) / 2);
            }
    return out;
}

}  // namespace lri
