#include <cmath>
#include <vector>

#include "doctest.h"
#include "lri/operators.hpp"
#include "lri/rng.hpp"

using namespace lri;

namespace {

Volume random_volume(int side, Rng& rng, double density = 1.0) {
    Volume v(side, side, side);
    for (double& e : v.data)
        if (density >= 1.0 || rng.uniform() < density) e = rng.normal();
    return v;
}

HarmonicCoefficients random_coeffs(int N, Rng& rng) {
    HarmonicCoefficients C = HarmonicCoefficients::zeros(N);
    for (int n = 0; n <= N; ++n)
        for (double& d : C.dof[size_t(n)]) d = rng.normal();
    return C;
}

RadialProfileSet random_profiles(int c, int N, bool shared, Rng& rng) {
    RadialProfileSet H = RadialProfileSet::ones(c, N, shared);
    for (auto& hv : H.h)
        for (double& d : hv) d = rng.normal();
    return H;
}

double rel_linf(const Volume& a, const Volume& b) {
    double scale = 0.0;
    for (double e : b.data) scale = std::max(scale, std::abs(e));
    return max_abs_diff(a, b) / std::max(scale, 1e-300);
}

}  // namespace

TEST_CASE("the two conv3d overloads agree") {
    Rng rng(51);
    Volume I = random_volume(10, rng);
    VoxelKernel k;
    k.v = Volume(5, 5, 5);
    for (double& e : k.v.data) e = rng.normal();
    for (int stride : {1, 2}) {
        Volume a = conv3d(I, k, stride);
        Volume b = conv3d(I, k.v, stride);
        CHECK(max_abs_diff(a, b) == 0.0);
    }
}

TEST_CASE("output shapes follow the valid-region rule") {
    Rng rng(52);
    Volume I = random_volume(17, rng);
    VoxelKernel k;
    k.v = Volume(5, 5, 5);
    for (double& e : k.v.data) e = rng.normal();
    Volume o1 = conv3d(I, k, 1);
    CHECK(o1.dx == 13);
    Volume o2 = conv3d(I, k, 2);
    CHECK(o2.dx == 7);
    CHECK(o2.dy == 7);
    CHECK(o2.dz == 7);
    // strided output subsamples the stride-1 output (equal up to the
    // accumulation-order difference between the dispatch paths)
    for (int x = 0; x < 7; ++x)
        for (int y = 0; y < 7; ++y)
            for (int z = 0; z < 7; ++z)
                CHECK(std::abs(o2.at(x, y, z) - o1.at(2 * x, 2 * y, 2 * z)) <
                      1e-12 * std::max(1.0, std::abs(o1.at(2 * x, 2 * y, 2 * z))));

    RotationSet B = build_rotation_set("M4");
    Volume g = g_lri(I, k, B, 2);
    CHECK((g.dx == 7 && g.dy == 7 && g.dz == 7));
    RadialProfileSet H = RadialProfileSet::ones(5, 2, false);
    Volume e = sse(I, H, 2, 2);
    CHECK((e.dx == 7 && e.dy == 7 && e.dz == 7));
}

TEST_CASE("orientation max pool picks the largest magnitude, ties to lowest index") {
    OrientationStack st;
    st.maps.emplace_back(1, 1, 2);
    st.maps.emplace_back(1, 1, 2);
    st.maps[0].data = {3.0, -5.0};
    st.maps[1].data = {-3.0, 4.0};
    auto [pooled, arg] = orientation_max_pool(st);
    CHECK(pooled.data[0] == 3.0);  // tie on |.|: rotation 0 keeps it
    CHECK(pooled.data[1] == 5.0);
    CHECK(arg[0] == 0);
    CHECK(arg[1] == 0);
}

TEST_CASE("g_lri over the trivial set is the plain magnitude response") {
    Rng rng(53);
    Volume I = random_volume(12, rng);
    VoxelKernel k;
    k.v = Volume(5, 5, 5);
    for (double& e : k.v.data) e = rng.normal();
    RotationSet B1 = build_rotation_set("M1");
    Volume g = g_lri(I, k, B1);
    Volume c = conv3d(I, k);
    for (double& e : c.data) e = std::abs(e);
    CHECK(max_abs_diff(g, c) == 0.0);
}

TEST_CASE("base responses are the basis-kernel correlations; sparse path agrees") {
    const int c = 5, N = 3;
    Rng rng(54);
    Volume I = random_volume(12, rng, 0.25);
    RadialProfileSet H = random_profiles(c, N, false, rng);
    BaseResponses dense = s_lri_base_responses(I, H, N, 1, nullptr);
    NzList nz = nonzeros(I);
    BaseResponses sparse = s_lri_base_responses(I, H, N, 1, &nz);

    const BasisKernelCache& cache = BasisKernelCache::get(c, N);
    std::vector<double> b_re(cache.grid_size()), b_im(cache.grid_size());
    for (int n = 0; n <= N; ++n)
        for (int m = 0; m <= n; ++m) {
            int p = sh_pair_index(n, m);
            cache.basis_kernel(n, m, H.profile(n), b_re.data(), b_im.data());
            Volume kr(c, c, c);
            kr.data.assign(b_re.begin(), b_re.end());
            CHECK(max_abs_diff(dense.re[size_t(p)], conv3d(I, kr)) < 1e-12);
            CHECK(max_abs_diff(dense.re[size_t(p)], sparse.re[size_t(p)]) < 1e-12);
            if (m) {
                Volume ki(c, c, c);
                ki.data.assign(b_im.begin(), b_im.end());
                CHECK(max_abs_diff(dense.im[size_t(p)], conv3d(I, ki)) < 1e-12);
                CHECK(max_abs_diff(dense.im[size_t(p)], sparse.im[size_t(p)]) < 1e-12);
            }
        }
}

TEST_CASE("identity steering reproduces the synthesized-kernel response") {
    const int c = 5, N = 3;
    Rng rng(55);
    Volume I = random_volume(12, rng);
    HarmonicCoefficients C = random_coeffs(N, rng);
    RadialProfileSet H = random_profiles(c, N, true, rng);
    BaseResponses resp = s_lri_base_responses(I, H, N);
    std::vector<WignerBlock> blocks;
    for (int n = 0; n <= N; ++n) blocks.push_back(wigner_block(n, {0.0, 0.0, 0.0}));
    SteerWeights w = steer_weights(steer_full(C, blocks), N);
    Volume s(resp.re[0].dx, resp.re[0].dy, resp.re[0].dz);
    steered_combination(resp, w, s);
    Volume direct = conv3d(I, synthesize_kernel(C, H));
    CHECK(rel_linf(s, direct) < 1e-12);
}

TEST_CASE("s_lri equals g_lri on the synthesized kernel") {
    const int c = 5, N = 2;
    Rng rng(56);
    Volume I = random_volume(11, rng);
    HarmonicCoefficients C = random_coeffs(N, rng);
    RadialProfileSet H = random_profiles(c, N, false, rng);
    RotationSet B = build_rotation_set("M24");
    Volume a = s_lri(I, C, H, B);
    Volume b = g_lri(I, synthesize_kernel(C, H), B);
    CHECK(rel_linf(a, b) < 1e-10);
}

TEST_CASE("solid spherical energy is nonnegative and equivariant") {
    const int c = 5;
    Rng rng(57);
    Volume I = random_volume(16, rng);
    RadialProfileSet H = random_profiles(c, 3, false, rng);
    // profiles can be negative; energies cannot
    for (int n = 0; n <= 3; ++n) {
        Volume e = sse(I, H, n);
        for (double v : e.data) CHECK(v >= 0.0);
    }
    RotationSet B = build_rotation_set("M24");
    const Mat3& R = B.matrices[13];
    Volume Ir = rotate_volume_exact(I, R);
    for (int n : {1, 3}) {
        Volume want = rotate_volume_exact(sse(I, H, n), R);
        Volume got = sse(Ir, H, n);
        CHECK(rel_linf(got, want) < 1e-12);
    }
}

TEST_CASE("global reduction takes the rotation with the largest mean magnitude") {
    OrientationStack st;
    st.maps.emplace_back(1, 1, 2);
    st.maps.emplace_back(1, 1, 2);
    st.maps[0].data = {1.0, -3.0};  // mean |.| = 2.0
    st.maps[1].data = {2.5, 0.5};   // mean |.| = 1.5
    auto [feat, arg] = global_ri_reduce(st);
    CHECK(feat == 2.0);
    CHECK(arg == 0);
}

TEST_CASE("global-RI features are invariant to right-angle input rotations") {
    const int c = 5;
    Rng rng(58);
    Volume I = random_volume(12, rng);
    VoxelKernel k;
    k.v = Volume(c, c, c);
    for (double& e : k.v.data) e = rng.normal();
    HarmonicCoefficients C = random_coeffs(2, rng);
    RadialProfileSet H = random_profiles(c, 2, false, rng);
    RotationSet B = build_rotation_set("M24");

    double g0 = g_ri_feature(I, k, B);
    double s0 = s_ri_feature(I, C, H, B);
    for (size_t r = 0; r < B.size(); r += 3) {
        Volume Ir = rotate_volume_exact(I, B.matrices[r]);
        CHECK(std::abs(g_ri_feature(Ir, k, B) - g0) < 1e-12 * std::abs(g0));
        CHECK(std::abs(s_ri_feature(Ir, C, H, B) - s0) < 1e-10 * std::abs(s0));
    }
}

TEST_CASE("local operators are equivariant to right-angle input rotations") {
    const int c = 5;
    Rng rng(59);
    Volume I = random_volume(14, rng);
    VoxelKernel k;
    k.v = Volume(c, c, c);
    for (double& e : k.v.data) e = rng.normal();
    HarmonicCoefficients C = random_coeffs(3, rng);
    RadialProfileSet H = random_profiles(c, 3, true, rng);
    RotationSet B = build_rotation_set("M24");
    const Mat3& R = B.matrices[7];
    Volume Ir = rotate_volume_exact(I, R);

    Volume g_want = rotate_volume_exact(g_lri(I, k, B), R);
    CHECK(rel_linf(g_lri(Ir, k, B), g_want) < 1e-12);
    Volume s_want = rotate_volume_exact(s_lri(I, C, H, B), R);
    CHECK(rel_linf(s_lri(Ir, C, H, B), s_want) < 1e-10);
}
