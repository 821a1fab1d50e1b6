#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "lri/operators.hpp"
#include "lri/rng.hpp"
#include "lri/rotations.hpp"

using namespace lri;

namespace {

double mat_dist(const Mat3& a, const Mat3& b) {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(a.m[i][j] - b.m[i][j]));
    return worst;
}

double det3(const Mat3& r) {
    return r.m[0][0] * (r.m[1][1] * r.m[2][2] - r.m[1][2] * r.m[2][1]) -
           r.m[0][1] * (r.m[1][0] * r.m[2][2] - r.m[1][2] * r.m[2][0]) +
           r.m[0][2] * (r.m[1][0] * r.m[2][1] - r.m[1][1] * r.m[2][0]);
}

}  // namespace

TEST_CASE("octahedron subdivision points") {
    std::vector<Vec3> v0 = octahedron_points(0);
    REQUIRE(v0.size() == 6);
    // the six unit +-axes, each exactly once
    std::set<std::array<int, 3>> seen;
    for (const Vec3& p : v0) {
        CHECK(std::abs(std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z) - 1.0) < 1e-14);
        std::array<int, 3> key{int(std::lround(p.x)), int(std::lround(p.y)),
                               int(std::lround(p.z))};
        CHECK(std::abs(p.x - key[0]) < 1e-14);
        CHECK(std::abs(p.y - key[1]) < 1e-14);
        CHECK(std::abs(p.z - key[2]) < 1e-14);
        seen.insert(key);
    }
    CHECK(seen.size() == 6);

    std::vector<Vec3> v1 = octahedron_points(1);
    REQUIRE(v1.size() == 18);
    // first six are the level-0 vertices in the same order
    for (size_t i = 0; i < 6; ++i) {
        CHECK(std::abs(v1[i].x - v0[i].x) < 1e-14);
        CHECK(std::abs(v1[i].y - v0[i].y) < 1e-14);
        CHECK(std::abs(v1[i].z - v0[i].z) < 1e-14);
    }
    // midpoints are unit and have exactly two nonzero +-1/sqrt(2) entries
    for (size_t i = 6; i < 18; ++i) {
        const Vec3& p = v1[i];
        CHECK(std::abs(std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z) - 1.0) < 1e-14);
        int nonzero = 0;
        for (double c : {p.x, p.y, p.z})
            if (std::abs(c) > 1e-12) {
                CHECK(std::abs(std::abs(c) - M_SQRT1_2) < 1e-14);
                ++nonzero;
            }
        CHECK(nonzero == 2);
    }
}

TEST_CASE("point_to_alpha_beta maps +z onto the point") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        double ct = rng.uniform(-1.0, 1.0), ph = rng.uniform(0.0, 2.0 * M_PI);
        double st = std::sqrt(1.0 - ct * ct);
        Vec3 p{st * std::cos(ph), st * std::sin(ph), ct};
        auto [alpha, beta] = point_to_alpha_beta(p);
        Mat3 R = euler_to_matrix({alpha, beta, 0.0});
        Vec3 q = mat_apply(R, {0.0, 0.0, 1.0});
        CHECK(std::abs(q.x - p.x) < 1e-12);
        CHECK(std::abs(q.y - p.y) < 1e-12);
        CHECK(std::abs(q.z - p.z) < 1e-12);
    }
    for (double z : {1.0, -1.0}) {
        auto [alpha, beta] = point_to_alpha_beta({0.0, 0.0, z});
        CHECK(alpha == 0.0);
        CHECK(std::abs(beta - (z > 0 ? 0.0 : M_PI)) < 1e-14);
    }
}

TEST_CASE("rotation set sizes and structure") {
    for (auto [label, m] :
         {std::pair<const char*, size_t>{"M1", 1}, {"M4", 4}, {"M24", 24}, {"M72", 72}}) {
        RotationSet B = build_rotation_set(label);
        CHECK(B.label == label);
        REQUIRE(B.size() == m);
        CHECK(mat_dist(B.matrices[0], Mat3::identity()) < 1e-14);
        for (size_t i = 0; i < m; ++i) {
            const Mat3& R = B.matrices[i];
            // orthonormal, proper
            Mat3 g = mat_mul(R, mat_transpose(R));
            CHECK(mat_dist(g, Mat3::identity()) < 1e-12);
            CHECK(std::abs(det3(R) - 1.0) < 1e-12);
            // triples agree with matrices
            CHECK(mat_dist(euler_to_matrix(B.triples[i]), R) < 1e-12);
        }
        // pairwise distinct
        for (size_t i = 0; i < m; ++i)
            for (size_t j = i + 1; j < m; ++j) CHECK(mat_dist(B.matrices[i], B.matrices[j]) > 1e-6);
    }
}

TEST_CASE("M24 is the rotational octahedral group") {
    RotationSet B = build_rotation_set("M24");
    REQUIRE(B.size() == 24);
    for (const Mat3& R : B.matrices) CHECK(is_signed_permutation(R, 1e-12));
    // closure: R_i R_j is again in the set
    for (size_t i = 0; i < 24; ++i)
        for (size_t j = 0; j < 24; ++j) {
            Mat3 p = mat_mul(B.matrices[i], B.matrices[j]);
            bool found = false;
            for (const Mat3& R : B.matrices)
                if (mat_dist(p, R) < 1e-9) {
                    found = true;
                    break;
                }
            CHECK(found);
        }
}

TEST_CASE("is_signed_permutation rejects near misses") {
    Mat3 id = Mat3::identity();
    CHECK(is_signed_permutation(id));
    Mat3 neg = id;
    neg.m[1][1] = -1.0;
    CHECK(is_signed_permutation(neg));  // improper but still signed-perm shaped
    Mat3 tilt = euler_to_matrix({0.3, 0.0, 0.0});
    CHECK(!is_signed_permutation(tilt));
    Mat3 dup = id;
    dup.m[0][0] = 0.0;
    dup.m[0][2] = 1.0;  // column 2 used twice
    CHECK(!is_signed_permutation(dup));
}

TEST_CASE("exact volume rotation composes to identity") {
    RotationSet B = build_rotation_set("M24");
    Rng rng(32);
    for (int side : {4, 5}) {
        Volume v(side, side, side);
        for (double& e : v.data) e = rng.normal();
        for (const Mat3& R : B.matrices) {
            Volume r = rotate_volume_exact(v, R);
            Volume back = rotate_volume_exact(r, mat_transpose(R));
            CHECK(max_abs_diff(back, v) == 0.0);
        }
    }
}

TEST_CASE("exact volume rotation permutes values") {
    // rotating by a signed permutation must preserve the multiset of values
    Rng rng(33);
    Volume v(5, 5, 5);
    for (double& e : v.data) e = rng.normal();
    RotationSet B = build_rotation_set("M24");
    std::vector<double> want = v.data;
    std::sort(want.begin(), want.end());
    for (const Mat3& R : B.matrices) {
        Volume r = rotate_volume_exact(v, R);
        std::vector<double> got = r.data;
        std::sort(got.begin(), got.end());
        CHECK(got == want);
    }
}
