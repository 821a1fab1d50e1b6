#pragma once
#include <array>
#include <complex>
#include <vector>

namespace lri {

using cplx = std::complex<double>;

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

struct Mat3 {
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    static Mat3 identity();
};

Mat3 mat_mul(const Mat3& a, const Mat3& b);
Vec3 mat_apply(const Mat3& r, const Vec3& p);
Mat3 mat_transpose(const Mat3& a);

// Intrinsic z-y'-z'' Euler angles; R = Rz(alpha) * Ry(beta) * Rz(gamma).
struct EulerTriple {
    double alpha = 0, beta = 0, gamma = 0;
};

Mat3 euler_to_matrix(const EulerTriple& rot);
// Inverse of euler_to_matrix; the beta ~ 0 / pi gimbal cases take gamma = 0.
EulerTriple matrix_to_euler(const Mat3& r);

// Associated Legendre P_{n,m}(x), Condon-Shortley phase included.
double assoc_legendre(int n, int m, double x);

// Normalization constant A_{n,m} (log-gamma evaluated).
double sh_norm_const(int n, int m);

// Complex spherical harmonic Y_{n,m}(theta, phi) = A_{n,m} P_{n,|m|}(cos theta) e^{i m phi}.
cplx sh_eval(int n, int m, double theta, double phi);

// Wigner small-d d^n_{mp,m}(beta) by the explicit factorial sum.
double wigner_small_d(int n, int mp, int m, double beta);

// Steering block for one rotation and degree: satisfies
//   Y_{n,m}(R p) = sum_{m'} D[m,m'] Y_{n,m'}(p).
// Entries indexed m,m' in {-n..n}; at(m,m') = entries[(m+n)*(2n+1) + (m'+n)].
struct WignerBlock {
    int n = 0;
    EulerTriple rotation;
    std::vector<cplx> entries;

    cplx at(int m, int mp) const { return entries[size_t(m + n) * (2 * n + 1) + (mp + n)]; }
    cplx& at(int m, int mp) { return entries[size_t(m + n) * (2 * n + 1) + (mp + n)]; }
};

WignerBlock wigner_block(int n, const EulerTriple& rot);

// Project one degree-n coefficient vector (indexed m = -n..n, entry m at
// index m+n) onto the realness constraint C[-m] = (-1)^m conj(C[m]) by
// symmetric averaging of each (m,-m) pair. Idempotent.
std::vector<cplx> enforce_realness(const std::vector<cplx>& cn);

}  // namespace lri
