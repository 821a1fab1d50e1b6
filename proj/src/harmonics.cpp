#include "lri/harmonics.hpp"

#include <cmath>
#include <stdexcept>

namespace lri {

Mat3 Mat3::identity() {
    Mat3 r;
    r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
    return r;
}

Mat3 mat_mul(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double acc = 0;
            for (int k = 0; k < 3; ++k) acc += a.m[i][k] * b.m[k][j];
            r.m[i][j] = acc;
        }
    return r;
}

Vec3 mat_apply(const Mat3& r, const Vec3& p) {
    return {r.m[0][0] * p.x + r.m[0][1] * p.y + r.m[0][2] * p.z,
            r.m[1][0] * p.x + r.m[1][1] * p.y + r.m[1][2] * p.z,
            r.m[2][0] * p.x + r.m[2][1] * p.y + r.m[2][2] * p.z};
}

Mat3 mat_transpose(const Mat3& a) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.m[i][j] = a.m[j][i];
    return r;
}

static Mat3 rot_z(double a) {
    Mat3 r = Mat3::identity();
    r.m[0][0] = std::cos(a);
    r.m[0][1] = -std::sin(a);
    r.m[1][0] = std::sin(a);
    r.m[1][1] = std::cos(a);
    return r;
}

static Mat3 rot_y(double a) {
    Mat3 r = Mat3::identity();
    r.m[0][0] = std::cos(a);
    r.m[0][2] = std::sin(a);
    r.m[2][0] = -std::sin(a);
    r.m[2][2] = std::cos(a);
    return r;
}

Mat3 euler_to_matrix(const EulerTriple& rot) {
    return mat_mul(rot_z(rot.alpha), mat_mul(rot_y(rot.beta), rot_z(rot.gamma)));
}

static double wrap_2pi(double a) {
    const double tau = 2.0 * M_PI;
    a = std::fmod(a, tau);
    if (a < 0) a += tau;
    if (a == tau) a = 0.0;
    return a;
}

EulerTriple matrix_to_euler(const Mat3& r) {
    double sb = std::hypot(r.m[0][2], r.m[1][2]);
    EulerTriple e;
    e.beta = std::atan2(sb, r.m[2][2]);
    if (sb > 1e-12) {
        e.alpha = wrap_2pi(std::atan2(r.m[1][2], r.m[0][2]));
        e.gamma = wrap_2pi(std::atan2(r.m[2][1], -r.m[2][0]));
    } else if (r.m[2][2] > 0) {  // beta = 0: R = Rz(alpha + gamma)
        e.beta = 0.0;
        e.gamma = 0.0;
        e.alpha = wrap_2pi(std::atan2(r.m[1][0], r.m[0][0]));
    } else {  // beta = pi: R = Rz(alpha) Ry(pi) Rz(gamma), fold gamma into alpha
        e.beta = M_PI;
        e.gamma = 0.0;
        e.alpha = wrap_2pi(std::atan2(-r.m[0][1], -r.m[0][0]));
    }
    return e;
}

double assoc_legendre(int n, int m, double x) {
    if (m < 0 || m > n) throw std::domain_error("assoc_legendre: need 0 <= m <= n");
    if (x < -1.0 || x > 1.0) throw std::domain_error("assoc_legendre: |x| > 1");
    // P_{m,m} = (-1)^m (2m-1)!! (1-x^2)^{m/2}, then upward recurrence in n
    double pmm = 1.0;
    if (m > 0) {
        double somx2 = std::sqrt((1.0 - x) * (1.0 + x));
        double fact = 1.0;
        for (int i = 0; i < m; ++i) {
            pmm *= -fact * somx2;
            fact += 2.0;
        }
    }
    if (n == m) return pmm;
    double pmmp1 = x * (2.0 * m + 1.0) * pmm;
    if (n == m + 1) return pmmp1;
    double pnn = 0.0;
    for (int nn = m + 2; nn <= n; ++nn) {
        pnn = (x * (2.0 * nn - 1.0) * pmmp1 - (nn + m - 1.0) * pmm) / (nn - m);
        pmm = pmmp1;
        pmmp1 = pnn;
    }
    return pnn;
}

// lgamma(k+1) for k = 0..2*max_degree, enough for degree 12
static double lg_fact(int k) {
    constexpr int kMax = 25;
    static const auto table = [] {
        std::array<double, kMax + 1> t{};
        for (int i = 0; i <= kMax; ++i) t[i] = std::lgamma(double(i) + 1.0);
        return t;
    }();
    return table[size_t(k)];
}

double sh_norm_const(int n, int m) {
    int am = m < 0 ? -m : m;
    double sign = (m > 0 && (m & 1)) ? -1.0 : 1.0;  // (-1)^((m+|m|)/2)
    double lg = lg_fact(n - am) - lg_fact(n + am);
    return sign * std::sqrt((2.0 * n + 1.0) / (4.0 * M_PI) * std::exp(lg));
}

cplx sh_eval(int n, int m, double theta, double phi) {
    int am = m < 0 ? -m : m;
    double v = sh_norm_const(n, m) * assoc_legendre(n, am, std::cos(theta));
    return cplx(v * std::cos(m * phi), v * std::sin(m * phi));
}

double wigner_small_d(int n, int mp, int m, double beta) {
    double ch = std::cos(0.5 * beta), sh = std::sin(0.5 * beta);
    double pref = 0.5 * (lg_fact(n + mp) + lg_fact(n - mp) + lg_fact(n + m) + lg_fact(n - m));
    int s0 = std::max(0, m - mp), s1 = std::min(n + m, n - mp);
    double acc = 0.0;
    for (int s = s0; s <= s1; ++s) {
        double lg = pref - lg_fact(n + m - s) - lg_fact(s) - lg_fact(mp - m + s) -
                    lg_fact(n - mp - s);
        double term = std::exp(lg) * std::pow(ch, 2 * n + m - mp - 2 * s) *
                      std::pow(sh, mp - m + 2 * s);
        acc += ((mp - m + s) & 1) ? -term : term;
    }
    return acc;
}

WignerBlock wigner_block(int n, const EulerTriple& rot) {
    WignerBlock b;
    b.n = n;
    b.rotation = rot;
    b.entries.assign(size_t(2 * n + 1) * (2 * n + 1), cplx(0, 0));
    for (int m = -n; m <= n; ++m) {
        cplx ea(std::cos(m * rot.alpha), std::sin(m * rot.alpha));
        for (int mp = -n; mp <= n; ++mp) {
            cplx eg(std::cos(mp * rot.gamma), std::sin(mp * rot.gamma));
            // note the transposed small-d indices; fixed by the steering oracle
            b.at(m, mp) = ea * wigner_small_d(n, mp, m, rot.beta) * eg;
        }
    }
    return b;
}

std::vector<cplx> enforce_realness(const std::vector<cplx>& cn) {
    int n = (int(cn.size()) - 1) / 2;
    std::vector<cplx> out(cn.size());
    for (int m = -n; m <= n; ++m) {
        double sign = (m & 1) ? -1.0 : 1.0;
        out[size_t(m + n)] = 0.5 * (cn[size_t(m + n)] + sign * std::conj(cn[size_t(-m + n)]));
    }
    return out;
}

}  // namespace lri
