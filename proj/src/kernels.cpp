#include "lri/kernels.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "lri/rotations.hpp"
#include "lri/simd.hpp"

namespace lri {

int radial_param_count(int c) {
    if (c < 1 || c % 2 == 0) throw std::domain_error("radial_param_count: c must be odd >= 1");
    int r0 = (c - 1) / 2;
    return int(std::ceil(r0 * std::sqrt(3.0))) + 1;
}

int max_degree(int c) {
    return int(std::floor(M_PI * c / 4.0));
}

double radial_interpolate(const std::vector<double>& h, double rho) {
    if (rho <= 0.0) return h.front();
    size_t last = h.size() - 1;
    if (rho >= double(last)) return h[last];
    size_t i = size_t(rho);
    double f = rho - double(i);
    return h[i] * (1.0 - f) + h[i + 1] * f;
}

HarmonicCoefficients HarmonicCoefficients::zeros(int N) {
    HarmonicCoefficients c;
    c.N = N;
    c.dof.resize(size_t(N) + 1);
    for (int n = 0; n <= N; ++n) c.dof[size_t(n)].assign(size_t(2 * n + 1), 0.0);
    return c;
}

cplx HarmonicCoefficients::coeff(int n, int m) const {
    const auto& d = dof[size_t(n)];
    if (m == 0) return cplx(d[0], 0.0);
    int am = m < 0 ? -m : m;
    cplx v(d[size_t(2 * am - 1)], d[size_t(2 * am)]);
    if (m > 0) return v;
    return ((am & 1) ? -1.0 : 1.0) * std::conj(v);
}

void HarmonicCoefficients::set_coeff(int n, int m, cplx v) {
    auto& d = dof[size_t(n)];
    if (m == 0) {
        d[0] = v.real();
        return;
    }
    d[size_t(2 * m - 1)] = v.real();
    d[size_t(2 * m)] = v.imag();
}

RadialProfileSet RadialProfileSet::ones(int c, int N, bool shared) {
    RadialProfileSet s;
    s.c = c;
    s.N = N;
    s.shared = shared;
    int nr = radial_param_count(c);
    s.h.assign(shared ? 1 : size_t(N) + 1, std::vector<double>(size_t(nr), 1.0));
    return s;
}

// ---------------------------------------------------------------------------

BasisKernelCache::BasisKernelCache(int c, int N) : c_(c), N_(N), nr_(radial_param_count(c)) {
    if (N > max_degree(c)) throw std::domain_error("BasisKernelCache: N exceeds Nyquist bound");
    int pairs = sh_pair_count(N);
    size_t gs = grid_size();
    re_.assign(size_t(pairs) * nr_, std::vector<double>(gs, 0.0));
    im_.assign(size_t(pairs) * nr_, std::vector<double>(gs, 0.0));

    int r0 = (c - 1) / 2;
    // first pass: unscaled grids + per-degree norm of the all-ones-profile kernels
    std::vector<double> sq(size_t(N) + 1, 0.0);
    for (int x = -r0; x <= r0; ++x)
        for (int y = -r0; y <= r0; ++y)
            for (int z = -r0; z <= r0; ++z) {
                size_t vi = (size_t(x + r0) * c + (y + r0)) * c + (z + r0);
                double r = std::sqrt(double(x * x + y * y + z * z));
                // interpolation weights onto integer radii (tail clamped)
                int k0;
                double w0;
                if (r >= double(nr_ - 1)) {
                    k0 = nr_ - 1;
                    w0 = 1.0;
                } else {
                    k0 = int(r);
                    w0 = 1.0 - (r - double(k0));
                }
                if (x == 0 && y == 0 && z == 0) {
                    double v = sh_norm_const(0, 0);  // only n=0 at the center
                    re_[size_t(sh_pair_index(0, 0)) * nr_ + 0][vi] = v;
                    sq[0] += v * v;
                    continue;
                }
                double theta = std::acos(z / r);
                double phi = std::atan2(double(y), double(x));
                if (phi < 0) phi += 2.0 * M_PI;
                for (int n = 0; n <= N; ++n)
                    for (int m = 0; m <= n; ++m) {
                        cplx yv = sh_eval(n, m, theta, phi);
                        size_t p = size_t(sh_pair_index(n, m)) * nr_;
                        re_[p + k0][vi] += w0 * yv.real();
                        im_[p + k0][vi] += w0 * yv.imag();
                        if (w0 < 1.0) {
                            re_[p + k0 + 1][vi] += (1.0 - w0) * yv.real();
                            im_[p + k0 + 1][vi] += (1.0 - w0) * yv.imag();
                        }
                        double a2 = std::norm(yv) * (m > 0 ? 2.0 : 1.0);
                        sq[size_t(n)] += a2;
                    }
            }
    scale_.resize(size_t(N) + 1);
    for (int n = 0; n <= N; ++n) {
        scale_[size_t(n)] = std::sqrt((2.0 * n + 1.0) / sq[size_t(n)]);
        for (int m = 0; m <= n; ++m)
            for (int k = 0; k < nr_; ++k) {
                size_t p = size_t(sh_pair_index(n, m)) * nr_ + k;
                for (double& v : re_[p]) v *= scale_[size_t(n)];
                for (double& v : im_[p]) v *= scale_[size_t(n)];
            }
    }
}

const double* BasisKernelCache::re(int n, int m, int k) const {
    return re_[size_t(sh_pair_index(n, m)) * nr_ + k].data();
}

const double* BasisKernelCache::im(int n, int m, int k) const {
    if (m == 0) return nullptr;
    return im_[size_t(sh_pair_index(n, m)) * nr_ + k].data();
}

void BasisKernelCache::basis_kernel(int n, int m, const std::vector<double>& hn,
                                    double* out_re, double* out_im) const {
    size_t gs = grid_size();
    std::fill(out_re, out_re + gs, 0.0);
    if (m > 0) std::fill(out_im, out_im + gs, 0.0);
    for (int k = 0; k < nr_; ++k) {
        simd::axpy(hn[size_t(k)], re(n, m, k), out_re, gs);
        if (m > 0) simd::axpy(hn[size_t(k)], im(n, m, k), out_im, gs);
    }
}

const BasisKernelCache& BasisKernelCache::get(int c, int N) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<BasisKernelCache>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{c, N}];
    if (!slot) slot = std::make_unique<BasisKernelCache>(c, N);
    return *slot;
}

// ---------------------------------------------------------------------------

VoxelKernel synthesize_kernel(const HarmonicCoefficients& C, const RadialProfileSet& H,
                              double* imag_residue) {
    if (C.N != H.N) throw std::invalid_argument("synthesize_kernel: degree mismatch");
    int c = H.c;
    if (C.N > max_degree(c)) throw std::domain_error("synthesize_kernel: N exceeds Nyquist bound");
    const BasisKernelCache& cache = BasisKernelCache::get(c, C.N);
    size_t gs = cache.grid_size();

    std::vector<double> acc_re(gs, 0.0), acc_im(gs, 0.0);
    std::vector<double> b_re(gs), b_im(gs);
    for (int n = 0; n <= C.N; ++n)
        for (int m = 0; m <= n; ++m) {
            cache.basis_kernel(n, m, H.profile(n), b_re.data(), b_im.data());
            cplx cm = C.coeff(n, m);
            if (m == 0) {
                for (size_t i = 0; i < gs; ++i) {
                    acc_re[i] += cm.real() * b_re[i];
                    acc_im[i] += cm.imag() * b_re[i];
                }
            } else {
                // m and -m terms; B_{n,-m} = (-1)^m conj(B_{n,m})
                cplx cneg = C.coeff(n, -m);
                double sg = (m & 1) ? -1.0 : 1.0;
                for (size_t i = 0; i < gs; ++i) {
                    cplx b(b_re[i], b_im[i]);
                    cplx t = cm * b + cneg * (sg * std::conj(b));
                    acc_re[i] += t.real();
                    acc_im[i] += t.imag();
                }
            }
        }
    double worst = 0.0;
    for (double v : acc_im) worst = std::max(worst, std::abs(v));
    if (imag_residue) *imag_residue = worst;

    VoxelKernel k;
    k.tag = VoxelKernel::Tag::synthesized;
    k.v = Volume(c, c, c);
    k.v.data = std::move(acc_re);
    return k;
}

HarmonicCoefficients steer_coefficients(const HarmonicCoefficients& C, const EulerTriple& rot) {
    HarmonicCoefficients out = HarmonicCoefficients::zeros(C.N);
    for (int n = 0; n <= C.N; ++n) {
        WignerBlock D = wigner_block(n, rot);
        for (int mp = 0; mp <= n; ++mp) {  // stored orders only
            cplx acc(0, 0);
            for (int m = -n; m <= n; ++m) acc += D.at(m, mp) * C.coeff(n, m);
            out.set_coeff(n, mp, acc);
        }
    }
    return out;
}

VoxelKernel rotate_voxel_kernel(const VoxelKernel& k, const EulerTriple& rot) {
    int c = k.side();
    double ctr = (c - 1) / 2.0;
    Mat3 r = euler_to_matrix(rot);
    VoxelKernel out;
    out.tag = VoxelKernel::Tag::rotated;
    out.v = Volume(c, c, c);

    if (is_signed_permutation(r)) {
        int p[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) p[i][j] = int(std::round(r.m[i][j]));
        int r0 = (c - 1) / 2;
        for (int x = -r0; x <= r0; ++x)
            for (int y = -r0; y <= r0; ++y)
                for (int z = -r0; z <= r0; ++z) {
                    int sx = p[0][0] * x + p[0][1] * y + p[0][2] * z;
                    int sy = p[1][0] * x + p[1][1] * y + p[1][2] * z;
                    int sz = p[2][0] * x + p[2][1] * y + p[2][2] * z;
                    out.v.at(x + r0, y + r0, z + r0) = k.v.at(sx + r0, sy + r0, sz + r0);
                }
        return out;
    }

    for (int x = 0; x < c; ++x)
        for (int y = 0; y < c; ++y)
            for (int z = 0; z < c; ++z) {
                Vec3 d{x - ctr, y - ctr, z - ctr};
                Vec3 s = mat_apply(r, d);
                double sx = s.x + ctr, sy = s.y + ctr, sz = s.z + ctr;
                int ix = int(std::floor(sx)), iy = int(std::floor(sy)), iz = int(std::floor(sz));
                double fx = sx - ix, fy = sy - iy, fz = sz - iz;
                double acc = 0.0;
                for (int dx = 0; dx < 2; ++dx)
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dz = 0; dz < 2; ++dz) {
                            int px = ix + dx, py = iy + dy, pz = iz + dz;
                            if (px < 0 || px >= c || py < 0 || py >= c || pz < 0 || pz >= c)
                                continue;
                            double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy) *
                                       (dz ? fz : 1.0 - fz);
                            acc += w * k.v.at(px, py, pz);
                        }
                out.v.at(x, y, z) = acc;
            }
    return out;
}

}  // namespace lri
