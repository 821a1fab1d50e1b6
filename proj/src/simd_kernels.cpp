#include "lri/simd.hpp"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define LRI_HAVE_X86 1
#endif

namespace lri::simd {

// ============================================================================
// == scalar reference kernels
// ============================================================================

namespace detail {

void axpy_scalar(double a, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* x, const double* y, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void corr3d_scalar(const double* in, int ix, int iy, int iz,
                   const double* ker, int c, int stride,
                   double* out, int ox, int oy, int oz) {
    (void)ix;
    for (int x = 0; x < ox; ++x)
        for (int y = 0; y < oy; ++y) {
            double* orow = out + (size_t(x) * oy + y) * oz;
            for (int z = 0; z < oz; ++z) {
                double acc = 0.0;
                for (int vx = 0; vx < c; ++vx)
                    for (int vy = 0; vy < c; ++vy) {
                        const double* irow =
                            in + (size_t(x * stride + vx) * iy + (y * stride + vy)) * iz +
                            z * stride;
                        const double* krow = ker + (size_t(vx) * c + vy) * c;
                        for (int vz = 0; vz < c; ++vz) acc += irow[vz] * krow[vz];
                    }
                orow[z] = acc;
            }
        }
}

void corr3d_adjoint_scalar(const double* in, int ix, int iy, int iz,
                           const double* g, int ox, int oy, int oz,
                           int c, int stride, double* kbar) {
    (void)ix;
    std::memset(kbar, 0, sizeof(double) * size_t(c) * c * c);
    for (int vx = 0; vx < c; ++vx)
        for (int vy = 0; vy < c; ++vy) {
            double* kb = kbar + (size_t(vx) * c + vy) * c;
            for (int x = 0; x < ox; ++x)
                for (int y = 0; y < oy; ++y) {
                    const double* grow = g + (size_t(x) * oy + y) * oz;
                    const double* irow =
                        in + (size_t(x * stride + vx) * iy + (y * stride + vy)) * iz;
                    for (int vz = 0; vz < c; ++vz) {
                        double acc = 0.0;
                        for (int z = 0; z < oz; ++z) acc += grow[z] * irow[z * stride + vz];
                        kb[vz] += acc;
                    }
                }
        }
}

// Scatter form: each nonzero input voxel p contributes
//   out(p - v) += in(p) * ker(v)  for every valid tap v.
// With the kernel z-rows reversed both accesses run forward in o_z.
static void reverse_z_rows(const double* k, int c, double* krev) {
    for (int vx = 0; vx < c; ++vx)
        for (int vy = 0; vy < c; ++vy) {
            const double* src = k + (size_t(vx) * c + vy) * c;
            double* dst = krev + (size_t(vx) * c + vy) * c;
            for (int vz = 0; vz < c; ++vz) dst[vz] = src[c - 1 - vz];
        }
}

void corr3d_sparse_scalar(const NzList& nz, const double* ker, int c,
                          double* out, int ox, int oy, int oz) {
    std::vector<double> krev(size_t(c) * c * c);
    reverse_z_rows(ker, c, krev.data());
    for (size_t i = 0; i < nz.size(); ++i) {
        int px = nz.x[i], py = nz.y[i], pz = nz.z[i];
        double a = nz.v[i];
        int vx0 = px - ox + 1 > 0 ? px - ox + 1 : 0, vx1 = px < c - 1 ? px : c - 1;
        int vy0 = py - oy + 1 > 0 ? py - oy + 1 : 0, vy1 = py < c - 1 ? py : c - 1;
        int z0 = pz - c + 1 > 0 ? pz - c + 1 : 0, z1 = pz < oz - 1 ? pz : oz - 1;
        int off = c - 1 - pz;  // krev column = off + o_z
        for (int vx = vx0; vx <= vx1; ++vx)
            for (int vy = vy0; vy <= vy1; ++vy) {
                double* orow = out + (size_t(px - vx) * oy + (py - vy)) * oz;
                const double* krow = krev.data() + (size_t(vx) * c + vy) * c + off;
                for (int z = z0; z <= z1; ++z) orow[z] += a * krow[z];
            }
    }
}

void corr3d_sparse_adjoint_scalar(const NzList& nz, const double* g,
                                  int ox, int oy, int oz, int c, double* kbar) {
    // accumulate with reversed z-rows, un-reverse once at the end
    std::vector<double> krev(size_t(c) * c * c, 0.0);
    for (size_t i = 0; i < nz.size(); ++i) {
        int px = nz.x[i], py = nz.y[i], pz = nz.z[i];
        double a = nz.v[i];
        int vx0 = px - ox + 1 > 0 ? px - ox + 1 : 0, vx1 = px < c - 1 ? px : c - 1;
        int vy0 = py - oy + 1 > 0 ? py - oy + 1 : 0, vy1 = py < c - 1 ? py : c - 1;
        int z0 = pz - c + 1 > 0 ? pz - c + 1 : 0, z1 = pz < oz - 1 ? pz : oz - 1;
        int off = c - 1 - pz;
        for (int vx = vx0; vx <= vx1; ++vx)
            for (int vy = vy0; vy <= vy1; ++vy) {
                const double* grow = g + (size_t(px - vx) * oy + (py - vy)) * oz;
                double* krow = krev.data() + (size_t(vx) * c + vy) * c + off;
                for (int z = z0; z <= z1; ++z) krow[z] += a * grow[z];
            }
    }
    for (int vx = 0; vx < c; ++vx)
        for (int vy = 0; vy < c; ++vy) {
            const double* src = krev.data() + (size_t(vx) * c + vy) * c;
            double* dst = kbar + (size_t(vx) * c + vy) * c;
            for (int vz = 0; vz < c; ++vz) dst[vz] = src[c - 1 - vz];
        }
}

// ============================================================================
// == AVX2 / FMA kernels
// ============================================================================

#ifdef LRI_HAVE_X86

__attribute__((target("avx2,fma")))
void axpy_avx2(double a, const double* x, double* y, size_t n) {
    __m256d va = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2,fma")))
double dot_avx2(const double* x, const double* y, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double lanes[4];
    _mm256_storeu_pd(lanes, acc);
    double r = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) r += x[i] * y[i];
    return r;
}

// Stride-1 dense forward: accumulate a full output z-row in registers while
// sweeping the kernel taps; input rows load unaligned at the tap offset.
__attribute__((target("avx2,fma")))
void corr3d_avx2(const double* in, int ix, int iy, int iz,
                 const double* ker, int c,
                 double* out, int ox, int oy, int oz) {
    (void)ix;
    for (int x = 0; x < ox; ++x)
        for (int y = 0; y < oy; ++y) {
            double* orow = out + (size_t(x) * oy + y) * oz;
            int z = 0;
            for (; z + 8 <= oz; z += 8) {
                __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
                for (int vx = 0; vx < c; ++vx)
                    for (int vy = 0; vy < c; ++vy) {
                        const double* irow =
                            in + (size_t(x + vx) * iy + (y + vy)) * iz + z;
                        const double* krow = ker + (size_t(vx) * c + vy) * c;
                        for (int vz = 0; vz < c; ++vz) {
                            __m256d kv = _mm256_set1_pd(krow[vz]);
                            a0 = _mm256_fmadd_pd(kv, _mm256_loadu_pd(irow + vz), a0);
                            a1 = _mm256_fmadd_pd(kv, _mm256_loadu_pd(irow + vz + 4), a1);
                        }
                    }
                _mm256_storeu_pd(orow + z, a0);
                _mm256_storeu_pd(orow + z + 4, a1);
            }
            for (; z + 4 <= oz; z += 4) {
                __m256d a0 = _mm256_setzero_pd();
                for (int vx = 0; vx < c; ++vx)
                    for (int vy = 0; vy < c; ++vy) {
                        const double* irow =
                            in + (size_t(x + vx) * iy + (y + vy)) * iz + z;
                        const double* krow = ker + (size_t(vx) * c + vy) * c;
                        for (int vz = 0; vz < c; ++vz)
                            a0 = _mm256_fmadd_pd(_mm256_set1_pd(krow[vz]),
                                                 _mm256_loadu_pd(irow + vz), a0);
                    }
                _mm256_storeu_pd(orow + z, a0);
            }
            for (; z < oz; ++z) {
                double acc = 0.0;
                for (int vx = 0; vx < c; ++vx)
                    for (int vy = 0; vy < c; ++vy) {
                        const double* irow =
                            in + (size_t(x + vx) * iy + (y + vy)) * iz + z;
                        const double* krow = ker + (size_t(vx) * c + vy) * c;
                        for (int vz = 0; vz < c; ++vz) acc += irow[vz] * krow[vz];
                    }
                orow[z] = acc;
            }
        }
}

__attribute__((target("avx2,fma")))
void corr3d_adjoint_avx2(const double* in, int ix, int iy, int iz,
                         const double* g, int ox, int oy, int oz,
                         int c, double* kbar) {
    (void)ix;
    std::memset(kbar, 0, sizeof(double) * size_t(c) * c * c);
    for (int vx = 0; vx < c; ++vx)
        for (int vy = 0; vy < c; ++vy) {
            double* kb = kbar + (size_t(vx) * c + vy) * c;
            for (int x = 0; x < ox; ++x)
                for (int y = 0; y < oy; ++y) {
                    const double* grow = g + (size_t(x) * oy + y) * oz;
                    const double* irow = in + (size_t(x + vx) * iy + (y + vy)) * iz;
                    for (int vz = 0; vz < c; ++vz)
                        kb[vz] += dot_avx2(grow, irow + vz, size_t(oz));
                }
        }
}

__attribute__((target("avx2,fma")))
void corr3d_sparse_avx2(const NzList& nz, const double* ker, int c,
                        double* out, int ox, int oy, int oz) {
    std::vector<double> krev(size_t(c) * c * c);
    reverse_z_rows(ker, c, krev.data());
    for (size_t i = 0; i < nz.size(); ++i) {
        int px = nz.x[i], py = nz.y[i], pz = nz.z[i];
        double a = nz.v[i];
        __m256d va = _mm256_set1_pd(a);
        int vx0 = px - ox + 1 > 0 ? px - ox + 1 : 0, vx1 = px < c - 1 ? px : c - 1;
        int vy0 = py - oy + 1 > 0 ? py - oy + 1 : 0, vy1 = py < c - 1 ? py : c - 1;
        int z0 = pz - c + 1 > 0 ? pz - c + 1 : 0, z1 = pz < oz - 1 ? pz : oz - 1;
        int off = c - 1 - pz, len = z1 - z0 + 1;
        for (int vx = vx0; vx <= vx1; ++vx)
            for (int vy = vy0; vy <= vy1; ++vy) {
                double* orow = out + (size_t(px - vx) * oy + (py - vy)) * oz + z0;
                const double* krow = krev.data() + (size_t(vx) * c + vy) * c + off + z0;
                int j = 0;
                for (; j + 4 <= len; j += 4) {
                    __m256d vo = _mm256_loadu_pd(orow + j);
                    vo = _mm256_fmadd_pd(va, _mm256_loadu_pd(krow + j), vo);
                    _mm256_storeu_pd(orow + j, vo);
                }
                for (; j < len; ++j) orow[j] += a * krow[j];
            }
    }
}

__attribute__((target("avx2,fma")))
void corr3d_sparse_adjoint_avx2(const NzList& nz, const double* g,
                                int ox, int oy, int oz, int c, double* kbar) {
    std::vector<double> krev(size_t(c) * c * c, 0.0);
    for (size_t i = 0; i < nz.size(); ++i) {
        int px = nz.x[i], py = nz.y[i], pz = nz.z[i];
        double a = nz.v[i];
        __m256d va = _mm256_set1_pd(a);
        int vx0 = px - ox + 1 > 0 ? px - ox + 1 : 0, vx1 = px < c - 1 ? px : c - 1;
        int vy0 = py - oy + 1 > 0 ? py - oy + 1 : 0, vy1 = py < c - 1 ? py : c - 1;
        int z0 = pz - c + 1 > 0 ? pz - c + 1 : 0, z1 = pz < oz - 1 ? pz : oz - 1;
        int off = c - 1 - pz, len = z1 - z0 + 1;
        for (int vx = vx0; vx <= vx1; ++vx)
            for (int vy = vy0; vy <= vy1; ++vy) {
                const double* grow = g + (size_t(px - vx) * oy + (py - vy)) * oz + z0;
                double* krow = krev.data() + (size_t(vx) * c + vy) * c + off + z0;
                int j = 0;
                for (; j + 4 <= len; j += 4) {
                    __m256d vk = _mm256_loadu_pd(krow + j);
                    vk = _mm256_fmadd_pd(va, _mm256_loadu_pd(grow + j), vk);
                    _mm256_storeu_pd(krow + j, vk);
                }
                for (; j < len; ++j) krow[j] += a * grow[j];
            }
    }
    for (int vx = 0; vx < c; ++vx)
        for (int vy = 0; vy < c; ++vy) {
            const double* src = krev.data() + (size_t(vx) * c + vy) * c;
            double* dst = kbar + (size_t(vx) * c + vy) * c;
            for (int vz = 0; vz < c; ++vz) dst[vz] = src[c - 1 - vz];
        }
}

#endif  // LRI_HAVE_X86

}  // namespace detail

// ============================================================================
// == dispatch
// ============================================================================

Level detect_cpu_level() {
#ifdef LRI_HAVE_X86
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return Level::avx2;
#endif
    return Level::scalar;
}

Level active_level() {
    static Level lv = [] {
        const char* env = std::getenv("LRI3D_SIMD");
        if (env) {
            std::string s(env);
            if (s == "scalar") return Level::scalar;
            if (s == "avx2") return detect_cpu_level();  // only if actually available
        }
        return detect_cpu_level();
    }();
    return lv;
}

const char* level_name(Level lv) {
    switch (lv) {
        case Level::avx2: return "avx2";
        default: return "scalar";
    }
}

void axpy(double a, const double* x, double* y, size_t n) {
#ifdef LRI_HAVE_X86
    if (active_level() == Level::avx2) return detail::axpy_avx2(a, x, y, n);
#endif
    detail::axpy_scalar(a, x, y, n);
}

double dot(const double* x, const double* y, size_t n) {
#ifdef LRI_HAVE_X86
    if (active_level() == Level::avx2) return detail::dot_avx2(x, y, n);
#endif
    return detail::dot_scalar(x, y, n);
}

void corr3d(const double* in, int ix, int iy, int iz,
            const double* ker, int c, int stride,
            double* out, int ox, int oy, int oz) {
#ifdef LRI_HAVE_X86
    if (stride == 1 && active_level() == Level::avx2)
        return detail::corr3d_avx2(in, ix, iy, iz, ker, c, out, ox, oy, oz);
#endif
    detail::corr3d_scalar(in, ix, iy, iz, ker, c, stride, out, ox, oy, oz);
}

void corr3d_adjoint(const double* in, int ix, int iy, int iz,
                    const double* g, int ox, int oy, int oz,
                    int c, int stride, double* kbar) {
#ifdef LRI_HAVE_X86
    if (stride == 1 && active_level() == Level::avx2)
        return detail::corr3d_adjoint_avx2(in, ix, iy, iz, g, ox, oy, oz, c, kbar);
#endif
    detail::corr3d_adjoint_scalar(in, ix, iy, iz, g, ox, oy, oz, c, stride, kbar);
}

void corr3d_sparse(const NzList& nz, const double* ker, int c,
                   double* out, int ox, int oy, int oz) {
#ifdef LRI_HAVE_X86
    if (active_level() == Level::avx2)
        return detail::corr3d_sparse_avx2(nz, ker, c, out, ox, oy, oz);
#endif
    detail::corr3d_sparse_scalar(nz, ker, c, out, ox, oy, oz);
}

void corr3d_sparse_adjoint(const NzList& nz, const double* g,
                           int ox, int oy, int oz, int c, double* kbar) {
#ifdef LRI_HAVE_X86
    if (active_level() == Level::avx2)
        return detail::corr3d_sparse_adjoint_avx2(nz, g, ox, oy, oz, c, kbar);
#endif
    detail::corr3d_sparse_adjoint_scalar(nz, g, ox, oy, oz, c, kbar);
}

}  // namespace lri::simd
