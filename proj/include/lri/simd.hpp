#pragma once
#include <cstddef>

#include "lri/volume.hpp"

// Runtime-dispatched compute kernels for the hot loops: dense and
// sparse-input valid cross-correlation plus their kernel adjoints, and the
// axpy/dot primitives they are built from. Scalar reference versions define
// the semantics; the AVX2/FMA versions must agree with them to rounding
// (covered by the equivalence tests). Selection: LRI3D_SIMD=scalar|avx2|auto.
namespace lri::simd {

enum class Level { scalar, avx2 };

Level detect_cpu_level();
Level active_level();  // cached; env override applied once
const char* level_name(Level lv);

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, size_t n);
// sum_i x[i] * y[i]
double dot(const double* x, const double* y, size_t n);

// out(o) = sum_v in(o*stride + v) * ker(v), valid region, (x,y,z) layout
void corr3d(const double* in, int ix, int iy, int iz,
            const double* ker, int c, int stride,
            double* out, int ox, int oy, int oz);

// kbar(v) = sum_o g(o) * in(o*stride + v)
void corr3d_adjoint(const double* in, int ix, int iy, int iz,
                    const double* g, int ox, int oy, int oz,
                    int c, int stride, double* kbar);

// Sparse-input forward/adjoint, stride 1 only: driven by the input's
// nonzero list instead of the output grid.
void corr3d_sparse(const NzList& nz, const double* ker, int c,
                   double* out, int ox, int oy, int oz);
void corr3d_sparse_adjoint(const NzList& nz, const double* g,
                           int ox, int oy, int oz, int c, double* kbar);

// Per-level entry points, exposed for the equivalence tests.
namespace detail {
void axpy_scalar(double a, const double* x, double* y, size_t n);
double dot_scalar(const double* x, const double* y, size_t n);
void corr3d_scalar(const double* in, int ix, int iy, int iz,
                   const double* ker, int c, int stride,
                   double* out, int ox, int oy, int oz);
void corr3d_adjoint_scalar(const double* in, int ix, int iy, int iz,
                           const double* g, int ox, int oy, int oz,
                           int c, int stride, double* kbar);
void corr3d_sparse_scalar(const NzList& nz, const double* ker, int c,
                          double* out, int ox, int oy, int oz);
void corr3d_sparse_adjoint_scalar(const NzList& nz, const double* g,
                                  int ox, int oy, int oz, int c, double* kbar);
#if defined(__x86_64__) || defined(_M_X64)
void axpy_avx2(double a, const double* x, double* y, size_t n);
double dot_avx2(const double* x, const double* y, size_t n);
void corr3d_avx2(const double* in, int ix, int iy, int iz,
                 const double* ker, int c,
                 double* out, int ox, int oy, int oz);  // stride 1
void corr3d_adjoint_avx2(const double* in, int ix, int iy, int iz,
                         const double* g, int ox, int oy, int oz,
                         int c, double* kbar);  // stride 1
void corr3d_sparse_avx2(const NzList& nz, const double* ker, int c,
                        double* out, int ox, int oy, int oz);
void corr3d_sparse_adjoint_avx2(const NzList& nz, const double* g,
                                int ox, int oy, int oz, int c, double* kbar);
#endif
}  // namespace detail

}  // namespace lri::simd
