#pragma once
#include <vector>

#include "lri/harmonics.hpp"
#include "lri/volume.hpp"

namespace lri {

// n_r = ceil(((c-1)/2) * sqrt(3)) + 1; rejects even c
int radial_param_count(int c);

// spherical Nyquist bound floor(pi*c/4)
int max_degree(int c);

// piecewise-linear at integer radii 0..n_r-1; clamps to the last sample
// beyond the tail so corner voxels stay trainable
double radial_interpolate(const std::vector<double>& h, double rho);

// linear index of the stored (n, m>=0) pair
inline int sh_pair_index(int n, int m) { return n * (n + 1) / 2 + m; }
inline int sh_pair_count(int N) { return (N + 1) * (N + 2) / 2; }

// Per-filter expansion coefficients, parameterized by real DOF so the
// realness constraint C_n[-m] = (-1)^m conj(C_n[m]) holds structurally.
// DOF layout per degree: [C_n[0], Re C_n[1], Im C_n[1], Re C_n[2], ...].
struct HarmonicCoefficients {
    int N = 0;
    std::vector<std::vector<double>> dof;  // [n][2n+1]

    static HarmonicCoefficients zeros(int N);
    cplx coeff(int n, int m) const;  // any m in [-n, n]
    void set_coeff(int n, int m, cplx v);  // m >= 0
};

// Per-filter radial profiles; `shared` ties all degrees to one vector (the
// the "-h" variants; "-h_n" uses one vector per degree).
struct RadialProfileSet {
    int c = 7;
    int N = 0;
    bool shared = false;
    std::vector<std::vector<double>> h;  // shared ? 1 : N+1 vectors of n_r

    static RadialProfileSet ones(int c, int N, bool shared);
    const std::vector<double>& profile(int n) const { return h[shared ? 0 : size_t(n)]; }
    std::vector<double>& profile(int n) { return h[shared ? 0 : size_t(n)]; }
};

struct VoxelKernel {
    enum class Tag { synthesized, rotated, free };
    Volume v;
    Tag tag = Tag::free;
    int side() const { return v.dx; }
};

// Fixed per-(n, m>=0, radial-bin) basis grids on the c^3 voxel cube with the
// per-degree normalization folded in: the basis kernel for profile h_n is
// sum_k h_n[k] * grid(n,m,k). The per-degree scale makes the RMS discrete L2
// norm over each degree's 2n+1 basis kernels equal 1 for the all-ones
// profile (a single per-degree constant is required for steering to commute
// with synthesis). Built once, then read-only.
class BasisKernelCache {
  public:
    BasisKernelCache(int c, int N);

    int c() const { return c_; }
    int N() const { return N_; }
    int nr() const { return nr_; }
    size_t grid_size() const { return size_t(c_) * c_ * c_; }
    double degree_scale(int n) const { return scale_[size_t(n)]; }

    // c^3 grid of the (n, m, k) basis slice; im() is null for m == 0
    const double* re(int n, int m, int k) const;
    const double* im(int n, int m, int k) const;

    // basis kernel h_n * Y_{n,m} for a given profile; out_im ignored for m == 0
    void basis_kernel(int n, int m, const std::vector<double>& hn,
                      double* out_re, double* out_im) const;

    static const BasisKernelCache& get(int c, int N);  // memoized

  private:
    int c_, N_, nr_;
    std::vector<double> scale_;
    // flat storage: slab(pair, k) is one c^3 grid
    std::vector<std::vector<double>> re_, im_;  // [pair * nr + k]
};

// k(v) = sum_n radial(h_n,|v-ctr|) * lambda_n * sum_m C_n[m] Y_{n,m}(dir);
// center voxel takes only the n=0 term. The complex sum over the full
// spectrum is accumulated and its imaginary residue (reported through
// *imag_residue) discarded.
VoxelKernel synthesize_kernel(const HarmonicCoefficients& C, const RadialProfileSet& H,
                              double* imag_residue = nullptr);

// Steered coefficients: synthesize_kernel(steer_coefficients(C,R), H) equals
// rotate_voxel_kernel(synthesize_kernel(C,H), R) (exactly for right-angle R).
HarmonicCoefficients steer_coefficients(const HarmonicCoefficients& C, const EulerTriple& rot);

// out(v) = k(R(v - ctr) + ctr); exact voxel permutation for signed-
// permutation rotations, trilinear resampling (zero outside) otherwise.
VoxelKernel rotate_voxel_kernel(const VoxelKernel& k, const EulerTriple& rot);

}  // namespace lri
