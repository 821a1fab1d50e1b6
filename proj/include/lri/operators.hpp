#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "lri/kernels.hpp"
#include "lri/rotations.hpp"
#include "lri/volume.hpp"

namespace lri {

// Valid (no padding) cross-correlation; output dims floor((d_i - c)/stride)+1.
Volume conv3d(const Volume& I, const VoxelKernel& k, int stride = 1);
Volume conv3d(const Volume& I, const Volume& kernel, int stride = 1);

// Per-rotation response maps from one filter.
struct OrientationStack {
    std::vector<Volume> maps;
};

// Per-voxel max of |maps| plus winning rotation index (ties: lowest index).
std::pair<Volume, std::vector<uint8_t>> orientation_max_pool(const OrientationStack& st);

// Rotated-kernel operator: max_R |I * k(R.)|.
Volume g_lri(const Volume& I, const VoxelKernel& k, const RotationSet& B, int stride = 1);

// Complex base responses I * (h_n Y_{n,m}), stored for m >= 0 only
// (conjugate symmetry recovers m < 0). Index via sh_pair_index(n,m);
// im entries for m == 0 are empty volumes.
struct BaseResponses {
    int N = 0;
    std::vector<Volume> re, im;
};

BaseResponses s_lri_base_responses(const Volume& I, const RadialProfileSet& H, int N,
                                   int stride = 1, const NzList* nz = nullptr);

// Real recombination weights for one steered coefficient set: maps the
// stored (m >= 0) responses to the real response
//   s(x) = sum_t wre[t]*re_t(x) + wim[t]*im_t(x).
struct SteerWeights {
    std::vector<double> wre, wim;  // sh_pair_count(N) each
};
SteerWeights steer_weights(const std::vector<std::vector<cplx>>& csteer_full, int N);

// Full-spectrum steered coefficients per degree for one rotation.
std::vector<std::vector<cplx>> steer_full(const HarmonicCoefficients& C,
                                          const std::vector<WignerBlock>& blocks);

void steered_combination(const BaseResponses& resp, const SteerWeights& w, Volume& out);

// Steerable operator: max over B of |steered response|.
Volume s_lri(const Volume& I, const HarmonicCoefficients& C, const RadialProfileSet& H,
             const RotationSet& B, int stride = 1);

// Solid spherical energy map of one degree: sum_m |I * h_n Y_{n,m}|^2.
Volume sse(const Volume& I, const RadialProfileSet& H, int degree, int stride = 1);

// Shared reduction of the global-RI variants: per-rotation spatial mean of
// |response|, then max over rotations. Returns the feature and the argmax.
std::pair<double, int> global_ri_reduce(const OrientationStack& st);
double g_ri_feature(const Volume& I, const VoxelKernel& k, const RotationSet& B, int stride = 1);
double s_ri_feature(const Volume& I, const HarmonicCoefficients& C, const RadialProfileSet& H,
                    const RotationSet& B, int stride = 1);

// Exact rotation of a cubic volume about its box center by a
// signed-permutation matrix (integer index arithmetic, no interpolation).
Volume rotate_volume_exact(const Volume& v, const Mat3& signed_perm);

}  // namespace lri
