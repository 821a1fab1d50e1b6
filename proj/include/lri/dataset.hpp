#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "lri/harmonics.hpp"
#include "lri/rng.hpp"
#include "lri/volume.hpp"

namespace lri {

// Canonical 7^3 patterns: a 7-voxel axis-aligned binary segment and a planar
// 13-voxel binary cross (equal sup-norm, so intensity statistics carry no
// pattern cue).
struct PatternSpec {
    Volume mask;  // 7^3
    double intensity = 1.0;
};
std::pair<PatternSpec, PatternSpec> canonical_patterns();  // (segment, cross)

struct Placement {
    int kind = 0;  // 0 = segment, 1 = cross
    int corner[3] = {0, 0, 0};
    EulerTriple rot;
};

struct SyntheticSample {
    Volume vol;     // s_v^3 (32^3)
    int label = 1;  // class in {1,2}
    double density = 0.0;
    std::vector<Placement> placements;
};

inline constexpr int kVolumeSide = 32;
inline constexpr int kPatternSide = 7;

// One sample from its own RNG stream: density U[0.1,0.5], count
// floor(d*(32/7)^3), class 1 = 30% segments / 70% crosses (class 2 reversed,
// segment count = round(p*total)), uniform SO(3) orientations
// (alpha,gamma ~ U[0,2pi), cos beta ~ U[-1,1]), trilinear-resampled stamps
// placed fully inside, overlaps combined by per-voxel max.
SyntheticSample generate_sample(int cls, Rng& rng);

struct Dataset {
    std::vector<SyntheticSample> train, test;
    uint64_t seed = 0;
};

// Per-sample streams derived from (seed, split, index); sample i has class
// 1 + (i % 2) so splits stay balanced.
Dataset generate_dataset(int n_train, int n_test, uint64_t seed);

// On-disk layout: manifest JSON + one blob per split
// ("LRI3DVOL", u32 version, u32 count, u32 dims[3], then per sample a u8
// label and dims^3 little-endian f32).
void write_dataset(const Dataset& ds, const std::string& out_dir);
Dataset read_dataset(const std::string& dir);  // from the two blobs + manifest seed

void write_volume_blob(const std::string& path, const std::vector<const Volume*>& vols,
                       const std::vector<uint8_t>& labels);

}  // namespace lri
