#pragma once
#include <string>
#include <vector>

#include "lri/harmonics.hpp"

namespace lri {

// Finite rotation sets B approximating SO(3): M = 1, 4, 24, 72.
struct RotationSet {
    std::string label;                 // "M1" | "M4" | "M24" | "M72"
    std::vector<EulerTriple> triples;  // size M
    std::vector<Mat3> matrices;        // euler_to_matrix, snapped to exact
                                       // signed permutations where applicable
    size_t size() const { return triples.size(); }
};

// Iterative octahedron face subdivision. Level 0: the 6 vertices; each level
// adds normalized edge midpoints (level 1: 18 points). Order is the
// deterministic construction order (vertices first, midpoints by first use).
std::vector<Vec3> octahedron_points(int level);

// (alpha, beta) such that Rz(alpha) Ry(beta) maps +z onto p; alpha = 0 at the
// poles where it is degenerate.
std::pair<double, double> point_to_alpha_beta(const Vec3& p);

RotationSet build_rotation_set(const std::string& label);

// True if every entry of r is within tol of {-1,0,1} with exactly one
// nonzero per row and column.
bool is_signed_permutation(const Mat3& r, double tol = 1e-9);

std::string rotation_set_to_json(const RotationSet& set);

}  // namespace lri
