#include "lri/rotations.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace lri {

std::vector<Vec3> octahedron_points(int level) {
    if (level < 0 || level > 3) throw std::domain_error("octahedron_points: level in [0,3]");
    std::vector<Vec3> pts = {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}, {0, 0, -1}};
    // faces of the octahedron over the vertex order above
    std::vector<std::array<int, 3>> faces = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1},
                                             {5, 2, 1}, {5, 3, 2}, {5, 4, 3}, {5, 1, 4}};
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Vec3 p{pts[a].x + pts[b].x, pts[a].y + pts[b].y, pts[a].z + pts[b].z};
            double n = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
            pts.push_back({p.x / n, p.y / n, p.z / n});
            int idx = int(pts.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (auto [a, b, c] : faces) {
            int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
            next.push_back({a, ab, ca});
            next.push_back({ab, b, bc});
            next.push_back({ca, bc, c});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    return pts;
}

std::pair<double, double> point_to_alpha_beta(const Vec3& p) {
    double z = std::min(1.0, std::max(-1.0, p.z));
    double beta = std::acos(z);
    double alpha = 0.0;
    if (std::abs(p.x) > 1e-14 || std::abs(p.y) > 1e-14) {
        alpha = std::atan2(p.y, p.x);
        if (alpha < 0) alpha += 2.0 * M_PI;
    }
    return {alpha, beta};
}

bool is_signed_permutation(const Mat3& r, double tol) {
    for (int i = 0; i < 3; ++i) {
        int nz_row = 0;
        for (int j = 0; j < 3; ++j) {
            double v = r.m[i][j];
            double snapped = std::round(v);
            if (std::abs(v - snapped) > tol || std::abs(snapped) > 1.0) return false;
            if (snapped != 0.0) ++nz_row;
        }
        if (nz_row != 1) return false;
    }
    for (int j = 0; j < 3; ++j) {
        int nz_col = 0;
        for (int i = 0; i < 3; ++i)
            if (std::round(r.m[i][j]) != 0.0) ++nz_col;
        if (nz_col != 1) return false;
    }
    return true;
}

static Mat3 snap_if_signed_permutation(const Mat3& r) {
    if (!is_signed_permutation(r)) return r;
    Mat3 s;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s.m[i][j] = std::round(r.m[i][j]);
    return s;
}

RotationSet build_rotation_set(const std::string& label) {
    RotationSet set;
    set.label = label;
    if (label == "M1") {
        set.triples.push_back({0, 0, 0});
    } else if (label == "M4") {
        // Klein four-group: identity and the half-turns about z, y, x
        set.triples.push_back({0, 0, 0});
        set.triples.push_back({M_PI, 0, 0});
        set.triples.push_back({0, M_PI, 0});
        set.triples.push_back({M_PI, M_PI, 0});
    } else if (label == "M24" || label == "M72") {
        int level = label == "M24" ? 0 : 1;
        for (const Vec3& p : octahedron_points(level)) {
            auto [alpha, beta] = point_to_alpha_beta(p);
            for (int k = 0; k < 4; ++k)
                set.triples.push_back({alpha, beta, k * M_PI / 2.0});
        }
    } else {
        throw std::invalid_argument("unknown rotation set label: " + label);
    }
    set.matrices.reserve(set.triples.size());
    for (const auto& t : set.triples)
        set.matrices.push_back(snap_if_signed_permutation(euler_to_matrix(t)));
    return set;
}

std::string rotation_set_to_json(const RotationSet& set) {
    std::ostringstream os;
    os.precision(17);
    os << "{\"label\":\"" << set.label << "\",\"triples\":[";
    for (size_t i = 0; i < set.triples.size(); ++i) {
        const auto& t = set.triples[i];
        os << (i ? "," : "") << "[" << t.alpha << "," << t.beta << "," << t.gamma << "]";
    }
    os << "]}";
    return os.str();
}

}  // namespace lri
