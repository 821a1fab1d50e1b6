#pragma once
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace lri {

// Dense 3D scalar grid. Layout is row-major with axis order (x,y,z):
// index(x,y,z) = (x*dy + y)*dz + z, i.e. z is the fastest axis.
struct Volume {
    int dx = 0, dy = 0, dz = 0;
    std::vector<double> data;

    Volume() = default;
    Volume(int x, int y, int z) : dx(x), dy(y), dz(z), data(size_t(x) * y * z, 0.0) {}

    size_t size() const { return data.size(); }
    size_t index(int x, int y, int z) const { return (size_t(x) * dy + y) * dz + z; }
    double& at(int x, int y, int z) { return data[index(x, y, z)]; }
    double at(int x, int y, int z) const { return data[index(x, y, z)]; }
    bool same_shape(const Volume& o) const { return dx == o.dx && dy == o.dy && dz == o.dz; }

    void fill(double v) { data.assign(data.size(), v); }
};

// Nonzero list of a volume (structure-of-arrays), used by the sparse
// convolution path. Built once per input volume; voxel order is the
// volume's linear order so results are reproducible.
struct NzList {
    std::vector<int32_t> x, y, z;
    std::vector<double> v;
    size_t size() const { return v.size(); }
};

inline NzList nonzeros(const Volume& vol) {
    NzList nz;
    for (int x = 0; x < vol.dx; ++x)
        for (int y = 0; y < vol.dy; ++y)
            for (int z = 0; z < vol.dz; ++z) {
                double val = vol.at(x, y, z);
                if (val != 0.0) {
                    nz.x.push_back(x);
                    nz.y.push_back(y);
                    nz.z.push_back(z);
                    nz.v.push_back(val);
                }
            }
    return nz;
}

inline double max_abs_diff(const Volume& a, const Volume& b) {
    assert(a.same_shape(b));
    double worst = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double d = a.data[i] - b.data[i];
        if (d < 0) d = -d;
        if (d > worst) worst = d;
    }
    return worst;
}

}  // namespace lri
