#include "lri/dataset.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace lri {

std::pair<PatternSpec, PatternSpec> canonical_patterns() {
    int s = kPatternSide, c = s / 2;
    PatternSpec seg, cross;
    seg.mask = Volume(s, s, s);
    cross.mask = Volume(s, s, s);
    for (int x = 0; x < s; ++x) seg.mask.at(x, c, c) = 1.0;
    // both patterns binary: equal sup-norm, so pattern kind carries no
    // per-voxel intensity cue and only the shape separates the classes
    for (int x = 0; x < s; ++x) cross.mask.at(x, c, c) = 1.0;
    for (int y = 0; y < s; ++y) cross.mask.at(c, y, c) = 1.0;
    return {seg, cross};
}

// stamp'(v) = stamp(R^T (v - ctr) + ctr), trilinear, zero outside: the
// pattern actively rotated by R on its own grid
static Volume rotate_stamp(const Volume& stamp, const EulerTriple& rot) {
    int s = stamp.dx;
    double ctr = (s - 1) / 2.0;
    Mat3 rinv = mat_transpose(euler_to_matrix(rot));
    Volume out(s, s, s);
    for (int x = 0; x < s; ++x)
        for (int y = 0; y < s; ++y)
            for (int z = 0; z < s; ++z) {
                Vec3 d{x - ctr, y - ctr, z - ctr};
                Vec3 p = mat_apply(rinv, d);
                double sx = p.x + ctr, sy = p.y + ctr, sz = p.z + ctr;
                int ix = int(std::floor(sx)), iy = int(std::floor(sy)), iz = int(std::floor(sz));
                double fx = sx - ix, fy = sy - iy, fz = sz - iz;
                double acc = 0.0;
                for (int dx = 0; dx < 2; ++dx)
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dz = 0; dz < 2; ++dz) {
                            int px = ix + dx, py = iy + dy, pz = iz + dz;
                            if (px < 0 || px >= s || py < 0 || py >= s || pz < 0 || pz >= s)
                                continue;
                            acc += (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy) *
                                   (dz ? fz : 1.0 - fz) * stamp.at(px, py, pz);
                        }
                out.at(x, y, z) = acc;
            }
    return out;
}

SyntheticSample generate_sample(int cls, Rng& rng) {
    static const auto patterns = canonical_patterns();
    SyntheticSample s;
    s.label = cls;
    s.density = rng.uniform(0.1, 0.5);
    double ratio = double(kVolumeSide) / double(kPatternSide);
    int count = int(std::floor(s.density * ratio * ratio * ratio));
    double seg_frac = cls == 1 ? 0.3 : 0.7;
    int n_seg = int(std::lround(seg_frac * count));

    s.vol = Volume(kVolumeSide, kVolumeSide, kVolumeSide);
    int span = kVolumeSide - kPatternSide + 1;
    for (int i = 0; i < count; ++i) {
        Placement pl;
        pl.kind = i < n_seg ? 0 : 1;
        pl.rot.alpha = rng.uniform(0.0, 2.0 * M_PI);
        pl.rot.beta = std::acos(rng.uniform(-1.0, 1.0));
        pl.rot.gamma = rng.uniform(0.0, 2.0 * M_PI);
        for (int a = 0; a < 3; ++a) pl.corner[a] = int(rng.uniform_index(uint64_t(span)));

        const Volume& mask = pl.kind == 0 ? patterns.first.mask : patterns.second.mask;
        Volume stamp = rotate_stamp(mask, pl.rot);
        for (int x = 0; x < kPatternSide; ++x)
            for (int y = 0; y < kPatternSide; ++y)
                for (int z = 0; z < kPatternSide; ++z) {
                    double v = stamp.at(x, y, z);
                    double& dst = s.vol.at(pl.corner[0] + x, pl.corner[1] + y, pl.corner[2] + z);
                    if (v > dst) dst = v;
                }
        s.placements.push_back(pl);
    }
    return s;
}

Dataset generate_dataset(int n_train, int n_test, uint64_t seed) {
    Dataset ds;
    ds.seed = seed;
    ds.train.reserve(size_t(n_train));
    ds.test.reserve(size_t(n_test));
    for (int i = 0; i < n_train; ++i) {
        Rng rng(derive_stream(seed, 0, uint64_t(i)));
        ds.train.push_back(generate_sample(1 + (i % 2), rng));
    }
    for (int i = 0; i < n_test; ++i) {
        Rng rng(derive_stream(seed, 1, uint64_t(i)));
        ds.test.push_back(generate_sample(1 + (i % 2), rng));
    }
    return ds;
}

// ---------------------------------------------------------------------------
// on-disk format

static void put_u32(std::ostream& os, uint32_t v) {
    char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
                 char((v >> 24) & 0xff)};
    os.write(b, 4);
}

static uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

static void put_f32(std::ostream& os, float f) {
    uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(os, v);
}

static float get_f32(std::istream& is) {
    uint32_t v = get_u32(is);
    float f;
    std::memcpy(&f, &v, 4);
    return f;
}

static constexpr char kMagic[8] = {'L', 'R', 'I', '3', 'D', 'V', 'O', 'L'};
static constexpr uint32_t kBlobVersion = 1;

void write_volume_blob(const std::string& path, const std::vector<const Volume*>& vols,
                       const std::vector<uint8_t>& labels) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os.write(kMagic, 8);
    put_u32(os, kBlobVersion);
    put_u32(os, uint32_t(vols.size()));
    const Volume& v0 = *vols.at(0);
    put_u32(os, uint32_t(v0.dx));
    put_u32(os, uint32_t(v0.dy));
    put_u32(os, uint32_t(v0.dz));
    for (size_t i = 0; i < vols.size(); ++i) {
        os.put(char(labels[i]));
        for (double d : vols[i]->data) put_f32(os, float(d));
    }
}

static void read_volume_blob(const std::string& path, std::vector<Volume>& vols,
                             std::vector<uint8_t>& labels) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    char magic[8];
    is.read(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("bad magic in " + path);
    if (get_u32(is) != kBlobVersion) throw std::runtime_error("unsupported version in " + path);
    uint32_t count = get_u32(is);
    uint32_t dx = get_u32(is), dy = get_u32(is), dz = get_u32(is);
    vols.clear();
    labels.clear();
    for (uint32_t i = 0; i < count; ++i) {
        labels.push_back(uint8_t(is.get()));
        Volume v{int(dx), int(dy), int(dz)};
        for (double& d : v.data) d = double(get_f32(is));
        vols.push_back(std::move(v));
    }
    if (!is) throw std::runtime_error("truncated blob " + path);
}

static nlohmann::json sample_record(const SyntheticSample& s, int index) {
    nlohmann::json rec;
    rec["index"] = index;
    rec["label"] = s.label;
    rec["density"] = s.density;
    rec["count"] = s.placements.size();
    nlohmann::json pls = nlohmann::json::array();
    for (const auto& p : s.placements) {
        pls.push_back({{"kind", p.kind == 0 ? "segment" : "cross"},
                       {"corner", {p.corner[0], p.corner[1], p.corner[2]}},
                       {"euler", {p.rot.alpha, p.rot.beta, p.rot.gamma}}});
    }
    rec["placements"] = std::move(pls);
    return rec;
}

void write_dataset(const Dataset& ds, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto blob = [&](const std::vector<SyntheticSample>& split, const std::string& name) {
        std::vector<const Volume*> vols;
        std::vector<uint8_t> labels;
        for (const auto& s : split) {
            vols.push_back(&s.vol);
            labels.push_back(uint8_t(s.label));
        }
        write_volume_blob(out_dir + "/" + name + ".bin", vols, labels);
    };
    blob(ds.train, "train");
    blob(ds.test, "test");

    nlohmann::json man;
    man["schema_version"] = 1;
    man["seed"] = ds.seed;
    man["n_train"] = ds.train.size();
    man["n_test"] = ds.test.size();
    man["dims"] = {kVolumeSide, kVolumeSide, kVolumeSide};
    man["normalization"] = "none";  // raw generated values, unit segment intensity
    for (const char* split : {"train", "test"}) {
        const auto& v = std::string(split) == "train" ? ds.train : ds.test;
        nlohmann::json arr = nlohmann::json::array();
        for (size_t i = 0; i < v.size(); ++i) arr.push_back(sample_record(v[i], int(i)));
        man[split] = std::move(arr);
    }
    std::ofstream os(out_dir + "/manifest.json");
    if (!os) throw std::runtime_error("cannot write manifest in " + out_dir);
    os << man.dump(2) << "\n";
}

Dataset read_dataset(const std::string& dir) {
    Dataset ds;
    std::ifstream ms(dir + "/manifest.json");
    if (ms) {
        nlohmann::json man = nlohmann::json::parse(ms);
        ds.seed = man.value("seed", uint64_t(0));
    }
    auto load = [&](std::vector<SyntheticSample>& split, const std::string& name) {
        std::vector<Volume> vols;
        std::vector<uint8_t> labels;
        read_volume_blob(dir + "/" + name + ".bin", vols, labels);
        for (size_t i = 0; i < vols.size(); ++i) {
            SyntheticSample s;
            s.vol = std::move(vols[i]);
            s.label = labels[i];
            split.push_back(std::move(s));
        }
    };
    load(ds.train, "train");
    load(ds.test, "test");
    return ds;
}

}  // namespace lri
