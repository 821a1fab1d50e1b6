#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "lri/dataset.hpp"
#include "lri/kernels.hpp"
#include "lri/operators.hpp"
#include "lri/rng.hpp"
#include "lri/rotations.hpp"
#include "lri/volume.hpp"

namespace lri {

// Single-layer classifier: operator responses -> +bias -> ReLU -> GAP ->
// [optional hidden FC+ReLU] -> FC -> softmax cross-entropy. The global-RI
// variants replace the local orientation pooling + GAP by a spatial-mean /
// rotation-max reduction that yields one scalar per filter.
enum class Variant { z3, z3_augm, g_lri, g_ri, s_lri, s_ri, sse };

bool variant_is_steerable(Variant v);   // s_lri, s_ri, sse
bool variant_is_voxel(Variant v);       // z3, z3_augm, g_lri, g_ri
bool variant_uses_rotations(Variant v); // g_lri, g_ri, s_lri, s_ri
bool variant_is_global_ri(Variant v);   // g_ri, s_ri
bool variant_has_bias(Variant v);       // all but s_ri

struct ModelConfig {
    Variant variant = Variant::s_lri;
    bool shared_h = false;  // tie radial profiles across degrees ("-h" vs "-h_n")
    int N = 3;
    std::string rot_label = "M24";
    int n_f = 2;
    int c = 7;
    int stride = 1;
    int n_c = 2;
    int hidden = 0;  // 0 = logits directly from the pooled features

    // FC input width: one channel per filter, except SSE's one per
    // filter-degree pair.
    int channels() const;
};

std::string variant_name(const ModelConfig& cfg);
// Parses the canonical names (z3, z3-augm, g-lri, g-ri, s-lri-h, s-lri-hn,
// s-ri-h, s-ri-hn, sse-h, sse-hn), setting variant and shared_h.
ModelConfig parse_model_name(const std::string& name);

// Throws std::invalid_argument with a human-readable reason; the degree
// check message cites the spherical Nyquist bound floor(pi*c/4).
void validate_config(const ModelConfig& cfg);

long count_parameters(const ModelConfig& cfg);

// Flat parameter vector layout. Per filter, in order: expansion-coefficient
// DOF (degree ascending, [C_n[0], Re C_n[1], Im C_n[1], ...]) for the
// steerable non-SSE variants, then radial profiles (degree ascending) or the
// raw c^3 voxel kernel. After all filters: per-channel biases (absent for
// S-RI), then the FC stage (W [out][in] row-major, b; twice when hidden>0).
struct ThetaLayout {
    int c_dof = 0, h_len = 0, k_len = 0;
    int per_filter = 0;
    int n_bias = 0;
    int n_feat = 0;
    size_t bias_off = 0, fc_off = 0, total = 0;

    size_t filter_off(int i) const { return size_t(i) * per_filter; }
};
ThetaLayout theta_layout(const ModelConfig& cfg);

struct ParameterState {
    std::vector<double> theta;
    std::vector<double> m, v;  // Adam moments
    long step = 0;
};

struct TrainConfig {
    int batch = 8;
    int iterations = 5000;
    double lr = 1e-3;
    double beta1 = 0.99;
    double beta2 = 0.9999;
    double eps = 1e-8;
    uint64_t seed = 1;
    bool augment = false;  // per-presentation random right-angle rotation
    int eval_every = 1000;
};

// Immutable per-config tables shared by every forward/backward call.
struct ModelContext {
    ModelConfig cfg;
    RotationSet rots;                              // rotation variants
    std::vector<std::vector<WignerBlock>> blocks;  // [rotation][degree]
    const BasisKernelCache* basis = nullptr;       // steerable variants
    std::vector<std::vector<int32_t>> kperm;       // [rotation][c^3] gather
    RotationSet aug;                               // M24, for augmentation
};
ModelContext build_context(const ModelConfig& cfg);

struct FilterCache {
    BaseResponses resp;           // steerable variants
    Volume winner;                // signed value at the per-voxel argmax
    std::vector<uint8_t> argmax;  // per-voxel winning rotation
    int arg_rot = 0;              // global-RI winning rotation
    Volume ri_map;                // its signed response map
    double ri_pre = 0;            // global-RI pre-activation scalar
    std::vector<Volume> relu_in;  // per channel: response + bias
};

struct ForwardCache {
    const Volume* I = nullptr;
    const NzList* nz = nullptr;
    const std::vector<double>* theta = nullptr;
    std::vector<FilterCache> filt;
    std::vector<HarmonicCoefficients> C;        // per filter
    std::vector<RadialProfileSet> H;            // per filter
    std::vector<std::vector<SteerWeights>> sw;  // [filter][rotation]
    std::vector<double> feat, hid_pre, hid_act, logits;
};

ParameterState init_parameters(const ModelConfig& cfg, uint64_t seed);

// Pure function of (I, theta); cache, when non-null, receives everything
// backward needs. nz may be null (dense path) and must describe I.
std::vector<double> forward(const Volume& I, const NzList* nz, const std::vector<double>& theta,
                            const ModelContext& ctx, ForwardCache* cache = nullptr);

// Gradient of sum_o dlogits[o] * logits[o] w.r.t. theta. The cache's I/nz
// pointers must still be alive.
std::vector<double> backward(const ForwardCache& cache, const std::vector<double>& dlogits,
                             const ModelContext& ctx);

void adam_step(ParameterState& st, const std::vector<double>& grad, const TrainConfig& tcfg);

struct SoftmaxLoss {
    double loss = 0;
    std::vector<double> dlogits;
    int pred = 0;  // argmax class index
};
SoftmaxLoss softmax_ce(const std::vector<double>& logits, int label_index);

struct MetricsRow {
    long iteration = 0;
    double train_loss = 0, train_acc = 0, test_acc = 0, wall_ms = 0;
};

struct EvalResult {
    double loss = 0, acc = 0;
};
EvalResult evaluate(const std::vector<SyntheticSample>& split, const std::vector<double>& theta,
                    const ModelContext& ctx);

struct TrainResult {
    ParameterState state;
    std::vector<MetricsRow> trace;
};

TrainResult train(const Dataset& ds, const ModelConfig& cfg, const TrainConfig& tcfg);

void write_checkpoint(const std::string& path, const ModelConfig& cfg, const ParameterState& st,
                      uint64_t seed);
struct Checkpoint {
    ModelConfig cfg;
    ParameterState state;
    uint64_t seed = 0;
};
Checkpoint read_checkpoint(const std::string& path);

}  // namespace lri
