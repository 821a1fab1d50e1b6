#pragma once
#include <string>
#include <vector>

namespace lri {

// One oracle suite outcome; detail carries the measured worst-case numbers.
struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Wigner blocks steer sampled harmonics (max err < 1e-8 over degrees <= 6,
// 50 rotations, 200 sphere points) and are unitary (< 1e-10).
SuiteResult verify_wigner();

// 100 constrained coefficient/profile draws synthesize kernels whose
// imaginary residue is < 1e-12.
SuiteResult verify_realness();

// Isotropic kernels commute with every right-angle rotation; a random
// anisotropic kernel fails for at least one.
SuiteResult verify_isotropy();

// g_lri / s_lri / sse response maps commute with right-angle input
// rotations on random 16^3 volumes (relative Linf < 1e-12).
SuiteResult verify_equivariance();

// Per-rotation steered responses match convolution with the explicitly
// rotated synthesized kernel (relative L2 < 1e-10), as do the pooled maps.
SuiteResult verify_steering_vs_rotation();

// Central finite differences vs backward() for every parameter class of
// every variant (relative error < 1e-4 at the strongest-gradient index of
// each class).
SuiteResult verify_gradients();

// Reference parameter counts: s-lri-h 54, s-lri-hn 96, sse-h 40, sse-hn 82,
// z3 694, s-ri-hn 94 (N=3, M24, 2 filters, c=7, 2 classes).
SuiteResult verify_param_counts();

std::vector<SuiteResult> run_all_suites();
std::string format_suites(const std::vector<SuiteResult>& rs);
bool all_pass(const std::vector<SuiteResult>& rs);

}  // namespace lri
