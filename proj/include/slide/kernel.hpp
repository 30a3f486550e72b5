#pragma once

#include "slide/stack.hpp"
#include "slide/types.hpp"

#include <cstdint>
#include <vector>

namespace slide {

// Composite multi-layer RBF kernel parameters: one width per layer plus the
// global width, which stays at 1 unless explicitly overridden.
struct KernelParams {
    double sigma = 1.0;
    Vector sigmas; // sigma_0..sigma_l, all > 0

    void validate() const;
};

// Per-layer squared Euclidean distances between two stacked representations.
struct LayerDistances {
    Vector d2;
};

// d2(t) = ||h^t_i - h^t_j||^2 for one pair of samples given as per-layer
// column vectors.
LayerDistances layer_sq_distances(const std::vector<Vector>& reps_i,
                                  const std::vector<Vector>& reps_j);

// k = exp(-(1/sigma^2) * sum_t d2_t / sigma_t^2), in (0, 1].
double composite_kernel(const LayerDistances& dists, const KernelParams& params);

// Analytic dk/dsigma_t = k * 2 d2_t / (sigma^2 sigma_t^3).
Vector kernel_width_gradient(const LayerDistances& dists, const KernelParams& params);

// Per-layer pairwise squared-distance matrices between the columns of a and
// b: result[t](i, j) = ||h^t_{a,i} - h^t_{b,j}||^2. Distances are formed from
// explicit column differences so self-distances are exactly zero.
std::vector<Matrix> pairwise_sq_distances(const LayerOutputs& a, const LayerOutputs& b);

// Gram matrix from precomputed per-layer distance matrices.
Matrix gram_from_distances(const std::vector<Matrix>& d2, const KernelParams& params);

// G(i, j) = composite kernel between column i of a and column j of b. The
// self-Gram (a and b the same representations) is symmetric with unit
// diagonal.
Matrix gram(const LayerOutputs& a, const LayerOutputs& b, const KernelParams& params);

// Median-heuristic widths: sigma_t = median pairwise distance at layer t over
// a seeded subsample of at most `cap` points. Degenerate layers (median 0)
// fall back to width 1.
Vector median_widths(const LayerOutputs& reps, std::uint64_t seed, Index cap = 500);

// Gradient-descent width learning over log sigma_t with backtracking line
// search; criterion is the radius-margin product R^2 ||w||^2 of an SVM
// retrained at each trial point.
struct WidthLearnConfig {
    double c = 1.0;         // SVM box constraint inside the criterion
    double svm_tol = 1e-3;
    int max_iterations = 50;
    double initial_step = 0.1;
    int max_halvings = 20;
    double rel_tol = 1e-4;  // relative-improvement stopping tolerance
};

struct WidthLearnTraceRow {
    int iteration = 0;      // 0 is the starting point
    double criterion = 0.0;
    Vector sigmas;
};

struct WidthLearnResult {
    KernelParams params;
    std::vector<WidthLearnTraceRow> trace; // accepted iterations only
};

// labels must be -1/+1 with both classes present. Never returns a criterion
// above its starting value; the trace is non-increasing by construction.
WidthLearnResult learn_widths(const LayerOutputs& reps, const std::vector<int>& labels,
                              const KernelParams& params0, const WidthLearnConfig& cfg);

// Radius-margin criterion R^2 ||w||^2 at fixed params (exposed so callers can
// compare configurations and tests can cross-check by finite differences).
double radius_margin_criterion(const LayerOutputs& reps, const std::vector<int>& labels,
                               const KernelParams& params, const WidthLearnConfig& cfg);

// Analytic d(criterion)/d(sigma_t) via the envelope theorem (dual variables
// held at their optima). The finite-difference fallback over
// radius_margin_criterion cross-checks this.
Vector radius_margin_gradient(const LayerOutputs& reps, const std::vector<int>& labels,
                              const KernelParams& params, const WidthLearnConfig& cfg);

} // namespace slide
