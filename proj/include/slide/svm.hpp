#pragma once

#include "slide/kernel.hpp"
#include "slide/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace slide {

// Dual SVM trained on a precomputed Gram matrix; never sees raw features.
struct BinarySvm {
    Vector alphas;                 // dual coefficients, 0 <= alpha_i <= c
    double bias = 0.0;
    double c = 1.0;
    std::vector<int> labels;       // -1/+1 per training sample
    std::vector<int> sv_indices;   // indices with alpha > 0
    std::array<int, 2> label_map{-1, 1}; // class ids mapped to (-1, +1)
};

// Sequential minimal optimization with maximal-violating-pair selection.
// Deterministic: pair selection scans ascending indices and keeps the first
// of any tied candidates. Throws NonConvergenceError past the iteration cap.
// objective_trace, when given, receives the dual objective after every
// update (non-decreasing by construction).
BinarySvm smo_train(const Matrix& gram, const std::vector<int>& labels, double c,
                    double tol = 1e-3, std::vector<double>* objective_trace = nullptr);

// Decision value sum_i alpha_i y_i k_row(i) + bias for one evaluation point.
double decision(const BinarySvm& model, const Vector& k_row);

// Dual objective sum(alpha) - 1/2 alpha^T (yy^T .* K) alpha.
double dual_objective(const BinarySvm& model, const Matrix& gram);

// Largest KKT residual over all training samples (0 when optimal).
double kkt_violation(const BinarySvm& model, const Matrix& gram);

// One-vs-rest multiclass wrapper: one machine per distinct class id.
struct OvrModel {
    std::vector<BinarySvm> machines;
    std::vector<int> classes; // ascending class ids, one per machine
};

OvrModel train_ovr(const Matrix& gram, const std::vector<int>& class_labels,
                   double c, double tol = 1e-3);

// k_rows(i, j) = kernel between evaluation point i and training sample j.
// Prediction is the argmax of the per-class decision scores; ties go to the
// lowest class id.
std::vector<int> predict_ovr(const OvrModel& model, const Matrix& k_rows);

// Per-class decision scores (rows: evaluation points, cols: classes).
Matrix decision_ovr(const OvrModel& model, const Matrix& k_rows);

// Grid cross-validation of a shared kernel width and box constraint: every
// sigma in width_grid is applied to all layers. Folds are seeded and
// stratified by class; ties prefer larger sigma, then smaller c.
struct WidthSelection {
    KernelParams params;
    double c = 1.0;
    double mean_accuracy = 0.0;
};

WidthSelection cross_validate_widths(const LayerOutputs& reps,
                                     const std::vector<int>& labels,
                                     const std::vector<double>& width_grid,
                                     const std::vector<double>& c_grid, int folds,
                                     std::uint64_t seed);

} // namespace slide
