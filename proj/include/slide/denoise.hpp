#pragma once

#include "slide/types.hpp"

namespace slide {

// Default ridge term added to the expected scatter before the solve.
inline constexpr double kDefaultEps = 1e-5;

// Per-feature survival probabilities under zeroing corruption: q has length
// d+1, entries 1..d equal p, and the trailing bias entry is exactly 1 (the
// constant feature is never corrupted).
struct SurvivalVector {
    Vector q;
    double p = 1.0;
};

// Expected moment matrices of the corrupted scatter.
//   eq      = E[Q]: eq(a,b) = S(a,b) q(a) q(b) off-diagonal, S(a,a) q(a) on it
//   ep      = E[P]: ep(a,b) = S(a,b) q(b)
//   scatter = S = X_aug X_aug^T, the uncorrupted scatter both derive from
struct MomentPair {
    Matrix eq;
    Matrix ep;
    Matrix scatter;
};

// One learned linear denoising map, d x (d+1); the last column is the bias.
struct DenoiseLayer {
    Matrix w;
    double p = 1.0;
    double eps = kDefaultEps;
    double t = 0.0; // threshold applied between layers when stacked
};

// Appends a constant all-ones row: d x n -> (d+1) x n.
Matrix augment(const Matrix& x);

// Builds q = [p, ..., p, 1]^T of length d+1. p must lie in (0, 1].
SurvivalVector survival_vector(Index d, double p);

// Closed-form expectations of the corrupted moment matrices for a given
// uncorrupted scatter S (must be symmetric, dimensions matching q).
MomentPair expected_moments(const Matrix& scatter, const SurvivalVector& q);

// Infinite-copy limit of the denoising map: solves
//   w = E[P]_{rows 1..d} (E[Q] + eps I)^{-1}
// with a Cholesky factorization of the symmetric system, falling back to a
// pivoted LU when the matrix is not numerically positive definite.
// Deterministic; no randomness anywhere on this path.
DenoiseLayer solve_lide(const DataMatrix& x, double p, double eps = kDefaultEps);

// Applies the map: output = w * augment(x). Accepts d x n (augmented
// internally) or an already-augmented (d+1) x n input.
Matrix denoise_transform(const DenoiseLayer& layer, const Matrix& x);

namespace detail {
// Shared solve against (sym + eps I) for d right-hand-side rows; used by both
// the expected-moment and the finite-copy trainers. rhs_rows is d x (d+1).
Matrix solve_moment_system(const Matrix& sym, const Matrix& rhs_rows, double eps);
} // namespace detail

} // namespace slide
