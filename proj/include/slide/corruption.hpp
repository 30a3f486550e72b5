#pragma once

#include "slide/denoise.hpp"
#include "slide/types.hpp"

#include <cstdint>
#include <vector>

namespace slide {

// Finite-copy corruption setup: m corrupted copies of the data, masks drawn
// from the counter RNG under `seed` (one derived stream per copy).
struct CorruptionConfig {
    double p = 0.5;
    std::uint64_t m = 1;
    std::uint64_t seed = 0;
};

// Empirical outer-product matrices over the m corrupted copies:
//   q = (1/m) Xtilde Xtilde^T   (corrupted x corrupted, symmetric PSD)
//   p = (1/m) Xbar   Xtilde^T   (uncorrupted left factor)
struct EmpiricalMoments {
    Matrix q;
    Matrix p;
};

// Stream seed for corrupted copy j of a run seeded with `seed`.
std::uint64_t copy_seed(std::uint64_t seed, std::uint64_t copy);

// Zeroes each entry of rows 1..d independently with probability 1-p; the
// bias row (which must be all ones) is never touched. The mask at (row a,
// column i) is drawn at counter i*d + a, so a given (seed, shape) replays
// bit-exactly.
Matrix corrupt(const Matrix& x_aug, double p, std::uint64_t seed);

// Accumulates Q and P copy by copy; the (d+1) x (n*m) corrupted matrix is
// never materialized.
EmpiricalMoments empirical_moments(const DataMatrix& x, const CorruptionConfig& cfg);

// Finite-m least-squares denoiser: w = P_{rows 1..d} (Q + eps I)^{-1}, the
// same row convention as solve_lide. With p=1 corruption is the identity:
// m=1 reproduces solve_lide bit for bit, larger m up to summation rounding.
DenoiseLayer solve_finite_m(const DataMatrix& x, const CorruptionConfig& cfg,
                            double eps = kDefaultEps);

// One row of the convergence report emitted by the oracle workflow.
struct ConvergenceRow {
    std::uint64_t m = 0;
    std::uint64_t seed = 0;
    double frobenius_error = 0.0; // ||W_m - W_inf||_F
};

// Runs solve_finite_m for every (m, seed) pair against the closed form at the
// same eps. Run k uses seed base_seed + k.
std::vector<ConvergenceRow> convergence_report(const DataMatrix& x, double p,
                                               const std::vector<std::uint64_t>& m_list,
                                               std::uint64_t seed_count,
                                               std::uint64_t base_seed, double eps);

} // namespace slide
