#include "slide/corruption.hpp"

#include "slide/rng.hpp"

#include <string>

namespace slide {

namespace {

void validate_config(const CorruptionConfig& cfg) {
    if (!(cfg.p > 0.0) || cfg.p > 1.0)
        throw InvalidParameterError(
            "corruption: survival probability must lie in (0, 1], got " +
            std::to_string(cfg.p));
    if (cfg.m < 1)
        throw InvalidParameterError("corruption: copy count m must be >= 1");
}

} // namespace

std::uint64_t copy_seed(std::uint64_t seed, std::uint64_t copy) {
    return derive_seed(seed, copy);
}

Matrix corrupt(const Matrix& x_aug, double p, std::uint64_t seed) {
    if (!(p > 0.0) || p > 1.0)
        throw InvalidParameterError(
            "corrupt: survival probability must lie in (0, 1], got " +
            std::to_string(p));
    const Index d = x_aug.rows() - 1;
    if (d < 1)
        throw ShapeError("corrupt: input must be an augmented matrix with >= 2 rows");
    if ((x_aug.row(d).array() != 1.0).any())
        throw InvalidParameterError("corrupt: last row of the augmented input must be all ones");

    Matrix out = x_aug;
    if (p == 1.0)
        return out;
    for (Index i = 0; i < out.cols(); ++i) {
        for (Index a = 0; a < d; ++a) {
            const std::uint64_t counter =
                static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(d) +
                static_cast<std::uint64_t>(a);
            if (uniform_at(seed, counter) >= p)
                out(a, i) = 0.0;
        }
    }
    return out;
}

EmpiricalMoments empirical_moments(const DataMatrix& x, const CorruptionConfig& cfg) {
    validate_config(cfg);
    const Matrix x_aug = augment(x.data());
    const Index k = x_aug.rows();

    EmpiricalMoments em;
    em.q = Matrix::Zero(k, k);
    em.p = Matrix::Zero(k, k);
    for (std::uint64_t j = 0; j < cfg.m; ++j) {
        const Matrix corrupted = corrupt(x_aug, cfg.p, copy_seed(cfg.seed, j));
        em.q.noalias() += corrupted * corrupted.transpose();
        em.p.noalias() += x_aug * corrupted.transpose();
    }
    const double inv_m = 1.0 / static_cast<double>(cfg.m);
    em.q *= inv_m;
    em.p *= inv_m;
    return em;
}

DenoiseLayer solve_finite_m(const DataMatrix& x, const CorruptionConfig& cfg,
                            double eps) {
    if (eps < 0.0)
        throw InvalidParameterError("solve_finite_m: eps must be >= 0");
    const EmpiricalMoments em = empirical_moments(x, cfg);

    DenoiseLayer layer;
    layer.w = detail::solve_moment_system(em.q, em.p.topRows(x.d()), eps);
    layer.p = cfg.p;
    layer.eps = eps;
    return layer;
}

std::vector<ConvergenceRow> convergence_report(const DataMatrix& x, double p,
                                               const std::vector<std::uint64_t>& m_list,
                                               std::uint64_t seed_count,
                                               std::uint64_t base_seed, double eps) {
    if (m_list.empty())
        throw InvalidParameterError("convergence_report: m list must be non-empty");
    if (seed_count < 1)
        throw InvalidParameterError("convergence_report: seed count must be >= 1");

    const DenoiseLayer limit = solve_lide(x, p, eps);
    std::vector<ConvergenceRow> rows;
    rows.reserve(m_list.size() * seed_count);
    for (const std::uint64_t m : m_list) {
        for (std::uint64_t k = 0; k < seed_count; ++k) {
            CorruptionConfig cfg{p, m, base_seed + k};
            const DenoiseLayer wm = solve_finite_m(x, cfg, eps);
            rows.push_back({m, cfg.seed, (wm.w - limit.w).norm()});
        }
    }
    return rows;
}

} // namespace slide
