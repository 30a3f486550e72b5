#pragma once

// Shared test oracles and synthetic data. Everything here recomputes results
// from first principles (mask enumeration, projected gradients, finite
// differences) and stays independent of the library code paths it checks.

#include "slide/rng.hpp"
#include "slide/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace slide::testing {

// Exact E[Q], E[P] by enumerating all 2^d corruption masks of the non-bias
// features, each weighted by its Bernoulli(p) probability.
struct ExactMoments {
    Matrix eq;
    Matrix ep;
};

inline ExactMoments enumerate_moments(const Matrix& x, double p) {
    const Index d = x.rows();
    if (d > 20)
        throw std::invalid_argument("enumerate_moments: d too large to enumerate");
    const Index n = x.cols();

    ExactMoments out;
    out.eq = Matrix::Zero(d + 1, d + 1);
    out.ep = Matrix::Zero(d + 1, d + 1);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
        int kept = 0;
        for (Index a = 0; a < d; ++a)
            if (mask & (std::uint64_t{1} << a))
                ++kept;
        const double weight = std::pow(p, kept) * std::pow(1.0 - p, d - kept);
        if (weight == 0.0)
            continue;
        for (Index i = 0; i < n; ++i) {
            Vector clean(d + 1), corrupted(d + 1);
            for (Index a = 0; a < d; ++a) {
                clean(a) = x(a, i);
                corrupted(a) = (mask & (std::uint64_t{1} << a)) ? x(a, i) : 0.0;
            }
            clean(d) = 1.0;
            corrupted(d) = 1.0;
            out.eq += weight * corrupted * corrupted.transpose();
            out.ep += weight * clean * corrupted.transpose();
        }
    }
    return out;
}

// Exact expected squared reconstruction loss of a candidate map w (d x (d+1))
// under zeroing corruption, by the same mask enumeration.
inline double enumerate_expected_loss(const Matrix& x, double p, const Matrix& w) {
    const Index d = x.rows();
    if (d > 20)
        throw std::invalid_argument("enumerate_expected_loss: d too large");
    const Index n = x.cols();

    double loss = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
        int kept = 0;
        for (Index a = 0; a < d; ++a)
            if (mask & (std::uint64_t{1} << a))
                ++kept;
        const double weight = std::pow(p, kept) * std::pow(1.0 - p, d - kept);
        if (weight == 0.0)
            continue;
        for (Index i = 0; i < n; ++i) {
            Vector corrupted(d + 1);
            for (Index a = 0; a < d; ++a)
                corrupted(a) = (mask & (std::uint64_t{1} << a)) ? x(a, i) : 0.0;
            corrupted(d) = 1.0;
            loss += 0.5 * weight * (x.col(i) - w * corrupted).squaredNorm();
        }
    }
    return loss;
}

// Dense brute-force SVM dual: projected gradient ascent on
//   D(a) = sum(a) - 1/2 a^T (yy^T .* K) a,  0 <= a <= c,  y^T a = 0.
// The projection onto the box-hyperplane intersection is exact: clip(v - l y)
// has y^T alpha monotone in l, so l is found by bisection.
struct QpSolution {
    Vector alpha;
    double objective = 0.0;
};

inline Vector project_box_hyperplane(const Vector& v, const Vector& y, double c) {
    const auto clipped = [&](double l) -> Vector {
        Vector out(v.size());
        for (Index i = 0; i < v.size(); ++i) {
            const double a = v(i) - l * y(i);
            out(i) = a < 0.0 ? 0.0 : (a > c ? c : a);
        }
        return out;
    };
    double lo = -(v.cwiseAbs().maxCoeff() + c + 1.0);
    double hi = -lo;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (y.dot(clipped(mid)) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return clipped(0.5 * (lo + hi));
}

inline QpSolution brute_force_svm_dual(const Matrix& k, const std::vector<int>& labels,
                                       double c, int iterations = 200000) {
    const Index n = k.rows();
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = static_cast<double>(labels[i]);
    const Matrix q = k.cwiseProduct(y * y.transpose());

    const double lipschitz = std::max(1e-12, q.norm());
    const double step = 1.0 / lipschitz;
    Vector alpha = Vector::Zero(n);
    double prev = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const Vector grad = Vector::Ones(n) - q * alpha;
        alpha = project_box_hyperplane(alpha + step * grad, y, c);
        if (it % 100 == 99) {
            const double obj = alpha.sum() - 0.5 * alpha.dot(q * alpha);
            if (std::abs(obj - prev) < 1e-14 * std::max(1.0, std::abs(obj)))
                break;
            prev = obj;
        }
    }
    return {alpha, alpha.sum() - 0.5 * alpha.dot(q * alpha)};
}

// Central finite difference of a scalar function of one coordinate.
template <typename F>
double central_difference(F f, double x0, double h = 1e-5) {
    return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

// --- seeded synthetic datasets -------------------------------------------

inline Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
    CounterRng rng(seed);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            m(i, j) = rng.gaussian();
    return m;
}

struct LabeledPoints {
    Matrix x; // d x n
    std::vector<int> labels;
};

// Two interleaved half-circles with Gaussian jitter; labels -1/+1.
inline LabeledPoints make_moons(Index n, double noise, std::uint64_t seed) {
    CounterRng rng(seed);
    LabeledPoints out;
    out.x.resize(2, n);
    out.labels.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const bool upper = (i % 2) == 0;
        const double angle = std::numbers::pi * rng.uniform();
        double px, py;
        if (upper) {
            px = std::cos(angle);
            py = std::sin(angle);
        } else {
            px = 1.0 - std::cos(angle);
            py = 0.5 - std::sin(angle);
        }
        out.x(0, i) = px + noise * rng.gaussian();
        out.x(1, i) = py + noise * rng.gaussian();
        out.labels[static_cast<std::size_t>(i)] = upper ? 1 : -1;
    }
    return out;
}

// Well-separated Gaussian blobs, one per center; labels are center indices.
inline LabeledPoints make_blobs(const std::vector<Vector>& centers, Index per_center,
                                double spread, std::uint64_t seed) {
    CounterRng rng(seed);
    const Index d = centers.front().size();
    const Index n = per_center * static_cast<Index>(centers.size());
    LabeledPoints out;
    out.x.resize(d, n);
    out.labels.resize(static_cast<std::size_t>(n));
    Index col = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (Index i = 0; i < per_center; ++i, ++col) {
            for (Index f = 0; f < d; ++f)
                out.x(f, col) = centers[c](f) + spread * rng.gaussian();
            out.labels[static_cast<std::size_t>(col)] = static_cast<int>(c);
        }
    }
    return out;
}

} // namespace slide::testing
