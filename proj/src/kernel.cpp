#include "slide/kernel.hpp"

#include "slide/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace slide {

void KernelParams::validate() const {
    if (!(sigma > 0.0))
        throw InvalidParameterError("KernelParams: global sigma must be > 0");
    if (sigmas.size() < 1)
        throw InvalidParameterError("KernelParams: at least one layer width required");
    for (Index t = 0; t < sigmas.size(); ++t)
        if (!(sigmas(t) > 0.0))
            throw InvalidParameterError("KernelParams: sigma_" + std::to_string(t) +
                                        " must be > 0");
}

LayerDistances layer_sq_distances(const std::vector<Vector>& reps_i,
                                  const std::vector<Vector>& reps_j) {
    if (reps_i.size() != reps_j.size())
        throw ShapeError("layer_sq_distances: layer counts differ");
    if (reps_i.empty())
        throw ShapeError("layer_sq_distances: no layers");
    LayerDistances out;
    out.d2.resize(static_cast<Index>(reps_i.size()));
    for (std::size_t t = 0; t < reps_i.size(); ++t) {
        if (reps_i[t].size() != reps_j[t].size())
            throw ShapeError("layer_sq_distances: dimension mismatch at layer " +
                             std::to_string(t));
        out.d2(static_cast<Index>(t)) = (reps_i[t] - reps_j[t]).squaredNorm();
    }
    return out;
}

double composite_kernel(const LayerDistances& dists, const KernelParams& params) {
    params.validate();
    if (dists.d2.size() != params.sigmas.size())
        throw ShapeError("composite_kernel: distance/width layer counts differ");
    const double exponent =
        (dists.d2.array() / params.sigmas.array().square()).sum() /
        (params.sigma * params.sigma);
    return std::exp(-exponent);
}

Vector kernel_width_gradient(const LayerDistances& dists, const KernelParams& params) {
    const double k = composite_kernel(dists, params);
    Vector grad(params.sigmas.size());
    for (Index t = 0; t < params.sigmas.size(); ++t) {
        const double st = params.sigmas(t);
        grad(t) = k * 2.0 * dists.d2(t) / (params.sigma * params.sigma * st * st * st);
    }
    return grad;
}

std::vector<Matrix> pairwise_sq_distances(const LayerOutputs& a, const LayerOutputs& b) {
    if (a.reps.size() != b.reps.size())
        throw ShapeError("pairwise_sq_distances: layer counts differ");
    if (a.reps.empty())
        throw ShapeError("pairwise_sq_distances: no layers");

    std::vector<Matrix> out;
    out.reserve(a.reps.size());
    for (std::size_t t = 0; t < a.reps.size(); ++t) {
        const Matrix& ha = a.reps[t];
        const Matrix& hb = b.reps[t];
        if (ha.rows() != hb.rows())
            throw ShapeError("pairwise_sq_distances: dimension mismatch at layer " +
                             std::to_string(t));
        Matrix d2(ha.cols(), hb.cols());
        for (Index i = 0; i < ha.cols(); ++i)
            for (Index j = 0; j < hb.cols(); ++j)
                d2(i, j) = (ha.col(i) - hb.col(j)).squaredNorm();
        out.push_back(std::move(d2));
    }
    return out;
}

Matrix gram_from_distances(const std::vector<Matrix>& d2, const KernelParams& params) {
    params.validate();
    if (static_cast<Index>(d2.size()) != params.sigmas.size())
        throw ShapeError("gram_from_distances: distance/width layer counts differ");
    if (d2.empty())
        throw ShapeError("gram_from_distances: no layers");

    Matrix exponent = Matrix::Zero(d2.front().rows(), d2.front().cols());
    for (std::size_t t = 0; t < d2.size(); ++t) {
        const double st = params.sigmas(static_cast<Index>(t));
        exponent += d2[t] / (st * st);
    }
    exponent /= params.sigma * params.sigma;
    return (-exponent.array()).exp();
}

Matrix gram(const LayerOutputs& a, const LayerOutputs& b, const KernelParams& params) {
    return gram_from_distances(pairwise_sq_distances(a, b), params);
}

Vector median_widths(const LayerOutputs& reps, std::uint64_t seed, Index cap) {
    if (reps.reps.empty())
        throw ShapeError("median_widths: no layers");
    const Index n = reps.reps.front().cols();

    // Seeded subsample of at most cap columns (partial Fisher-Yates).
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    if (n > cap) {
        CounterRng rng(derive_seed(seed, 0x6d656469)); // "medi" stream
        for (Index i = 0; i < cap; ++i) {
            const auto j = i + static_cast<Index>(rng.index(static_cast<std::uint64_t>(n - i)));
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
        idx.resize(static_cast<std::size_t>(cap));
    }

    Vector widths(static_cast<Index>(reps.reps.size()));
    std::vector<double> dists;
    for (std::size_t t = 0; t < reps.reps.size(); ++t) {
        const Matrix& h = reps.reps[t];
        dists.clear();
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = i + 1; j < idx.size(); ++j)
                dists.push_back((h.col(idx[i]) - h.col(idx[j])).norm());
        double med = 0.0;
        if (!dists.empty()) {
            // Lower median; deterministic for even counts.
            const auto mid = dists.begin() + (static_cast<std::ptrdiff_t>(dists.size()) - 1) / 2;
            std::nth_element(dists.begin(), mid, dists.end());
            med = *mid;
        }
        widths(static_cast<Index>(t)) = med > 0.0 ? med : 1.0;
    }
    return widths;
}

} // namespace slide
