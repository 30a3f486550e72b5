#include "slide/denoise.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <string>

namespace slide {

Matrix augment(const Matrix& x) {
    Matrix out(x.rows() + 1, x.cols());
    out.topRows(x.rows()) = x;
    out.row(x.rows()).setOnes();
    return out;
}

SurvivalVector survival_vector(Index d, double p) {
    if (d < 1)
        throw InvalidParameterError("survival_vector: feature count must be >= 1");
    if (!(p > 0.0) || p > 1.0)
        throw InvalidParameterError(
            "survival_vector: survival probability must lie in (0, 1], got " +
            std::to_string(p));
    SurvivalVector sv;
    sv.p = p;
    sv.q = Vector::Constant(d + 1, p);
    sv.q(d) = 1.0; // bias feature always survives
    return sv;
}

MomentPair expected_moments(const Matrix& scatter, const SurvivalVector& q) {
    const Index k = q.q.size();
    if (scatter.rows() != k || scatter.cols() != k)
        throw ShapeError("expected_moments: scatter is " +
                         std::to_string(scatter.rows()) + "x" +
                         std::to_string(scatter.cols()) +
                         ", survival vector has length " + std::to_string(k));
    const double scale = scatter.cwiseAbs().maxCoeff();
    if ((scatter - scatter.transpose()).cwiseAbs().maxCoeff() >
        1e-10 * std::max(1.0, scale))
        throw InvalidParameterError("expected_moments: scatter must be symmetric");

    MomentPair mp;
    mp.scatter = scatter;
    // Off-diagonal entries survive with probability q(a) q(b); a diagonal
    // entry involves a single feature, so it survives with probability q(a).
    mp.eq = scatter.cwiseProduct(q.q * q.q.transpose());
    mp.eq.diagonal() = q.q.cwiseProduct(scatter.diagonal());
    // E[P](a,b) scales column b of the scatter by q(b): only the corrupted
    // right factor is affected.
    mp.ep = scatter * q.q.asDiagonal();
    return mp;
}

namespace detail {

Matrix solve_moment_system(const Matrix& sym, const Matrix& rhs_rows, double eps) {
    Matrix system = sym;
    system.diagonal().array() += eps;

    // rhs_rows is d x (d+1); solve system * Z = rhs_rows^T, return Z^T.
    Eigen::LLT<Matrix> llt(system);
    if (llt.info() == Eigen::Success) {
        Matrix w = llt.solve(rhs_rows.transpose()).transpose();
        if (w.allFinite())
            return w;
    }

    // E[Q] is PSD, so eps > 0 normally makes the system SPD; when scaling
    // defeats the Cholesky, fall back to a pivoted factorization.
    Eigen::FullPivLU<Matrix> lu(system);
    if (!lu.isInvertible())
        throw SingularSystemError(
            "solve_moment_system: E[Q] + eps*I is numerically singular; "
            "use a regularizer eps > 0");
    Matrix w = lu.solve(rhs_rows.transpose()).transpose();
    if (!w.allFinite())
        throw SingularSystemError(
            "solve_moment_system: solve produced non-finite entries; "
            "use a larger regularizer eps");
    return w;
}

} // namespace detail

DenoiseLayer solve_lide(const DataMatrix& x, double p, double eps) {
    if (eps < 0.0)
        throw InvalidParameterError("solve_lide: eps must be >= 0");
    const Index d = x.d();
    const Matrix x_aug = augment(x.data());
    const Matrix scatter = x_aug * x_aug.transpose();
    const SurvivalVector q = survival_vector(d, p);
    const MomentPair mp = expected_moments(scatter, q);

    DenoiseLayer layer;
    layer.w = detail::solve_moment_system(mp.eq, mp.ep.topRows(d), eps);
    layer.p = p;
    layer.eps = eps;
    return layer;
}

Matrix denoise_transform(const DenoiseLayer& layer, const Matrix& x) {
    const Index d = layer.w.rows();
    if (x.rows() == d)
        return layer.w * augment(x);
    if (x.rows() == d + 1)
        return layer.w * x;
    throw ShapeError("denoise_transform: input has " + std::to_string(x.rows()) +
                     " rows, layer expects " + std::to_string(d) + " or " +
                     std::to_string(d + 1));
}

} // namespace slide
