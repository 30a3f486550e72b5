#include "slide/kernel.hpp"
#include "slide/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace slide {

namespace {

void validate_pm_one_labels(const std::vector<int>& labels, Index n,
                            const char* who) {
    if (static_cast<Index>(labels.size()) != n)
        throw ShapeError(std::string(who) + ": label count does not match data");
    bool pos = false, neg = false;
    for (int y : labels) {
        if (y == 1) pos = true;
        else if (y == -1) neg = true;
        else throw LabelError(std::string(who) +
                              ": width learning needs binary -1/+1 labels");
    }
    if (!pos || !neg)
        throw LabelError(std::string(who) + ": both classes must be present");
}

// Smallest-enclosing-ball dual: maximize sum_i b_i K_ii - b^T K b over the
// simplex. Solved with Frank-Wolfe plus away steps (linear convergence on
// the simplex); deterministic, ties to the lowest index.
Vector ball_weights(const Matrix& k) {
    const Index n = k.rows();
    Vector beta = Vector::Constant(n, 1.0 / static_cast<double>(n));
    Vector kb = k * beta;
    const Vector diag = k.diagonal();

    const int max_iterations = 2000 + 50 * static_cast<int>(n);
    const double gap_tol = 1e-12 * std::max(1.0, diag.cwiseAbs().maxCoeff());
    for (int it = 0; it < max_iterations; ++it) {
        const Vector grad = diag - 2.0 * kb;

        Index fw = 0, away = -1;
        double fw_val = -std::numeric_limits<double>::infinity();
        double away_val = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < n; ++i) {
            if (grad(i) > fw_val) { fw_val = grad(i); fw = i; }
            if (beta(i) > 0.0 && grad(i) < away_val) { away_val = grad(i); away = i; }
        }
        const double fw_gap = fw_val - grad.dot(beta);
        if (fw_gap <= gap_tol)
            break;
        const double away_gap = grad.dot(beta) - away_val;

        // Direction d and maximal feasible step.
        Vector dir;
        double step_max;
        if (fw_gap >= away_gap) {
            dir = -beta;
            dir(fw) += 1.0;
            step_max = 1.0;
        } else {
            dir = beta;
            dir(away) -= 1.0;
            step_max = beta(away) < 1.0 ? beta(away) / (1.0 - beta(away))
                                        : std::numeric_limits<double>::max();
        }

        // Exact line search for the concave quadratic along dir.
        const Vector kd = k * dir;
        const double slope = diag.dot(dir) - 2.0 * kb.dot(dir);
        const double curv = dir.dot(kd);
        double step = step_max;
        if (curv > 0.0)
            step = std::min(step_max, slope / (2.0 * curv));
        if (step <= 0.0)
            break;

        beta += step * dir;
        kb += step * kd;
        // Clean tiny negatives caused by rounding.
        for (Index i = 0; i < n; ++i)
            if (beta(i) < 0.0) beta(i) = 0.0;
    }
    return beta;
}

struct CriterionState {
    double value = 0.0;       // R^2 ||w||^2
    double radius_sq = 0.0;
    double weight_norm_sq = 0.0;
    Vector alpha_y;           // alpha_i y_i
    Vector beta;              // enclosing-ball weights
};

CriterionState evaluate_criterion(const std::vector<Matrix>& d2,
                                  const std::vector<int>& labels,
                                  const KernelParams& params,
                                  const WidthLearnConfig& cfg) {
    const Matrix k = gram_from_distances(d2, params);
    const BinarySvm svm = smo_train(k, labels, cfg.c, cfg.svm_tol);

    CriterionState state;
    state.alpha_y.resize(k.rows());
    for (Index i = 0; i < k.rows(); ++i)
        state.alpha_y(i) = svm.alphas(i) * static_cast<double>(labels[i]);
    // ||w||^2 taken from the dual objective: twice its optimal value. This is
    // exact for hard margins and keeps the criterion an optimal-value
    // function, so its width derivative needs no d(alpha)/d(sigma) term.
    state.weight_norm_sq =
        2.0 * svm.alphas.sum() - state.alpha_y.dot(k * state.alpha_y);

    state.beta = ball_weights(k);
    state.radius_sq = k.diagonal().dot(state.beta) - state.beta.dot(k * state.beta);
    state.radius_sq = std::max(state.radius_sq, 0.0);
    state.value = state.radius_sq * state.weight_norm_sq;
    return state;
}

// d(criterion)/d(log sigma_t) via the envelope theorem: alpha and beta are
// held fixed at their optima while dK/dsigma_t = K .* 2 D2_t / (s^2 st^3).
Vector criterion_gradient_log(const std::vector<Matrix>& d2,
                              const KernelParams& params,
                              const CriterionState& state) {
    const Matrix k = gram_from_distances(d2, params);
    Vector grad(params.sigmas.size());
    for (Index t = 0; t < params.sigmas.size(); ++t) {
        const double st = params.sigmas(t);
        const double scale =
            2.0 / (params.sigma * params.sigma * st * st * st);
        const Matrix dk = scale * k.cwiseProduct(d2[static_cast<std::size_t>(t)]);
        const double d_radius = -state.beta.dot(dk * state.beta);
        const double d_norm = -state.alpha_y.dot(dk * state.alpha_y);
        const double d_sigma =
            d_radius * state.weight_norm_sq + state.radius_sq * d_norm;
        grad(t) = st * d_sigma; // chain rule to log space
    }
    return grad;
}

} // namespace

double radius_margin_criterion(const LayerOutputs& reps, const std::vector<int>& labels,
                               const KernelParams& params, const WidthLearnConfig& cfg) {
    params.validate();
    validate_pm_one_labels(labels, reps.reps.front().cols(), "radius_margin_criterion");
    const std::vector<Matrix> d2 = pairwise_sq_distances(reps, reps);
    if (static_cast<Index>(d2.size()) != params.sigmas.size())
        throw ShapeError("radius_margin_criterion: width count does not match layers");
    return evaluate_criterion(d2, labels, params, cfg).value;
}

Vector radius_margin_gradient(const LayerOutputs& reps, const std::vector<int>& labels,
                              const KernelParams& params, const WidthLearnConfig& cfg) {
    params.validate();
    validate_pm_one_labels(labels, reps.reps.front().cols(), "radius_margin_gradient");
    const std::vector<Matrix> d2 = pairwise_sq_distances(reps, reps);
    if (static_cast<Index>(d2.size()) != params.sigmas.size())
        throw ShapeError("radius_margin_gradient: width count does not match layers");
    const CriterionState state = evaluate_criterion(d2, labels, params, cfg);
    // criterion_gradient_log applies the log-space chain rule; undo it.
    return criterion_gradient_log(d2, params, state).cwiseQuotient(params.sigmas);
}

WidthLearnResult learn_widths(const LayerOutputs& reps, const std::vector<int>& labels,
                              const KernelParams& params0, const WidthLearnConfig& cfg) {
    params0.validate();
    validate_pm_one_labels(labels, reps.reps.front().cols(), "learn_widths");
    const std::vector<Matrix> d2 = pairwise_sq_distances(reps, reps);
    if (static_cast<Index>(d2.size()) != params0.sigmas.size())
        throw ShapeError("learn_widths: width count does not match layer count");

    KernelParams current = params0;
    CriterionState state = evaluate_criterion(d2, labels, current, cfg);

    WidthLearnResult result;
    result.trace.push_back({0, state.value, current.sigmas});

    Vector log_sigma = current.sigmas.array().log();
    bool converged = false;
    for (int iter = 1; iter <= cfg.max_iterations && !converged; ++iter) {
        const Vector grad = criterion_gradient_log(d2, current, state);
        if (grad.cwiseAbs().maxCoeff() <=
            1e-14 * std::max(1.0, std::abs(state.value)))
            break; // numerically stationary

        double step = cfg.initial_step;
        bool accepted = false;
        for (int h = 0; h <= cfg.max_halvings; ++h, step *= 0.5) {
            Vector candidate_log = log_sigma - step * grad;
            candidate_log = candidate_log.cwiseMax(-30.0).cwiseMin(30.0);
            KernelParams candidate = current;
            candidate.sigmas = candidate_log.array().exp();
            const CriterionState cand_state =
                evaluate_criterion(d2, labels, candidate, cfg);
            if (cand_state.value < state.value) {
                const double improvement = state.value - cand_state.value;
                log_sigma = candidate_log;
                current = candidate;
                state = cand_state;
                result.trace.push_back({iter, state.value, current.sigmas});
                accepted = true;
                converged = improvement <
                            cfg.rel_tol * std::max(std::abs(state.value), 1e-300);
                break;
            }
        }
        if (!accepted)
            break; // step-size underflow
    }

    result.params = current;
    return result;
}

} // namespace slide
