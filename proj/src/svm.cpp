#include "slide/svm.hpp"

#include "slide/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>

namespace slide {

namespace {

constexpr double kCurvatureFloor = 1e-12;
constexpr std::uint64_t kMaxSmoIterations = 10'000'000;

void validate_binary_labels(const std::vector<int>& labels, Index n) {
    if (static_cast<Index>(labels.size()) != n)
        throw ShapeError("smo_train: label count does not match Gram size");
    bool pos = false, neg = false;
    for (int y : labels) {
        if (y == 1) pos = true;
        else if (y == -1) neg = true;
        else throw LabelError("smo_train: labels must be -1 or +1");
    }
    if (!pos || !neg)
        throw LabelError("smo_train: both classes must be present");
}

} // namespace

BinarySvm smo_train(const Matrix& gram, const std::vector<int>& labels, double c,
                    double tol, std::vector<double>* objective_trace) {
    const Index n = gram.rows();
    if (gram.cols() != n)
        throw ShapeError("smo_train: Gram matrix must be square");
    validate_binary_labels(labels, n);
    if (!(c > 0.0))
        throw InvalidParameterError("smo_train: box constraint c must be > 0");
    if (!(tol > 0.0))
        throw InvalidParameterError("smo_train: tolerance must be > 0");

    // Dual as a minimization: f(alpha) = 1/2 alpha^T Q alpha - sum(alpha)
    // with Q_ij = y_i y_j K_ij, subject to 0 <= alpha <= c, y^T alpha = 0.
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = static_cast<double>(labels[i]);

    Vector alpha = Vector::Zero(n);
    Vector grad = Vector::Constant(n, -1.0); // grad f = Q alpha - 1

    bool warned_indefinite = false;
    std::uint64_t iter = 0;
    while (true) {
        // Maximal violating pair:
        //   i = argmax_{t in I_up}  -y_t grad_t
        //   j = argmin_{t in I_low} -y_t grad_t
        // I_up:  alpha_t < c with y=+1, or alpha_t > 0 with y=-1
        // I_low: alpha_t < c with y=-1, or alpha_t > 0 with y=+1
        Index i = -1, j = -1;
        double up_max = -std::numeric_limits<double>::infinity();
        double low_min = std::numeric_limits<double>::infinity();
        for (Index t = 0; t < n; ++t) {
            const double v = -y(t) * grad(t);
            const bool in_up = (y(t) > 0 && alpha(t) < c) || (y(t) < 0 && alpha(t) > 0);
            const bool in_low = (y(t) < 0 && alpha(t) < c) || (y(t) > 0 && alpha(t) > 0);
            if (in_up && v > up_max) { up_max = v; i = t; }
            if (in_low && v < low_min) { low_min = v; j = t; }
        }
        if (i < 0 || j < 0 || up_max - low_min < tol)
            break;
        if (++iter > kMaxSmoIterations)
            throw NonConvergenceError("smo_train: no convergence after " +
                                      std::to_string(kMaxSmoIterations) +
                                      " iterations");

        // Feasible direction u = y_i e_i - y_j e_j keeps y^T alpha constant.
        // Exact line minimum: d* = (up_max - low_min) / u^T Q u with
        // u^T Q u = K_ii + K_jj - 2 K_ij, clipped to the box.
        double curvature = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
        if (curvature <= 0.0) {
            // Zero curvature is legitimate for PSD Grams with duplicate
            // points; only a clearly negative value signals indefiniteness.
            if (curvature < -1e-9 && !warned_indefinite) {
                std::cerr << "smo_train: warning: Gram matrix is not positive "
                             "semidefinite within tolerance; proceeding with "
                             "clamped curvature\n";
                warned_indefinite = true;
            }
            curvature = kCurvatureFloor;
        }
        double d = (up_max - low_min) / curvature;
        d = std::min(d, y(i) > 0 ? c - alpha(i) : alpha(i));
        d = std::min(d, y(j) > 0 ? alpha(j) : c - alpha(j));

        alpha(i) += y(i) * d;
        alpha(j) -= y(j) * d;
        // Rounding in a + (c - a) can overshoot the box by an ulp; snap back.
        alpha(i) = std::clamp(alpha(i), 0.0, c);
        alpha(j) = std::clamp(alpha(j), 0.0, c);
        // grad += Q (delta alpha); the y_i^2 = 1 factors reduce it to
        // d * y .* (K_col_i - K_col_j).
        grad += d * (gram.col(i) - gram.col(j)).cwiseProduct(y);

        if (objective_trace) {
            // D(alpha) = sum(alpha) - 1/2 alpha^T Q alpha; the quadratic term
            // equals 1/2 alpha^T (grad + 1) since grad = Q alpha - 1.
            objective_trace->push_back(alpha.sum() -
                                       0.5 * alpha.dot(grad + Vector::Ones(n)));
        }
    }

    BinarySvm model;
    model.alphas = alpha;
    model.c = c;
    model.labels = labels;
    for (Index t = 0; t < n; ++t)
        if (alpha(t) > 0.0)
            model.sv_indices.push_back(static_cast<int>(t));

    // Bias from free support vectors (b = -y_t grad_t for 0 < alpha_t < c);
    // when none are free, take the midpoint of the violating-pair bounds.
    double bias_sum = 0.0;
    int free_count = 0;
    for (Index t = 0; t < n; ++t) {
        if (alpha(t) > 0.0 && alpha(t) < c) {
            bias_sum += -y(t) * grad(t);
            ++free_count;
        }
    }
    if (free_count > 0) {
        model.bias = bias_sum / free_count;
    } else {
        double up_max = -std::numeric_limits<double>::infinity();
        double low_min = std::numeric_limits<double>::infinity();
        for (Index t = 0; t < n; ++t) {
            const double v = -y(t) * grad(t);
            const bool in_up = (y(t) > 0 && alpha(t) < c) || (y(t) < 0 && alpha(t) > 0);
            const bool in_low = (y(t) < 0 && alpha(t) < c) || (y(t) > 0 && alpha(t) > 0);
            if (in_up) up_max = std::max(up_max, v);
            if (in_low) low_min = std::min(low_min, v);
        }
        model.bias = 0.5 * (up_max + low_min);
    }
    return model;
}

double decision(const BinarySvm& model, const Vector& k_row) {
    if (k_row.size() != model.alphas.size())
        throw ShapeError("decision: kernel row length does not match training size");
    double score = model.bias;
    for (Index t = 0; t < model.alphas.size(); ++t)
        score += model.alphas(t) * static_cast<double>(model.labels[t]) * k_row(t);
    return score;
}

double dual_objective(const BinarySvm& model, const Matrix& gram) {
    const Index n = model.alphas.size();
    if (gram.rows() != n || gram.cols() != n)
        throw ShapeError("dual_objective: Gram size does not match model");
    Vector ay(n);
    for (Index t = 0; t < n; ++t)
        ay(t) = model.alphas(t) * static_cast<double>(model.labels[t]);
    return model.alphas.sum() - 0.5 * ay.dot(gram * ay);
}

double kkt_violation(const BinarySvm& model, const Matrix& gram) {
    const Index n = model.alphas.size();
    if (gram.rows() != n || gram.cols() != n)
        throw ShapeError("kkt_violation: Gram size does not match model");
    double worst = 0.0;
    for (Index t = 0; t < n; ++t) {
        const double margin =
            static_cast<double>(model.labels[t]) * decision(model, gram.row(t).transpose());
        double violation = 0.0;
        if (model.alphas(t) <= 0.0)
            violation = std::max(0.0, 1.0 - margin);        // should be >= 1
        else if (model.alphas(t) >= model.c)
            violation = std::max(0.0, margin - 1.0);        // should be <= 1
        else
            violation = std::abs(margin - 1.0);             // should be == 1
        worst = std::max(worst, violation);
    }
    return worst;
}

OvrModel train_ovr(const Matrix& gram, const std::vector<int>& class_labels,
                   double c, double tol) {
    if (static_cast<Index>(class_labels.size()) != gram.rows())
        throw ShapeError("train_ovr: label count does not match Gram size");
    const std::set<int> class_set(class_labels.begin(), class_labels.end());
    if (class_set.size() < 2)
        throw LabelError("train_ovr: at least two classes required");

    OvrModel model;
    model.classes.assign(class_set.begin(), class_set.end());
    for (int cls : model.classes) {
        std::vector<int> binary(class_labels.size());
        for (std::size_t t = 0; t < class_labels.size(); ++t)
            binary[t] = class_labels[t] == cls ? 1 : -1;
        BinarySvm machine = smo_train(gram, binary, c, tol);
        machine.label_map = {-1, cls}; // +1 side is this class, -1 the rest
        model.machines.push_back(std::move(machine));
    }
    return model;
}

Matrix decision_ovr(const OvrModel& model, const Matrix& k_rows) {
    Matrix scores(k_rows.rows(), static_cast<Index>(model.machines.size()));
    for (Index i = 0; i < k_rows.rows(); ++i) {
        const Vector row = k_rows.row(i).transpose();
        for (std::size_t m = 0; m < model.machines.size(); ++m)
            scores(i, static_cast<Index>(m)) = decision(model.machines[m], row);
    }
    return scores;
}

std::vector<int> predict_ovr(const OvrModel& model, const Matrix& k_rows) {
    if (model.machines.empty())
        throw ShapeError("predict_ovr: model has no machines");
    const Matrix scores = decision_ovr(model, k_rows);
    std::vector<int> out(static_cast<std::size_t>(k_rows.rows()));
    for (Index i = 0; i < k_rows.rows(); ++i) {
        Index best = 0;
        for (Index m = 1; m < scores.cols(); ++m)
            if (scores(i, m) > scores(i, best)) // ties keep the lowest class id
                best = m;
        out[static_cast<std::size_t>(i)] = model.classes[static_cast<std::size_t>(best)];
    }
    return out;
}

namespace {

// Stratified fold assignment: within each class, indices are shuffled with a
// seeded partial Fisher-Yates and dealt round-robin.
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds,
                                  std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(i);

    std::vector<int> fold_of(labels.size(), 0);
    std::uint64_t class_stream = 0;
    for (auto& [cls, idx] : by_class) {
        CounterRng rng(derive_seed(seed, 0xf01d0000ULL + class_stream++));
        for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(rng.index(idx.size() - i));
            std::swap(idx[i], idx[j]);
        }
        for (std::size_t i = 0; i < idx.size(); ++i)
            fold_of[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }

    // Every training fold (the complement of one fold) must contain every
    // class, i.e. no class may live entirely inside a single fold.
    for (const auto& [cls, idx] : by_class) {
        std::set<int> seen;
        for (std::size_t i : idx) seen.insert(fold_of[i]);
        if (static_cast<int>(seen.size()) < 2 && folds > 1)
            throw LabelError("cross_validate_widths: class " + std::to_string(cls) +
                             " is absent from some training fold; use fewer folds");
    }
    return fold_of;
}

} // namespace

WidthSelection cross_validate_widths(const LayerOutputs& reps,
                                     const std::vector<int>& labels,
                                     const std::vector<double>& width_grid,
                                     const std::vector<double>& c_grid, int folds,
                                     std::uint64_t seed) {
    if (folds < 2)
        throw InvalidParameterError("cross_validate_widths: folds must be >= 2");
    if (width_grid.empty() || c_grid.empty())
        throw InvalidParameterError("cross_validate_widths: grids must be non-empty");
    const Index n = reps.reps.front().cols();
    if (static_cast<Index>(labels.size()) != n)
        throw ShapeError("cross_validate_widths: label count does not match data");

    const std::vector<int> fold_of = stratified_folds(labels, folds, seed);
    const std::vector<Matrix> d2 = pairwise_sq_distances(reps, reps);
    const Index layer_count = static_cast<Index>(d2.size());

    WidthSelection best;
    bool have_best = false;
    for (double sigma : width_grid) {
        if (!(sigma > 0.0))
            throw InvalidParameterError("cross_validate_widths: widths must be > 0");
        KernelParams params;
        params.sigmas = Vector::Constant(layer_count, sigma);
        const Matrix full_gram = gram_from_distances(d2, params);

        for (double c : c_grid) {
            double accuracy_sum = 0.0;
            for (int f = 0; f < folds; ++f) {
                std::vector<Index> train_idx, val_idx;
                for (Index t = 0; t < n; ++t)
                    (fold_of[static_cast<std::size_t>(t)] == f ? val_idx : train_idx)
                        .push_back(t);

                Matrix train_gram(train_idx.size(), train_idx.size());
                for (std::size_t a = 0; a < train_idx.size(); ++a)
                    for (std::size_t b = 0; b < train_idx.size(); ++b)
                        train_gram(static_cast<Index>(a), static_cast<Index>(b)) =
                            full_gram(train_idx[a], train_idx[b]);
                std::vector<int> train_labels;
                for (Index t : train_idx)
                    train_labels.push_back(labels[static_cast<std::size_t>(t)]);

                const OvrModel model = train_ovr(train_gram, train_labels, c);

                Matrix k_rows(val_idx.size(), train_idx.size());
                for (std::size_t a = 0; a < val_idx.size(); ++a)
                    for (std::size_t b = 0; b < train_idx.size(); ++b)
                        k_rows(static_cast<Index>(a), static_cast<Index>(b)) =
                            full_gram(val_idx[a], train_idx[b]);
                const std::vector<int> pred = predict_ovr(model, k_rows);

                int correct = 0;
                for (std::size_t a = 0; a < val_idx.size(); ++a)
                    if (pred[a] == labels[static_cast<std::size_t>(val_idx[a])])
                        ++correct;
                accuracy_sum += val_idx.empty()
                                    ? 0.0
                                    : static_cast<double>(correct) /
                                          static_cast<double>(val_idx.size());
            }
            const double mean_accuracy = accuracy_sum / folds;

            // Ties prefer the smoother model: larger sigma, then smaller c.
            const bool better =
                !have_best || mean_accuracy > best.mean_accuracy ||
                (mean_accuracy == best.mean_accuracy &&
                 (sigma > best.params.sigmas(0) ||
                  (sigma == best.params.sigmas(0) && c < best.c)));
            if (better) {
                best.params = params;
                best.c = c;
                best.mean_accuracy = mean_accuracy;
                have_best = true;
            }
        }
    }
    return best;
}

} // namespace slide
