// Acceptance suite: one check per shipped guarantee, one PASS/FAIL line per
// criterion, nonzero exit when anything fails. Every tolerance is pinned
// here, not configurable.

#include "slide/corruption.hpp"
#include "slide/denoise.hpp"
#include "slide/kernel.hpp"
#include "slide/metrics.hpp"
#include "slide/stack.hpp"
#include "slide/svm.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

using namespace slide;

namespace {

int failures = 0;

// time_limit, when positive, is part of the criterion.
void criterion(int number, const std::string& description,
               const std::function<bool()>& check, double time_limit = 0.0) {
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
        ok = check();
    } catch (const std::exception& e) {
        detail = std::string(" (") + e.what() + ")";
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (ok && time_limit > 0.0 && seconds >= time_limit) {
        ok = false;
        detail = " (over the " + std::to_string(time_limit) + "s budget)";
    }
    std::printf("[%s] criterion %2d: %s [%.2fs]%s\n", ok ? "PASS" : "FAIL", number,
                description.c_str(), seconds, detail.c_str());
    if (!ok)
        ++failures;
}

bool expect(bool condition, const std::string& what) {
    if (!condition)
        std::printf("       failed: %s\n", what.c_str());
    return condition;
}

Matrix identity_with_bias(Index d) {
    Matrix m = Matrix::Zero(d, d + 1);
    m.leftCols(d).setIdentity();
    return m;
}

// --- criterion bodies -------------------------------------------------------

bool closed_form_vs_enumeration() {
    bool ok = true;
    for (Index d = 1; d <= 6; ++d) {
        for (const double p : {0.3, 0.5, 0.8}) {
            const Index n = 3 * d + 2; // up to 20
            const Matrix x =
                testing::gaussian_matrix(d, n, 9000 + static_cast<std::uint64_t>(d));
            const Matrix x_aug = augment(x);
            const MomentPair mp =
                expected_moments(x_aug * x_aug.transpose(), survival_vector(d, p));
            const auto exact = testing::enumerate_moments(x, p);
            ok &= expect((mp.eq - exact.eq).cwiseAbs().maxCoeff() < 1e-10,
                         "E[Q] mismatch at d=" + std::to_string(d));
            ok &= expect((mp.ep - exact.ep).cwiseAbs().maxCoeff() < 1e-10,
                         "E[P] mismatch at d=" + std::to_string(d));
        }
    }
    return ok;
}

bool monte_carlo_convergence() {
    const DataMatrix x(testing::gaussian_matrix(10, 50, 2026));
    const std::vector<std::uint64_t> m_list{1, 10, 100, 1000, 10000};
    const auto rows = convergence_report(x, 0.5, m_list, 20, 31337, 1e-5);

    std::map<std::uint64_t, double> mean;
    for (const auto& row : rows)
        mean[row.m] += row.frobenius_error / 20.0;

    bool ok = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const std::uint64_t m : m_list) {
        ok &= expect(mean[m] <= prev,
                     "mean error rose from m=" + std::to_string(m));
        prev = mean[m];
    }
    const double w_norm = solve_lide(x, 0.5, 1e-5).w.norm();
    ok &= expect(mean[10000] / w_norm < 0.05, "relative error at m=10000 too large");
    return ok;
}

bool identity_limit() {
    bool ok = true;
    for (const Index d : {3, 8}) {
        const DataMatrix x(
            testing::gaussian_matrix(d, 4 * d, 40 + static_cast<std::uint64_t>(d)));
        const DenoiseLayer layer = solve_lide(x, 1.0, 0.0);
        ok &= expect((layer.w - identity_with_bias(d)).norm() <
                         1e-8 * static_cast<double>(d),
                     "W differs from [I|0] at d=" + std::to_string(d));
    }
    return ok;
}

bool denoising_gain() {
    const DataMatrix x(testing::gaussian_matrix(6, 40, 808));
    const Matrix x_aug = augment(x.data());
    bool ok = true;
    for (const double p : {0.5, 0.8}) {
        const DenoiseLayer layer = solve_lide(x, p, 1e-5);
        double denoised = 0.0, corrupted = 0.0;
        for (std::uint64_t copy = 0; copy < 100; ++copy) {
            // fresh held-out corruption seeds
            const Matrix tilde = corrupt(x_aug, p, 777000 + copy);
            denoised += (x.data() - layer.w * tilde).squaredNorm();
            corrupted += (x.data() - tilde.topRows(6)).squaredNorm();
        }
        ok &= expect(denoised < corrupted,
                     "no denoising gain at p=" + std::to_string(p));
    }
    return ok;
}

bool hand_verified_solves() {
    Matrix two_points(1, 2);
    two_points << 1.0, 3.0;
    Matrix lone(1, 1);
    lone << 2.0;
    bool ok = true;

    const DenoiseLayer exact = solve_lide(DataMatrix(two_points), 0.5, 0.0);
    ok &= expect(std::abs(exact.w(0, 0) - 1.0 / 3.0) < 1e-12 &&
                     std::abs(exact.w(0, 1) - 5.0 / 3.0) < 1e-12,
                 "eps=0 solve is not [1/3, 5/3]");
    const DenoiseLayer ridged = solve_lide(DataMatrix(two_points), 0.5, 1e-5);
    ok &= expect(std::abs(ridged.w(0, 0) - 1.0 / 3.0) < 1e-4 &&
                     std::abs(ridged.w(0, 1) - 5.0 / 3.0) < 1e-4,
                 "eps=1e-5 solve is not within 1e-4 of [1/3, 5/3]");

    const DenoiseLayer lone_exact = solve_lide(DataMatrix(lone), 0.5, 0.0);
    ok &= expect(std::abs(lone_exact.w(0, 0)) < 1e-12 &&
                     std::abs(lone_exact.w(0, 1) - 2.0) < 1e-12,
                 "eps=0 lone-sample solve is not [0, 2]");
    const DenoiseLayer lone_ridged = solve_lide(DataMatrix(lone), 0.5, 1e-5);
    ok &= expect(std::abs(lone_ridged.w(0, 0)) < 1e-4 &&
                     std::abs(lone_ridged.w(0, 1) - 2.0) < 1e-4,
                 "eps=1e-5 lone-sample solve is off");
    return ok;
}

bool stack_contracts() {
    const DataMatrix x(testing::gaussian_matrix(5, 30, 515));
    bool ok = true;

    const auto one = train_stack(x, 0.5, 0.0, 1, 1e-5);
    ok &= expect(one.model.layers[0].w == solve_lide(x, 0.5, 1e-5).w,
                 "layer-1 equivalence is not bitwise");

    const auto two = train_stack(x, 0.5, 0.0, 2, 1e-5);
    const auto three = train_stack(x, 0.5, 0.0, 3, 1e-5);
    const auto extended = extend_stack(two.model, x, 1);
    for (std::size_t k = 0; k < 2; ++k) {
        ok &= expect(three.model.layers[k].w == two.model.layers[k].w,
                     "fresh retrain moved a frozen layer");
        ok &= expect(extended.model.layers[k].w == two.model.layers[k].w,
                     "extension moved a frozen layer");
    }
    ok &= expect(extended.model.layers[2].w == three.model.layers[2].w,
                 "extension and fresh layer 3 differ");

    for (const Matrix& rep : three.outputs.reps)
        ok &= expect(rep.rows() == 5 && rep.cols() == 30, "h^k is not d x n");

    const auto rerun = train_stack(x, 0.5, 0.0, 3, 1e-5);
    for (std::size_t k = 0; k < 3; ++k)
        ok &= expect(rerun.model.layers[k].w == three.model.layers[k].w,
                     "training is not deterministic");
    const LayerOutputs fwd1 = forward(three.model, x);
    const LayerOutputs fwd2 = forward(three.model, x);
    for (std::size_t k = 0; k < fwd1.reps.size(); ++k) {
        ok &= expect(fwd1.reps[k] == fwd2.reps[k], "forward is not deterministic");
        ok &= expect(fwd1.reps[k] == three.outputs.reps[k],
                     "forward does not replay the training pass");
    }
    return ok;
}

bool kernel_gradient_check() {
    CounterRng rng(424242);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index layers = 1 + static_cast<Index>(rng.index(4));
        LayerDistances d;
        d.d2 = Vector::NullaryExpr(layers, [&](Index) { return 5.0 * rng.uniform(); });
        KernelParams p;
        p.sigmas =
            Vector::NullaryExpr(layers, [&](Index) { return 0.4 + 2.0 * rng.uniform(); });
        const Vector analytic = kernel_width_gradient(d, p);
        for (Index t = 0; t < layers; ++t) {
            const double numeric = testing::central_difference(
                [&](double s) {
                    KernelParams q = p;
                    q.sigmas(t) = s;
                    return composite_kernel(d, q);
                },
                p.sigmas(t));
            worst = std::max(worst, std::abs(analytic(t) - numeric) /
                                        std::max(std::abs(numeric), 1e-12));
        }
    }
    bool ok = expect(worst < 1e-4, "gradient/finite-difference gap " +
                                       std::to_string(worst));

    LayerOutputs reps;
    reps.reps.push_back(testing::gaussian_matrix(4, 200, 2021));
    reps.reps.push_back(testing::gaussian_matrix(4, 200, 2022));
    KernelParams params;
    params.sigmas = Vector::Constant(2, 1.3);
    const Matrix g = gram(reps, reps, params);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (g + g.transpose()));
    ok &= expect(eig.eigenvalues().minCoeff() >= -1e-8,
                 "self-Gram has an eigenvalue below -1e-8");
    return ok;
}

bool svm_oracle() {
    bool ok = true;

    // Analytic two-point problem.
    Matrix k2(2, 2);
    k2 << 1.0, std::exp(-4.0), std::exp(-4.0), 1.0;
    const BinarySvm two = smo_train(k2, {-1, 1}, 10.0, 1e-3);
    const double alpha_want = 1.0 / (1.0 - std::exp(-4.0));
    ok &= expect(std::abs(two.alphas(0) - alpha_want) < 1e-6 &&
                     std::abs(two.alphas(1) - alpha_want) < 1e-6,
                 "two-point alphas are off");
    ok &= expect(std::abs(two.bias) < 1e-6, "two-point bias is off");
    ok &= expect(kkt_violation(two, k2) <= 1e-3, "two-point KKT audit failed");

    // 50 random problems against the projected-gradient QP.
    CounterRng rng(616);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 3 + static_cast<Index>(rng.index(4));
        Matrix points(1, n);
        for (Index i = 0; i < n; ++i)
            points(0, i) = 2.0 * rng.gaussian();
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (auto& y : labels)
            y = rng.uniform() < 0.5 ? -1 : 1;
        labels.front() = 1;
        labels.back() = -1;

        Matrix k(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) {
                const double d = points(0, i) - points(0, j);
                k(i, j) = std::exp(-d * d);
            }
        const double c = 0.5 + 4.0 * rng.uniform();
        const BinarySvm model = smo_train(k, labels, c, 1e-6);
        const auto qp = testing::brute_force_svm_dual(k, labels, c);
        ok &= expect(std::abs(dual_objective(model, k) - qp.objective) < 1e-6,
                     "dual gap vs QP at trial " + std::to_string(trial));
        ok &= expect(kkt_violation(model, k) <= 1e-3,
                     "KKT audit failed at trial " + std::to_string(trial));
    }
    return ok;
}

// Shared by criteria 9 and 11.
struct WidthRun {
    Vector initial;
    WidthLearnResult learned;
    double accuracy_learned = 0.0;
    double accuracy_equal = 0.0;
};

WidthRun run_noisy_layer(std::uint64_t seed) {
    std::vector<Vector> centers(2, Vector(2));
    centers[0] << -1.0, 0.0;
    centers[1] << 1.0, 0.0;
    const auto train = testing::make_blobs(centers, 30, 0.55, seed);
    const auto val = testing::make_blobs(centers, 50, 0.55, seed + 1000);

    const auto pm = [](const std::vector<int>& zero_one) {
        std::vector<int> out(zero_one.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = zero_one[i] == 0 ? -1 : 1;
        return out;
    };
    const std::vector<int> y_train = pm(train.labels);
    const std::vector<int> y_val = pm(val.labels);

    LayerOutputs r_train, r_val;
    r_train.reps.push_back(train.x);
    r_train.reps.push_back(3.0 * testing::gaussian_matrix(2, train.x.cols(), seed + 77));
    r_val.reps.push_back(val.x);
    r_val.reps.push_back(3.0 * testing::gaussian_matrix(2, val.x.cols(), seed + 78));

    WidthRun run;
    KernelParams params0;
    params0.sigmas = median_widths(r_train, seed);
    run.initial = params0.sigmas;

    WidthLearnConfig cfg;
    cfg.c = 2.0;
    cfg.svm_tol = 1e-4;
    run.learned = learn_widths(r_train, y_train, params0, cfg);

    const auto accuracy = [&](const KernelParams& kp) {
        const Matrix g = gram(r_train, r_train, kp);
        const BinarySvm machine = smo_train(g, y_train, cfg.c, 1e-4);
        const Matrix rows = gram(r_val, r_train, kp);
        int correct = 0;
        for (Index i = 0; i < rows.rows(); ++i) {
            const int pred = decision(machine, rows.row(i).transpose()) > 0.0 ? 1 : -1;
            if (pred == y_val[static_cast<std::size_t>(i)])
                ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(rows.rows());
    };
    run.accuracy_learned = accuracy(run.learned.params);
    KernelParams equal;
    equal.sigmas = Vector::Constant(2, params0.sigmas.mean());
    run.accuracy_equal = accuracy(equal);
    return run;
}

bool width_learning() {
    bool ok = true;
    for (const std::uint64_t seed : {1ULL, 2ULL}) {
        const WidthRun run = run_noisy_layer(seed);
        for (std::size_t i = 1; i < run.learned.trace.size(); ++i)
            ok &= expect(run.learned.trace[i].criterion <=
                             run.learned.trace[i - 1].criterion,
                         "criterion rose at seed " + std::to_string(seed));
        const double ratio0 = run.initial(1) / run.initial(0);
        const double ratio1 =
            run.learned.params.sigmas(1) / run.learned.params.sigmas(0);
        ok &= expect(ratio1 > ratio0,
                     "noisy layer was not down-weighted at seed " +
                         std::to_string(seed));
        ok &= expect(run.accuracy_learned >= run.accuracy_equal,
                     "learned widths lost to equal widths at seed " +
                         std::to_string(seed));
    }
    return ok;
}

// Shared by criteria 10 and 11.
struct MoonsRun {
    StackModel model;
    Vector sigmas;
    double accuracy_composite = 0.0;
    double accuracy_linear = 0.0;
};

MoonsRun run_moons() {
    const auto train = testing::make_moons(400, 0.15, 2026);
    const auto test = testing::make_moons(200, 0.15, 7026);

    MoonsRun run;
    const auto trained = train_stack(DataMatrix(train.x), 0.5, 0.0, 2, 1e-5);
    run.model = trained.model;
    const LayerOutputs r_test = forward(trained.model, DataMatrix(test.x));

    KernelParams params;
    params.sigmas = median_widths(trained.outputs, 2026);
    run.sigmas = params.sigmas;

    const Matrix g = gram(trained.outputs, trained.outputs, params);
    const BinarySvm composite = smo_train(g, train.labels, 10.0, 1e-3);
    const Matrix k_test = gram(r_test, trained.outputs, params);

    int correct = 0;
    for (Index i = 0; i < k_test.rows(); ++i) {
        const int pred = decision(composite, k_test.row(i).transpose()) > 0.0 ? 1 : -1;
        if (pred == test.labels[static_cast<std::size_t>(i)])
            ++correct;
    }
    run.accuracy_composite = static_cast<double>(correct) / 200.0;

    const Matrix g_lin = train.x.transpose() * train.x;
    const BinarySvm linear = smo_train(g_lin, train.labels, 10.0, 1e-3);
    const Matrix k_lin = test.x.transpose() * train.x;
    correct = 0;
    for (Index i = 0; i < k_lin.rows(); ++i) {
        const int pred = decision(linear, k_lin.row(i).transpose()) > 0.0 ? 1 : -1;
        if (pred == test.labels[static_cast<std::size_t>(i)])
            ++correct;
    }
    run.accuracy_linear = static_cast<double>(correct) / 200.0;
    return run;
}

bool end_to_end_moons() {
    const MoonsRun run = run_moons();
    bool ok = expect(run.accuracy_composite >= run.accuracy_linear,
                     "composite kernel lost to the linear baseline");
    ok &= expect(run.accuracy_composite >= 0.9, "composite accuracy below 0.9");
    return ok;
}

bool reproducibility() {
    bool ok = true;

    // Closed form and finite-m solves.
    const DataMatrix x(testing::gaussian_matrix(10, 50, 2026));
    ok &= expect(solve_lide(x, 0.5, 1e-5).w == solve_lide(x, 0.5, 1e-5).w,
                 "closed-form rerun differs");
    const CorruptionConfig cfg{0.5, 1000, 31337};
    ok &= expect(solve_finite_m(x, cfg, 1e-5).w == solve_finite_m(x, cfg, 1e-5).w,
                 "finite-m rerun differs");

    // Stack training.
    const auto stack_a = train_stack(x, 0.5, 0.0, 3, 1e-5);
    const auto stack_b = train_stack(x, 0.5, 0.0, 3, 1e-5);
    for (std::size_t k = 0; k < 3; ++k)
        ok &= expect(stack_a.model.layers[k].w == stack_b.model.layers[k].w,
                     "stack rerun differs");

    // Width learning.
    const WidthRun width_a = run_noisy_layer(1);
    const WidthRun width_b = run_noisy_layer(1);
    ok &= expect(width_a.learned.params.sigmas == width_b.learned.params.sigmas,
                 "width-learning rerun differs");
    ok &= expect(width_a.accuracy_learned == width_b.accuracy_learned &&
                     width_a.accuracy_equal == width_b.accuracy_equal,
                 "width-learning metrics differ");

    // End-to-end moons pipeline.
    const MoonsRun moons_a = run_moons();
    const MoonsRun moons_b = run_moons();
    for (std::size_t k = 0; k < moons_a.model.layers.size(); ++k)
        ok &= expect(moons_a.model.layers[k].w == moons_b.model.layers[k].w,
                     "moons stack rerun differs");
    ok &= expect(moons_a.sigmas == moons_b.sigmas, "moons widths differ");
    ok &= expect(moons_a.accuracy_composite == moons_b.accuracy_composite &&
                     moons_a.accuracy_linear == moons_b.accuracy_linear,
                 "moons metrics differ");
    return ok;
}

} // namespace

int main() {
    criterion(1, "closed form matches the exact corruption expectation",
              closed_form_vs_enumeration, 5.0);
    criterion(2, "finite-m solves converge monotonically to the closed form",
              monte_carlo_convergence, 60.0);
    criterion(3, "p=1, eps=0 on full-rank data recovers [I|0]", identity_limit);
    criterion(4, "the learned map denoises held-out corruptions", denoising_gain);
    criterion(5, "hand-verified solves: [[1,3]] and the lone sample",
              hand_verified_solves);
    criterion(6, "stack contracts: equivalence, freezing, shapes, determinism",
              stack_contracts);
    criterion(7, "kernel width gradients and Gram positive semidefiniteness",
              kernel_gradient_check);
    criterion(8, "SMO agrees with the brute-force QP and passes KKT audits",
              svm_oracle);
    criterion(9, "width learning shrinks the criterion and down-weights noise",
              width_learning);
    criterion(10, "two-moons pipeline beats the linear baseline and 0.9",
              end_to_end_moons, 120.0);
    criterion(11, "identical seeds reproduce bit-identical results",
              reproducibility);

    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
