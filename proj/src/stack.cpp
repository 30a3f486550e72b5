#include "slide/stack.hpp"

#include <string>
#include <utility>

namespace slide {

std::vector<Vector> LayerOutputs::sample(Index i) const {
    if (reps.empty())
        throw ShapeError("LayerOutputs::sample: no representations");
    if (i < 0 || i >= reps.front().cols())
        throw ShapeError("LayerOutputs::sample: column index out of range");
    std::vector<Vector> out;
    out.reserve(reps.size());
    for (const Matrix& h : reps)
        out.push_back(h.col(i));
    return out;
}

Matrix threshold(const Matrix& h, double t) {
    Matrix out(h.rows() + 1, h.cols());
    out.topRows(h.rows()) =
        (h.array() > t).template cast<double>().matrix();
    out.row(h.rows()).setOnes();
    return out;
}

namespace {

// Fits the next layer on rep (or on its thresholded image) and produces the
// following representation. Shared by train and extend.
DenoiseLayer fit_layer(const Matrix& rep, double p, double t, double eps,
                       bool fit_on_thresholded, int layer_index) {
    try {
        Matrix fit_input = fit_on_thresholded
                               ? threshold(rep, t).topRows(rep.rows()).eval()
                               : rep;
        DenoiseLayer layer = solve_lide(DataMatrix(std::move(fit_input)), p, eps);
        layer.t = t;
        return layer;
    } catch (const SingularSystemError& e) {
        throw SingularSystemError("train_stack: layer " +
                                  std::to_string(layer_index) + ": " + e.what());
    }
}

} // namespace

StackTrainResult train_stack(const DataMatrix& x, double p, double t,
                             int layer_count, double eps,
                             bool fit_on_thresholded) {
    if (layer_count < 1)
        throw InvalidParameterError("train_stack: layer count must be >= 1");

    StackTrainResult result;
    result.model.t = t;
    result.model.p = p;
    result.model.eps = eps;
    result.model.d = x.d();
    result.model.fit_on_thresholded = fit_on_thresholded;
    result.outputs.reps.push_back(x.data());

    for (int k = 0; k < layer_count; ++k) {
        const Matrix& rep = result.outputs.reps.back();
        DenoiseLayer layer = fit_layer(rep, p, t, eps, fit_on_thresholded, k + 1);
        result.outputs.reps.push_back(denoise_transform(layer, threshold(rep, t)));
        result.model.layers.push_back(std::move(layer));
    }
    return result;
}

StackTrainResult extend_stack(const StackModel& model, const DataMatrix& x,
                              int extra_layers) {
    if (extra_layers < 1)
        throw InvalidParameterError("extend_stack: extra layer count must be >= 1");

    StackTrainResult result;
    result.model = model;
    result.outputs = forward(model, x);
    for (int k = 0; k < extra_layers; ++k) {
        const Matrix& rep = result.outputs.reps.back();
        const int index = static_cast<int>(result.model.layers.size()) + 1;
        DenoiseLayer layer = fit_layer(rep, model.p, model.t, model.eps,
                                       model.fit_on_thresholded, index);
        result.outputs.reps.push_back(denoise_transform(layer, threshold(rep, model.t)));
        result.model.layers.push_back(std::move(layer));
    }
    return result;
}

LayerOutputs forward(const StackModel& model, const DataMatrix& x) {
    if (x.d() != model.d)
        throw ShapeError("forward: input has " + std::to_string(x.d()) +
                         " features, model expects " + std::to_string(model.d));
    LayerOutputs out;
    out.reps.push_back(x.data());
    for (const DenoiseLayer& layer : model.layers)
        out.reps.push_back(denoise_transform(layer, threshold(out.reps.back(), model.t)));
    return out;
}

} // namespace slide
