#pragma once

#include "slide/denoise.hpp"
#include "slide/types.hpp"

#include <vector>

namespace slide {

// Greedily trained stack of denoising layers. Every layer is d x (d+1);
// representation dimensionality never changes across layers.
struct StackModel {
    std::vector<DenoiseLayer> layers;
    double t = 0.0;   // threshold between layers
    double p = 1.0;   // survival probability each layer was trained at
    double eps = kDefaultEps;
    Index d = 0;      // feature dimension
    // Fit each layer on the thresholded representation instead of the raw
    // one. Off by default: the greedy recipe fits layer k+1 on h^k and only
    // applies it to the thresholded input.
    bool fit_on_thresholded = false;
};

// Per-layer representations h^0..h^l, each d x n; reps[0] is the raw input.
struct LayerOutputs {
    std::vector<Matrix> reps;

    Index layer_count() const { return static_cast<Index>(reps.size()) - 1; }
    // Per-layer column i, as one vector per layer (for kernel evaluation).
    std::vector<Vector> sample(Index i) const;
};

struct StackTrainResult {
    StackModel model;
    LayerOutputs outputs; // cached training representations
};

// Binarizes entrywise (1 iff entry > t, strictly) and appends a ones row:
// d x n -> (d+1) x n.
Matrix threshold(const Matrix& h, double t);

// Trains layer_count layers greedily: layer k+1 is the closed-form denoiser
// of h^k, and h^{k+1} = W^{k+1} [T(h^k); 1]. Earlier layers are frozen by
// construction. A singular solve reports the offending layer index.
StackTrainResult train_stack(const DataMatrix& x, double p, double t,
                             int layer_count, double eps = kDefaultEps,
                             bool fit_on_thresholded = false);

// Continues greedy training on top of an existing model; layers already in
// the model are reused bit-identically.
StackTrainResult extend_stack(const StackModel& model, const DataMatrix& x,
                              int extra_layers);

// Pure replay of the layer recursion; bit-identical to the training pass.
LayerOutputs forward(const StackModel& model, const DataMatrix& x);

} // namespace slide
