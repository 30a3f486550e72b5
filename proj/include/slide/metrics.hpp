#pragma once

#include "slide/types.hpp"

#include <optional>
#include <vector>

namespace slide {

struct Metrics {
    double accuracy = 0.0;
    std::vector<int> classes;            // ascending union of truth/predictions
    Eigen::MatrixXi confusion;           // rows: true class, cols: predicted
    std::vector<double> per_class_error; // aligned with classes
    std::optional<double> error_rate;    // binary problems only
};

Metrics evaluate(const std::vector<int>& predictions, const std::vector<int>& labels);

} // namespace slide
