#include "slide/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace slide {

Metrics evaluate(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.empty())
        throw InvalidParameterError("evaluate: empty prediction set");
    if (predictions.size() != labels.size())
        throw ShapeError("evaluate: prediction/label count mismatch");

    std::set<int> class_set(labels.begin(), labels.end());
    class_set.insert(predictions.begin(), predictions.end());

    Metrics m;
    m.classes.assign(class_set.begin(), class_set.end());
    std::map<int, Index> index_of;
    for (std::size_t k = 0; k < m.classes.size(); ++k)
        index_of[m.classes[k]] = static_cast<Index>(k);

    const Index k = static_cast<Index>(m.classes.size());
    m.confusion = Eigen::MatrixXi::Zero(k, k);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        m.confusion(index_of[labels[i]], index_of[predictions[i]]) += 1;
        if (labels[i] == predictions[i])
            ++correct;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());

    m.per_class_error.resize(m.classes.size(), 0.0);
    for (Index r = 0; r < k; ++r) {
        const int total = m.confusion.row(r).sum();
        m.per_class_error[static_cast<std::size_t>(r)] =
            total == 0 ? 0.0
                       : 1.0 - static_cast<double>(m.confusion(r, r)) /
                                   static_cast<double>(total);
    }
    const std::set<int> label_classes(labels.begin(), labels.end());
    if (label_classes.size() == 2)
        m.error_rate = 1.0 - m.accuracy;
    return m;
}

} // namespace slide
