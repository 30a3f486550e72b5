#pragma once

#include "slide/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace slide {

struct LabeledDataset {
    DataMatrix features; // columns are samples
    std::optional<std::vector<int>> labels;
    // Display names per class id. No current input format carries names, so
    // loaders leave this empty; it is part of the dataset contract for
    // callers that attach them out of band.
    std::optional<std::map<int, std::string>> class_names;
};

enum class DataFormat { csv, sparse };

// Where CSV labels live. Sparse files always carry a leading label token.
enum class CsvLabels { none, last_column };

// CSV: one sample per line, comma-separated doubles; lines starting with '#'
// are skipped. With last_column the trailing field must be an integer label.
// Sparse: "label idx:val idx:val ..." with 1-based indices; missing entries
// are zero; min_features raises the inferred dimension when the file never
// touches the trailing features.
LabeledDataset load_dataset(const std::string& path, DataFormat format,
                            CsvLabels csv_labels = CsvLabels::none,
                            Index min_features = 0);

// Writes one sample per line with round-trip exact formatting (%.17g).
// The optional header line is emitted verbatim (callers include the '#').
void write_csv(const std::string& path, const Matrix& columns_are_samples,
               const std::string& header = "");

DataFormat parse_format(const std::string& name);

} // namespace slide
