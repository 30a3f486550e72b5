#pragma once

#include "slide/kernel.hpp"
#include "slide/stack.hpp"
#include "slide/svm.hpp"
#include "slide/types.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace slide {

inline constexpr int kModelFormatVersion = 1;

// On-disk model: stack always present, kernel/classifier attached by fit-svm.
// Numeric payloads are hexfloat strings so round trips are bit-exact; the
// metadata stays human-readable. Files are written temp-then-rename.
struct ModelFile {
    int format_version = kModelFormatVersion;
    StackModel stack;
    std::optional<KernelParams> kernel;

    struct SvmPart {
        OvrModel ovr;         // coefficients indexed over support_inputs columns
        Matrix support_inputs; // d x s raw inputs, replayed through the stack
        double c = 1.0;
    };
    std::optional<SvmPart> svm;

    nlohmann::json provenance; // seeds and creation parameters
};

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

// Drops training samples that are support vectors in no machine and
// re-indexes every machine's coefficients over the kept columns. Decision
// values are unchanged: dropped samples have alpha = 0 in all machines.
ModelFile::SvmPart pack_svm(const OvrModel& ovr, const Matrix& train_inputs,
                            double c);

// Lossless double <-> text (hexfloat).
std::string encode_double(double v);
double decode_double(const std::string& s);

} // namespace slide
