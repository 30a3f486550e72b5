#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace slide {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error hierarchy. Each class maps to one failure family so callers can
// translate to exit codes without string matching.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad scalar argument (probability out of range, layer count < 1, ...).
struct InvalidParameterError : Error {
    using Error::Error;
};

// Matrix/vector dimensions do not satisfy an operation's contract.
struct ShapeError : Error {
    using Error::Error;
};

// A linear system could not be factorized or solved.
struct SingularSystemError : Error {
    using Error::Error;
};

// Labels violate a contract (single class, non-binary where binary required).
struct LabelError : Error {
    using Error::Error;
};

// An iterative solver exhausted its iteration budget.
struct NonConvergenceError : Error {
    using Error::Error;
};

// Malformed input file (CSV/sparse/model); message carries the line number
// when one is known.
struct ParseError : Error {
    using Error::Error;
};

// Model file with an unrecognized format_version.
struct FormatVersionError : Error {
    using Error::Error;
};

// Column-oriented sample matrix: column i is sample x_i, so data is d x n.
// Construction validates the invariants once; downstream code relies on them.
class DataMatrix {
public:
    explicit DataMatrix(Matrix data) : data_(std::move(data)) {
        if (data_.rows() < 1)
            throw InvalidParameterError("DataMatrix: feature count must be >= 1");
        if (data_.cols() < 1)
            throw InvalidParameterError("DataMatrix: sample count must be >= 1");
        if (!data_.allFinite())
            throw InvalidParameterError("DataMatrix: entries must be finite");
    }

    const Matrix& data() const { return data_; }
    Index d() const { return data_.rows(); }
    Index n() const { return data_.cols(); }

private:
    Matrix data_;
};

} // namespace slide
