#include "slide/dataset.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace slide {

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line,
                             const std::string& what) {
    throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& token, const std::string& path,
                    std::size_t line) {
    if (token.empty())
        parse_fail(path, line, "empty field");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || errno == ERANGE)
        parse_fail(path, line, "not a number: '" + token + "'");
    return v;
}

int parse_label(const std::string& token, const std::string& path,
                std::size_t line) {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(token.c_str(), &end, 10);
    if (token.empty() || end != token.c_str() + token.size() || errno == ERANGE)
        parse_fail(path, line, "not an integer label: '" + token + "'");
    return static_cast<int>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(s);
    while (std::getline(in, field, sep))
        out.push_back(field);
    if (!s.empty() && s.back() == sep)
        out.push_back("");
    return out;
}

LabeledDataset load_csv(const std::string& path, std::istream& in,
                        CsvLabels csv_labels) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::size_t width = 0;
    std::size_t line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        const std::vector<std::string> fields = split(line, ',');
        if (width == 0)
            width = fields.size();
        else if (fields.size() != width)
            parse_fail(path, line_no,
                       "expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()));

        const std::size_t feature_count =
            csv_labels == CsvLabels::last_column ? width - 1 : width;
        if (feature_count == 0)
            parse_fail(path, line_no, "no feature columns");
        std::vector<double> row;
        row.reserve(feature_count);
        for (std::size_t f = 0; f < feature_count; ++f)
            row.push_back(parse_double(fields[f], path, line_no));
        rows.push_back(std::move(row));
        if (csv_labels == CsvLabels::last_column)
            labels.push_back(parse_label(fields.back(), path, line_no));
    }
    if (rows.empty())
        throw ParseError(path + ": no samples");

    Matrix data(static_cast<Index>(rows.front().size()),
                static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t f = 0; f < rows[i].size(); ++f)
            data(static_cast<Index>(f), static_cast<Index>(i)) = rows[i][f];

    LabeledDataset out{DataMatrix(std::move(data)), std::nullopt, std::nullopt};
    if (csv_labels == CsvLabels::last_column)
        out.labels = std::move(labels);
    return out;
}

LabeledDataset load_sparse(const std::string& path, std::istream& in,
                           Index min_features) {
    std::vector<std::map<Index, double>> samples;
    std::vector<int> labels;
    Index max_index = 0;
    std::size_t line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        std::istringstream tokens(line);
        std::string token;
        if (!(tokens >> token))
            continue;
        labels.push_back(parse_label(token, path, line_no));

        std::map<Index, double> entries;
        while (tokens >> token) {
            const std::size_t colon = token.find(':');
            if (colon == std::string::npos)
                parse_fail(path, line_no, "expected idx:val, got '" + token + "'");
            const int idx = parse_label(token.substr(0, colon), path, line_no);
            if (idx < 1)
                parse_fail(path, line_no, "indices are 1-based, got " +
                                              std::to_string(idx));
            const double val =
                parse_double(token.substr(colon + 1), path, line_no);
            if (!entries.emplace(idx - 1, val).second)
                parse_fail(path, line_no,
                           "duplicate index " + std::to_string(idx));
            max_index = std::max(max_index, static_cast<Index>(idx));
        }
        samples.push_back(std::move(entries));
    }
    if (samples.empty())
        throw ParseError(path + ": no samples");

    const Index d = std::max(max_index, min_features);
    if (d < 1)
        throw ParseError(path + ": no features referenced and no dimension given");
    Matrix data = Matrix::Zero(d, static_cast<Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (const auto& [idx, val] : samples[i])
            data(idx, static_cast<Index>(i)) = val;

    return LabeledDataset{DataMatrix(std::move(data)), std::move(labels), std::nullopt};
}

} // namespace

LabeledDataset load_dataset(const std::string& path, DataFormat format,
                            CsvLabels csv_labels, Index min_features) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(path + ": cannot open file");
    return format == DataFormat::csv ? load_csv(path, in, csv_labels)
                                     : load_sparse(path, in, min_features);
}

void write_csv(const std::string& path, const Matrix& columns_are_samples,
               const std::string& header) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            throw ParseError(tmp + ": cannot open for writing");
        if (!header.empty())
            out << header << "\n";
        char buf[64];
        for (Index i = 0; i < columns_are_samples.cols(); ++i) {
            for (Index f = 0; f < columns_are_samples.rows(); ++f) {
                std::snprintf(buf, sizeof(buf), "%.17g", columns_are_samples(f, i));
                out << (f > 0 ? "," : "") << buf;
            }
            out << "\n";
        }
        if (!out.good())
            throw ParseError(tmp + ": write failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ParseError(path + ": atomic rename failed");
}

DataFormat parse_format(const std::string& name) {
    if (name == "csv") return DataFormat::csv;
    if (name == "sparse") return DataFormat::sparse;
    throw InvalidParameterError("unknown data format '" + name +
                                "' (expected csv or sparse)");
}

} // namespace slide
