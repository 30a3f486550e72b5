#include "slide/model_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <string>

namespace slide {

using nlohmann::json;

std::string encode_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double decode_double(const std::string& s) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw ParseError("model file: bad float literal '" + s + "'");
    return v;
}

namespace {

json matrix_to_json(const Matrix& m) {
    json values = json::array();
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c)
            values.push_back(encode_double(m(r, c))); // row-major on disk
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::move(values)}};
}

Matrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const json& values = j.at("values");
    if (rows < 0 || cols < 0 ||
        static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) !=
            values.size())
        throw ShapeError("model file: matrix " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " does not match " +
                         std::to_string(values.size()) + " values");
    Matrix m(rows, cols);
    std::size_t k = 0;
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c)
            m(r, c) = decode_double(values[k++].get<std::string>());
    return m;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i)
        out.push_back(encode_double(v(i)));
    return out;
}

Vector vector_from_json(const json& j) {
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Index>(i)) = decode_double(j[i].get<std::string>());
    return v;
}

} // namespace

ModelFile::SvmPart pack_svm(const OvrModel& ovr, const Matrix& train_inputs,
                            double c) {
    std::set<int> keep_set;
    for (const BinarySvm& machine : ovr.machines)
        keep_set.insert(machine.sv_indices.begin(), machine.sv_indices.end());
    const std::vector<int> keep(keep_set.begin(), keep_set.end());

    ModelFile::SvmPart part;
    part.c = c;
    part.support_inputs.resize(train_inputs.rows(), static_cast<Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k)
        part.support_inputs.col(static_cast<Index>(k)) = train_inputs.col(keep[k]);

    part.ovr.classes = ovr.classes;
    for (const BinarySvm& machine : ovr.machines) {
        BinarySvm packed;
        packed.c = machine.c;
        packed.bias = machine.bias;
        packed.label_map = machine.label_map;
        packed.alphas.resize(static_cast<Index>(keep.size()));
        packed.labels.resize(keep.size());
        for (std::size_t k = 0; k < keep.size(); ++k) {
            packed.alphas(static_cast<Index>(k)) = machine.alphas(keep[k]);
            packed.labels[k] = machine.labels[static_cast<std::size_t>(keep[k])];
            if (packed.alphas(static_cast<Index>(k)) > 0.0)
                packed.sv_indices.push_back(static_cast<int>(k));
        }
        part.ovr.machines.push_back(std::move(packed));
    }
    return part;
}

void save_model(const ModelFile& model, const std::string& path) {
    json j;
    j["format_version"] = model.format_version;

    json stack;
    stack["d"] = model.stack.d;
    stack["p"] = encode_double(model.stack.p);
    stack["t"] = encode_double(model.stack.t);
    stack["eps"] = encode_double(model.stack.eps);
    stack["fit_on_thresholded"] = model.stack.fit_on_thresholded;
    json layers = json::array();
    for (const DenoiseLayer& layer : model.stack.layers)
        layers.push_back(matrix_to_json(layer.w));
    stack["layers"] = std::move(layers);
    j["stack"] = std::move(stack);

    if (model.kernel) {
        j["kernel"] = json{{"sigma", encode_double(model.kernel->sigma)},
                           {"sigmas", vector_to_json(model.kernel->sigmas)}};
    }
    if (model.svm) {
        json svm;
        svm["c"] = encode_double(model.svm->c);
        svm["classes"] = model.svm->ovr.classes;
        svm["support_inputs"] = matrix_to_json(model.svm->support_inputs);
        json machines = json::array();
        for (const BinarySvm& machine : model.svm->ovr.machines) {
            machines.push_back(json{{"class", machine.label_map[1]},
                                    {"bias", encode_double(machine.bias)},
                                    {"alphas", vector_to_json(machine.alphas)},
                                    {"labels", machine.labels}});
        }
        svm["machines"] = std::move(machines);
        j["svm"] = std::move(svm);
    }
    j["provenance"] = model.provenance.is_null() ? json::object() : model.provenance;

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            throw ParseError(tmp + ": cannot open for writing");
        out << j.dump(2) << "\n";
        if (!out.good())
            throw ParseError(tmp + ": write failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ParseError(path + ": atomic rename failed");
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(path + ": cannot open file");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }

    try {
        if (!j.contains("format_version") || !j["format_version"].is_number_integer())
            throw ParseError(path + ": missing format_version");
        const int version = j["format_version"].get<int>();
        if (version != kModelFormatVersion)
            throw FormatVersionError(path + ": unknown format_version " +
                                     std::to_string(version));

        ModelFile model;
        model.format_version = version;

        const json& stack = j.at("stack");
        model.stack.d = stack.at("d").get<Index>();
        model.stack.p = decode_double(stack.at("p").get<std::string>());
        model.stack.t = decode_double(stack.at("t").get<std::string>());
        model.stack.eps = decode_double(stack.at("eps").get<std::string>());
        model.stack.fit_on_thresholded = stack.at("fit_on_thresholded").get<bool>();
        for (const json& layer_json : stack.at("layers")) {
            DenoiseLayer layer;
            layer.w = matrix_from_json(layer_json);
            if (layer.w.rows() != model.stack.d ||
                layer.w.cols() != model.stack.d + 1)
                throw ShapeError(path + ": layer is not d x (d+1)");
            layer.p = model.stack.p;
            layer.eps = model.stack.eps;
            layer.t = model.stack.t;
            model.stack.layers.push_back(std::move(layer));
        }

        if (j.contains("kernel")) {
            KernelParams params;
            params.sigma = decode_double(j["kernel"].at("sigma").get<std::string>());
            params.sigmas = vector_from_json(j["kernel"].at("sigmas"));
            params.validate();
            model.kernel = std::move(params);
        }
        if (j.contains("svm")) {
            ModelFile::SvmPart part;
            part.c = decode_double(j["svm"].at("c").get<std::string>());
            part.support_inputs = matrix_from_json(j["svm"].at("support_inputs"));
            part.ovr.classes = j["svm"].at("classes").get<std::vector<int>>();
            for (const json& machine_json : j["svm"].at("machines")) {
                BinarySvm machine;
                machine.c = part.c;
                machine.bias = decode_double(machine_json.at("bias").get<std::string>());
                machine.alphas = vector_from_json(machine_json.at("alphas"));
                machine.labels = machine_json.at("labels").get<std::vector<int>>();
                machine.label_map = {-1, machine_json.at("class").get<int>()};
                if (machine.alphas.size() != part.support_inputs.cols() ||
                    machine.labels.size() !=
                        static_cast<std::size_t>(part.support_inputs.cols()))
                    throw ShapeError(path + ": classifier does not match stored inputs");
                for (int y : machine.labels)
                    if (y != -1 && y != 1)
                        throw ParseError(path + ": machine labels must be -1 or +1");
                for (Index t = 0; t < machine.alphas.size(); ++t)
                    if (machine.alphas(t) > 0.0)
                        machine.sv_indices.push_back(static_cast<int>(t));
                part.ovr.machines.push_back(std::move(machine));
            }
            if (part.ovr.machines.size() != part.ovr.classes.size())
                throw ShapeError(path + ": machine/class count mismatch");
            model.svm = std::move(part);
        }
        if (j.contains("provenance"))
            model.provenance = j["provenance"];
        return model;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace slide
