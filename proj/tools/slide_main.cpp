// Command-line surface for the stacked linear denoiser pipeline:
//   train-features  closed-form greedy stack training
//   transform       emit layer representations as CSV
//   fit-svm         attach composite-kernel widths and an SVM to a model
//   predict / eval  classify new data, report metrics
//   oracle          finite-copy vs closed-form convergence report
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

#include "slide/corruption.hpp"
#include "slide/dataset.hpp"
#include "slide/denoise.hpp"
#include "slide/kernel.hpp"
#include "slide/metrics.hpp"
#include "slide/model_io.hpp"
#include "slide/rng.hpp"
#include "slide/stack.hpp"
#include "slide/svm.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace slide;
using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

void print_config(const std::string& command,
                  const std::vector<std::pair<std::string, std::string>>& entries) {
    std::cout << "config command=" << command << "\n";
    for (const auto& [key, value] : entries)
        std::cout << "config " << key << "=" << value << "\n";
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvLabels resolve_labels_flag(const std::string& labels_col, DataFormat format) {
    if (labels_col == "none")
        return CsvLabels::none;
    if (labels_col == "last")
        return CsvLabels::last_column;
    if (labels_col == "auto")
        return format == DataFormat::csv ? CsvLabels::last_column : CsvLabels::none;
    throw InvalidParameterError("--labels-col must be auto, last or none");
}

LabeledDataset load_input(const std::string& path, const std::string& format_name,
                          const std::string& labels_col) {
    const DataFormat format = parse_format(format_name);
    return load_dataset(path, format, resolve_labels_flag(labels_col, format));
}

std::vector<std::uint64_t> parse_m_list(const std::string& csv) {
    std::vector<std::uint64_t> out;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
            throw InvalidParameterError("--m-list: bad entry '" + tok + "'");
        out.push_back(std::stoull(tok));
        if (out.back() < 1)
            throw InvalidParameterError("--m-list: entries must be >= 1");
    }
    if (out.empty())
        throw InvalidParameterError("--m-list: no entries");
    return out;
}

std::vector<double> parse_double_list(const std::string& csv, const char* flag) {
    std::vector<double> out;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (tok.empty() || end != tok.c_str() + tok.size())
            throw InvalidParameterError(std::string(flag) + ": bad entry '" + tok +
                                        "'");
        out.push_back(v);
    }
    if (out.empty())
        throw InvalidParameterError(std::string(flag) + ": no entries");
    return out;
}

// --- subcommand payloads ---------------------------------------------------

struct TrainFeaturesArgs {
    std::string input, format = "csv", labels_col = "none", out;
    double p = 0.5, t = 0.0, eps = kDefaultEps;
    int layers = 1;
    std::uint64_t seed = 0;
    bool fit_on_thresholded = false;
};

int run_train_features(const TrainFeaturesArgs& a) {
    print_config("train-features",
                 {{"input", a.input},
                  {"format", a.format},
                  {"labels_col", a.labels_col},
                  {"p", fmt(a.p)},
                  {"t", fmt(a.t)},
                  {"layers", std::to_string(a.layers)},
                  {"eps", fmt(a.eps)},
                  {"fit_on_thresholded", a.fit_on_thresholded ? "true" : "false"},
                  {"seed", std::to_string(a.seed)},
                  {"rng", kRngAlgorithm},
                  {"out", a.out}});

    const LabeledDataset data = load_input(a.input, a.format, a.labels_col);
    const StackTrainResult trained = train_stack(data.features, a.p, a.t, a.layers,
                                                 a.eps, a.fit_on_thresholded);

    ModelFile model;
    model.stack = trained.model;
    model.provenance = {{"command", "train-features"}, {"seed", a.seed},
                        {"rng", kRngAlgorithm},        {"input", a.input},
                        {"p", a.p},                    {"t", a.t},
                        {"layers", a.layers},          {"eps", a.eps}};
    save_model(model, a.out);
    std::cout << "trained layers=" << trained.model.layers.size()
              << " d=" << trained.model.d << " n=" << data.features.n() << "\n";
    return 0;
}

struct TransformArgs {
    std::string model, input, format = "csv", labels_col = "none", layer = "all", out;
};

int run_transform(const TransformArgs& a) {
    print_config("transform", {{"model", a.model},
                               {"input", a.input},
                               {"format", a.format},
                               {"labels_col", a.labels_col},
                               {"layer", a.layer},
                               {"out", a.out}});

    const ModelFile model = load_model(a.model);
    const LabeledDataset data = load_input(a.input, a.format, a.labels_col);
    const LayerOutputs reps = forward(model.stack, data.features);
    const Index layer_count = reps.layer_count();

    if (a.layer == "all") {
        const Index d = model.stack.d;
        Matrix stacked(d * (layer_count + 1), data.features.n());
        std::string header = "# layer";
        for (Index k = 0; k <= layer_count; ++k) {
            stacked.middleRows(k * d, d) = reps.reps[static_cast<std::size_t>(k)];
            for (Index f = 0; f < d; ++f)
                header += "," + std::to_string(k);
        }
        write_csv(a.out, stacked, header);
    } else {
        Index k = -1;
        try {
            k = static_cast<Index>(std::stol(a.layer));
        } catch (const std::exception&) {
            throw InvalidParameterError("--layer must be an index or 'all'");
        }
        if (k < 0 || k > layer_count)
            throw InvalidParameterError("--layer " + a.layer + " out of range 0.." +
                                        std::to_string(layer_count));
        write_csv(a.out, reps.reps[static_cast<std::size_t>(k)]);
    }
    std::cout << "transformed n=" << data.features.n() << " layer=" << a.layer << "\n";
    return 0;
}

struct FitSvmArgs {
    std::string model, input, format = "csv", labels_col = "auto", out, trace_out;
    std::string widths = "median";
    std::string width_grid, c_grid;
    double c = 1.0, tol = 1e-3;
    int folds = 5;
    std::uint64_t seed = 0;
};

int run_fit_svm(const FitSvmArgs& a) {
    const std::string out_path = a.out.empty() ? a.model : a.out;
    print_config("fit-svm", {{"model", a.model},
                             {"input", a.input},
                             {"format", a.format},
                             {"labels_col", a.labels_col},
                             {"c", fmt(a.c)},
                             {"tol", fmt(a.tol)},
                             {"widths", a.widths},
                             {"folds", std::to_string(a.folds)},
                             {"seed", std::to_string(a.seed)},
                             {"rng", kRngAlgorithm},
                             {"out", out_path}});

    ModelFile model = load_model(a.model);
    const LabeledDataset data = load_input(a.input, a.format, a.labels_col);
    if (!data.labels)
        throw LabelError("fit-svm: input has no labels (see --labels-col)");
    const std::vector<int>& labels = *data.labels;
    const std::set<int> classes(labels.begin(), labels.end());
    if (classes.size() < 2)
        throw LabelError("fit-svm: at least two classes required");

    const LayerOutputs reps = forward(model.stack, data.features);
    const Vector median = median_widths(reps, a.seed);

    KernelParams params;
    double c = a.c;
    if (a.widths == "median") {
        params.sigmas = median;
    } else if (a.widths == "grid") {
        std::vector<double> width_grid;
        if (a.width_grid.empty()) {
            const double base = median.mean();
            width_grid = {0.25 * base, 0.5 * base, base, 2.0 * base, 4.0 * base};
        } else {
            width_grid = parse_double_list(a.width_grid, "--width-grid");
        }
        const std::vector<double> c_grid =
            a.c_grid.empty() ? std::vector<double>{a.c}
                             : parse_double_list(a.c_grid, "--c-grid");
        const WidthSelection sel =
            cross_validate_widths(reps, labels, width_grid, c_grid, a.folds, a.seed);
        params = sel.params;
        c = sel.c;
        std::cout << "selected sigma=" << fmt(sel.params.sigmas(0)) << " c=" << fmt(sel.c)
                  << " cv_accuracy=" << fmt(sel.mean_accuracy) << "\n";
    } else if (a.widths == "learn") {
        if (classes.size() != 2)
            throw LabelError(
                "fit-svm: --widths learn supports binary problems only; "
                "use --widths median or grid for multiclass data");
        const int hi = *classes.rbegin();
        std::vector<int> pm(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i)
            pm[i] = labels[i] == hi ? 1 : -1;

        KernelParams params0;
        params0.sigmas = median;
        WidthLearnConfig cfg;
        cfg.c = a.c;
        cfg.svm_tol = a.tol;
        const WidthLearnResult learned = learn_widths(reps, pm, params0, cfg);
        params = learned.params;
        std::cout << "learned criterion start=" << fmt(learned.trace.front().criterion)
                  << " end=" << fmt(learned.trace.back().criterion)
                  << " steps=" << learned.trace.size() - 1 << "\n";
        if (!a.trace_out.empty()) {
            const std::string tmp = a.trace_out + ".tmp";
            {
                std::ofstream trace(tmp);
                if (!trace)
                    throw ParseError(tmp + ": cannot open for writing");
                trace << "iteration,criterion";
                for (Index t = 0; t < params.sigmas.size(); ++t)
                    trace << ",sigma_" << t;
                trace << "\n";
                for (const WidthLearnTraceRow& row : learned.trace) {
                    trace << row.iteration << "," << fmt(row.criterion);
                    for (Index t = 0; t < row.sigmas.size(); ++t)
                        trace << "," << fmt(row.sigmas(t));
                    trace << "\n";
                }
            }
            if (std::rename(tmp.c_str(), a.trace_out.c_str()) != 0)
                throw ParseError(a.trace_out + ": atomic rename failed");
        }
    } else {
        throw InvalidParameterError("--widths must be median, grid or learn");
    }

    const Matrix g = gram(reps, reps, params);
    const OvrModel ovr = train_ovr(g, labels, c, a.tol);

    model.kernel = params;
    model.svm = pack_svm(ovr, data.features.data(), c);
    json prov = model.provenance.is_null() ? json::object() : model.provenance;
    prov["fit_svm"] = {{"seed", a.seed}, {"rng", kRngAlgorithm}, {"c", c},
                       {"widths", a.widths}, {"input", a.input}};
    model.provenance = prov;
    save_model(model, out_path);

    std::cout << "fitted machines=" << ovr.machines.size()
              << " support_vectors=" << model.svm->support_inputs.cols();
    std::cout << " sigmas=";
    for (Index t = 0; t < params.sigmas.size(); ++t)
        std::cout << (t ? "," : "") << fmt(params.sigmas(t));
    std::cout << "\n";
    return 0;
}

std::vector<int> predict_with_model(const ModelFile& model, const DataMatrix& x) {
    if (!model.kernel || !model.svm)
        throw InvalidParameterError("model has no classifier; run fit-svm first");
    const LayerOutputs reps = forward(model.stack, x);
    const LayerOutputs sv_reps =
        forward(model.stack, DataMatrix(model.svm->support_inputs));
    const Matrix k_rows = gram(reps, sv_reps, *model.kernel);
    return predict_ovr(model.svm->ovr, k_rows);
}

struct PredictArgs {
    std::string model, input, format = "csv", labels_col = "none", out;
};

int run_predict(const PredictArgs& a) {
    print_config("predict", {{"model", a.model},
                             {"input", a.input},
                             {"format", a.format},
                             {"labels_col", a.labels_col},
                             {"out", a.out}});
    const ModelFile model = load_model(a.model);
    const LabeledDataset data = load_input(a.input, a.format, a.labels_col);
    const std::vector<int> pred = predict_with_model(model, data.features);

    const std::string tmp = a.out + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            throw ParseError(tmp + ": cannot open for writing");
        for (int p : pred)
            out << p << "\n";
    }
    if (std::rename(tmp.c_str(), a.out.c_str()) != 0)
        throw ParseError(a.out + ": atomic rename failed");
    std::cout << "predicted n=" << pred.size() << "\n";
    return 0;
}

struct EvalArgs {
    std::string model, input, format = "csv", labels_col = "auto";
    bool as_json = false;
};

int run_eval(const EvalArgs& a) {
    print_config("eval", {{"model", a.model},
                          {"input", a.input},
                          {"format", a.format},
                          {"labels_col", a.labels_col}});
    const ModelFile model = load_model(a.model);
    const LabeledDataset data = load_input(a.input, a.format, a.labels_col);
    if (!data.labels)
        throw LabelError("eval: input has no labels (see --labels-col)");
    const std::vector<int> pred = predict_with_model(model, data.features);
    const Metrics m = evaluate(pred, *data.labels);

    if (a.as_json) {
        json j;
        j["accuracy"] = m.accuracy;
        if (m.error_rate)
            j["error_rate"] = *m.error_rate;
        j["classes"] = m.classes;
        json confusion = json::array();
        for (Index r = 0; r < m.confusion.rows(); ++r) {
            json row = json::array();
            for (Index c = 0; c < m.confusion.cols(); ++c)
                row.push_back(m.confusion(r, c));
            confusion.push_back(std::move(row));
        }
        j["confusion"] = std::move(confusion);
        json errors = json::object();
        for (std::size_t k = 0; k < m.classes.size(); ++k)
            errors[std::to_string(m.classes[k])] = m.per_class_error[k];
        j["per_class_error"] = std::move(errors);
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    std::cout << "accuracy=" << fmt(m.accuracy) << "\n";
    if (m.error_rate)
        std::cout << "error_rate=" << fmt(*m.error_rate) << "\n";
    for (std::size_t k = 0; k < m.classes.size(); ++k)
        std::cout << "class_" << m.classes[k]
                  << "_error=" << fmt(m.per_class_error[k]) << "\n";
    for (Index r = 0; r < m.confusion.rows(); ++r)
        for (Index c = 0; c < m.confusion.cols(); ++c)
            std::cout << "confusion_" << m.classes[static_cast<std::size_t>(r)] << "_"
                      << m.classes[static_cast<std::size_t>(c)] << "="
                      << m.confusion(r, c) << "\n";
    return 0;
}

struct OracleArgs {
    std::string input, format = "csv", labels_col = "none", out;
    std::string m_list = "1,10,100,1000,10000";
    double p = 0.5, eps = kDefaultEps;
    std::uint64_t seeds = 20, seed = 0;
};

int run_oracle(const OracleArgs& a) {
    print_config("oracle", {{"input", a.input},
                            {"format", a.format},
                            {"labels_col", a.labels_col},
                            {"p", fmt(a.p)},
                            {"m_list", a.m_list},
                            {"seeds", std::to_string(a.seeds)},
                            {"seed", std::to_string(a.seed)},
                            {"eps", fmt(a.eps)},
                            {"rng", kRngAlgorithm},
                            {"out", a.out}});

    const LabeledDataset data = load_input(a.input, a.format, a.labels_col);
    const std::vector<ConvergenceRow> rows = convergence_report(
        data.features, a.p, parse_m_list(a.m_list), a.seeds, a.seed, a.eps);

    const std::string tmp = a.out + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            throw ParseError(tmp + ": cannot open for writing");
        out << "m,seed,frobenius_error\n";
        for (const ConvergenceRow& row : rows)
            out << row.m << "," << row.seed << "," << fmt(row.frobenius_error) << "\n";
    }
    if (std::rename(tmp.c_str(), a.out.c_str()) != 0)
        throw ParseError(a.out + ": atomic rename failed");

    std::map<std::uint64_t, double> mean_by_m;
    for (const ConvergenceRow& row : rows)
        mean_by_m[row.m] += row.frobenius_error / static_cast<double>(a.seeds);
    for (const auto& [m, err] : mean_by_m)
        std::cout << "mean_error m=" << m << " frobenius=" << fmt(err) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stacked linear denoiser: closed-form feature learning with a "
                 "composite-kernel SVM"};
    app.require_subcommand(1);

    TrainFeaturesArgs train_args;
    CLI::App* train = app.add_subcommand("train-features",
                                         "train the closed-form layer stack");
    train->add_option("--input", train_args.input, "input data file")->required();
    train->add_option("--format", train_args.format, "csv|sparse");
    train->add_option("--labels-col", train_args.labels_col, "auto|last|none");
    train->add_option("--p", train_args.p, "survival probability in (0,1]")->required();
    train->add_option("--t", train_args.t, "threshold between layers");
    train->add_option("--layers", train_args.layers, "layer count")->required();
    train->add_option("--eps", train_args.eps, "ridge regularizer");
    train->add_option("--seed", train_args.seed, "run seed (recorded)");
    train->add_flag("--fit-on-thresholded", train_args.fit_on_thresholded,
                    "fit layers on thresholded representations (experimental)");
    train->add_option("--out", train_args.out, "output model path")->required();

    TransformArgs transform_args;
    CLI::App* transform = app.add_subcommand("transform", "emit layer representations");
    transform->add_option("--model", transform_args.model)->required();
    transform->add_option("--input", transform_args.input)->required();
    transform->add_option("--format", transform_args.format, "csv|sparse");
    transform->add_option("--labels-col", transform_args.labels_col, "auto|last|none");
    transform->add_option("--layer", transform_args.layer, "layer index or 'all'");
    transform->add_option("--out", transform_args.out, "output CSV path")->required();

    FitSvmArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit-svm", "attach kernel widths and an SVM");
    fit->add_option("--model", fit_args.model)->required();
    fit->add_option("--input", fit_args.input)->required();
    fit->add_option("--format", fit_args.format, "csv|sparse");
    fit->add_option("--labels-col", fit_args.labels_col, "auto|last|none");
    fit->add_option("--c", fit_args.c, "SVM box constraint");
    fit->add_option("--tol", fit_args.tol, "SMO KKT tolerance");
    fit->add_option("--widths", fit_args.widths, "median|grid|learn");
    fit->add_option("--width-grid", fit_args.width_grid, "comma list for --widths grid");
    fit->add_option("--c-grid", fit_args.c_grid, "comma list for --widths grid");
    fit->add_option("--folds", fit_args.folds, "cross-validation folds");
    fit->add_option("--seed", fit_args.seed, "run seed")->required();
    fit->add_option("--trace-out", fit_args.trace_out, "width-learning trace CSV");
    fit->add_option("--out", fit_args.out, "output model (default: --model path)");

    PredictArgs predict_args;
    CLI::App* predict = app.add_subcommand("predict", "classify new samples");
    predict->add_option("--model", predict_args.model)->required();
    predict->add_option("--input", predict_args.input)->required();
    predict->add_option("--format", predict_args.format, "csv|sparse");
    predict->add_option("--labels-col", predict_args.labels_col, "auto|last|none");
    predict->add_option("--out", predict_args.out, "output CSV path")->required();

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "report metrics on labeled data");
    eval->add_option("--model", eval_args.model)->required();
    eval->add_option("--input", eval_args.input)->required();
    eval->add_option("--format", eval_args.format, "csv|sparse");
    eval->add_option("--labels-col", eval_args.labels_col, "auto|last|none");
    eval->add_flag("--json", eval_args.as_json, "emit metrics as JSON");

    OracleArgs oracle_args;
    CLI::App* oracle = app.add_subcommand(
        "oracle", "finite-copy vs closed-form convergence report");
    oracle->add_option("--input", oracle_args.input)->required();
    oracle->add_option("--format", oracle_args.format, "csv|sparse");
    oracle->add_option("--labels-col", oracle_args.labels_col, "auto|last|none");
    oracle->add_option("--p", oracle_args.p, "survival probability")->required();
    oracle->add_option("--m-list", oracle_args.m_list, "comma list of copy counts");
    oracle->add_option("--seeds", oracle_args.seeds, "number of seeds per m");
    oracle->add_option("--seed", oracle_args.seed, "base seed");
    oracle->add_option("--eps", oracle_args.eps, "ridge regularizer");
    oracle->add_option("--out", oracle_args.out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
        if (train->parsed())
            return run_train_features(train_args);
        if (transform->parsed())
            return run_transform(transform_args);
        if (fit->parsed())
            return run_fit_svm(fit_args);
        if (predict->parsed())
            return run_predict(predict_args);
        if (eval->parsed())
            return run_eval(eval_args);
        if (oracle->parsed())
            return run_oracle(oracle_args);
        std::cerr << app.help() << "\n";
        return kExitUsage;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const SingularSystemError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NonConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
