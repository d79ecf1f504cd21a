#include "reprocf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <thread>

#include "reprocf/errors.hpp"
#include "reprocf/rng.hpp"

namespace reprocf {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string fmt_alpha(double a) { return fmt("%.10g", a); }

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
    workers = std::max(1, workers);
    if (workers == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int count = std::min(workers, n);
    pool.reserve(static_cast<std::size_t>(count));
    for (int w = 0; w < count; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace

DatasetSource DatasetSource::parse(const std::string& token) {
    DatasetSource src;
    if (token.rfind("synthetic:", 0) == 0) {
        SyntheticSpec spec;
        const std::string rest = token.substr(10);
        int files = 100, subjects = 100, types = 0;
        if (std::sscanf(rest.c_str(), "%d:%dx%d", &types, &files, &subjects) >= 1 &&
            types >= 2) {
            spec.n_types = types;
            spec.n_files = files;
            spec.n_subjects = subjects;
        } else {
            throw ValidationError("bad synthetic dataset token \"" + token + "\"");
        }
        src.id = token;
        src.synthetic = spec;
    } else {
        src.csv_path = token;
        src.id = std::filesystem::path(token).stem().string();
        if (src.id.empty()) throw ValidationError("bad dataset path \"" + token + "\"");
    }
    return src;
}

UtilityMatrix DatasetSource::load() const {
    if (synthetic) return generate_synthetic(*synthetic);
    return load_matrix_csv(*csv_path);
}

std::uint64_t cell_seed(std::uint64_t master_seed, const std::string& dataset_id,
                        SamplingMethod method, double alpha, bool bias, int repetition) {
    std::string key = "seed=" + std::to_string(master_seed);
    key += "|ds=" + dataset_id;
    key += "|m=";
    key += method_name(method);
    key += "|a=" + std::to_string(static_cast<long long>(std::llround(alpha * 1e6)));
    key += bias ? "|b=1" : "|b=0";
    key += "|r=" + std::to_string(repetition);
    return mix64(hash_bytes(key));
}

ResultRow run_cell(const UtilityMatrix& matrix, const std::string& dataset_id,
                   SamplingMethod method, double alpha, const AlsConfig& als, bool bias,
                   std::uint64_t seed, double ratio_tolerance, bool cold_start) {
    ResultRow row;
    row.dataset = dataset_id;
    row.method = method;
    row.alpha = alpha;
    row.bias = bias;
    const auto start = std::chrono::steady_clock::now();
    try {
        SamplingSpec spec;
        spec.method = method;
        spec.alpha = alpha;
        spec.seed = mix64(seed + 1);
        spec.ratio_tolerance = ratio_tolerance;
        spec.cold_start = cold_start;
        std::vector<std::string> sample_warnings;
        const CellMask train = sample_mask(spec, matrix.n_files(), matrix.n_subjects(),
                                           &sample_warnings);
        row.ratio_actual = training_ratio(train);
        if (!sample_warnings.empty()) row.warning = "ratio_drift";

        AlsConfig cell_als = als;
        cell_als.use_bias = bias;
        cell_als.seed = mix64(seed + 2);
        const FactorModel model = fit_als(matrix, train, cell_als);

        const CellMask test = train.complement();
        row.counts = confusion(matrix, predict_binary_grid(model), test);
        row.metrics = metrics(row.counts);
    } catch (const std::exception& err) {
        row.metrics = std::nullopt;
        row.warning = std::string("error:") + err.what();
    }
    row.time_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    return row;
}

std::vector<ResultRow> sweep(const ExperimentConfig& config) {
    if (config.datasets.empty()) throw ValidationError("sweep needs at least one dataset");
    if (config.methods.empty()) throw ValidationError("sweep needs at least one method");
    if (config.alphas.empty()) throw ValidationError("sweep needs at least one alpha");
    if (config.bias_modes.empty()) throw ValidationError("sweep needs at least one bias mode");
    if (config.repetitions < 1) throw ValidationError("repetitions must be >= 1");

    std::vector<UtilityMatrix> matrices;
    matrices.reserve(config.datasets.size());
    for (const auto& source : config.datasets) matrices.push_back(source.load());

    struct Cell {
        int dataset, method, alpha, bias, rep;
    };
    std::vector<Cell> cells;
    for (int d = 0; d < static_cast<int>(config.datasets.size()); ++d)
        for (int m = 0; m < static_cast<int>(config.methods.size()); ++m)
            for (int a = 0; a < static_cast<int>(config.alphas.size()); ++a)
                for (int b = 0; b < static_cast<int>(config.bias_modes.size()); ++b)
                    for (int r = 0; r < config.repetitions; ++r)
                        cells.push_back(Cell{d, m, a, b, r});

    std::vector<ResultRow> rows(cells.size());
    parallel_for(static_cast<int>(cells.size()), config.workers, [&](int k) {
        const Cell& c = cells[static_cast<std::size_t>(k)];
        const auto& id = config.datasets[static_cast<std::size_t>(c.dataset)].id;
        const SamplingMethod method = config.methods[static_cast<std::size_t>(c.method)];
        const double alpha = config.alphas[static_cast<std::size_t>(c.alpha)];
        const bool bias = config.bias_modes[static_cast<std::size_t>(c.bias)];
        rows[static_cast<std::size_t>(k)] = run_cell(
            matrices[static_cast<std::size_t>(c.dataset)], id, method, alpha, config.als,
            bias, cell_seed(config.master_seed, id, method, alpha, bias, c.rep),
            config.ratio_tolerance, config.cold_start);
        rows[static_cast<std::size_t>(k)].repetition = c.rep;
    });
    return rows;
}

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& raw) {
    std::vector<AggregateRow> out;
    std::size_t k = 0;
    while (k < raw.size()) {
        std::size_t end = k;
        while (end < raw.size() && raw[end].dataset == raw[k].dataset &&
               raw[end].method == raw[k].method && raw[end].alpha == raw[k].alpha &&
               raw[end].bias == raw[k].bias)
            ++end;

        AggregateRow agg;
        agg.dataset = raw[k].dataset;
        agg.method = raw[k].method;
        agg.alpha = raw[k].alpha;
        agg.bias = raw[k].bias;
        std::vector<double> accuracies;
        double sens_sum = 0, spec_sum = 0;
        for (std::size_t i = k; i < end; ++i) {
            const ResultRow& row = raw[i];
            if (!row.warning.empty()) ++agg.warnings;
            if (!row.metrics) continue;
            ++agg.n;
            agg.ratio_mean += row.ratio_actual;
            agg.tp_mean += static_cast<double>(row.counts.tp);
            agg.fp_mean += static_cast<double>(row.counts.fp);
            agg.tn_mean += static_cast<double>(row.counts.tn);
            agg.fn_mean += static_cast<double>(row.counts.fn);
            accuracies.push_back(row.metrics->accuracy);
            agg.time_ms_mean += row.time_ms;
            if (row.metrics->sensitivity) {
                ++agg.sensitivity_defined;
                sens_sum += *row.metrics->sensitivity;
            }
            if (row.metrics->specificity) {
                ++agg.specificity_defined;
                spec_sum += *row.metrics->specificity;
            }
        }
        if (agg.n > 0) {
            const auto n = static_cast<double>(agg.n);
            agg.ratio_mean /= n;
            agg.tp_mean /= n;
            agg.fp_mean /= n;
            agg.tn_mean /= n;
            agg.fn_mean /= n;
            agg.time_ms_mean /= n;
            double mean = 0;
            for (const double a : accuracies) mean += a;
            mean /= n;
            agg.accuracy_mean = mean;
            if (agg.n > 1) {
                double ss = 0;
                for (const double a : accuracies) ss += (a - mean) * (a - mean);
                agg.accuracy_std = std::sqrt(ss / (n - 1.0));
            }
            if (agg.sensitivity_defined > 0)
                agg.sensitivity_mean = sens_sum / agg.sensitivity_defined;
            if (agg.specificity_defined > 0)
                agg.specificity_mean = spec_sum / agg.specificity_defined;
        }
        out.push_back(std::move(agg));
        k = end;
    }
    return out;
}

void write_results_csv(const std::vector<ResultRow>& raw, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "dataset,method,alpha,bias,rep,ratio_actual,tp,fp,tn,fn,accuracy,"
           "sensitivity,specificity,warning,time_ms\n";
    for (const ResultRow& row : raw) {
        out << row.dataset << ',' << method_name(row.method) << ',' << fmt_alpha(row.alpha)
            << ',' << (row.bias ? 1 : 0) << ',' << row.repetition << ','
            << fmt("%.6f", row.ratio_actual) << ',' << row.counts.tp << ',' << row.counts.fp
            << ',' << row.counts.tn << ',' << row.counts.fn << ',';
        if (row.metrics) {
            out << fmt("%.6f", row.metrics->accuracy) << ',';
            out << (row.metrics->sensitivity ? fmt("%.6f", *row.metrics->sensitivity) : "")
                << ',';
            out << (row.metrics->specificity ? fmt("%.6f", *row.metrics->specificity) : "")
                << ',';
        } else {
            out << ",,,";
        }
        out << row.warning << ',' << fmt("%.3f", row.time_ms) << '\n';
    }
    for (const AggregateRow& agg : aggregate(raw)) {
        if (agg.n == 0) continue;
        out << agg.dataset << ',' << method_name(agg.method) << ',' << fmt_alpha(agg.alpha)
            << ',' << (agg.bias ? 1 : 0) << ",mean," << fmt("%.6f", agg.ratio_mean) << ','
            << fmt("%.4f", agg.tp_mean) << ',' << fmt("%.4f", agg.fp_mean) << ','
            << fmt("%.4f", agg.tn_mean) << ',' << fmt("%.4f", agg.fn_mean) << ','
            << fmt("%.6f", agg.accuracy_mean) << ','
            << (agg.sensitivity_mean ? fmt("%.6f", *agg.sensitivity_mean) : "") << ','
            << (agg.specificity_mean ? fmt("%.6f", *agg.specificity_mean) : "") << ','
            << (agg.warnings ? "ratio_drift" : "") << ',' << fmt("%.3f", agg.time_ms_mean)
            << '\n';
        out << agg.dataset << ',' << method_name(agg.method) << ',' << fmt_alpha(agg.alpha)
            << ',' << (agg.bias ? 1 : 0) << ",std,,,,,," << fmt("%.6f", agg.accuracy_std)
            << ",,,,\n";
    }
    if (!out) throw IoError("write to " + path.string() + " failed");
}

std::vector<RocRow> roc_table(const ExperimentConfig& config) {
    if (config.alphas.size() != 1 || std::abs(config.alphas[0] - 0.9) > 1e-12) {
        throw ValidationError("roc_table requires alphas = [0.9]");
    }
    if (config.bias_modes != std::vector<bool>{false}) {
        throw ValidationError("roc_table requires bias off");
    }
    const std::vector<ResultRow> raw = sweep(config);

    std::vector<RocRow> table;
    for (const SamplingMethod method : config.methods) {
        RocRow roc;
        roc.method = method;
        double sens_sum = 0, spec_sum = 0;
        int sens_n = 0, spec_n = 0;
        ConfusionCounts pooled;
        for (const ResultRow& row : raw) {
            if (row.method != method || !row.metrics) continue;
            ++roc.runs;
            pooled.tp += row.counts.tp;
            pooled.fp += row.counts.fp;
            pooled.tn += row.counts.tn;
            pooled.fn += row.counts.fn;
            if (row.metrics->sensitivity) {
                sens_sum += *row.metrics->sensitivity;
                ++sens_n;
            } else {
                ++roc.sensitivity_undefined;
            }
            if (row.metrics->specificity) {
                spec_sum += *row.metrics->specificity;
                ++spec_n;
            } else {
                ++roc.specificity_undefined;
            }
        }
        if (sens_n > 0) roc.sensitivity_macro = sens_sum / sens_n;
        if (spec_n > 0) roc.specificity_macro = spec_sum / spec_n;
        if (pooled.tp + pooled.fn > 0)
            roc.sensitivity_micro = static_cast<double>(pooled.tp) /
                                    static_cast<double>(pooled.tp + pooled.fn);
        if (pooled.tn + pooled.fp > 0)
            roc.specificity_micro = static_cast<double>(pooled.tn) /
                                    static_cast<double>(pooled.tn + pooled.fp);
        table.push_back(roc);
    }
    return table;
}

void write_roc_csv(const std::vector<RocRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "method,runs,sensitivity_macro,sensitivity_micro,sensitivity_undefined,"
           "specificity_macro,specificity_micro,specificity_undefined\n";
    const auto cell = [](const std::optional<double>& v) {
        return v ? fmt("%.6f", *v) : std::string("undefined");
    };
    for (const RocRow& row : rows) {
        out << method_name(row.method) << ',' << row.runs << ','
            << cell(row.sensitivity_macro) << ',' << cell(row.sensitivity_micro) << ','
            << row.sensitivity_undefined << ',' << cell(row.specificity_macro) << ','
            << cell(row.specificity_micro) << ',' << row.specificity_undefined << '\n';
    }
    if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string_view hyper_axis_name(HyperAxis axis) {
    return axis == HyperAxis::Factors ? "factors" : "iterations";
}

std::vector<HyperResult> hyper_study(const ExperimentConfig& config, HyperAxis axis,
                                     const std::vector<int>& values) {
    if (values.empty()) throw ValidationError("hyper_study needs at least one axis value");
    for (const int v : values)
        if (v < 1) throw ValidationError("axis values must be positive");
    std::vector<HyperResult> out;
    for (const int v : values) {
        ExperimentConfig point = config;
        if (axis == HyperAxis::Factors) point.als.n_factors = v;
        else point.als.max_iterations = v;
        out.push_back(HyperResult{v, sweep(point)});
    }
    return out;
}

void write_hyper_csv(const std::vector<HyperResult>& results, HyperAxis axis,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "axis,value,dataset,method,alpha,bias,rep,ratio_actual,accuracy,"
           "sensitivity,specificity,warning\n";
    for (const HyperResult& res : results) {
        for (const ResultRow& row : res.rows) {
            out << hyper_axis_name(axis) << ',' << res.value << ',' << row.dataset << ','
                << method_name(row.method) << ',' << fmt_alpha(row.alpha) << ','
                << (row.bias ? 1 : 0) << ',' << row.repetition << ','
                << fmt("%.6f", row.ratio_actual) << ',';
            if (row.metrics) {
                out << fmt("%.6f", row.metrics->accuracy) << ','
                    << (row.metrics->sensitivity ? fmt("%.6f", *row.metrics->sensitivity)
                                                 : "")
                    << ','
                    << (row.metrics->specificity ? fmt("%.6f", *row.metrics->specificity)
                                                 : "")
                    << ',';
            } else {
                out << ",,,";
            }
            out << row.warning << '\n';
        }
        for (const AggregateRow& agg : aggregate(res.rows)) {
            if (agg.n == 0) continue;
            out << hyper_axis_name(axis) << ',' << res.value << ',' << agg.dataset << ','
                << method_name(agg.method) << ',' << fmt_alpha(agg.alpha) << ','
                << (agg.bias ? 1 : 0) << ",mean," << fmt("%.6f", agg.ratio_mean) << ','
                << fmt("%.6f", agg.accuracy_mean) << ','
                << (agg.sensitivity_mean ? fmt("%.6f", *agg.sensitivity_mean) : "") << ','
                << (agg.specificity_mean ? fmt("%.6f", *agg.specificity_mean) : "") << ','
                << (agg.warnings ? "ratio_drift" : "") << '\n';
        }
    }
    if (!out) throw IoError("write to " + path.string() + " failed");
}

} // namespace reprocf
