#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reprocf/als.hpp"
#include "reprocf/matrix.hpp"
#include "reprocf/metrics.hpp"
#include "reprocf/sampling.hpp"
#include "reprocf/synthetic.hpp"

namespace reprocf {

/// One matrix input for a sweep: either a synthetic spec written as
/// `synthetic:<types>` (optionally `synthetic:<types>:<files>x<subjects>`)
/// or a path to a matrix CSV, whose stem becomes the dataset id.
struct DatasetSource {
    std::string id;
    std::optional<SyntheticSpec> synthetic;
    std::optional<std::filesystem::path> csv_path;

    static DatasetSource parse(const std::string& token);
    UtilityMatrix load() const;
};

struct ExperimentConfig {
    std::vector<DatasetSource> datasets;
    std::vector<SamplingMethod> methods;
    std::vector<double> alphas;     // defaults to 0.1 .. 0.9 step 0.1
    AlsConfig als;
    std::vector<bool> bias_modes = {false};
    int repetitions = 5;
    std::uint64_t master_seed = 0;
    double ratio_tolerance = 0.01;
    bool cold_start = true;
    int workers = 1;
};

/// Flat key/value + lists config file (`key = value`, arrays in brackets,
/// `#` comments). Keys: datasets, methods, alphas, factors, reg, iters,
/// nonnegative, bias_modes, repetitions, seed, workers, tolerance,
/// cold_start. Unknown keys are rejected.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

enum class HyperAxis { Factors, Iterations };

/// Same format plus the `axis` and `values` keys driving a hyperparameter
/// study.
struct HyperConfig {
    ExperimentConfig base;
    HyperAxis axis = HyperAxis::Factors;
    std::vector<int> values;
};
HyperConfig load_hyper_config(const std::filesystem::path& path);

/// One evaluated experiment cell.
struct ResultRow {
    std::string dataset;
    SamplingMethod method = SamplingMethod::Rfnu;
    double alpha = 0.0;
    bool bias = false;
    int repetition = 0;
    double ratio_actual = 0.0;
    ConfusionCounts counts;
    std::optional<MetricsRecord> metrics; // absent when the cell failed
    double time_ms = 0.0;
    std::string warning; // "", "ratio_drift", or "error:<message>"
};

/// Stable 64-bit seed for one sweep cell; independent of execution order.
std::uint64_t cell_seed(std::uint64_t master_seed, const std::string& dataset_id,
                        SamplingMethod method, double alpha, bool bias, int repetition);

/// sample -> fit -> predict -> score, all deterministically derived from
/// `seed`. Failures are captured in the row rather than thrown.
ResultRow run_cell(const UtilityMatrix& matrix, const std::string& dataset_id,
                   SamplingMethod method, double alpha, const AlsConfig& als, bool bias,
                   std::uint64_t seed, double ratio_tolerance, bool cold_start);

/// Cross product of datasets x methods x alphas x bias modes x repetitions,
/// run on a worker pool; rows come back sorted by cell coordinates so output
/// does not depend on scheduling.
std::vector<ResultRow> sweep(const ExperimentConfig& config);

/// Mean/stddev over the repetitions of one (dataset, method, alpha, bias)
/// group; failed repetitions are skipped, undefined ratios excluded from
/// their averages.
struct AggregateRow {
    std::string dataset;
    SamplingMethod method = SamplingMethod::Rfnu;
    double alpha = 0.0;
    bool bias = false;
    int n = 0; // successful repetitions
    double ratio_mean = 0.0;
    double tp_mean = 0.0, fp_mean = 0.0, tn_mean = 0.0, fn_mean = 0.0;
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0; // sample stddev, 0 when n < 2
    std::optional<double> sensitivity_mean;
    int sensitivity_defined = 0;
    std::optional<double> specificity_mean;
    int specificity_defined = 0;
    double time_ms_mean = 0.0;
    int warnings = 0;
};

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& raw);

/// Raw rows followed by mean/std aggregate rows. Columns:
/// dataset,method,alpha,bias,rep,ratio_actual,tp,fp,tn,fn,accuracy,
/// sensitivity,specificity,warning,time_ms.
void write_results_csv(const std::vector<ResultRow>& raw,
                       const std::filesystem::path& path);

/// Per-method sensitivity/specificity averages at alpha = 0.9 without bias.
/// `*_macro` weights every run equally; `*_micro` pools confusion counts.
/// Undefined entries are skipped and counted, mirroring metrics().
struct RocRow {
    SamplingMethod method = SamplingMethod::Rfnu;
    int runs = 0;
    std::optional<double> sensitivity_macro;
    std::optional<double> sensitivity_micro;
    int sensitivity_undefined = 0;
    std::optional<double> specificity_macro;
    std::optional<double> specificity_micro;
    int specificity_undefined = 0;
};

/// Requires config.alphas == {0.9} and bias off.
std::vector<RocRow> roc_table(const ExperimentConfig& config);
void write_roc_csv(const std::vector<RocRow>& rows, const std::filesystem::path& path);

std::string_view hyper_axis_name(HyperAxis axis);

/// Repeats the configured cells once per axis value, holding everything else
/// fixed (including the per-cell seeds, so masks are shared across values).
struct HyperResult {
    int value = 0;
    std::vector<ResultRow> rows;
};

std::vector<HyperResult> hyper_study(const ExperimentConfig& config, HyperAxis axis,
                                     const std::vector<int>& values);
void write_hyper_csv(const std::vector<HyperResult>& results, HyperAxis axis,
                     const std::filesystem::path& path);

} // namespace reprocf
