// reprocf: predict unknown cells of binary reproducibility matrices with
// ALS collaborative filtering under file-creation-order sampling constraints.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "reprocf/errors.hpp"
#include "reprocf/experiment.hpp"
#include "reprocf/render.hpp"

using namespace reprocf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct GenerateArgs {
    int types = 2;
    int files = 100;
    int subjects = 100;
    std::uint64_t seed = 0;
    std::string name;
    std::string out;
};

struct SampleArgs {
    std::string method = "rfnu";
    double alpha = 0.5;
    std::uint64_t seed = 0;
    double tolerance = 0.01;
    bool no_cold_start = false;
    std::string matrix;
    std::string out;
};

struct FitArgs {
    std::string matrix;
    std::string mask;
    int factors = 50;
    double reg = 0.01;
    int iters = 5;
    bool nonnegative = true;
    bool bias = false;
    bool plain_reg = false;
    std::uint64_t seed = 0;
    std::string model_out;
    std::string subjects_out;
    std::string files_out;
};

struct EvaluateArgs {
    std::string matrix;
    std::string mask;
    std::string model;
    bool dummy = false;
    int positive_class = 1;
    std::string out;
};

struct RenderArgs {
    std::string matrix;
    std::string mask;
    std::string model;
    std::string out;
};

struct SweepArgs {
    std::string config;
    std::string out;
    int workers = 0; // 0 = take the config value
};

struct HyperArgs {
    std::string config;
    std::string dataset;
    std::string method = "rfnu";
    double alpha = 0.7;
    std::string axis = "factors";
    std::vector<int> values;
    int reps = 5;
    std::uint64_t seed = 0;
    int factors = 50;
    double reg = 0.01;
    int iters = 5;
    std::string out;
};

void write_metrics_csv(const ConfusionCounts& counts, const MetricsRecord& rec,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "tp,fp,tn,fn,accuracy,sensitivity,specificity\n";
    out << counts.tp << ',' << counts.fp << ',' << counts.tn << ',' << counts.fn << ',';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", rec.accuracy);
    out << buf << ',';
    if (rec.sensitivity) {
        std::snprintf(buf, sizeof buf, "%.6f", *rec.sensitivity);
        out << buf;
    }
    out << ',';
    if (rec.specificity) {
        std::snprintf(buf, sizeof buf, "%.6f", *rec.specificity);
        out << buf;
    }
    out << '\n';
    if (!out) throw IoError("write to " + path.string() + " failed");
}

SamplingMethod method_or_throw(const std::string& name) {
    const auto method = parse_method(name);
    if (!method) throw ValidationError("unknown sampling method \"" + name + "\"");
    return *method;
}

int dispatch(const CLI::App& app, const GenerateArgs& gen, const SampleArgs& smp,
             const FitArgs& fit, const EvaluateArgs& eval, const RenderArgs& rnd,
             const SweepArgs& swp, const HyperArgs& hyp, bool verbose) {
    if (app.got_subcommand("generate")) {
        SyntheticSpec spec;
        spec.n_types = gen.types;
        spec.n_files = gen.files;
        spec.n_subjects = gen.subjects;
        spec.seed = gen.seed;
        UtilityMatrix m = generate_synthetic(spec);
        if (!gen.name.empty()) m.set_name(gen.name);
        save_matrix_csv(m, gen.out);
        if (verbose)
            std::cerr << "wrote " << gen.out << " (" << m.n_files() << "x"
                      << m.n_subjects() << ")\n";
        return kExitOk;
    }

    if (app.got_subcommand("sample")) {
        const UtilityMatrix m = load_matrix_csv(smp.matrix);
        SamplingSpec spec;
        spec.method = method_or_throw(smp.method);
        spec.alpha = smp.alpha;
        spec.seed = smp.seed;
        spec.ratio_tolerance = smp.tolerance;
        spec.cold_start = !smp.no_cold_start;
        std::vector<std::string> warnings;
        const CellMask mask = sample_mask(spec, m.n_files(), m.n_subjects(), &warnings);
        save_mask_csv(mask, smp.out);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        if (verbose)
            std::cerr << "wrote " << smp.out << " (ratio "
                      << training_ratio(mask) << ")\n";
        return kExitOk;
    }

    if (app.got_subcommand("fit")) {
        const UtilityMatrix m = load_matrix_csv(fit.matrix);
        const CellMask mask = load_mask_csv(fit.mask, m.n_files(), m.n_subjects());
        AlsConfig config;
        config.n_factors = fit.factors;
        config.regularization = fit.reg;
        config.max_iterations = fit.iters;
        config.nonnegative = fit.nonnegative;
        config.use_bias = fit.bias;
        config.scale_reg_by_obs = !fit.plain_reg;
        config.seed = fit.seed;
        std::vector<std::string> warnings;
        const FactorModel model = fit_als(m, mask, config, &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        save_model_csv(model, fit.model_out);
        if (!fit.subjects_out.empty() || !fit.files_out.empty()) {
            if (fit.subjects_out.empty() || fit.files_out.empty()) {
                throw ValidationError(
                    "--subjects-out and --files-out must be given together");
            }
            export_factors(model, fit.subjects_out, fit.files_out);
        }
        if (verbose)
            std::cerr << "wrote " << fit.model_out << " (objective "
                      << model.objective_history.back() << ")\n";
        return kExitOk;
    }

    if (app.got_subcommand("evaluate")) {
        const UtilityMatrix m = load_matrix_csv(eval.matrix);
        const CellMask train = load_mask_csv(eval.mask, m.n_files(), m.n_subjects());
        if (eval.dummy == eval.model.empty()) {
            // exactly one of --model / --dummy
            std::vector<std::uint8_t> predictions;
            if (eval.dummy) predictions = dummy_predict(m, train);
            else predictions = predict_binary_grid(load_model_csv(eval.model));
            ConfusionCounts counts = confusion(m, predictions, train.complement());
            if (eval.positive_class == 0) counts = swap_polarity(counts);
            const MetricsRecord rec = metrics(counts);
            write_metrics_csv(counts, rec, eval.out);
            std::cout << "accuracy " << rec.accuracy << "\n";
            return kExitOk;
        }
        throw ValidationError("give exactly one of --model or --dummy");
    }

    if (app.got_subcommand("render")) {
        const UtilityMatrix m = load_matrix_csv(rnd.matrix);
        if (rnd.mask.empty() != rnd.model.empty()) {
            throw ValidationError("--mask and --model must be given together");
        }
        if (rnd.mask.empty()) {
            render_matrix(m, rnd.out);
        } else {
            const CellMask train = load_mask_csv(rnd.mask, m.n_files(), m.n_subjects());
            const FactorModel model = load_model_csv(rnd.model);
            render_overlay(m, train, predict_binary_grid(model), rnd.out);
        }
        if (verbose) std::cerr << "wrote " << rnd.out << "\n";
        return kExitOk;
    }

    if (app.got_subcommand("sweep")) {
        ExperimentConfig config = load_experiment_config(swp.config);
        if (swp.workers > 0) config.workers = swp.workers;
        const std::vector<ResultRow> rows = sweep(config);
        write_results_csv(rows, swp.out);
        if (verbose) std::cerr << "wrote " << swp.out << " (" << rows.size() << " rows)\n";
        return kExitOk;
    }

    if (app.got_subcommand("roc")) {
        ExperimentConfig config = load_experiment_config(swp.config);
        if (swp.workers > 0) config.workers = swp.workers;
        const std::vector<RocRow> table = roc_table(config);
        write_roc_csv(table, swp.out);
        if (verbose) std::cerr << "wrote " << swp.out << "\n";
        return kExitOk;
    }

    if (app.got_subcommand("hyper")) {
        HyperConfig hyper;
        if (!hyp.config.empty()) {
            hyper = load_hyper_config(hyp.config);
        } else {
            if (hyp.dataset.empty() || hyp.values.empty()) {
                throw ValidationError("hyper needs --config, or --dataset with --values");
            }
            hyper.base.datasets = {DatasetSource::parse(hyp.dataset)};
            hyper.base.methods = {method_or_throw(hyp.method)};
            hyper.base.alphas = {hyp.alpha};
            hyper.base.als.n_factors = hyp.factors;
            hyper.base.als.regularization = hyp.reg;
            hyper.base.als.max_iterations = hyp.iters;
            hyper.base.repetitions = hyp.reps;
            hyper.base.master_seed = hyp.seed;
            if (hyp.axis == "factors") hyper.axis = HyperAxis::Factors;
            else if (hyp.axis == "iterations") hyper.axis = HyperAxis::Iterations;
            else throw ValidationError("--axis must be factors or iterations");
            hyper.values = hyp.values;
        }
        if (swp.workers > 0) hyper.base.workers = swp.workers;
        const std::vector<HyperResult> study =
            hyper_study(hyper.base, hyper.axis, hyper.values);
        write_hyper_csv(study, hyper.axis, hyp.out);
        if (verbose) std::cerr << "wrote " << hyp.out << "\n";
        return kExitOk;
    }

    return kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reprocf: reproducibility-matrix completion toolkit"};
    app.require_subcommand(1);
    bool verbose = false;
    std::uint64_t global_seed = 0;
    int global_workers = 0;
    app.add_flag("--verbose", verbose, "log progress to stderr");
    app.add_option("--seed", global_seed, "seed forwarded to subcommands that take one");
    app.add_option("--workers", global_workers, "worker threads for sweep-style runs");

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "write a synthetic matrix CSV");
    generate->add_option("--types", gen.types, "number of subject types (power of two)")
        ->required();
    generate->add_option("--files", gen.files, "matrix rows")->capture_default_str();
    generate->add_option("--subjects", gen.subjects, "matrix columns")->capture_default_str();
    generate->add_option("--seed", gen.seed, "kept for interface uniformity (unused)");
    generate->add_option("--name", gen.name, "dataset label for the .meta sidecar");
    generate->add_option("--out", gen.out, "output matrix CSV")->required();

    SampleArgs smp;
    auto* sample = app.add_subcommand("sample", "draw a training mask for a matrix");
    sample->add_option("--method", smp.method,
                       "complete_columns|complete_rows|rs|rfnu|rfntl|rfnts|random_unreal")
        ->capture_default_str();
    sample->add_option("--alpha", smp.alpha, "target training ratio in (0,1)")->required();
    sample->add_option("--seed", smp.seed, "sampler seed")->capture_default_str();
    sample->add_option("--tolerance", smp.tolerance, "ratio tolerance")
        ->capture_default_str();
    sample->add_flag("--no-cold-start", smp.no_cold_start,
                     "skip the first-row + random-column augmentation");
    sample->add_option("--matrix", smp.matrix, "matrix CSV (for dimensions)")->required();
    sample->add_option("--out", smp.out, "output mask CSV")->required();

    FitArgs fitargs;
    auto* fit = app.add_subcommand("fit", "fit the ALS factor model on a training mask");
    fit->add_option("--matrix", fitargs.matrix, "matrix CSV")->required();
    fit->add_option("--mask", fitargs.mask, "training mask CSV")->required();
    fit->add_option("--factors", fitargs.factors, "latent factors")->capture_default_str();
    fit->add_option("--reg", fitargs.reg, "regularization lambda")->capture_default_str();
    fit->add_option("--iters", fitargs.iters, "alternation rounds")->capture_default_str();
    fit->add_flag("--nonnegative,!--no-nonnegative", fitargs.nonnegative,
                  "constrain factors to be non-negative");
    fit->add_flag("--bias,!--no-bias", fitargs.bias, "include mean/subject/file biases");
    fit->add_flag("--plain-reg", fitargs.plain_reg,
                  "do not scale lambda by observation counts");
    fit->add_option("--seed", fitargs.seed, "factor initialization seed")
        ->capture_default_str();
    fit->add_option("--model-out", fitargs.model_out, "output model CSV")->required();
    fit->add_option("--subjects-out", fitargs.subjects_out, "subject-factor CSV export");
    fit->add_option("--files-out", fitargs.files_out, "file-factor CSV export");

    EvaluateArgs eval;
    auto* evaluate = app.add_subcommand("evaluate", "score predictions on the test cells");
    evaluate->add_option("--matrix", eval.matrix, "matrix CSV")->required();
    evaluate->add_option("--mask", eval.mask, "training mask CSV")->required();
    evaluate->add_option("--model", eval.model, "model CSV from fit");
    evaluate->add_flag("--dummy", eval.dummy, "score the majority-class baseline instead");
    evaluate->add_option("--positive-class", eval.positive_class,
                         "which cell value counts as positive (default 1)")
        ->check(CLI::IsMember({0, 1}));
    evaluate->add_option("--out", eval.out, "output metrics CSV")->required();

    RenderArgs rnd;
    auto* render = app.add_subcommand(
        "render", "write a graymap of a matrix, or a prediction overlay pixmap");
    render->add_option("--matrix", rnd.matrix, "matrix CSV")->required();
    render->add_option("--mask", rnd.mask, "training mask CSV (overlay mode)");
    render->add_option("--model", rnd.model, "model CSV (overlay mode)");
    render->add_option("--out", rnd.out, "output .pgm/.ppm path")->required();

    SweepArgs swp;
    auto* sweep_cmd = app.add_subcommand("sweep", "run a full experiment grid");
    sweep_cmd->add_option("--config", swp.config, "sweep config file")->required();
    sweep_cmd->add_option("--out", swp.out, "output results CSV")->required();

    auto* roc = app.add_subcommand("roc", "per-method ROC table at alpha 0.9, bias off");
    roc->add_option("--config", swp.config, "sweep config file (alphas = [0.9])")
        ->required();
    roc->add_option("--out", swp.out, "output ROC CSV")->required();

    HyperArgs hyp;
    auto* hyper = app.add_subcommand("hyper", "sweep one ALS hyperparameter");
    hyper->add_option("--config", hyp.config, "hyper config file (axis/values keys)");
    hyper->add_option("--dataset", hyp.dataset, "dataset token or CSV path");
    hyper->add_option("--method", hyp.method, "sampling method")->capture_default_str();
    hyper->add_option("--alpha", hyp.alpha, "training ratio")->capture_default_str();
    hyper->add_option("--axis", hyp.axis, "factors|iterations")->capture_default_str();
    hyper->add_option("--values", hyp.values, "axis values")->delimiter(',');
    hyper->add_option("--reps", hyp.reps, "repetitions")->capture_default_str();
    hyper->add_option("--seed", hyp.seed, "master seed")->capture_default_str();
    hyper->add_option("--factors", hyp.factors, "base factor count")->capture_default_str();
    hyper->add_option("--reg", hyp.reg, "regularization lambda")->capture_default_str();
    hyper->add_option("--iters", hyp.iters, "base iteration count")->capture_default_str();
    hyper->add_option("--out", hyp.out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }

    // global seed/workers fall through to subcommands that did not set their own
    if (app.count("--seed")) {
        if (!generate->count("--seed")) gen.seed = global_seed;
        if (!sample->count("--seed")) smp.seed = global_seed;
        if (!fit->count("--seed")) fitargs.seed = global_seed;
        if (!hyper->count("--seed")) hyp.seed = global_seed;
    }
    if (app.count("--workers")) swp.workers = global_workers;

    try {
        return dispatch(app, gen, smp, fitargs, eval, rnd, swp, hyp, verbose);
    } catch (const IoError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitIo;
    } catch (const ValidationError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitValidation;
    }
}
