#include "reprocf/als.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "reprocf/errors.hpp"
#include "reprocf/rng.hpp"

namespace reprocf {

namespace {

std::string fmt_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void throw_singular() {
    throw ValidationError(
        "singular least-squares system; set regularization lambda > 0");
}

/// Lawson-Hanson active set for min 1/2 x'Ax - b'x, x >= 0, A symmetric PSD.
Eigen::VectorXd nnls_normal(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            bool regularized) {
    const auto f = static_cast<int>(A.rows());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(f);
    Eigen::VectorXd w = b; // negative gradient at x = 0
    std::vector<int> passive;
    std::vector<char> in_passive(static_cast<std::size_t>(f), 0);
    const double tol = 1e-12 * std::max(1.0, b.lpNorm<Eigen::Infinity>());

    const auto solve_passive = [&](Eigen::VectorXd& z) {
        const auto p = static_cast<int>(passive.size());
        Eigen::MatrixXd Ap(p, p);
        Eigen::VectorXd bp(p);
        for (int r = 0; r < p; ++r) {
            bp(r) = b(passive[r]);
            for (int c = 0; c < p; ++c) Ap(r, c) = A(passive[r], passive[c]);
        }
        Eigen::LLT<Eigen::MatrixXd> llt(Ap);
        if (llt.info() != Eigen::Success) {
            if (regularized) throw ValidationError("non-negative solve failed on a PD system");
            throw_singular();
        }
        z = llt.solve(bp);
    };

    const int max_outer = 3 * f + 30;
    for (int outer = 0; outer < max_outer; ++outer) {
        int best = -1;
        double best_w = tol;
        for (int i = 0; i < f; ++i) {
            if (!in_passive[static_cast<std::size_t>(i)] && w(i) > best_w) {
                best_w = w(i);
                best = i;
            }
        }
        if (best < 0) break; // KKT satisfied
        passive.push_back(best);
        in_passive[static_cast<std::size_t>(best)] = 1;

        for (;;) {
            Eigen::VectorXd z;
            solve_passive(z);
            bool feasible = true;
            double step = 1.0;
            for (std::size_t k = 0; k < passive.size(); ++k) {
                if (z(static_cast<int>(k)) <= 0.0) {
                    feasible = false;
                    const double xi = x(passive[k]);
                    const double candidate = xi / (xi - z(static_cast<int>(k)));
                    step = std::min(step, candidate);
                }
            }
            if (feasible) {
                x.setZero();
                for (std::size_t k = 0; k < passive.size(); ++k)
                    x(passive[k]) = z(static_cast<int>(k));
                break;
            }
            // move toward z until the first coordinate hits the boundary
            for (std::size_t k = 0; k < passive.size(); ++k) {
                const int i = passive[k];
                x(i) += step * (z(static_cast<int>(k)) - x(i));
            }
            std::vector<int> kept;
            for (const int i : passive) {
                if (x(i) > 1e-14) {
                    kept.push_back(i);
                } else {
                    x(i) = 0.0;
                    in_passive[static_cast<std::size_t>(i)] = 0;
                }
            }
            passive = std::move(kept);
            if (passive.empty()) break;
        }
        w.noalias() = b - A * x;
    }
    return x;
}

Eigen::VectorXd ridge_normal(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                             bool regularized) {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
        Eigen::VectorXd x = llt.solve(b);
        if ((A * x - b).lpNorm<Eigen::Infinity>() <=
            1e-8 * std::max(1.0, b.lpNorm<Eigen::Infinity>()))
            return x;
    }
    if (regularized) throw ValidationError("ridge solve failed on a PD system");
    // Normal equations with lambda = 0 are always consistent (b lies in the
    // range of A); return the minimum-norm minimizer if it checks out.
    Eigen::VectorXd x = A.completeOrthogonalDecomposition().solve(b);
    if ((A * x - b).lpNorm<Eigen::Infinity>() >
        1e-8 * std::max(1.0, b.lpNorm<Eigen::Infinity>()))
        throw_singular();
    return x;
}

struct Observations {
    std::vector<std::vector<int>> files_of_subject;
    std::vector<std::vector<int>> subjects_of_file;
};

Observations collect(const UtilityMatrix& matrix, const CellMask& train) {
    Observations obs;
    obs.files_of_subject.resize(static_cast<std::size_t>(matrix.n_subjects()));
    obs.subjects_of_file.resize(static_cast<std::size_t>(matrix.n_files()));
    for (int i = 0; i < matrix.n_files(); ++i)
        for (int j = 0; j < matrix.n_subjects(); ++j)
            if (train.contains(i, j)) {
                obs.files_of_subject[static_cast<std::size_t>(j)].push_back(i);
                obs.subjects_of_file[static_cast<std::size_t>(i)].push_back(j);
            }
    return obs;
}

} // namespace

Eigen::VectorXd solve_entity(const Eigen::MatrixXd& observed,
                             const Eigen::VectorXd& ratings, double lambda,
                             bool nonnegative) {
    if (observed.rows() < 1) throw ValidationError("solve_entity needs >= 1 observation");
    if (observed.rows() != ratings.size()) {
        throw ValidationError("observation/rating count mismatch");
    }
    if (lambda < 0) throw ValidationError("lambda must be >= 0");
    const auto f = static_cast<int>(observed.cols());
    Eigen::MatrixXd A(f, f);
    A.noalias() = observed.transpose() * observed;
    A.diagonal().array() += lambda;
    const Eigen::VectorXd b = observed.transpose() * ratings;
    return nonnegative ? nnls_normal(A, b, lambda > 0) : ridge_normal(A, b, lambda > 0);
}

void update_biases(const UtilityMatrix& matrix, const CellMask& train, FactorModel& model) {
    const double lambda = model.config.regularization;
    const Observations obs = collect(matrix, train);
    for (int u = 0; u < matrix.n_subjects(); ++u) {
        const auto& files = obs.files_of_subject[static_cast<std::size_t>(u)];
        if (files.empty()) continue;
        double acc = 0.0;
        for (const int i : files) {
            acc += matrix.at(i, u) - model.global_mean - model.file_bias(i) -
                   model.file_factors.row(i).dot(model.subject_factors.row(u));
        }
        model.subject_bias(u) = acc / (static_cast<double>(files.size()) + lambda);
    }
    for (int i = 0; i < matrix.n_files(); ++i) {
        const auto& subjects = obs.subjects_of_file[static_cast<std::size_t>(i)];
        if (subjects.empty()) continue;
        double acc = 0.0;
        for (const int u : subjects) {
            acc += matrix.at(i, u) - model.global_mean - model.subject_bias(u) -
                   model.file_factors.row(i).dot(model.subject_factors.row(u));
        }
        model.file_bias(i) = acc / (static_cast<double>(subjects.size()) + lambda);
    }
}

double training_objective(const UtilityMatrix& matrix, const CellMask& train,
                          const FactorModel& model) {
    double sse = 0.0;
    for (int i = 0; i < matrix.n_files(); ++i)
        for (int j = 0; j < matrix.n_subjects(); ++j)
            if (train.contains(i, j)) {
                const double e = matrix.at(i, j) - predict_cell(model, i, j);
                sse += e * e;
            }
    const double lambda = model.config.regularization;
    double penalty = 0.0;
    if (model.config.scale_reg_by_obs) {
        std::vector<std::int64_t> file_obs(static_cast<std::size_t>(matrix.n_files()), 0);
        std::vector<std::int64_t> subject_obs(static_cast<std::size_t>(matrix.n_subjects()), 0);
        for (int i = 0; i < matrix.n_files(); ++i)
            for (int j = 0; j < matrix.n_subjects(); ++j)
                if (train.contains(i, j)) {
                    ++file_obs[static_cast<std::size_t>(i)];
                    ++subject_obs[static_cast<std::size_t>(j)];
                }
        for (int i = 0; i < matrix.n_files(); ++i)
            penalty += static_cast<double>(file_obs[static_cast<std::size_t>(i)]) *
                       model.file_factors.row(i).squaredNorm();
        for (int j = 0; j < matrix.n_subjects(); ++j)
            penalty += static_cast<double>(subject_obs[static_cast<std::size_t>(j)]) *
                       model.subject_factors.row(j).squaredNorm();
    } else {
        penalty = model.file_factors.squaredNorm() + model.subject_factors.squaredNorm();
    }
    if (model.config.use_bias) {
        penalty += model.subject_bias.squaredNorm() + model.file_bias.squaredNorm();
    }
    return sse + lambda * penalty;
}

FactorModel fit_als(const UtilityMatrix& matrix, const CellMask& train,
                    const AlsConfig& config, std::vector<std::string>* warnings) {
    if (!train.dims_match(matrix)) throw ValidationError("mask dims do not match matrix");
    if (train.empty()) throw ValidationError("training set is empty");
    if (config.n_factors < 1) throw ValidationError("n_factors must be >= 1");
    if (config.max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
    if (config.regularization < 0) throw ValidationError("regularization must be >= 0");

    const int nf = matrix.n_files(), ns = matrix.n_subjects(), f = config.n_factors;
    FactorModel model;
    model.config = config;
    model.file_factors.resize(nf, f);
    model.subject_factors.resize(ns, f);
    model.file_bias = Eigen::VectorXd::Zero(nf);
    model.subject_bias = Eigen::VectorXd::Zero(ns);

    // Uniform init on [0, 1/sqrt(f)): keeps q.p of order one and non-negative.
    Rng rng(config.seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(f));
    for (int i = 0; i < nf; ++i)
        for (int k = 0; k < f; ++k) model.file_factors(i, k) = rng.uniform() * scale;
    for (int u = 0; u < ns; ++u)
        for (int k = 0; k < f; ++k) model.subject_factors(u, k) = rng.uniform() * scale;

    const Observations obs = collect(matrix, train);
    if (warnings) {
        for (int u = 0; u < ns; ++u)
            if (obs.files_of_subject[static_cast<std::size_t>(u)].empty())
                warnings->push_back("subject " + std::to_string(u) +
                                    " has no training cells; factors keep their initialization");
        for (int i = 0; i < nf; ++i)
            if (obs.subjects_of_file[static_cast<std::size_t>(i)].empty())
                warnings->push_back("file " + std::to_string(i) +
                                    " has no training cells; factors keep their initialization");
    }

    if (config.use_bias) {
        double sum = 0.0;
        for (int i = 0; i < nf; ++i)
            for (int j = 0; j < ns; ++j)
                if (train.contains(i, j)) sum += matrix.at(i, j);
        model.global_mean = sum / static_cast<double>(train.size());
        // Average-deviation baseline: coordinate passes of update_biases on
        // the factor-free objective, run to the fixed point and then frozen
        // for the factor rounds.
        Eigen::MatrixXd factors_backup = std::move(model.file_factors);
        Eigen::MatrixXd subject_backup = std::move(model.subject_factors);
        model.file_factors = Eigen::MatrixXd::Zero(nf, f);
        model.subject_factors = Eigen::MatrixXd::Zero(ns, f);
        for (int pass = 0; pass < 100; ++pass) {
            const Eigen::VectorXd prev_s = model.subject_bias;
            const Eigen::VectorXd prev_f = model.file_bias;
            update_biases(matrix, train, model);
            const double delta =
                std::max((model.subject_bias - prev_s).lpNorm<Eigen::Infinity>(),
                         (model.file_bias - prev_f).lpNorm<Eigen::Infinity>());
            if (delta < 1e-12) break;
        }
        model.file_factors = std::move(factors_backup);
        model.subject_factors = std::move(subject_backup);
    }

    Eigen::MatrixXd g_buf(std::max(nf, ns), f);
    Eigen::VectorXd r_buf(std::max(nf, ns));

    const auto solve_subjects = [&] {
        for (int u = 0; u < ns; ++u) {
            const auto& files = obs.files_of_subject[static_cast<std::size_t>(u)];
            if (files.empty()) continue;
            const auto m = static_cast<int>(files.size());
            for (int k = 0; k < m; ++k) {
                const int i = files[static_cast<std::size_t>(k)];
                g_buf.row(k) = model.file_factors.row(i);
                r_buf(k) = matrix.at(i, u) - model.global_mean - model.subject_bias(u) -
                           model.file_bias(i);
            }
            const double lam = config.scale_reg_by_obs ? config.regularization * m
                                                        : config.regularization;
            model.subject_factors.row(u) =
                solve_entity(g_buf.topRows(m), r_buf.head(m), lam, config.nonnegative)
                    .transpose();
        }
    };
    const auto solve_files = [&] {
        for (int i = 0; i < nf; ++i) {
            const auto& subjects = obs.subjects_of_file[static_cast<std::size_t>(i)];
            if (subjects.empty()) continue;
            const auto m = static_cast<int>(subjects.size());
            for (int k = 0; k < m; ++k) {
                const int u = subjects[static_cast<std::size_t>(k)];
                g_buf.row(k) = model.subject_factors.row(u);
                r_buf(k) = matrix.at(i, u) - model.global_mean - model.subject_bias(u) -
                           model.file_bias(i);
            }
            const double lam = config.scale_reg_by_obs ? config.regularization * m
                                                        : config.regularization;
            model.file_factors.row(i) =
                solve_entity(g_buf.topRows(m), r_buf.head(m), lam, config.nonnegative)
                    .transpose();
        }
    };

    for (int iter = 0; iter < config.max_iterations; ++iter) {
        solve_subjects();
        solve_files();
        model.objective_history.push_back(training_objective(matrix, train, model));
    }
    return model;
}

double predict_cell(const FactorModel& model, int file, int subject) {
    if (file < 0 || file >= model.n_files() || subject < 0 || subject >= model.n_subjects()) {
        throw ValidationError("prediction index out of range");
    }
    double v = model.file_factors.row(file).dot(model.subject_factors.row(subject));
    if (model.config.use_bias) {
        v += model.global_mean + model.subject_bias(subject) + model.file_bias(file);
    }
    return v;
}

int predict_binary(const FactorModel& model, int file, int subject) {
    const double raw = predict_cell(model, file, subject);
    const auto rounded = static_cast<long>(std::floor(raw + 0.5));
    return static_cast<int>(std::clamp(rounded, 0L, 1L));
}

std::vector<std::uint8_t> predict_binary_grid(const FactorModel& model) {
    const int nf = model.n_files(), ns = model.n_subjects();
    Eigen::MatrixXd raw = model.file_factors * model.subject_factors.transpose();
    std::vector<std::uint8_t> grid(static_cast<std::size_t>(nf) * ns);
    for (int i = 0; i < nf; ++i)
        for (int j = 0; j < ns; ++j) {
            double v = raw(i, j);
            if (model.config.use_bias)
                v += model.global_mean + model.subject_bias(j) + model.file_bias(i);
            const auto rounded = static_cast<long>(std::floor(v + 0.5));
            grid[static_cast<std::size_t>(i) * ns + j] =
                static_cast<std::uint8_t>(std::clamp(rounded, 0L, 1L));
        }
    return grid;
}

void export_factors(const FactorModel& model, const std::filesystem::path& subjects_csv,
                    const std::filesystem::path& files_csv) {
    const auto dump = [](const Eigen::MatrixXd& m, const std::filesystem::path& path) {
        std::ofstream out(path);
        if (!out) throw IoError("cannot open " + path.string() + " for writing");
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                if (c) out << ',';
                out << fmt_g17(m(r, c));
            }
            out << '\n';
        }
        if (!out) throw IoError("write to " + path.string() + " failed");
    };
    dump(model.subject_factors, subjects_csv);
    dump(model.file_factors, files_csv);
}

void save_model_csv(const FactorModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "reprocf_model,1\n";
    out << "dims," << model.n_files() << ',' << model.n_subjects() << ','
        << model.n_factors() << '\n';
    out << "config," << fmt_g17(model.config.regularization) << ','
        << model.config.max_iterations << ',' << (model.config.nonnegative ? 1 : 0) << ','
        << (model.config.use_bias ? 1 : 0) << ',' << model.config.seed << '\n';
    out << "mu," << fmt_g17(model.global_mean) << '\n';
    const auto block = [&](const char* tag, const Eigen::MatrixXd& m) {
        out << tag << '\n';
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                if (c) out << ',';
                out << fmt_g17(m(r, c));
            }
            out << '\n';
        }
    };
    block("Q", model.file_factors);
    block("P", model.subject_factors);
    const auto vec = [&](const char* tag, const Eigen::VectorXd& v) {
        out << tag << '\n';
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            if (k) out << ',';
            out << fmt_g17(v(k));
        }
        out << '\n';
    };
    vec("file_bias", model.file_bias);
    vec("subject_bias", model.subject_bias);
    if (!out) throw IoError("write to " + path.string() + " failed");
}

namespace {

std::vector<double> split_doubles(const std::string& line, const std::string& where) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= line.size()) {
        const std::size_t comma = line.find(',', start);
        const std::string token =
            line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(token, &used));
            if (used != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw ParseError(where + ": bad number \"" + token + "\"");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

} // namespace

FactorModel load_model_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    const std::string where = path.string();
    std::string line;

    const auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw ParseError(where + ": missing " + what);
        if (!line.empty() && line.back() == '\r') line.pop_back();
    };

    next_line("format header");
    if (line != "reprocf_model,1") throw ParseError(where + ": not a reprocf model file");

    next_line("dims");
    int nf = 0, ns = 0, f = 0;
    if (std::sscanf(line.c_str(), "dims,%d,%d,%d", &nf, &ns, &f) != 3 || nf < 1 ||
        ns < 1 || f < 1)
        throw ParseError(where + ": bad dims line");

    next_line("config");
    FactorModel model;
    {
        double reg = 0;
        int iters = 0, nonneg = 0, bias = 0;
        unsigned long long seed = 0;
        if (std::sscanf(line.c_str(), "config,%lf,%d,%d,%d,%llu", &reg, &iters, &nonneg,
                        &bias, &seed) != 5)
            throw ParseError(where + ": bad config line");
        model.config.n_factors = f;
        model.config.regularization = reg;
        model.config.max_iterations = iters;
        model.config.nonnegative = nonneg != 0;
        model.config.use_bias = bias != 0;
        model.config.seed = seed;
    }

    next_line("mu");
    if (line.rfind("mu,", 0) != 0) throw ParseError(where + ": bad mu line");
    model.global_mean = split_doubles(line.substr(3), where).at(0);

    const auto matrix_block = [&](const char* tag, Eigen::Index rows, Eigen::Index cols) {
        next_line(tag);
        if (line != tag) throw ParseError(where + ": expected block " + tag);
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            next_line("matrix row");
            const auto values = split_doubles(line, where);
            if (static_cast<Eigen::Index>(values.size()) != cols)
                throw ParseError(where + ": block " + tag + " row has wrong width");
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[static_cast<std::size_t>(c)];
        }
        return m;
    };
    model.file_factors = matrix_block("Q", nf, f);
    model.subject_factors = matrix_block("P", ns, f);

    const auto vector_block = [&](const char* tag, Eigen::Index size) {
        next_line(tag);
        if (line != tag) throw ParseError(where + ": expected block " + tag);
        next_line("vector row");
        const auto values = split_doubles(line, where);
        if (static_cast<Eigen::Index>(values.size()) != size)
            throw ParseError(where + ": block " + tag + " has wrong length");
        Eigen::VectorXd v(size);
        for (Eigen::Index k = 0; k < size; ++k) v(k) = values[static_cast<std::size_t>(k)];
        return v;
    };
    model.file_bias = vector_block("file_bias", nf);
    model.subject_bias = vector_block("subject_bias", ns);
    return model;
}

} // namespace reprocf
