#include <set>

#include "doctest.h"

#include "oracles.hpp"
#include "reprocf/als.hpp"
#include "reprocf/errors.hpp"
#include "reprocf/metrics.hpp"
#include "reprocf/sampling.hpp"
#include "reprocf/synthetic.hpp"
#include "test_util.hpp"

using namespace reprocf;
using test_util::TempDir;

namespace {

FactorModel zero_model(int nf, int ns, int f, bool use_bias) {
    FactorModel model;
    model.config.n_factors = f;
    model.config.use_bias = use_bias;
    model.file_factors = Eigen::MatrixXd::Zero(nf, f);
    model.subject_factors = Eigen::MatrixXd::Zero(ns, f);
    model.file_bias = Eigen::VectorXd::Zero(nf);
    model.subject_bias = Eigen::VectorXd::Zero(ns);
    return model;
}

CellMask full_mask(int nf, int ns) {
    CellMask mask(nf, ns);
    for (int i = 0; i < nf; ++i)
        for (int j = 0; j < ns; ++j) mask.add(i, j);
    return mask;
}

} // namespace

TEST_SUITE_BEGIN("als");

TEST_CASE("solve_entity: single observation, exact fit at lambda 0") {
    Eigen::MatrixXd g(1, 2);
    g << 1, 0;
    Eigen::VectorXd r(1);
    r << 1;
    const Eigen::VectorXd x = solve_entity(g, r, 0.0, false);
    CHECK(x(0) == doctest::Approx(1.0));
    CHECK(x(1) == doctest::Approx(0.0));
    const Eigen::VectorXd xn = solve_entity(g, r, 0.0, true);
    CHECK(xn(0) == doctest::Approx(1.0));
    CHECK(xn(1) == doctest::Approx(0.0));
}

TEST_CASE("solve_entity: scalar ridge shrinks to 1/(1+lambda)") {
    Eigen::MatrixXd g(1, 2);
    g << 1, 0;
    Eigen::VectorXd r(1);
    r << 1;
    const Eigen::VectorXd x = solve_entity(g, r, 1.0, false);
    CHECK(x(0) == doctest::Approx(0.5));
    CHECK(x(1) == doctest::Approx(0.0));
}

TEST_CASE("solve_entity: non-negative solve beats clamping") {
    // unconstrained optimum has a negative first coordinate
    Eigen::MatrixXd g(3, 2);
    g << 1, 0.6, 0, 1, 1, 1;
    Eigen::VectorXd r(3);
    r << -0.3, 0.7, 0.2;
    const Eigen::VectorXd uncon = solve_entity(g, r, 0.0, false);
    REQUIRE(uncon(0) < 0);
    const Eigen::VectorXd x = solve_entity(g, r, 0.0, true);
    CHECK(x(0) == doctest::Approx(0.0));
    CHECK(x(1) >= 0.0);
    Eigen::VectorXd clamped = uncon.cwiseMax(0.0);
    CHECK(oracles::ridge_objective(g, r, 0.0, x) <=
          oracles::ridge_objective(g, r, 0.0, clamped) + 1e-12);
    // grid oracle at 1e-3 resolution agrees
    const Eigen::Vector2d grid = oracles::grid_search_2d(g, r, 0.0, 1.5, 1e-3);
    CHECK(std::abs(x(0) - grid(0)) <= 1e-3);
    CHECK(std::abs(x(1) - grid(1)) <= 1e-3);
}

TEST_CASE("solve_entity: constrained matches active-set enumeration on random instances") {
    Rng rng(42);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int f = 2 + static_cast<int>(rng.below(2));         // 2 or 3
        const int m = 1 + static_cast<int>(rng.below(6));         // 1..6
        const double lambda = std::vector<double>{0.0, 0.01, 1.0}[
            static_cast<std::size_t>(rng.below(3))];
        Eigen::MatrixXd g(m, f);
        Eigen::VectorXd r(m);
        for (int i = 0; i < m; ++i) {
            r(i) = rng.uniform(-1, 1);
            for (int k = 0; k < f; ++k) g(i, k) = rng.uniform(-1, 1);
        }
        if (lambda == 0.0 && m < f) continue; // oracle needs a unique optimum
        const Eigen::VectorXd x = solve_entity(g, r, lambda, true);
        const Eigen::VectorXd ref = oracles::nnls_enumerate(g, r, lambda);
        worst = std::max(worst, (x - ref).lpNorm<Eigen::Infinity>());
        CHECK(oracles::ridge_objective(g, r, lambda, x) <=
              oracles::ridge_objective(g, r, lambda, ref) + 1e-9);
    }
    CHECK(worst <= 1e-3);
}

TEST_CASE("solve_entity: unconstrained matches a direct dense solve to 1e-8") {
    Rng rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        const int f = 10, m = 15;
        Eigen::MatrixXd g(m, f);
        Eigen::VectorXd r(m);
        for (int i = 0; i < m; ++i) {
            r(i) = rng.uniform(-1, 1);
            for (int k = 0; k < f; ++k) g(i, k) = rng.uniform(-1, 1);
        }
        const double lambda = 0.1;
        const Eigen::MatrixXd a =
            g.transpose() * g + lambda * Eigen::MatrixXd::Identity(f, f);
        const Eigen::VectorXd ref = a.fullPivLu().solve(g.transpose() * r);
        const Eigen::VectorXd x = solve_entity(g, r, lambda, false);
        CHECK((x - ref).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
}

TEST_CASE("solve_entity: rank-deficient lambda-0 system returns the minimum-norm minimizer") {
    Eigen::MatrixXd g(1, 3);
    g << 2, 0, 0;
    Eigen::VectorXd r(1);
    r << 4;
    const Eigen::VectorXd x = solve_entity(g, r, 0.0, false);
    CHECK(x(0) == doctest::Approx(2.0));
    CHECK(x(1) == doctest::Approx(0.0));
    CHECK(x(2) == doctest::Approx(0.0));
}

TEST_CASE("solve_entity rejects bad input") {
    Eigen::MatrixXd g(0, 2);
    Eigen::VectorXd r(0);
    CHECK_THROWS_AS(solve_entity(g, r, 0.1, false), ValidationError);
    Eigen::MatrixXd g1(1, 2);
    g1 << 1, 1;
    Eigen::VectorXd r2(2);
    r2 << 1, 1;
    CHECK_THROWS_AS(solve_entity(g1, r2, 0.1, false), ValidationError);
    Eigen::VectorXd r1(1);
    r1 << 1;
    CHECK_THROWS_AS(solve_entity(g1, r1, -1.0, false), ValidationError);
}

TEST_CASE("update_biases: constant ratings make the mean 1 and biases 0") {
    const UtilityMatrix m = UtilityMatrix::filled(4, 4, 1);
    FactorModel model = zero_model(4, 4, 2, true);
    model.global_mean = 1.0;
    model.config.regularization = 0.01;
    update_biases(m, full_mask(4, 4), model);
    CHECK(model.subject_bias.lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
    CHECK(model.file_bias.lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
}

TEST_CASE("update_biases: all-one file in a half-and-half matrix gets bias 0.5") {
    // alternating constant rows, so every column mean is 1/2 and subject
    // biases vanish; the file pass then recovers the file deviation
    UtilityMatrix m = UtilityMatrix::filled(4, 4, 0);
    for (int j = 0; j < 4; ++j) {
        m.set(0, j, 1);
        m.set(2, j, 1);
    }
    FactorModel model = zero_model(4, 4, 2, true);
    model.global_mean = 0.5;
    model.config.regularization = 1e-9;
    update_biases(m, full_mask(4, 4), model);
    CHECK(model.subject_bias.lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
    CHECK(model.file_bias(0) == doctest::Approx(0.5));
    CHECK(model.file_bias(1) == doctest::Approx(-0.5));
}

TEST_CASE("update_biases: huge regularization pins biases at zero") {
    UtilityMatrix m = UtilityMatrix::filled(3, 3, 0);
    m.set(0, 0, 1);
    FactorModel model = zero_model(3, 3, 2, true);
    model.global_mean = 0.5;
    model.config.regularization = 1e12;
    update_biases(m, full_mask(3, 3), model);
    CHECK(model.subject_bias.lpNorm<Eigen::Infinity>() <= 1e-11);
    CHECK(model.file_bias.lpNorm<Eigen::Infinity>() <= 1e-11);
}

TEST_CASE("predict_cell and predict_binary") {
    FactorModel model = zero_model(2, 2, 2, false);
    CHECK(predict_cell(model, 0, 0) == 0.0);
    CHECK(predict_binary(model, 0, 0) == 0);
    CHECK_THROWS_AS(predict_cell(model, 2, 0), ValidationError);

    FactorModel bias = zero_model(2, 2, 2, true);
    bias.global_mean = 0.5;
    bias.subject_bias(0) = 0.1;
    bias.file_bias(0) = 0.2;
    CHECK(predict_cell(bias, 0, 0) == doctest::Approx(0.8));
    CHECK(predict_binary(bias, 0, 0) == 1);

    bias.global_mean = 0.49;
    bias.subject_bias(0) = 0;
    bias.file_bias(0) = 0;
    CHECK(predict_binary(bias, 0, 0) == 0);
    bias.global_mean = 0.5;
    CHECK(predict_binary(bias, 0, 0) == 1); // half rounds up
    bias.global_mean = 1.7;
    CHECK(predict_binary(bias, 0, 0) == 1); // clamped
    bias.global_mean = -0.2;
    CHECK(predict_binary(bias, 0, 0) == 0); // clamped
}

TEST_CASE("fit: constant all-ones matrix is learned exactly") {
    const UtilityMatrix m = UtilityMatrix::filled(4, 4, 1);
    AlsConfig config;
    config.n_factors = 2;
    config.seed = 3;
    const FactorModel model = fit_als(m, full_mask(4, 4), config);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(predict_binary(model, i, j) == 1);
}

TEST_CASE("fit: binary rank-1 matrix is completed exactly where identifiable") {
    const int n = 10;
    Rng rng(77);
    std::vector<std::uint8_t> u(n), v(n);
    do {
        for (auto& b : u) b = static_cast<std::uint8_t>(rng.below(2));
    } while (std::count(u.begin(), u.end(), 1) == 0);
    do {
        for (auto& b : v) b = static_cast<std::uint8_t>(rng.below(2));
    } while (std::count(v.begin(), v.end(), 1) == 0);

    std::vector<std::uint8_t> cells(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) cells[static_cast<std::size_t>(i) * n + j] = u[i] & v[j];
    const UtilityMatrix m(n, n, cells);

    const CellMask train = sample_random_unreal(0.9, n, n, rng);
    std::vector<std::uint8_t> observed(n * n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (train.contains(i, j)) observed[static_cast<std::size_t>(i) * n + j] = 1;

    const auto oracle = oracles::rank_one_completions(cells, observed, n, n);
    REQUIRE(oracle.any_consistent);

    AlsConfig config;
    config.n_factors = 2;
    config.regularization = 1e-3;
    config.seed = 9;
    const FactorModel model = fit_als(m, train, config);

    int identifiable = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * n + j;
            if (observed[k] || !oracle.agreed[k]) continue;
            ++identifiable;
            CHECK(predict_binary(model, i, j) == *oracle.agreed[k]);
        }
    CHECK(identifiable > 0); // the frozen seed leaves determinable hidden cells
}

TEST_CASE("fit: synthetic eight types with rfnu at alpha 0.9 clears 0.85") {
    SyntheticSpec spec;
    spec.n_types = 8;
    const UtilityMatrix m = generate_synthetic(spec);
    SamplingSpec sampling;
    sampling.method = SamplingMethod::Rfnu;
    sampling.alpha = 0.9;
    sampling.seed = 4242;
    const CellMask train = sample_mask(sampling, 100, 100);
    AlsConfig config;
    config.seed = 4243;
    const FactorModel model = fit_als(m, train, config);
    const ConfusionCounts counts =
        confusion(m, predict_binary_grid(model), train.complement());
    CHECK(metrics(counts).accuracy >= 0.85);
}

TEST_CASE("fit: fully observed exact-low-rank matrices reconstruct to 1e-3 per cell") {
    for (int trial = 0; trial < 4; ++trial) {
        SyntheticSpec spec;
        spec.n_types = 4; // exact rank <= 2
        spec.n_files = 24;
        spec.n_subjects = 16;
        const UtilityMatrix m = generate_synthetic(spec);
        AlsConfig config;
        config.n_factors = 3;
        config.regularization = 1e-6;
        config.nonnegative = trial % 2 == 0;
        config.seed = 100 + static_cast<std::uint64_t>(trial);
        const FactorModel model = fit_als(m, full_mask(24, 16), config);
        double worst = 0;
        for (int i = 0; i < 24; ++i)
            for (int j = 0; j < 16; ++j)
                worst = std::max(worst, std::abs(predict_cell(model, i, j) - m.at(i, j)));
        CHECK(worst <= 1e-3);
    }
}

TEST_CASE("fit: training objective is non-increasing across rounds") {
    Rng instance_rng(66);
    for (int run = 0; run < 20; ++run) {
        const int nf = 20, ns = 15;
        std::vector<std::uint8_t> cells(static_cast<std::size_t>(nf) * ns);
        for (auto& c : cells) c = instance_rng.bernoulli(0.4) ? 1 : 0;
        const UtilityMatrix m(nf, ns, cells);
        Rng mask_rng(900 + static_cast<std::uint64_t>(run));
        CellMask train = sample_random_unreal(0.6, nf, ns, mask_rng);
        train = augment_cold_start(train, mask_rng);

        AlsConfig config;
        config.n_factors = 6;
        config.max_iterations = 6;
        config.nonnegative = run % 2 == 0;
        config.use_bias = run % 3 == 0;
        config.seed = 7000 + static_cast<std::uint64_t>(run);
        const FactorModel model = fit_als(m, train, config);
        REQUIRE(model.objective_history.size() == 6);
        for (std::size_t k = 1; k < model.objective_history.size(); ++k) {
            CHECK(model.objective_history[k] <=
                  model.objective_history[k - 1] * (1 + 1e-9) + 1e-12);
        }
    }
}

TEST_CASE("fit: non-negative mode keeps every factor entry non-negative") {
    SyntheticSpec spec;
    spec.n_types = 4;
    spec.n_files = 30;
    spec.n_subjects = 20;
    const UtilityMatrix m = generate_synthetic(spec);
    Rng rng(8);
    CellMask train = augment_cold_start(sample_random_unreal(0.5, 30, 20, rng), rng);
    AlsConfig config;
    config.n_factors = 5;
    config.seed = 2;
    const FactorModel model = fit_als(m, train, config);
    CHECK(model.file_factors.minCoeff() >= 0.0);
    CHECK(model.subject_factors.minCoeff() >= 0.0);
}

TEST_CASE("fit: bias mode nails matrices with constant rows") {
    UtilityMatrix m = UtilityMatrix::filled(40, 30, 0);
    for (int i = 0; i < 40; i += 2)
        for (int j = 0; j < 30; ++j) m.set(i, j, 1);
    SamplingSpec sampling;
    sampling.method = SamplingMethod::Rfnu;
    sampling.alpha = 0.4;
    sampling.seed = 5;
    const CellMask train = sample_mask(sampling, 40, 30);
    AlsConfig config;
    config.use_bias = true;
    config.seed = 6;
    const FactorModel model = fit_als(m, train, config);
    const ConfusionCounts counts =
        confusion(m, predict_binary_grid(model), train.complement());
    CHECK(metrics(counts).accuracy == doctest::Approx(1.0));
}

TEST_CASE("fit: empty training set and entity warnings") {
    const UtilityMatrix m = UtilityMatrix::filled(3, 3, 1);
    CHECK_THROWS_AS(fit_als(m, CellMask(3, 3), AlsConfig{}), ValidationError);

    CellMask sparse(3, 3);
    sparse.add(0, 0); // row 1,2 and subjects 1,2 unobserved
    std::vector<std::string> warnings;
    AlsConfig config;
    config.n_factors = 2;
    fit_als(m, sparse, config, &warnings);
    CHECK(warnings.size() == 4);
}

TEST_CASE("model save/load round trip is bit-exact") {
    TempDir dir;
    SyntheticSpec spec;
    spec.n_types = 4;
    spec.n_files = 12;
    spec.n_subjects = 10;
    const UtilityMatrix m = generate_synthetic(spec);
    Rng rng(3);
    const CellMask train = augment_cold_start(sample_random_unreal(0.7, 12, 10, rng), rng);
    AlsConfig config;
    config.n_factors = 4;
    config.use_bias = true;
    config.seed = 11;
    const FactorModel model = fit_als(m, train, config);
    save_model_csv(model, dir.file("model.csv"));
    const FactorModel loaded = load_model_csv(dir.file("model.csv"));
    CHECK(loaded.file_factors == model.file_factors);
    CHECK(loaded.subject_factors == model.subject_factors);
    CHECK(loaded.file_bias == model.file_bias);
    CHECK(loaded.subject_bias == model.subject_bias);
    CHECK(loaded.global_mean == model.global_mean);
    CHECK(loaded.config.use_bias == model.config.use_bias);
    CHECK(loaded.config.n_factors == model.config.n_factors);
}

TEST_CASE("export_factors writes one row per entity") {
    TempDir dir;
    FactorModel model = zero_model(5, 7, 3, false);
    export_factors(model, dir.file("subjects.csv"), dir.file("files.csv"));
    const auto count_lines = [](const std::string& body) {
        return std::count(body.begin(), body.end(), '\n');
    };
    CHECK(count_lines(test_util::read_file(dir.file("subjects.csv"))) == 7);
    CHECK(count_lines(test_util::read_file(dir.file("files.csv"))) == 5);
}

TEST_CASE("fully observed eight-type matrix clusters factors by type and block") {
    SyntheticSpec spec;
    spec.n_types = 8;
    const UtilityMatrix m = generate_synthetic(spec);
    AlsConfig config;
    config.n_factors = 3;
    config.seed = 21;
    const FactorModel model = fit_als(m, full_mask(100, 100), config);
    const auto distinct_rounded = [](const Eigen::MatrixXd& mat) {
        std::set<std::vector<double>> seen;
        for (Eigen::Index r = 0; r < mat.rows(); ++r) {
            std::vector<double> key;
            for (Eigen::Index c = 0; c < mat.cols(); ++c)
                key.push_back(std::round(mat(r, c) * 100) / 100);
            seen.insert(std::move(key));
        }
        return seen.size();
    };
    CHECK(distinct_rounded(model.subject_factors) == 8);
    CHECK(distinct_rounded(model.file_factors) == 3);
}

TEST_SUITE_END();
