#include "doctest.h"

#include "reprocf/errors.hpp"
#include "reprocf/metrics.hpp"
#include "reprocf/sampling.hpp"
#include "reprocf/synthetic.hpp"

using namespace reprocf;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("confusion counts over test cells only") {
    UtilityMatrix m = UtilityMatrix::filled(2, 5, 0);
    for (int j = 0; j < 3; ++j) m.set(0, j, 1); // 3 ones in row 0
    m.set(1, 4, 1);
    CellMask test(2, 5);
    for (int j = 0; j < 5; ++j) test.add(0, j), test.add(1, j);
    test.remove(1, 4); // 9 test cells: 3 positive, 6 negative

    std::vector<std::uint8_t> perfect = m.cells();
    const ConfusionCounts exact = confusion(m, perfect, test);
    CHECK(exact.tp == 3);
    CHECK(exact.tn == 6);
    CHECK(exact.fp == 0);
    CHECK(exact.fn == 0);
    CHECK(exact.total() == test.size());

    std::vector<std::uint8_t> inverted(perfect.size());
    for (std::size_t k = 0; k < perfect.size(); ++k) inverted[k] = perfect[k] ? 0 : 1;
    const ConfusionCounts wrong = confusion(m, inverted, test);
    CHECK(wrong.tp == 0);
    CHECK(wrong.tn == 0);
    CHECK(wrong.fp == 6);
    CHECK(wrong.fn == 3);

    CHECK_THROWS_AS(confusion(m, perfect, CellMask(3, 5)), ValidationError);
}

TEST_CASE("swap_polarity relabels class 0 as positive") {
    const ConfusionCounts c{5, 2, 7, 3};
    const ConfusionCounts s = swap_polarity(c);
    CHECK(s.tp == 7);
    CHECK(s.fp == 3);
    CHECK(s.tn == 5);
    CHECK(s.fn == 2);
    CHECK(s.total() == c.total());
}

TEST_CASE("metrics from perfect counts") {
    const MetricsRecord rec = metrics(ConfusionCounts{6, 0, 4, 0});
    CHECK(rec.accuracy == 1.0);
    CHECK(rec.sensitivity.value() == 1.0);
    CHECK(rec.specificity.value() == 1.0);
}

TEST_CASE("metrics reports undefined ratios as absent") {
    const MetricsRecord no_positives = metrics(ConfusionCounts{0, 1, 9, 0});
    CHECK_FALSE(no_positives.sensitivity.has_value());
    CHECK(no_positives.specificity.has_value());

    const MetricsRecord no_negatives = metrics(ConfusionCounts{9, 0, 0, 1});
    CHECK(no_negatives.sensitivity.has_value());
    CHECK_FALSE(no_negatives.specificity.has_value());

    CHECK_THROWS_AS(metrics(ConfusionCounts{}), ValidationError);
}

TEST_CASE("metrics reproduces a 0.92/0.99 sensitivity-specificity pair") {
    const MetricsRecord rec = metrics(ConfusionCounts{92, 1, 99, 8});
    CHECK(rec.sensitivity.value() == doctest::Approx(0.92));
    CHECK(rec.specificity.value() == doctest::Approx(0.99));
    CHECK(rec.accuracy == doctest::Approx(191.0 / 200.0));
}

TEST_CASE("dummy predicts the training majority") {
    UtilityMatrix m = UtilityMatrix::filled(1, 10, 0);
    for (int j = 0; j < 7; ++j) m.set(0, j, 1);
    CellMask train(1, 10);
    for (int j = 0; j < 10; ++j) train.add(0, j);
    const auto grid = dummy_predict(m, train);
    for (const auto v : grid) CHECK(v == 1);
}

TEST_CASE("dummy breaks exact ties toward zero") {
    UtilityMatrix m = UtilityMatrix::filled(1, 10, 0);
    for (int j = 0; j < 5; ++j) m.set(0, j, 1);
    CellMask train(1, 10);
    for (int j = 0; j < 10; ++j) train.add(0, j);
    for (const auto v : dummy_predict(m, train)) CHECK(v == 0);

    CHECK_THROWS_AS(dummy_predict(m, CellMask(1, 10)), ValidationError);
}

TEST_CASE("dummy accuracy sits near one half on synthetic data") {
    for (int types : {2, 8, 64}) {
        SyntheticSpec spec;
        spec.n_types = types;
        const UtilityMatrix m = generate_synthetic(spec);
        double sum = 0;
        const int reps = 5;
        for (int rep = 0; rep < reps; ++rep) {
            SamplingSpec sampling;
            sampling.method = SamplingMethod::Rfnu;
            sampling.alpha = 0.5;
            sampling.seed = 3100 + static_cast<std::uint64_t>(types * 10 + rep);
            const CellMask train = sample_mask(sampling, 100, 100);
            const ConfusionCounts counts =
                confusion(m, dummy_predict(m, train), train.complement());
            sum += metrics(counts).accuracy;
        }
        CHECK(sum / reps == doctest::Approx(0.5).epsilon(0.1)); // 0.5 +- 0.05
    }
}

TEST_SUITE_END();
