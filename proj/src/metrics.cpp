#include "reprocf/metrics.hpp"

#include "reprocf/errors.hpp"

namespace reprocf {

ConfusionCounts confusion(const UtilityMatrix& truth,
                          const std::vector<std::uint8_t>& predictions,
                          const CellMask& test) {
    if (!test.dims_match(truth)) throw ValidationError("mask dims do not match matrix");
    if (predictions.size() != static_cast<std::size_t>(truth.cell_count())) {
        throw ValidationError("prediction grid size does not match matrix");
    }
    ConfusionCounts c;
    for (int i = 0; i < truth.n_files(); ++i)
        for (int j = 0; j < truth.n_subjects(); ++j) {
            if (!test.contains(i, j)) continue;
            const bool actual = truth.at(i, j) != 0;
            const bool predicted =
                predictions[static_cast<std::size_t>(i) * truth.n_subjects() + j] != 0;
            if (actual && predicted) ++c.tp;
            else if (actual && !predicted) ++c.fn;
            else if (!actual && predicted) ++c.fp;
            else ++c.tn;
        }
    return c;
}

ConfusionCounts swap_polarity(const ConfusionCounts& counts) {
    return ConfusionCounts{counts.tn, counts.fn, counts.tp, counts.fp};
}

MetricsRecord metrics(const ConfusionCounts& counts) {
    const std::int64_t total = counts.total();
    if (total <= 0) throw ValidationError("confusion counts are empty");
    MetricsRecord rec;
    rec.accuracy = static_cast<double>(counts.tp + counts.tn) / static_cast<double>(total);
    if (counts.tp + counts.fn > 0) {
        rec.sensitivity =
            static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn);
    }
    if (counts.tn + counts.fp > 0) {
        rec.specificity =
            static_cast<double>(counts.tn) / static_cast<double>(counts.tn + counts.fp);
    }
    return rec;
}

std::vector<std::uint8_t> dummy_predict(const UtilityMatrix& matrix, const CellMask& train) {
    if (!train.dims_match(matrix)) throw ValidationError("mask dims do not match matrix");
    if (train.empty()) throw ValidationError("training set is empty");
    std::int64_t ones = 0;
    for (int i = 0; i < matrix.n_files(); ++i)
        for (int j = 0; j < matrix.n_subjects(); ++j)
            if (train.contains(i, j) && matrix.at(i, j)) ++ones;
    const std::uint8_t majority = (2 * ones > train.size()) ? 1 : 0; // tie -> 0
    return std::vector<std::uint8_t>(static_cast<std::size_t>(matrix.cell_count()), majority);
}

} // namespace reprocf
