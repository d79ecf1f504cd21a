#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "reprocf/matrix.hpp"

namespace reprocf {

/// Test-cell confusion counts with class 1 (reproducibility error) positive.
struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }
};

struct MetricsRecord {
    double accuracy = 0.0;
    std::optional<double> sensitivity; // absent when no positive test cells
    std::optional<double> specificity; // absent when no negative test cells
};

/// Counts over the test cells; `predictions` is a full row-major binary grid.
ConfusionCounts confusion(const UtilityMatrix& truth,
                          const std::vector<std::uint8_t>& predictions,
                          const CellMask& test);

/// Relabels class 0 as positive.
ConfusionCounts swap_polarity(const ConfusionCounts& counts);

/// Derived ratios; undefined ones are reported absent, never as 0 or NaN.
/// Throws ValidationError when the counts are empty.
MetricsRecord metrics(const ConfusionCounts& counts);

/// Majority-class baseline: every cell gets the most frequent training value,
/// ties going to 0. Returns a full row-major grid.
std::vector<std::uint8_t> dummy_predict(const UtilityMatrix& matrix, const CellMask& train);

} // namespace reprocf
