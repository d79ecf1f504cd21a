#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reprocf/matrix.hpp"
#include "reprocf/rng.hpp"

namespace reprocf {

/// Training-set construction strategies. All of them except RandomUnreal keep
/// every column's selection a prefix of the file order.
enum class SamplingMethod {
    CompleteColumns,
    CompleteRows,
    RandomSubjects,
    Rfnu,   // per-subject prefix length from a uniform distribution
    Rfntl,  // triangular, minimum pushed as high as the target mean allows
    Rfnts,  // triangular, minimum fixed at zero
    RandomUnreal,
};

constexpr SamplingMethod kAllMethods[] = {
    SamplingMethod::CompleteColumns, SamplingMethod::CompleteRows,
    SamplingMethod::RandomSubjects,  SamplingMethod::Rfnu,
    SamplingMethod::Rfntl,           SamplingMethod::Rfnts,
    SamplingMethod::RandomUnreal,
};

std::string_view method_name(SamplingMethod method);
std::optional<SamplingMethod> parse_method(std::string_view name);

/// Whether the method keeps training cells above test cells in every column.
inline bool respects_time_order(SamplingMethod method) {
    return method != SamplingMethod::RandomUnreal;
}

/// Fully determines one mask draw.
struct SamplingSpec {
    SamplingMethod method = SamplingMethod::Rfnu;
    double alpha = 0.5;            // target training ratio, in (0,1)
    std::uint64_t seed = 0;
    double ratio_tolerance = 0.01; // |actual - alpha| bound enforced on count draws
    bool cold_start = true;        // add row 0 plus one full random column
};

/// Triangular distribution by (minimum, mode, maximum); mean is their third.
struct TriangularParams {
    double min = 0;
    double mode = 0;
    double max = 0;
};

/// Inverse-CDF draw from T(min, mode, max); degenerate min==mode==max returns min.
double sample_triangular(const TriangularParams& params, Rng& rng);

/// Training prefix length per subject.
using CountVector = std::vector<int>;

/// Per-subject counts whose mean is alpha * n_files:
/// alpha <= 0.5 draws U(0, n_files) with probability 2*alpha (else 0);
/// alpha > 0.5 draws U((2*alpha - 1) * n_files, n_files).
CountVector counts_rfnu(double alpha, int n_files, int n_subjects, Rng& rng);

/// Triangular counts with the largest feasible minimum:
/// alpha > 1/3 draws T(m, m, n_files) with m = (3*alpha - 1)/2 * n_files;
/// alpha <= 1/3 draws T(0, 0, n_files) with probability 3*alpha (else 0).
CountVector counts_rfntl(double alpha, int n_files, int n_subjects, Rng& rng);

/// Triangular counts with minimum zero:
/// alpha < 1/3 as the low regime of counts_rfntl;
/// 1/3 <= alpha <= 2/3 draws T(0, (3*alpha - 1) * n_files, n_files);
/// alpha > 2/3 draws T(0, n_files, n_files) with probability 3*(1 - alpha), else n_files.
CountVector counts_rfnts(double alpha, int n_files, int n_subjects, Rng& rng);

/// Prefix mask: cell (i, j) is a member iff i < counts[j].
CellMask counts_to_mask(const CountVector& counts, int n_files);

/// floor(alpha * n_subjects) full columns chosen uniformly; the leftover cell
/// budget fills a prefix of one extra random column.
CellMask sample_complete_columns(double alpha, int n_files, int n_subjects, Rng& rng);

/// First floor(alpha * n_files) rows complete; the leftover budget lands in
/// the next row for a uniformly chosen subject subset.
CellMask sample_complete_rows(double alpha, int n_files, int n_subjects, Rng& rng);

/// Repeats floor(alpha * cells) times: pick a subject uniformly among those
/// with a non-full column and take its lowest unselected file.
CellMask sample_random_subjects(double alpha, int n_files, int n_subjects, Rng& rng);

/// floor(alpha * cells) cells uniform without replacement, ignoring file
/// order. Violates the time constraint; baseline only.
CellMask sample_random_unreal(double alpha, int n_files, int n_subjects, Rng& rng);

/// Superset of the input containing all of row 0 and one uniformly chosen
/// full column, so no row or column is left without training cells.
CellMask augment_cold_start(const CellMask& mask, Rng& rng);

/// Nudges uniformly chosen non-saturated counts by +-1 until the implied
/// training ratio sits within tolerance of alpha.
CountVector adjust_to_ratio(CountVector counts, double alpha, double tolerance,
                            int n_files, Rng& rng);

/// Dispatches to the method sampler; count-based methods go through
/// adjust_to_ratio, then cold-start augmentation is applied when configured.
/// Deterministic given (spec, dims). A post-augmentation ratio drift beyond
/// tolerance is appended to `warnings` when provided.
CellMask sample_mask(const SamplingSpec& spec, int n_files, int n_subjects,
                     std::vector<std::string>* warnings = nullptr);

} // namespace reprocf
