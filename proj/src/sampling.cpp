#include "reprocf/sampling.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "reprocf/errors.hpp"

namespace reprocf {

namespace {

// floor with a guard against values like 0.35*100 landing at 34.999999....
std::int64_t floor_budget(double x) {
    return static_cast<std::int64_t>(std::floor(x + 1e-9));
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("alpha must lie in (0,1), got " + std::to_string(alpha));
    }
}

int round_count(double x, int n_files) {
    const auto k = static_cast<int>(std::floor(x + 0.5)); // half-up
    return std::clamp(k, 0, n_files);
}

} // namespace

std::string_view method_name(SamplingMethod method) {
    switch (method) {
        case SamplingMethod::CompleteColumns: return "complete_columns";
        case SamplingMethod::CompleteRows:    return "complete_rows";
        case SamplingMethod::RandomSubjects:  return "random_subjects";
        case SamplingMethod::Rfnu:            return "rfnu";
        case SamplingMethod::Rfntl:           return "rfntl";
        case SamplingMethod::Rfnts:           return "rfnts";
        case SamplingMethod::RandomUnreal:    return "random_unreal";
    }
    return "?";
}

std::optional<SamplingMethod> parse_method(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "complete_columns") return SamplingMethod::CompleteColumns;
    if (lower == "complete_rows") return SamplingMethod::CompleteRows;
    if (lower == "random_subjects" || lower == "rs") return SamplingMethod::RandomSubjects;
    if (lower == "rfnu") return SamplingMethod::Rfnu;
    if (lower == "rfntl") return SamplingMethod::Rfntl;
    if (lower == "rfnts") return SamplingMethod::Rfnts;
    if (lower == "random_unreal") return SamplingMethod::RandomUnreal;
    return std::nullopt;
}

double sample_triangular(const TriangularParams& params, Rng& rng) {
    const double a = params.min, b = params.mode, c = params.max;
    if (!(a <= b && b <= c)) {
        throw ValidationError("triangular parameters must satisfy min <= mode <= max");
    }
    if (a == c) return a;
    const double u = rng.uniform();
    const double split = (b - a) / (c - a);
    if (u < split) return a + std::sqrt(u * (c - a) * (b - a));
    return c - std::sqrt((1.0 - u) * (c - a) * (c - b));
}

CountVector counts_rfnu(double alpha, int n_files, int n_subjects, Rng& rng) {
    check_alpha(alpha);
    CountVector counts(static_cast<std::size_t>(n_subjects), 0);
    const double nf = n_files;
    if (alpha <= 0.5) {
        for (auto& c : counts) {
            if (rng.bernoulli(2.0 * alpha)) c = round_count(rng.uniform(0.0, nf), n_files);
        }
    } else {
        const double lo = (2.0 * alpha - 1.0) * nf;
        for (auto& c : counts) c = round_count(rng.uniform(lo, nf), n_files);
    }
    return counts;
}

CountVector counts_rfntl(double alpha, int n_files, int n_subjects, Rng& rng) {
    check_alpha(alpha);
    CountVector counts(static_cast<std::size_t>(n_subjects), 0);
    const double nf = n_files;
    if (alpha > 1.0 / 3.0) {
        const TriangularParams t{(3.0 * alpha - 1.0) / 2.0 * nf,
                                 (3.0 * alpha - 1.0) / 2.0 * nf, nf};
        for (auto& c : counts) c = round_count(sample_triangular(t, rng), n_files);
    } else {
        const TriangularParams t{0.0, 0.0, nf};
        for (auto& c : counts) {
            if (rng.bernoulli(3.0 * alpha)) c = round_count(sample_triangular(t, rng), n_files);
        }
    }
    return counts;
}

CountVector counts_rfnts(double alpha, int n_files, int n_subjects, Rng& rng) {
    check_alpha(alpha);
    CountVector counts(static_cast<std::size_t>(n_subjects), 0);
    const double nf = n_files;
    if (alpha < 1.0 / 3.0) {
        const TriangularParams t{0.0, 0.0, nf};
        for (auto& c : counts) {
            if (rng.bernoulli(3.0 * alpha)) c = round_count(sample_triangular(t, rng), n_files);
        }
    } else if (alpha <= 2.0 / 3.0) {
        const TriangularParams t{0.0, (3.0 * alpha - 1.0) * nf, nf};
        for (auto& c : counts) c = round_count(sample_triangular(t, rng), n_files);
    } else {
        const TriangularParams t{0.0, nf, nf};
        for (auto& c : counts) {
            c = rng.bernoulli(3.0 * (1.0 - alpha))
                    ? round_count(sample_triangular(t, rng), n_files)
                    : n_files;
        }
    }
    return counts;
}

CellMask counts_to_mask(const CountVector& counts, int n_files) {
    const int n_subjects = static_cast<int>(counts.size());
    CellMask mask(n_files, n_subjects);
    for (int j = 0; j < n_subjects; ++j) {
        if (counts[j] < 0 || counts[j] > n_files) {
            throw ValidationError("count " + std::to_string(counts[j]) +
                                  " for subject " + std::to_string(j) + " out of range");
        }
        for (int i = 0; i < counts[j]; ++i) mask.add(i, j);
    }
    return mask;
}

CellMask sample_complete_columns(double alpha, int n_files, int n_subjects, Rng& rng) {
    check_alpha(alpha);
    const std::int64_t budget = floor_budget(alpha * n_files * n_subjects);
    const auto n_full = static_cast<int>(floor_budget(alpha * n_subjects));
    const std::int64_t residual = budget - static_cast<std::int64_t>(n_full) * n_files;

    std::vector<int> order(static_cast<std::size_t>(n_subjects));
    std::iota(order.begin(), order.end(), 0);
    const auto chosen = static_cast<std::size_t>(n_full) + (residual > 0 ? 1 : 0);
    rng.shuffle_prefix(order, chosen);

    CellMask mask(n_files, n_subjects);
    for (int k = 0; k < n_full; ++k)
        for (int i = 0; i < n_files; ++i) mask.add(i, order[k]);
    if (residual > 0) {
        const int extra = order[static_cast<std::size_t>(n_full)];
        for (std::int64_t i = 0; i < residual; ++i) mask.add(static_cast<int>(i), extra);
    }
    return mask;
}

CellMask sample_complete_rows(double alpha, int n_files, int n_subjects, Rng& rng) {
    check_alpha(alpha);
    const std::int64_t budget = floor_budget(alpha * n_files * n_subjects);
    const auto n_full = static_cast<int>(floor_budget(alpha * n_files));
    const std::int64_t residual = budget - static_cast<std::int64_t>(n_full) * n_subjects;

    CellMask mask(n_files, n_subjects);
    for (int i = 0; i < n_full; ++i)
        for (int j = 0; j < n_subjects; ++j) mask.add(i, j);
    if (residual > 0) {
        std::vector<int> order(static_cast<std::size_t>(n_subjects));
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle_prefix(order, static_cast<std::size_t>(residual));
        for (std::int64_t k = 0; k < residual; ++k) mask.add(n_full, order[k]);
    }
    return mask;
}

CellMask sample_random_subjects(double alpha, int n_files, int n_subjects, Rng& rng) {
    check_alpha(alpha);
    std::int64_t budget = floor_budget(alpha * n_files * n_subjects);
    CountVector counts(static_cast<std::size_t>(n_subjects), 0);
    std::vector<int> open(static_cast<std::size_t>(n_subjects));
    std::iota(open.begin(), open.end(), 0);
    while (budget-- > 0) {
        const auto k = static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(open.size())));
        const int j = open[k];
        if (++counts[j] == n_files) {
            open[k] = open.back();
            open.pop_back();
        }
    }
    return counts_to_mask(counts, n_files);
}

CellMask sample_random_unreal(double alpha, int n_files, int n_subjects, Rng& rng) {
    check_alpha(alpha);
    const std::int64_t total = static_cast<std::int64_t>(n_files) * n_subjects;
    const std::int64_t budget = floor_budget(alpha * n_files * n_subjects);
    std::vector<std::int64_t> cell(static_cast<std::size_t>(total));
    std::iota(cell.begin(), cell.end(), std::int64_t{0});
    rng.shuffle_prefix(cell, static_cast<std::size_t>(budget));
    CellMask mask(n_files, n_subjects);
    for (std::int64_t k = 0; k < budget; ++k) {
        mask.add(static_cast<int>(cell[k] / n_subjects), static_cast<int>(cell[k] % n_subjects));
    }
    return mask;
}

CellMask augment_cold_start(const CellMask& mask, Rng& rng) {
    CellMask out = mask;
    const auto column = static_cast<int>(rng.below(mask.n_subjects()));
    for (int j = 0; j < mask.n_subjects(); ++j) out.add(0, j);
    for (int i = 0; i < mask.n_files(); ++i) out.add(i, column);
    return out;
}

CountVector adjust_to_ratio(CountVector counts, double alpha, double tolerance,
                            int n_files, Rng& rng) {
    check_alpha(alpha);
    if (tolerance <= 0.0) throw ValidationError("ratio tolerance must be positive");
    if (alpha - tolerance > 1.0 || alpha + tolerance < 0.0) {
        throw ValidationError("tolerance band around alpha lies outside [0,1]");
    }
    const auto n_subjects = static_cast<std::int64_t>(counts.size());
    if (n_subjects == 0 || n_files == 0) return counts;
    const double total_cells = static_cast<double>(n_subjects) * n_files;

    std::int64_t total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
    while (std::abs(static_cast<double>(total) / total_cells - alpha) > tolerance) {
        const bool grow = static_cast<double>(total) / total_cells < alpha;
        for (;;) {
            const auto j = static_cast<std::size_t>(rng.below(n_subjects));
            if (grow && counts[j] < n_files) {
                ++counts[j];
                ++total;
                break;
            }
            if (!grow && counts[j] > 0) {
                --counts[j];
                --total;
                break;
            }
        }
    }
    return counts;
}

CellMask sample_mask(const SamplingSpec& spec, int n_files, int n_subjects,
                     std::vector<std::string>* warnings) {
    check_alpha(spec.alpha);
    Rng rng(spec.seed);
    CellMask mask(n_files, n_subjects);
    switch (spec.method) {
        case SamplingMethod::CompleteColumns:
            mask = sample_complete_columns(spec.alpha, n_files, n_subjects, rng);
            break;
        case SamplingMethod::CompleteRows:
            mask = sample_complete_rows(spec.alpha, n_files, n_subjects, rng);
            break;
        case SamplingMethod::RandomSubjects:
            mask = sample_random_subjects(spec.alpha, n_files, n_subjects, rng);
            break;
        case SamplingMethod::Rfnu:
            mask = counts_to_mask(adjust_to_ratio(counts_rfnu(spec.alpha, n_files, n_subjects, rng),
                                                  spec.alpha, spec.ratio_tolerance, n_files, rng),
                                  n_files);
            break;
        case SamplingMethod::Rfntl:
            mask = counts_to_mask(adjust_to_ratio(counts_rfntl(spec.alpha, n_files, n_subjects, rng),
                                                  spec.alpha, spec.ratio_tolerance, n_files, rng),
                                  n_files);
            break;
        case SamplingMethod::Rfnts:
            mask = counts_to_mask(adjust_to_ratio(counts_rfnts(spec.alpha, n_files, n_subjects, rng),
                                                  spec.alpha, spec.ratio_tolerance, n_files, rng),
                                  n_files);
            break;
        case SamplingMethod::RandomUnreal:
            mask = sample_random_unreal(spec.alpha, n_files, n_subjects, rng);
            break;
    }
    if (spec.cold_start) {
        mask = augment_cold_start(mask, rng);
        const double drift = std::abs(training_ratio(mask) - spec.alpha);
        if (drift > spec.ratio_tolerance && warnings) {
            warnings->push_back("training ratio drifted to " +
                                std::to_string(training_ratio(mask)) +
                                " after cold-start augmentation (target " +
                                std::to_string(spec.alpha) + ")");
        }
    }
    return mask;
}

} // namespace reprocf
