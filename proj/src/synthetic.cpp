#include "reprocf/synthetic.hpp"

#include <string>

#include "reprocf/errors.hpp"

namespace reprocf {

int block_count(int n_types) {
    if (n_types < 2 || (n_types & (n_types - 1)) != 0) {
        throw ValidationError("n_types must be a power of two >= 2, got " +
                              std::to_string(n_types));
    }
    int b = 0;
    for (int v = n_types; v > 1; v >>= 1) ++b;
    return b;
}

std::vector<std::uint8_t> type_pattern(int type_id, int n_blocks) {
    if (n_blocks < 1 || n_blocks >= 31) {
        throw ValidationError("n_blocks out of range: " + std::to_string(n_blocks));
    }
    if (type_id < 0 || type_id >= (1 << n_blocks)) {
        throw ValidationError("type_id " + std::to_string(type_id) +
                              " out of range for " + std::to_string(n_blocks) + " blocks");
    }
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n_blocks));
    for (int b = 0; b < n_blocks; ++b) {
        bits[b] = static_cast<std::uint8_t>((type_id >> (n_blocks - 1 - b)) & 1);
    }
    return bits;
}

UtilityMatrix generate_synthetic(const SyntheticSpec& spec) {
    const int n_blocks = block_count(spec.n_types);
    if (spec.n_types > spec.n_subjects) {
        throw ValidationError("n_types " + std::to_string(spec.n_types) +
                              " exceeds n_subjects " + std::to_string(spec.n_subjects));
    }
    if (n_blocks > spec.n_files) {
        throw ValidationError("need at least " + std::to_string(n_blocks) +
                              " files for " + std::to_string(spec.n_types) + " types");
    }

    // Group g gets an extra member while the remainder lasts.
    const auto group_of = [](int index, int total, int groups) {
        const int base = total / groups, rem = total % groups;
        const int wide = rem * (base + 1);
        return index < wide ? index / (base + 1) : rem + (index - wide) / base;
    };

    std::vector<int> subject_type(static_cast<std::size_t>(spec.n_subjects));
    for (int j = 0; j < spec.n_subjects; ++j)
        subject_type[j] = group_of(j, spec.n_subjects, spec.n_types);
    std::vector<int> file_block(static_cast<std::size_t>(spec.n_files));
    for (int i = 0; i < spec.n_files; ++i)
        file_block[i] = group_of(i, spec.n_files, n_blocks);

    std::vector<std::vector<std::uint8_t>> patterns;
    patterns.reserve(static_cast<std::size_t>(spec.n_types));
    for (int t = 0; t < spec.n_types; ++t) patterns.push_back(type_pattern(t, n_blocks));

    std::vector<std::uint8_t> cells(
        static_cast<std::size_t>(spec.n_files) * spec.n_subjects);
    for (int i = 0; i < spec.n_files; ++i)
        for (int j = 0; j < spec.n_subjects; ++j)
            cells[static_cast<std::size_t>(i) * spec.n_subjects + j] =
                patterns[subject_type[j]][file_block[i]];

    return UtilityMatrix(spec.n_files, spec.n_subjects, std::move(cells),
                         "synthetic:" + std::to_string(spec.n_types));
}

} // namespace reprocf
