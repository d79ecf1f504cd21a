#pragma once

#include <cstdint>
#include <vector>

#include "reprocf/matrix.hpp"

namespace reprocf {

/// Shape of a generated benchmark matrix: n_types subject groups whose
/// columns enumerate every variation pattern over log2(n_types) file blocks.
struct SyntheticSpec {
    int n_types = 2;       // power of two, <= n_subjects
    int n_files = 100;
    int n_subjects = 100;
    std::uint64_t seed = 0; // kept for interface uniformity; generation is deterministic
};

/// log2(n_types); throws ValidationError unless n_types is a power of two >= 2.
int block_count(int n_types);

/// Bit b of the pattern is the value shared by every file of block b for
/// subjects of this type; most-significant bit first, so across all type ids
/// the patterns enumerate every length-n_blocks bit vector exactly once.
std::vector<std::uint8_t> type_pattern(int type_id, int n_blocks);

/// Contiguous subject groups of size floor/ceil(n_subjects/n_types),
/// contiguous file blocks of size floor/ceil(n_files/log2(n_types)); cell
/// (i,j) = bit block(i) of type(j)'s pattern. Remainders go to the first
/// groups and blocks. Deterministic for a given spec.
UtilityMatrix generate_synthetic(const SyntheticSpec& spec);

} // namespace reprocf
