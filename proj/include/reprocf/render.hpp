#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "reprocf/matrix.hpp"

namespace reprocf {

/// Plain-text portable graymap (P2): one pixel per cell, row 0 on top,
/// 1 -> white (255), 0 -> black.
void render_matrix(const UtilityMatrix& matrix, const std::filesystem::path& path);

/// Plain-text portable pixmap (P3) overlaying predictions on the split:
/// training cells are black (0) / white (1); test cells are green for true
/// positives, yellow for false negatives, gray for true negatives and red
/// for false positives.
void render_overlay(const UtilityMatrix& matrix, const CellMask& train,
                    const std::vector<std::uint8_t>& predictions,
                    const std::filesystem::path& path);

} // namespace reprocf
