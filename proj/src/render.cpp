#include "reprocf/render.hpp"

#include <fstream>

#include "reprocf/errors.hpp"

namespace reprocf {

namespace {

struct Rgb {
    int r, g, b;
};

constexpr Rgb kTrainNegative{0, 0, 0};       // black
constexpr Rgb kTrainPositive{255, 255, 255}; // white
constexpr Rgb kTestTp{0, 200, 0};            // green
constexpr Rgb kTestFn{255, 215, 0};          // yellow
constexpr Rgb kTestTn{128, 128, 128};        // gray
constexpr Rgb kTestFp{220, 0, 0};            // red

} // namespace

void render_matrix(const UtilityMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "P2\n" << matrix.n_subjects() << ' ' << matrix.n_files() << "\n255\n";
    for (int i = 0; i < matrix.n_files(); ++i) {
        for (int j = 0; j < matrix.n_subjects(); ++j) {
            if (j) out << ' ';
            out << (matrix.at(i, j) ? 255 : 0);
        }
        out << '\n';
    }
    if (!out) throw IoError("write to " + path.string() + " failed");
}

void render_overlay(const UtilityMatrix& matrix, const CellMask& train,
                    const std::vector<std::uint8_t>& predictions,
                    const std::filesystem::path& path) {
    if (!train.dims_match(matrix)) throw ValidationError("mask dims do not match matrix");
    if (predictions.size() != static_cast<std::size_t>(matrix.cell_count())) {
        throw ValidationError("prediction grid size does not match matrix");
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "P3\n" << matrix.n_subjects() << ' ' << matrix.n_files() << "\n255\n";
    for (int i = 0; i < matrix.n_files(); ++i) {
        for (int j = 0; j < matrix.n_subjects(); ++j) {
            const bool actual = matrix.at(i, j) != 0;
            Rgb color{};
            if (train.contains(i, j)) {
                color = actual ? kTrainPositive : kTrainNegative;
            } else {
                const bool predicted =
                    predictions[static_cast<std::size_t>(i) * matrix.n_subjects() + j] != 0;
                if (actual) color = predicted ? kTestTp : kTestFn;
                else color = predicted ? kTestFp : kTestTn;
            }
            if (j) out << ' ';
            out << color.r << ' ' << color.g << ' ' << color.b;
        }
        out << '\n';
    }
    if (!out) throw IoError("write to " + path.string() + " failed");
}

} // namespace reprocf
