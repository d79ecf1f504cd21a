#include "reprocf/matrix.hpp"

#include <fstream>
#include <sstream>

#include "reprocf/errors.hpp"

namespace reprocf {

namespace {

void check_dims(int n_files, int n_subjects) {
    if (n_files < 1 || n_subjects < 1) {
        throw ValidationError("matrix dimensions must be at least 1x1, got " +
                              std::to_string(n_files) + "x" + std::to_string(n_subjects));
    }
}

std::filesystem::path meta_path_for(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension(".meta");
    return p;
}

} // namespace

UtilityMatrix::UtilityMatrix(int n_files, int n_subjects, std::vector<std::uint8_t> cells,
                             std::string name)
    : n_files_(n_files), n_subjects_(n_subjects), cells_(std::move(cells)),
      name_(std::move(name)) {
    check_dims(n_files, n_subjects);
    if (cells_.size() != static_cast<std::size_t>(cell_count())) {
        throw ValidationError("cell buffer size " + std::to_string(cells_.size()) +
                              " does not match " + std::to_string(n_files) + "x" +
                              std::to_string(n_subjects));
    }
    for (std::size_t k = 0; k < cells_.size(); ++k) {
        if (cells_[k] > 1) {
            throw ValidationError("cell (" + std::to_string(k / n_subjects_) + "," +
                                  std::to_string(k % n_subjects_) + ") is not 0 or 1");
        }
    }
}

UtilityMatrix UtilityMatrix::filled(int n_files, int n_subjects, std::uint8_t value,
                                    std::string name) {
    check_dims(n_files, n_subjects);
    return UtilityMatrix(n_files, n_subjects,
                         std::vector<std::uint8_t>(
                             static_cast<std::size_t>(n_files) * n_subjects, value),
                         std::move(name));
}

CellMask::CellMask(int n_files, int n_subjects)
    : n_files_(n_files), n_subjects_(n_subjects),
      bits_(static_cast<std::size_t>(n_files) * n_subjects, 0) {
    check_dims(n_files, n_subjects);
}

void CellMask::add(int file, int subject) {
    auto& bit = bits_[static_cast<std::size_t>(file) * n_subjects_ + subject];
    if (!bit) {
        bit = 1;
        ++size_;
    }
}

void CellMask::remove(int file, int subject) {
    auto& bit = bits_[static_cast<std::size_t>(file) * n_subjects_ + subject];
    if (bit) {
        bit = 0;
        --size_;
    }
}

CellMask CellMask::complement() const {
    CellMask out(n_files_, n_subjects_);
    for (std::size_t k = 0; k < bits_.size(); ++k) out.bits_[k] = bits_[k] ? 0 : 1;
    out.size_ = cell_total() - size_;
    return out;
}

UtilityMatrix load_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");

    std::vector<std::uint8_t> cells;
    int n_subjects = -1;
    int row = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
        int col = 0;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            std::string token = line.substr(
                start, comma == std::string::npos ? std::string::npos : comma - start);
            // trim surrounding blanks
            const auto l = token.find_first_not_of(" \t");
            const auto r = token.find_last_not_of(" \t");
            token = (l == std::string::npos) ? "" : token.substr(l, r - l + 1);
            if (token == "0") {
                cells.push_back(0);
            } else if (token == "1") {
                cells.push_back(1);
            } else if (token.empty()) {
                throw ParseError(path.string() + ": empty value at row " +
                                 std::to_string(row) + ", column " + std::to_string(col));
            } else {
                throw ValidationError(path.string() + ": value \"" + token +
                                      "\" at row " + std::to_string(row) + ", column " +
                                      std::to_string(col) + " is not 0 or 1");
            }
            ++col;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (n_subjects == -1) {
            n_subjects = col;
        } else if (col != n_subjects) {
            throw ParseError(path.string() + ": row " + std::to_string(row) + " has " +
                             std::to_string(col) + " values, expected " +
                             std::to_string(n_subjects));
        }
        ++row;
    }
    if (row == 0) throw ParseError(path.string() + ": no rows found");

    std::string name;
    std::ifstream meta(meta_path_for(path));
    if (meta) {
        std::string meta_line;
        while (std::getline(meta, meta_line)) {
            if (!meta_line.empty() && meta_line.back() == '\r') meta_line.pop_back();
            if (meta_line.rfind("name=", 0) == 0) name = meta_line.substr(5);
        }
    }
    return UtilityMatrix(row, n_subjects, std::move(cells), std::move(name));
}

void save_matrix_csv(const UtilityMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    std::string line;
    line.reserve(static_cast<std::size_t>(matrix.n_subjects()) * 2);
    for (int i = 0; i < matrix.n_files(); ++i) {
        line.clear();
        for (int j = 0; j < matrix.n_subjects(); ++j) {
            if (j) line += ',';
            line += matrix.at(i, j) ? '1' : '0';
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write to " + path.string() + " failed");
    if (!matrix.name().empty()) {
        std::ofstream meta(meta_path_for(path));
        if (!meta) throw IoError("cannot open " + meta_path_for(path).string() +
                                 " for writing");
        meta << "name=" << matrix.name() << "\n"
             << "row_order=modification_time\n";
        if (!meta) throw IoError("write to " + meta_path_for(path).string() + " failed");
    }
}

CellMask load_mask_csv(const std::filesystem::path& path, int n_files, int n_subjects) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    CellMask mask(n_files, n_subjects);
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            ++row;
            continue;
        }
        std::istringstream ss(line);
        long file = -1, subject = -1;
        char comma = 0;
        std::string garbage;
        if (!(ss >> file >> comma >> subject) || comma != ',' || (ss >> garbage)) {
            throw ParseError(path.string() + ": line " + std::to_string(row) +
                             " is not `file_index,subject_index`");
        }
        if (file < 0 || file >= n_files || subject < 0 || subject >= n_subjects) {
            throw ValidationError(path.string() + ": cell (" + std::to_string(file) + "," +
                                  std::to_string(subject) + ") out of range for " +
                                  std::to_string(n_files) + "x" + std::to_string(n_subjects));
        }
        if (mask.contains(static_cast<int>(file), static_cast<int>(subject))) {
            throw ValidationError(path.string() + ": duplicate cell (" +
                                  std::to_string(file) + "," + std::to_string(subject) + ")");
        }
        mask.add(static_cast<int>(file), static_cast<int>(subject));
        ++row;
    }
    return mask;
}

void save_mask_csv(const CellMask& mask, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (int i = 0; i < mask.n_files(); ++i)
        for (int j = 0; j < mask.n_subjects(); ++j)
            if (mask.contains(i, j)) out << i << ',' << j << '\n';
    if (!out) throw IoError("write to " + path.string() + " failed");
}

bool validate_time_constraint(const CellMask& mask) {
    for (int j = 0; j < mask.n_subjects(); ++j) {
        bool gap_seen = false;
        for (int i = 0; i < mask.n_files(); ++i) {
            if (mask.contains(i, j)) {
                if (gap_seen) return false;
            } else {
                gap_seen = true;
            }
        }
    }
    return true;
}

double training_ratio(const CellMask& mask) {
    return static_cast<double>(mask.size()) / static_cast<double>(mask.cell_total());
}

} // namespace reprocf
