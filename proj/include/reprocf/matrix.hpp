#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace reprocf {

/// Binary reproducibility matrix. Rows are produced files in creation order
/// (row i was written before row i+1, uniformly across subjects), columns are
/// subjects. A cell value of 1 marks a reproducibility error: the file
/// differed between the two execution conditions.
class UtilityMatrix {
public:
    UtilityMatrix(int n_files, int n_subjects, std::vector<std::uint8_t> cells,
                  std::string name = "");

    static UtilityMatrix filled(int n_files, int n_subjects, std::uint8_t value,
                                std::string name = "");

    int n_files() const { return n_files_; }
    int n_subjects() const { return n_subjects_; }
    std::int64_t cell_count() const {
        return static_cast<std::int64_t>(n_files_) * n_subjects_;
    }

    std::uint8_t at(int file, int subject) const {
        return cells_[static_cast<std::size_t>(file) * n_subjects_ + subject];
    }
    void set(int file, int subject, std::uint8_t value) {
        cells_[static_cast<std::size_t>(file) * n_subjects_ + subject] = value;
    }

    /// Row-major cell storage, one byte per cell, each 0 or 1.
    const std::vector<std::uint8_t>& cells() const { return cells_; }

    const std::string& name() const { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }

    bool operator==(const UtilityMatrix& other) const {
        return n_files_ == other.n_files_ && n_subjects_ == other.n_subjects_ &&
               cells_ == other.cells_ && name_ == other.name_;
    }

private:
    int n_files_;
    int n_subjects_;
    std::vector<std::uint8_t> cells_;
    std::string name_;
};

/// Set of (file, subject) cells over a fixed matrix shape. Backs the
/// training-set definition; the complement of a training mask is the test set.
class CellMask {
public:
    CellMask(int n_files, int n_subjects);

    int n_files() const { return n_files_; }
    int n_subjects() const { return n_subjects_; }
    std::int64_t cell_total() const {
        return static_cast<std::int64_t>(n_files_) * n_subjects_;
    }
    std::int64_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    bool contains(int file, int subject) const {
        return bits_[static_cast<std::size_t>(file) * n_subjects_ + subject] != 0;
    }
    /// Inserts a cell; inserting a member again is a no-op.
    void add(int file, int subject);
    void remove(int file, int subject);

    bool dims_match(const UtilityMatrix& m) const {
        return n_files_ == m.n_files() && n_subjects_ == m.n_subjects();
    }

    CellMask complement() const;

    bool operator==(const CellMask& other) const {
        return n_files_ == other.n_files_ && n_subjects_ == other.n_subjects_ &&
               bits_ == other.bits_;
    }

private:
    int n_files_;
    int n_subjects_;
    std::vector<std::uint8_t> bits_;
    std::int64_t size_ = 0;
};

/// Disjoint train/test split covering every cell of a matrix.
struct SplitPair {
    CellMask train;
    CellMask test;

    static SplitPair from_train(const CellMask& train) {
        return SplitPair{train, train.complement()};
    }
};

/// Reads the headerless 0/1 CSV format (one row per file in creation order,
/// one column per subject). Picks up the dataset name from an optional
/// sidecar `<stem>.meta` file. Throws ParseError on malformed content and
/// ValidationError on non-binary values, both with cell locations.
UtilityMatrix load_matrix_csv(const std::filesystem::path& path);

/// Writes the CSV format read by load_matrix_csv; emits the `.meta` sidecar
/// when the matrix carries a name. load(save(m)) == m bit-exactly.
void save_matrix_csv(const UtilityMatrix& matrix, const std::filesystem::path& path);

/// Mask CSV: one `file_index,subject_index` line per member cell, 0-based.
CellMask load_mask_csv(const std::filesystem::path& path, int n_files, int n_subjects);
void save_mask_csv(const CellMask& mask, const std::filesystem::path& path);

/// True iff within every column the member cells form a prefix of the row
/// order, i.e. no training cell sits below a test cell in any column.
bool validate_time_constraint(const CellMask& mask);

/// |members| / (n_files * n_subjects).
double training_ratio(const CellMask& mask);

} // namespace reprocf
