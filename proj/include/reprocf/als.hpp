#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "reprocf/matrix.hpp"

namespace reprocf {

struct AlsConfig {
    int n_factors = 50;
    double regularization = 0.01;
    int max_iterations = 5;
    bool nonnegative = true;
    bool use_bias = false;
    std::uint64_t seed = 0;
    /// Weight each entity's ridge penalty by its observation count (the
    /// ALS-WR convention). Plain unweighted lambda generalizes markedly worse
    /// on sparse rows; see README.
    bool scale_reg_by_obs = true;
};

/// Latent-factor model of a utility matrix. file_factors row i is q_i,
/// subject_factors row u is p_u; a prediction is q_i . p_u, plus
/// mu + subject_bias[u] + file_bias[i] when the bias terms are enabled.
struct FactorModel {
    Eigen::MatrixXd file_factors;    // n_files x f
    Eigen::MatrixXd subject_factors; // n_subjects x f
    double global_mean = 0.0;
    Eigen::VectorXd file_bias;
    Eigen::VectorXd subject_bias;
    AlsConfig config;
    /// Training objective after each alternation round; non-increasing.
    std::vector<double> objective_history;

    int n_files() const { return static_cast<int>(file_factors.rows()); }
    int n_subjects() const { return static_cast<int>(subject_factors.rows()); }
    int n_factors() const { return static_cast<int>(file_factors.cols()); }
};

/// Ridge least squares for one entity: argmin_x sum_k (ratings[k] -
/// observed.row(k) . x)^2 + lambda * |x|^2, with x >= 0 componentwise when
/// nonnegative. Unconstrained solves go through the normal equations (falling
/// back to the minimum-norm solution when they are singular); constrained
/// solves use an active-set non-negative least squares on the same system.
Eigen::VectorXd solve_entity(const Eigen::MatrixXd& observed,
                             const Eigen::VectorXd& ratings, double lambda,
                             bool nonnegative);

/// Alternating least squares on the training cells. When biases are enabled
/// they are fit first as the average-deviation baseline (coordinate passes of
/// update_biases on the factor-free objective, run to their fixed point) and
/// held frozen. Each iteration then updates every subject vector with files
/// fixed and every file vector with subjects fixed; exactly max_iterations
/// rounds. Entities without training cells keep their initial factors and
/// produce a warning. Throws ValidationError on an empty training set.
FactorModel fit_als(const UtilityMatrix& matrix, const CellMask& train,
                    const AlsConfig& config,
                    std::vector<std::string>* warnings = nullptr);

/// One bias round: global mean fixed, then closed-form regularized updates of
/// every subject bias followed by every file bias.
void update_biases(const UtilityMatrix& matrix, const CellMask& train, FactorModel& model);

double predict_cell(const FactorModel& model, int file, int subject);

/// predict_cell rounded half-up, clamped to {0,1}.
int predict_binary(const FactorModel& model, int file, int subject);

/// Binary predictions for every cell, row-major.
std::vector<std::uint8_t> predict_binary_grid(const FactorModel& model);

/// Value of the configured objective on the training set.
double training_objective(const UtilityMatrix& matrix, const CellMask& train,
                          const FactorModel& model);

/// Factor scatter export: one row per entity, one column per factor.
void export_factors(const FactorModel& model, const std::filesystem::path& subjects_csv,
                    const std::filesystem::path& files_csv);

/// Model persistence as CSV blocks (header, Q, P, biases); exact round trip.
void save_model_csv(const FactorModel& model, const std::filesystem::path& path);
FactorModel load_model_csv(const std::filesystem::path& path);

} // namespace reprocf
