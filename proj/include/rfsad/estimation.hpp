#pragma once

#include "rfsad/point_pattern.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rfsad {

/// Fitted IID-cluster Poisson model of normal descriptor sets.
///
/// `sigma_shrunk` is the matrix actually factorized, i.e. it already contains
/// any diagonal jitter fit_model had to add. `chol_lower` always satisfies
/// chol_lower * chol_lower^T == sigma_shrunk up to roundoff.
struct ModelParams {
    std::size_t dim = 0;
    double rho = 0.0;
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma_shrunk;
    double alpha = 0.0;
    Eigen::MatrixXd chol_lower;
    std::size_t n_train_sets = 0;
    std::size_t n_train_points = 0;

    double jitter = 0.0;
    std::vector<std::string> warnings;

    /// sum_i ln L_ii, half the log-determinant of sigma_shrunk.
    [[nodiscard]] double half_log_det() const;
};

struct ShrinkageResult {
    Eigen::MatrixXd sigma_shrunk;
    double alpha = 0.0;
    double target_scale = 0.0;  // m = trace(sigma) / D
};

/// Mean cardinality over the collection.
[[nodiscard]] double fit_poisson_intensity(const SetSource& sets);
[[nodiscard]] double fit_poisson_intensity(std::span<const PointPatternSet> sets);

/// Pooled mean over all descriptors (each point weighs equally).
[[nodiscard]] Eigen::VectorXd fit_feature_mean(const SetSource& sets, int jobs = 0);
[[nodiscard]] Eigen::VectorXd fit_feature_mean(std::span<const PointPatternSet> sets, int jobs = 0);

/// Maximum-likelihood covariance about `mu` (denominator: total point count).
[[nodiscard]] Eigen::MatrixXd fit_empirical_covariance(const SetSource& sets, const Eigen::VectorXd& mu,
                                                       int jobs = 0);
[[nodiscard]] Eigen::MatrixXd fit_empirical_covariance(std::span<const PointPatternSet> sets,
                                                       const Eigen::VectorXd& mu, int jobs = 0);

/// Ledoit-Wolf shrinkage toward m*I with the closed-form intensity.
/// `sigma` must be fit_empirical_covariance over the same data and `mu`.
[[nodiscard]] ShrinkageResult ledoit_wolf_shrink(const SetSource& sets, const Eigen::VectorXd& mu,
                                                 const Eigen::MatrixXd& sigma, int jobs = 0);
[[nodiscard]] ShrinkageResult ledoit_wolf_shrink(std::span<const PointPatternSet> sets,
                                                 const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                                 int jobs = 0);

/// Closed-form shrinkage given the sufficient statistics. `quartic_sum` is
/// sum_k (|x_k|^4 - 2 x_k^T sigma x_k) over the n centered points.
[[nodiscard]] ShrinkageResult shrink_from_statistics(const Eigen::MatrixXd& sigma, double quartic_sum,
                                                     std::size_t n_points);

[[nodiscard]] ModelParams fit_model(const SetSource& sets, int jobs = 0);
[[nodiscard]] ModelParams fit_model(std::span<const PointPatternSet> sets, int jobs = 0);

/// Builds a model from stored parameters, recomputing and revalidating the
/// Cholesky factor. Used by the model-file loader.
[[nodiscard]] ModelParams assemble_model(std::size_t dim, double rho, Eigen::VectorXd mu,
                                         Eigen::MatrixXd sigma_shrunk, double alpha, std::size_t n_train_sets,
                                         std::size_t n_train_points);

/// Throws ModelError if any ModelParams invariant is violated.
void validate_model(const ModelParams& model);

} // namespace rfsad
