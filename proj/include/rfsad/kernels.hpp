#pragma once

// Accumulation kernels behind the estimators. Each has a plain sequential
// reference (`*_serial`) and an OpenMP version (`*_parallel`). The parallel
// versions split the set index range into a fixed number of contiguous chunks
// that does not depend on the thread count and reduce the chunk partials in
// chunk order, so their output is identical for every `jobs` value.

#include "rfsad/point_pattern.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>

namespace rfsad::kernels {

inline constexpr std::size_t kReductionChunks = 32;

struct FirstMoments {
    std::uint32_t dim = 0;
    std::size_t n_sets = 0;
    std::size_t n_points = 0;
    Eigen::VectorXd sum;
};

struct Scatter {
    std::size_t n_points = 0;
    Eigen::MatrixXd matrix;  // sum (x - mu)(x - mu)^T, exactly symmetric
};

/// Every kernel validates that each set has the expected dimension (item 0's
/// dimension for the first-moment pass) and throws EstimationError otherwise.
FirstMoments first_moments_serial(const SetSource& sets);
FirstMoments first_moments_parallel(const SetSource& sets, int jobs = 0);

Scatter scatter_serial(const SetSource& sets, const Eigen::VectorXd& mu);
Scatter scatter_parallel(const SetSource& sets, const Eigen::VectorXd& mu, int jobs = 0);

struct QuarticSum {
    std::size_t n_points = 0;
    double sum = 0.0;  // sum_k (|x_k - mu|^4 - 2 (x_k - mu)^T sigma (x_k - mu))
};

QuarticSum quartic_sum_serial(const SetSource& sets, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma);
QuarticSum quartic_sum_parallel(const SetSource& sets, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                            int jobs = 0);

/// Runs `body(i)` for all i in [0, n) with OpenMP; `jobs <= 0` keeps the
/// runtime default. Exceptions are captured and the one from the lowest index
/// is rethrown after the loop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

} // namespace rfsad::kernels
