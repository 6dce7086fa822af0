#pragma once

#include "rfsad/estimation.hpp"
#include "rfsad/point_pattern.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace rfsad {

enum class ScoreMethod { energy, as, loglik };

[[nodiscard]] ScoreMethod parse_score_method(std::string_view name);
[[nodiscard]] const char* to_string(ScoreMethod method);

struct ScoringConfig {
    ScoreMethod method = ScoreMethod::energy;
    double top_k_percent = 100.0;  // energy only
    bool as_squared = false;

    /// Throws ConfigError unless top_k_percent is in (0, 100].
    void validate() const;
};

/// (x - mu)^T sigma_shrunk^{-1} (x - mu) via a forward solve with chol_lower.
[[nodiscard]] double mahalanobis_sq(std::span<const double> x, const ModelParams& model);
[[nodiscard]] double mahalanobis_sq(std::span<const float> x, const ModelParams& model);

/// Squared distances of every member, sorted in descending order.
[[nodiscard]] std::vector<double> sorted_mahalanobis_sq(const PointPatternSet& set, const ModelParams& model);

/// Number of largest distances kept by the energy feature term:
/// max(1, ceil(k * n / 100)), capped at n. Zero for n == 0.
[[nodiscard]] std::size_t top_k_count(std::size_t n, double top_k_percent);

/// -|X| ln(rho) + ln Gamma(|X|+1) + sum of the top-k squared distances.
/// The empty set scores 0 and emits a warning.
[[nodiscard]] double rfs_energy(const PointPatternSet& set, const ModelParams& model,
                                double top_k_percent = 100.0);

/// Sum of Mahalanobis distances (squared distances when `squared`).
[[nodiscard]] double score_as(const PointPatternSet& set, const ModelParams& model, bool squared = false);

/// Poisson log-pmf of |X|, plus ln |X|!, plus the Gaussian log-density of
/// every member.
[[nodiscard]] double rfs_log_likelihood(const PointPatternSet& set, const ModelParams& model);

[[nodiscard]] double score_set(const PointPatternSet& set, const ModelParams& model, const ScoringConfig& config);

/// Order-preserving elementwise scoring. The first failing index aborts the
/// batch with a ScoringError naming it.
[[nodiscard]] std::vector<double> score_batch(const SetSource& sets, const ModelParams& model,
                                              const ScoringConfig& config, int jobs = 0);
[[nodiscard]] std::vector<double> score_batch(std::span<const PointPatternSet> sets, const ModelParams& model,
                                              const ScoringConfig& config, int jobs = 0);
[[nodiscard]] std::vector<double> score_batch_serial(const SetSource& sets, const ModelParams& model,
                                                     const ScoringConfig& config);

} // namespace rfsad
