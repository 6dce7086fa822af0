#include "rfsad/scoring.hpp"

#include "rfsad/diagnostics.hpp"
#include "rfsad/errors.hpp"
#include "rfsad/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace rfsad {
namespace {

double solve_norm_sq(Eigen::VectorXd diff, const ModelParams& model)
{
    model.chol_lower.triangularView<Eigen::Lower>().solveInPlace(diff);
    return diff.squaredNorm();
}

void require_dim(std::size_t got, const ModelParams& model)
{
    if (got != model.dim)
        throw ScoringError("descriptor dimension " + std::to_string(got) + " does not match model dimension " +
                           std::to_string(model.dim));
}

double sum_in_order(const std::vector<double>& values, std::size_t count)
{
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i)
        total += values[i];
    return total;
}

} // namespace

ScoreMethod parse_score_method(std::string_view name)
{
    if (name == "energy")
        return ScoreMethod::energy;
    if (name == "as")
        return ScoreMethod::as;
    if (name == "loglik")
        return ScoreMethod::loglik;
    throw ConfigError("unknown score method '" + std::string(name) + "' (expected energy, as or loglik)");
}

const char* to_string(ScoreMethod method)
{
    switch (method) {
    case ScoreMethod::energy:
        return "energy";
    case ScoreMethod::as:
        return "as";
    case ScoreMethod::loglik:
        return "loglik";
    }
    return "?";
}

void ScoringConfig::validate() const
{
    if (!(top_k_percent > 0.0 && top_k_percent <= 100.0))
        throw ConfigError("top_k_percent must be in (0, 100], got " + std::to_string(top_k_percent));
}

double mahalanobis_sq(std::span<const double> x, const ModelParams& model)
{
    require_dim(x.size(), model);
    Eigen::VectorXd diff = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())) - model.mu;
    return solve_norm_sq(std::move(diff), model);
}

double mahalanobis_sq(std::span<const float> x, const ModelParams& model)
{
    require_dim(x.size(), model);
    Eigen::VectorXd diff =
        Eigen::Map<const Eigen::VectorXf>(x.data(), static_cast<Eigen::Index>(x.size())).cast<double>() - model.mu;
    return solve_norm_sq(std::move(diff), model);
}

std::vector<double> sorted_mahalanobis_sq(const PointPatternSet& set, const ModelParams& model)
{
    require_dim(set.dim, model);
    std::vector<double> out(set.size());
    for (std::size_t i = 0; i < set.size(); ++i)
        out[i] = mahalanobis_sq(set.row(i), model);
    std::sort(out.begin(), out.end(), std::greater<>{});
    return out;
}

std::size_t top_k_count(std::size_t n, double top_k_percent)
{
    if (n == 0)
        return 0;
    const double raw = std::ceil(top_k_percent * static_cast<double>(n) / 100.0);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, n);
}

double rfs_energy(const PointPatternSet& set, const ModelParams& model, double top_k_percent)
{
    require_dim(set.dim, model);
    if (!(top_k_percent > 0.0 && top_k_percent <= 100.0))
        throw ScoringError("top_k_percent must be in (0, 100]");
    const auto n = set.size();
    if (n == 0) {
        warn("degenerate input: empty set " + set.source_id + " scored as energy 0");
        return 0.0;
    }
    if (!(model.rho > 0.0))
        throw ScoringError("model Poisson intensity must be positive to score a nonempty set");

    const auto d2 = sorted_mahalanobis_sq(set, model);
    const double feature = sum_in_order(d2, top_k_count(n, top_k_percent));
    const auto card = static_cast<double>(n);
    return -card * std::log(model.rho) + std::lgamma(card + 1.0) + feature;
}

double score_as(const PointPatternSet& set, const ModelParams& model, bool squared)
{
    auto d2 = sorted_mahalanobis_sq(set, model);
    if (!squared)
        for (auto& v : d2)
            v = std::sqrt(v);
    return sum_in_order(d2, d2.size());
}

double rfs_log_likelihood(const PointPatternSet& set, const ModelParams& model)
{
    require_dim(set.dim, model);
    if (!(model.rho > 0.0))
        throw ScoringError("model Poisson intensity must be positive for the log-likelihood");
    const auto d2 = sorted_mahalanobis_sq(set, model);
    const auto card = static_cast<double>(set.size());
    const double log_fact = std::lgamma(card + 1.0);

    const double log_pmf = card * std::log(model.rho) - model.rho - log_fact;
    const double log_norm =
        -0.5 * static_cast<double>(model.dim) * std::log(2.0 * std::numbers::pi) - model.half_log_det();
    const double log_density = -0.5 * sum_in_order(d2, d2.size()) + card * log_norm;
    return log_pmf + log_fact + log_density;
}

double score_set(const PointPatternSet& set, const ModelParams& model, const ScoringConfig& config)
{
    switch (config.method) {
    case ScoreMethod::energy:
        return rfs_energy(set, model, config.top_k_percent);
    case ScoreMethod::as:
        return score_as(set, model, config.as_squared);
    case ScoreMethod::loglik:
        return rfs_log_likelihood(set, model);
    }
    throw ConfigError("unknown score method");
}

namespace {

double score_item(const SetSource& sets, std::size_t i, const ModelParams& model, const ScoringConfig& config)
{
    double out = 0.0;
    try {
        sets.visit(i, [&](const PointPatternSet& s) { out = score_set(s, model, config); });
    } catch (const std::exception& e) {
        throw ScoringError("set " + std::to_string(i) + " (" + sets.id(i) + "): " + e.what());
    }
    return out;
}

} // namespace

std::vector<double> score_batch(const SetSource& sets, const ModelParams& model, const ScoringConfig& config, int jobs)
{
    config.validate();
    std::vector<double> out(sets.size());
    kernels::parallel_for(sets.size(), jobs, [&](std::size_t i) { out[i] = score_item(sets, i, model, config); });
    return out;
}

std::vector<double> score_batch(std::span<const PointPatternSet> sets, const ModelParams& model,
                                const ScoringConfig& config, int jobs)
{
    return score_batch(InMemorySets(sets), model, config, jobs);
}

std::vector<double> score_batch_serial(const SetSource& sets, const ModelParams& model, const ScoringConfig& config)
{
    config.validate();
    std::vector<double> out(sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i)
        out[i] = score_item(sets, i, model, config);
    return out;
}

} // namespace rfsad
