#include "rfsad/estimation.hpp"

#include "rfsad/diagnostics.hpp"
#include "rfsad/errors.hpp"
#include "rfsad/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace rfsad {
namespace {

constexpr double kDegenerateSpread = 1e-15;
constexpr double kJitterScale = 1e-6;
constexpr int kJitterRetries = 3;

std::optional<Eigen::MatrixXd> try_cholesky(const Eigen::MatrixXd& m)
{
    if (!m.allFinite())
        return std::nullopt;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        return std::nullopt;
    Eigen::MatrixXd lower = llt.matrixL();
    const auto diag = lower.diagonal();
    if (!diag.allFinite() || (diag.array() <= 0.0).any())
        return std::nullopt;
    return lower;
}

void require_points(std::size_t n_points, const char* what)
{
    if (n_points == 0)
        throw EstimationError(std::string(what) + ": training sets contain no descriptors");
}

} // namespace

double ModelParams::half_log_det() const { return chol_lower.diagonal().array().log().sum(); }

double fit_poisson_intensity(const SetSource& sets)
{
    if (sets.size() == 0)
        throw EstimationError("fit_poisson_intensity: empty training collection");
    std::size_t total = 0;
    for (std::size_t i = 0; i < sets.size(); ++i)
        total += sets.cardinality(i);
    if (total == 0)
        warn("degenerate model: every training set is empty, Poisson intensity is 0");
    return static_cast<double>(total) / static_cast<double>(sets.size());
}

double fit_poisson_intensity(std::span<const PointPatternSet> sets)
{
    return fit_poisson_intensity(InMemorySets(sets));
}

Eigen::VectorXd fit_feature_mean(const SetSource& sets, int jobs)
{
    const auto m = kernels::first_moments_parallel(sets, jobs);
    require_points(m.n_points, "fit_feature_mean");
    return m.sum / static_cast<double>(m.n_points);
}

Eigen::VectorXd fit_feature_mean(std::span<const PointPatternSet> sets, int jobs)
{
    return fit_feature_mean(InMemorySets(sets), jobs);
}

Eigen::MatrixXd fit_empirical_covariance(const SetSource& sets, const Eigen::VectorXd& mu, int jobs)
{
    const auto s = kernels::scatter_parallel(sets, mu, jobs);
    require_points(s.n_points, "fit_empirical_covariance");
    return s.matrix / static_cast<double>(s.n_points);
}

Eigen::MatrixXd fit_empirical_covariance(std::span<const PointPatternSet> sets, const Eigen::VectorXd& mu, int jobs)
{
    return fit_empirical_covariance(InMemorySets(sets), mu, jobs);
}

ShrinkageResult shrink_from_statistics(const Eigen::MatrixXd& sigma, double quartic_sum, std::size_t n_points)
{
    require_points(n_points, "ledoit_wolf_shrink");
    const auto dim = static_cast<double>(sigma.rows());
    const auto n = static_cast<double>(n_points);
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols());

    // <A,B> = trace(A B^T) / D
    const double m = sigma.trace() / dim;
    const double d2 = (sigma - m * identity).squaredNorm() / dim;
    // sum_k <x x^T - S, x x^T - S> = sum_k (|x|^4 - 2 x^T S x + |S|_F^2) / D
    const double b_bar2 = std::max(0.0, (quartic_sum + n * sigma.squaredNorm()) / dim / (n * n));
    const double b2 = std::min(b_bar2, d2);

    ShrinkageResult out;
    out.target_scale = m;
    out.alpha = d2 < kDegenerateSpread ? 1.0 : b2 / d2;
    out.sigma_shrunk = (1.0 - out.alpha) * sigma + out.alpha * m * identity;
    return out;
}

ShrinkageResult ledoit_wolf_shrink(const SetSource& sets, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                   int jobs)
{
    if (sigma.rows() != mu.size() || sigma.cols() != mu.size())
        throw EstimationError("ledoit_wolf_shrink: sigma must be D x D with D = mu.size()");
    const auto q = kernels::quartic_sum_parallel(sets, mu, sigma, jobs);
    return shrink_from_statistics(sigma, q.sum, q.n_points);
}

ShrinkageResult ledoit_wolf_shrink(std::span<const PointPatternSet> sets, const Eigen::VectorXd& mu,
                                   const Eigen::MatrixXd& sigma, int jobs)
{
    return ledoit_wolf_shrink(InMemorySets(sets), mu, sigma, jobs);
}

ModelParams fit_model(const SetSource& sets, int jobs)
{
    if (sets.size() == 0)
        throw EstimationError("fit_model: empty training collection");

    ModelParams model;
    auto note = [&](std::string msg) {
        warn(msg);
        model.warnings.push_back(std::move(msg));
    };

    const auto moments = kernels::first_moments_parallel(sets, jobs);
    if (moments.n_points == 0)
        note("degenerate model: every training set is empty, Poisson intensity is 0");
    require_points(moments.n_points, "fit_model");

    model.dim = moments.dim;
    model.n_train_sets = moments.n_sets;
    model.n_train_points = moments.n_points;
    model.rho = static_cast<double>(moments.n_points) / static_cast<double>(moments.n_sets);
    model.mu = moments.sum / static_cast<double>(moments.n_points);

    const auto scatter = kernels::scatter_parallel(sets, model.mu, jobs);
    const Eigen::MatrixXd sigma = scatter.matrix / static_cast<double>(scatter.n_points);
    const auto quartic = kernels::quartic_sum_parallel(sets, model.mu, sigma, jobs);
    auto shrunk = shrink_from_statistics(sigma, quartic.sum, quartic.n_points);
    model.alpha = shrunk.alpha;

    auto factor = try_cholesky(shrunk.sigma_shrunk);
    double jitter = kJitterScale * std::max(shrunk.target_scale, 1e-12);
    for (int attempt = 0; !factor && attempt < kJitterRetries; ++attempt, jitter *= 10.0) {
        Eigen::MatrixXd jittered = shrunk.sigma_shrunk;
        jittered.diagonal().array() += jitter;
        factor = try_cholesky(jittered);
        if (factor) {
            std::ostringstream msg;
            msg << "shrunk covariance is not positive definite; added diagonal jitter " << jitter;
            note(msg.str());
            shrunk.sigma_shrunk = std::move(jittered);
            model.jitter = jitter;
        }
    }
    if (!factor) {
        const auto diag = shrunk.sigma_shrunk.diagonal();
        std::ostringstream msg;
        msg << "cholesky factorization failed after " << kJitterRetries << " jitter retries (D=" << model.dim
            << ", alpha=" << model.alpha << ", trace/D=" << shrunk.target_scale << ", diag range ["
            << diag.minCoeff() << ", " << diag.maxCoeff() << "], last jitter " << jitter / 10.0 << ")";
        throw ModelError(msg.str());
    }
    model.sigma_shrunk = std::move(shrunk.sigma_shrunk);
    model.chol_lower = std::move(*factor);
    return model;
}

ModelParams fit_model(std::span<const PointPatternSet> sets, int jobs) { return fit_model(InMemorySets(sets), jobs); }

ModelParams assemble_model(std::size_t dim, double rho, Eigen::VectorXd mu, Eigen::MatrixXd sigma_shrunk, double alpha,
                           std::size_t n_train_sets, std::size_t n_train_points)
{
    const auto d = static_cast<Eigen::Index>(dim);
    if (dim == 0 || mu.size() != d || sigma_shrunk.rows() != d || sigma_shrunk.cols() != d)
        throw ModelError("model parameters have inconsistent dimensions");
    ModelParams model;
    model.dim = dim;
    model.rho = rho;
    model.mu = std::move(mu);
    model.sigma_shrunk = std::move(sigma_shrunk);
    model.alpha = alpha;
    model.n_train_sets = n_train_sets;
    model.n_train_points = n_train_points;
    auto factor = try_cholesky(model.sigma_shrunk);
    if (!factor)
        throw ModelError("sigma_shrunk is not positive definite");
    model.chol_lower = std::move(*factor);
    validate_model(model);
    return model;
}

void validate_model(const ModelParams& model)
{
    const auto d = static_cast<Eigen::Index>(model.dim);
    if (model.dim == 0)
        throw ModelError("model dimension must be positive");
    if (model.mu.size() != d || model.sigma_shrunk.rows() != d || model.sigma_shrunk.cols() != d ||
        model.chol_lower.rows() != d || model.chol_lower.cols() != d)
        throw ModelError("model parameters have inconsistent dimensions");
    if (!std::isfinite(model.rho) || model.rho < 0.0 || (model.n_train_points > 0 && model.rho <= 0.0))
        throw ModelError("Poisson intensity must be positive");
    if (!(model.alpha >= 0.0 && model.alpha <= 1.0))
        throw ModelError("shrinkage intensity outside [0, 1]");
    if (!model.mu.allFinite() || !model.sigma_shrunk.allFinite() || !model.chol_lower.allFinite())
        throw ModelError("model contains non-finite values");

    const double scale = model.sigma_shrunk.cwiseAbs().maxCoeff();
    const double asym = (model.sigma_shrunk - model.sigma_shrunk.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale)
        throw ModelError("sigma_shrunk is not symmetric");
    if (!model.chol_lower.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().isZero(0.0))
        throw ModelError("chol_lower is not lower triangular");
    const double recon = (model.chol_lower * model.chol_lower.transpose() - model.sigma_shrunk).norm();
    if (recon > 1e-8 * model.sigma_shrunk.norm())
        throw ModelError("chol_lower does not reproduce sigma_shrunk");
}

} // namespace rfsad
