#include "rfsad/kernels.hpp"

#include "rfsad/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <exception>
#include <mutex>

namespace rfsad::kernels {
namespace {

struct ChunkRange {
    std::size_t begin;
    std::size_t end;
};

std::size_t chunk_count(std::size_t n) { return std::min(kReductionChunks, n); }

ChunkRange chunk(std::size_t c, std::size_t chunks, std::size_t n)
{
    return {c * n / chunks, (c + 1) * n / chunks};
}

void check_dim(const SetSource& sets, std::size_t i, const PointPatternSet& s, std::size_t dim)
{
    if (s.dim != dim)
        throw EstimationError("set " + std::to_string(i) + " (" + sets.id(i) + ") has dimension " +
                              std::to_string(s.dim) + ", expected " + std::to_string(dim));
}

Eigen::MatrixXd centered(const PointPatternSet& s, const Eigen::VectorXd& mu)
{
    using RowMajorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMajorF> raw(s.descriptors.data(), static_cast<Eigen::Index>(s.size()), s.dim);
    Eigen::MatrixXd xc = raw.cast<double>();
    xc.rowwise() -= mu.transpose();
    return xc;
}

void mirror_lower(Eigen::MatrixXd& m) { m.triangularView<Eigen::StrictlyUpper>() = m.transpose(); }

} // namespace

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body)
{
    std::mutex mutex;
    std::size_t first_failure = n;
    std::exception_ptr error;
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
    const auto count = static_cast<std::ptrdiff_t>(n);

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(mutex);
            if (static_cast<std::size_t>(i) < first_failure) {
                first_failure = static_cast<std::size_t>(i);
                error = std::current_exception();
            }
        }
    }
    if (error)
        std::rethrow_exception(error);
}

FirstMoments first_moments_serial(const SetSource& sets)
{
    FirstMoments m;
    m.n_sets = sets.size();
    if (m.n_sets == 0)
        return m;
    m.dim = sets.dim(0);
    m.sum = Eigen::VectorXd::Zero(m.dim);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        sets.visit(i, [&](const PointPatternSet& s) {
            check_dim(sets, i, s, m.dim);
            for (std::size_t k = 0; k < s.size(); ++k) {
                const auto x = s.row(k);
                for (std::size_t j = 0; j < m.dim; ++j)
                    m.sum[static_cast<Eigen::Index>(j)] += x[j];
            }
            m.n_points += s.size();
        });
    }
    return m;
}

FirstMoments first_moments_parallel(const SetSource& sets, int jobs)
{
    FirstMoments m;
    m.n_sets = sets.size();
    if (m.n_sets == 0)
        return m;
    m.dim = sets.dim(0);
    const auto chunks = chunk_count(m.n_sets);
    std::vector<Eigen::VectorXd> partial(chunks, Eigen::VectorXd::Zero(m.dim));
    std::vector<std::size_t> counts(chunks, 0);

    parallel_for(chunks, jobs, [&](std::size_t c) {
        const auto [begin, end] = chunk(c, chunks, m.n_sets);
        for (std::size_t i = begin; i < end; ++i) {
            sets.visit(i, [&](const PointPatternSet& s) {
                check_dim(sets, i, s, m.dim);
                using RowMajorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
                Eigen::Map<const RowMajorF> raw(s.descriptors.data(), static_cast<Eigen::Index>(s.size()), s.dim);
                partial[c] += raw.cast<double>().colwise().sum().transpose();
                counts[c] += s.size();
            });
        }
    });

    m.sum = Eigen::VectorXd::Zero(m.dim);
    for (std::size_t c = 0; c < chunks; ++c) {
        m.sum += partial[c];
        m.n_points += counts[c];
    }
    return m;
}

Scatter scatter_serial(const SetSource& sets, const Eigen::VectorXd& mu)
{
    const auto dim = static_cast<std::size_t>(mu.size());
    Scatter out;
    out.matrix = Eigen::MatrixXd::Zero(mu.size(), mu.size());
    std::vector<double> diff(dim);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        sets.visit(i, [&](const PointPatternSet& s) {
            check_dim(sets, i, s, dim);
            for (std::size_t k = 0; k < s.size(); ++k) {
                const auto x = s.row(k);
                for (std::size_t j = 0; j < dim; ++j)
                    diff[j] = static_cast<double>(x[j]) - mu[static_cast<Eigen::Index>(j)];
                for (std::size_t r = 0; r < dim; ++r)
                    for (std::size_t c = 0; c <= r; ++c)
                        out.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += diff[r] * diff[c];
            }
            out.n_points += s.size();
        });
    }
    mirror_lower(out.matrix);
    return out;
}

Scatter scatter_parallel(const SetSource& sets, const Eigen::VectorXd& mu, int jobs)
{
    const auto dim = static_cast<std::size_t>(mu.size());
    const auto n = sets.size();
    Scatter out;
    out.matrix = Eigen::MatrixXd::Zero(mu.size(), mu.size());
    if (n == 0)
        return out;
    const auto chunks = chunk_count(n);
    std::vector<Eigen::MatrixXd> partial(chunks);
    std::vector<std::size_t> counts(chunks, 0);

    parallel_for(chunks, jobs, [&](std::size_t c) {
        partial[c] = Eigen::MatrixXd::Zero(mu.size(), mu.size());
        const auto [begin, end] = chunk(c, chunks, n);
        for (std::size_t i = begin; i < end; ++i) {
            sets.visit(i, [&](const PointPatternSet& s) {
                check_dim(sets, i, s, dim);
                if (s.empty())
                    return;
                const Eigen::MatrixXd xc = centered(s, mu);
                partial[c].selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose());
                counts[c] += s.size();
            });
        }
    });

    for (std::size_t c = 0; c < chunks; ++c) {
        out.matrix.triangularView<Eigen::Lower>() += partial[c];
        out.n_points += counts[c];
    }
    mirror_lower(out.matrix);
    return out;
}

QuarticSum quartic_sum_serial(const SetSource& sets, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma)
{
    const auto dim = static_cast<std::size_t>(mu.size());
    QuarticSum out;
    std::vector<double> diff(dim);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        sets.visit(i, [&](const PointPatternSet& s) {
            check_dim(sets, i, s, dim);
            for (std::size_t k = 0; k < s.size(); ++k) {
                const auto x = s.row(k);
                double norm2 = 0.0;
                for (std::size_t j = 0; j < dim; ++j) {
                    diff[j] = static_cast<double>(x[j]) - mu[static_cast<Eigen::Index>(j)];
                    norm2 += diff[j] * diff[j];
                }
                double quad = 0.0;
                for (std::size_t r = 0; r < dim; ++r) {
                    double row = 0.0;
                    for (std::size_t c = 0; c < dim; ++c)
                        row += sigma(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * diff[c];
                    quad += diff[r] * row;
                }
                out.sum += norm2 * norm2 - 2.0 * quad;
            }
            out.n_points += s.size();
        });
    }
    return out;
}

QuarticSum quartic_sum_parallel(const SetSource& sets, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                int jobs)
{
    const auto dim = static_cast<std::size_t>(mu.size());
    const auto n = sets.size();
    QuarticSum out;
    if (n == 0)
        return out;
    const auto chunks = chunk_count(n);
    std::vector<QuarticSum> partial(chunks);

    parallel_for(chunks, jobs, [&](std::size_t c) {
        const auto [begin, end] = chunk(c, chunks, n);
        for (std::size_t i = begin; i < end; ++i) {
            sets.visit(i, [&](const PointPatternSet& s) {
                check_dim(sets, i, s, dim);
                if (s.empty())
                    return;
                const Eigen::MatrixXd xc = centered(s, mu);
                const Eigen::MatrixXd projected = xc * sigma;
                const Eigen::VectorXd quad = xc.cwiseProduct(projected).rowwise().sum();
                const Eigen::VectorXd norm2 = xc.rowwise().squaredNorm();
                partial[c].sum += (norm2.array().square() - 2.0 * quad.array()).sum();
                partial[c].n_points += s.size();
            });
        }
    });

    for (const auto& p : partial) {
        out.sum += p.sum;
        out.n_points += p.n_points;
    }
    return out;
}

} // namespace rfsad::kernels
