#include "rfsad/errors.hpp"
#include "rfsad/kernels.hpp"
#include "rfsad/synthetic.hpp"
#include "support.hpp"

#include <doctest.h>

#include <atomic>

using namespace rfsad;
using rfsad::test::rel_diff;
using rfsad::test::rel_frobenius;

namespace {

std::vector<PointPatternSet> corpus(std::uint64_t seed, std::size_t n_sets = 150)
{
    auto rng = make_stream(seed, {9});
    return test::gaussian_corpus(Eigen::VectorXd::LinSpaced(12, -3.0, 3.0), random_spd(12, rng), n_sets, 25.0, seed);
}

} // namespace

TEST_CASE("parallel kernels agree with the serial reference")
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto sets = corpus(seed);
        const InMemorySets src(sets);

        const auto m_ser = kernels::first_moments_serial(src);
        const auto m_par = kernels::first_moments_parallel(src);
        CHECK(m_ser.n_points == m_par.n_points);
        CHECK(m_ser.n_sets == m_par.n_sets);
        CHECK(m_ser.dim == m_par.dim);
        CHECK(rel_frobenius(m_par.sum, m_ser.sum) <= 1e-12);

        const Eigen::VectorXd mu = m_ser.sum / static_cast<double>(m_ser.n_points);
        const auto s_ser = kernels::scatter_serial(src, mu);
        const auto s_par = kernels::scatter_parallel(src, mu);
        CHECK(s_ser.n_points == s_par.n_points);
        CHECK(rel_frobenius(s_par.matrix, s_ser.matrix) <= 1e-12);
        CHECK(s_par.matrix == s_par.matrix.transpose());
        CHECK(s_ser.matrix == s_ser.matrix.transpose());

        const Eigen::MatrixXd sigma = s_ser.matrix / static_cast<double>(s_ser.n_points);
        const auto q_ser = kernels::quartic_sum_serial(src, mu, sigma);
        const auto q_par = kernels::quartic_sum_parallel(src, mu, sigma);
        CHECK(q_ser.n_points == q_par.n_points);
        CHECK(rel_diff(q_par.sum, q_ser.sum) <= 1e-12);
    }
}

TEST_CASE("parallel kernels give identical bits for every worker count")
{
    const auto sets = corpus(4, 90);
    const InMemorySets src(sets);
    const Eigen::VectorXd mu = kernels::first_moments_parallel(src, 1).sum / 1000.0;
    const auto ref_scatter = kernels::scatter_parallel(src, mu, 1);
    const auto ref_quartic = kernels::quartic_sum_parallel(src, mu, ref_scatter.matrix, 1);
    for (int jobs : {2, 3, 5, 8}) {
        CHECK(kernels::first_moments_parallel(src, jobs).sum == kernels::first_moments_parallel(src, 1).sum);
        CHECK(kernels::scatter_parallel(src, mu, jobs).matrix == ref_scatter.matrix);
        CHECK(kernels::quartic_sum_parallel(src, mu, ref_scatter.matrix, jobs).sum == ref_quartic.sum);
    }
}

TEST_CASE("quartic sum identity matches the materialized outer-product form")
{
    // sum_k <x x^T - S, x x^T - S> computed two ways
    const auto sets = corpus(5, 40);
    const auto naive = test::naive_ledoit_wolf(sets);
    const InMemorySets src(sets);
    const auto q = kernels::quartic_sum_parallel(src, naive.mu, naive.sigma);
    const double n = static_cast<double>(q.n_points);
    const double via_identity = (q.sum + n * naive.sigma.squaredNorm()) / 12.0;
    CHECK(rel_diff(via_identity / (n * n), naive.b_bar2) <= 1e-10);
}

TEST_CASE("kernels report the offending set on a dimension mismatch")
{
    auto sets = corpus(6, 5);
    sets[3] = test::make_set(2, {{1, 2}});
    sets[3].source_id = "odd-one";
    const InMemorySets src(sets);
    try {
        (void)kernels::first_moments_parallel(src);
        FAIL("expected EstimationError");
    } catch (const EstimationError& e) {
        CHECK(std::string(e.what()).find("odd-one") != std::string::npos);
    }
    CHECK_THROWS_AS(kernels::first_moments_serial(src), EstimationError);
    CHECK_THROWS_AS(kernels::scatter_serial(src, Eigen::VectorXd::Zero(12)), EstimationError);
    CHECK_THROWS_AS(kernels::scatter_parallel(src, Eigen::VectorXd::Zero(12)), EstimationError);
    CHECK_THROWS_AS(kernels::quartic_sum_parallel(src, Eigen::VectorXd::Zero(12), Eigen::MatrixXd::Identity(12, 12)),
                    EstimationError);
}

TEST_CASE("parallel_for visits every index and rethrows the lowest failure")
{
    std::vector<std::atomic<int>> hits(200);
    kernels::parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits)
        CHECK(h.load() == 1);

    try {
        kernels::parallel_for(100, 4, [](std::size_t i) {
            if (i == 17 || i == 63)
                throw std::runtime_error("fail " + std::to_string(i));
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "fail 17");
    }
    kernels::parallel_for(0, 0, [](std::size_t) { FAIL("no work expected"); });
}
