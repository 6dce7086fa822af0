#pragma once

// Test-only helpers: fixture builders and naive reference implementations
// that deliberately avoid the library's streaming/factorized code paths.

#include "rfsad/estimation.hpp"
#include "rfsad/point_pattern.hpp"
#include "rfsad/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace rfsad::test {

inline PointPatternSet make_set(std::uint32_t dim, std::initializer_list<std::initializer_list<double>> rows)
{
    PointPatternSet s;
    s.dim = dim;
    for (const auto& r : rows) {
        std::vector<double> v(r);
        s.push_back(std::span<const double>(v));
    }
    return s;
}

inline PointPatternSet random_set(std::uint32_t dim, std::size_t n, RandomStream& rng, double scale = 1.0)
{
    std::normal_distribution<double> g(0.0, scale);
    PointPatternSet s;
    s.dim = dim;
    s.descriptors.resize(n * dim);
    for (auto& v : s.descriptors)
        v = static_cast<float>(g(rng));
    return s;
}

/// Gaussian corpus with a given covariance, Poisson cardinalities.
inline std::vector<PointPatternSet> gaussian_corpus(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                                    std::size_t n_sets, double mean_card, std::uint64_t seed)
{
    auto rng = make_stream(seed, {0xc0});
    const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
    std::poisson_distribution<int> card(mean_card);
    std::normal_distribution<double> g;
    std::vector<PointPatternSet> out;
    for (std::size_t i = 0; i < n_sets; ++i) {
        PointPatternSet s;
        s.dim = static_cast<std::uint32_t>(mu.size());
        const int n = card(rng);
        for (int k = 0; k < n; ++k) {
            Eigen::VectorXd z(mu.size());
            for (auto& v : z)
                v = g(rng);
            const Eigen::VectorXd x = mu + chol * z;
            s.push_back(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
        }
        out.push_back(std::move(s));
    }
    return out;
}

/// All descriptors of a corpus as double rows.
inline std::vector<Eigen::VectorXd> flatten(const std::vector<PointPatternSet>& sets)
{
    std::vector<Eigen::VectorXd> pts;
    for (const auto& s : sets)
        for (std::size_t k = 0; k < s.size(); ++k) {
            Eigen::VectorXd x(s.dim);
            for (std::uint32_t j = 0; j < s.dim; ++j)
                x[j] = s.row(k)[j];
            pts.push_back(std::move(x));
        }
    return pts;
}

struct NaiveShrinkage {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    Eigen::MatrixXd sigma_shrunk;
    double alpha = 0.0;
    double b_bar2 = 0.0;
    double d2 = 0.0;
    double m = 0.0;
};

/// Ledoit-Wolf exactly as the closed form reads, materializing x x^T per point.
inline NaiveShrinkage naive_ledoit_wolf(const std::vector<PointPatternSet>& sets)
{
    const auto pts = flatten(sets);
    const auto n = static_cast<double>(pts.size());
    const auto d = pts.front().size();
    NaiveShrinkage r;
    r.mu = Eigen::VectorXd::Zero(d);
    for (const auto& x : pts)
        r.mu += x;
    r.mu /= n;
    r.sigma = Eigen::MatrixXd::Zero(d, d);
    for (const auto& x : pts) {
        const Eigen::VectorXd c = x - r.mu;
        r.sigma += c * c.transpose();
    }
    r.sigma /= n;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    auto inner = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        return (a * b.transpose()).trace() / static_cast<double>(d);
    };
    r.m = inner(r.sigma, id);
    r.d2 = inner(r.sigma - r.m * id, r.sigma - r.m * id);
    double acc = 0.0;
    for (const auto& x : pts) {
        const Eigen::VectorXd c = x - r.mu;
        const Eigen::MatrixXd outer = c * c.transpose() - r.sigma;
        acc += inner(outer, outer);
    }
    r.b_bar2 = acc / (n * n);
    const double b2 = std::min(r.b_bar2, r.d2);
    r.alpha = r.d2 < 1e-15 ? 1.0 : b2 / r.d2;
    r.sigma_shrunk = (1.0 - r.alpha) * r.sigma + r.alpha * r.m * id;
    return r;
}

/// (x - mu)^T Sigma^{-1} (x - mu) through an explicitly inverted matrix.
inline double naive_mahalanobis_sq(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma)
{
    const Eigen::MatrixXd inv = sigma.inverse();
    const Eigen::VectorXd c = x - mu;
    return c.dot(inv * c);
}

/// O(n0 n1) pair counting with ties worth one half.
inline double pair_count_auc(const std::vector<double>& scores, const std::vector<int>& labels)
{
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t a = 0; a < scores.size(); ++a) {
        if (labels[a] != 1)
            continue;
        for (std::size_t b = 0; b < scores.size(); ++b) {
            if (labels[b] != 0)
                continue;
            pairs += 1.0;
            if (scores[a] > scores[b])
                wins += 1.0;
            else if (scores[a] == scores[b])
                wins += 0.5;
        }
    }
    return wins / pairs;
}

inline double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Model with given mean and covariance, bypassing estimation.
inline ModelParams model_from(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double rho)
{
    return assemble_model(static_cast<std::size_t>(mu.size()), rho, mu, sigma, 0.0, 1, 1);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("rfsad_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace rfsad::test
