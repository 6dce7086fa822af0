#pragma once

#include "rfsad/point_pattern.hpp"
#include "rfsad/ppf_io.hpp"
#include "rfsad/random.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <filesystem>

namespace rfsad {

/// Poisson-Gaussian point-pattern generator settings.
struct SyntheticConfig {
    std::uint32_t dim = 0;
    double rho0 = 0.0;
    Eigen::VectorXd mu0;
    Eigen::MatrixXd sigma0;
    double anomaly_shift_delta = 0.0;  // Mahalanobis units along the leading eigenvector
    double anomaly_fraction = 0.0;
    double cardinality_factor = 1.0;
    std::uint64_t seed = 0;
    /// When nonzero every set has exactly this many points and the Poisson
    /// draw (including cardinality_factor) is skipped.
    std::size_t fixed_cardinality = 0;

    void validate() const;

    /// D-dim standard normal config with zero mean.
    static SyntheticConfig isotropic(std::uint32_t dim, double rho0, std::uint64_t seed);
};

/// Caches the factors of sigma0 and the anomaly shift.
class SyntheticSampler {
public:
    explicit SyntheticSampler(SyntheticConfig config);

    [[nodiscard]] const SyntheticConfig& config() const { return config_; }
    /// sigma0^{1/2} u scaled by delta, u the leading eigenvector of sigma0.
    [[nodiscard]] const Eigen::VectorXd& shift() const { return shift_; }

    [[nodiscard]] PointPatternSet normal_set(RandomStream& stream) const;
    [[nodiscard]] PointPatternSet anomalous_set(RandomStream& stream) const;

private:
    PointPatternSet draw(RandomStream& stream, double mean_cardinality) const;

    SyntheticConfig config_;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd shift_;
};

[[nodiscard]] PointPatternSet sample_normal_set(const SyntheticConfig& config, RandomStream& stream);
[[nodiscard]] PointPatternSet sample_anomalous_set(const SyntheticConfig& config, RandomStream& stream);

enum class SyntheticKind : std::uint64_t { train = 0, test_normal = 1, test_anomalous = 2 };

/// Item `index` of the given kind, drawn from its own keyed stream.
[[nodiscard]] PointPatternSet synthetic_item(const SyntheticSampler& sampler, SyntheticKind kind, std::size_t index);

struct DatasetCounts {
    std::size_t n_train = 0;
    std::size_t n_test_normal = 0;
    std::size_t n_test_anomalous = 0;
};

/// Writes one PPF per item plus manifest.json under `out_dir` and returns the
/// re-read manifest. Output is byte-for-byte reproducible for a fixed config.
Manifest generate_dataset(const SyntheticConfig& config, const DatasetCounts& counts,
                          const std::filesystem::path& out_dir, const std::string& category = "synthetic",
                          int jobs = 0);

/// Accepts `dim`, `rho0`, optional `mu0` (D values, default zeros), optional
/// `sigma0` (row-major D*D, default identity), the anomaly fields, `seed` and
/// `fixed_cardinality`.
[[nodiscard]] SyntheticConfig synthetic_config_from_json(const nlohmann::json& doc);
[[nodiscard]] nlohmann::json synthetic_config_to_json(const SyntheticConfig& config);

/// Random SPD matrix with eigenvalues in [lo, hi], for tests and examples.
[[nodiscard]] Eigen::MatrixXd random_spd(std::uint32_t dim, RandomStream& stream, double lo = 0.5, double hi = 4.0);

} // namespace rfsad
