#include "rfsad/synthetic.hpp"

#include "rfsad/diagnostics.hpp"
#include "rfsad/errors.hpp"
#include "rfsad/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace rfsad {
namespace {

std::string item_name(const char* stem, std::size_t index)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%05zu.ppf", stem, index);
    return buf;
}

} // namespace

void SyntheticConfig::validate() const
{
    const auto d = static_cast<Eigen::Index>(dim);
    if (dim == 0)
        throw ConfigError("synthetic dim must be positive");
    if (!(rho0 > 0.0) || !std::isfinite(rho0))
        throw ConfigError("synthetic rho0 must be positive");
    if (mu0.size() != d || !mu0.allFinite())
        throw ConfigError("synthetic mu0 must have dim finite values");
    if (sigma0.rows() != d || sigma0.cols() != d || !sigma0.allFinite())
        throw ConfigError("synthetic sigma0 must be a finite dim x dim matrix");
    if ((sigma0 - sigma0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * sigma0.cwiseAbs().maxCoeff())
        throw ConfigError("synthetic sigma0 must be symmetric");
    if (Eigen::LLT<Eigen::MatrixXd>(sigma0).info() != Eigen::Success)
        throw ConfigError("synthetic sigma0 must be positive definite");
    if (!(anomaly_fraction >= 0.0 && anomaly_fraction <= 1.0))
        throw ConfigError("anomaly_fraction must be in [0, 1]");
    if (!std::isfinite(anomaly_shift_delta))
        throw ConfigError("anomaly_shift_delta must be finite");
    if (!(cardinality_factor > 0.0) || !std::isfinite(cardinality_factor))
        throw ConfigError("cardinality_factor must be positive");
}

SyntheticConfig SyntheticConfig::isotropic(std::uint32_t dim, double rho0, std::uint64_t seed)
{
    SyntheticConfig cfg;
    cfg.dim = dim;
    cfg.rho0 = rho0;
    cfg.mu0 = Eigen::VectorXd::Zero(dim);
    cfg.sigma0 = Eigen::MatrixXd::Identity(dim, dim);
    cfg.seed = seed;
    return cfg;
}

SyntheticSampler::SyntheticSampler(SyntheticConfig config) : config_(std::move(config))
{
    config_.validate();
    chol_ = Eigen::LLT<Eigen::MatrixXd>(config_.sigma0).matrixL();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(config_.sigma0);
    const auto last = config_.sigma0.rows() - 1;
    Eigen::VectorXd u = eig.eigenvectors().col(last);
    Eigen::Index pivot = 0;
    u.cwiseAbs().maxCoeff(&pivot);
    if (u[pivot] < 0)
        u = -u;
    // sigma0^{1/2} u = sqrt(lambda_max) u, which has Mahalanobis length 1
    shift_ = config_.anomaly_shift_delta * std::sqrt(eig.eigenvalues()[last]) * u;
}

PointPatternSet SyntheticSampler::draw(RandomStream& stream, double mean_cardinality) const
{
    std::size_t n = config_.fixed_cardinality;
    if (n == 0)
        n = static_cast<std::size_t>(std::poisson_distribution<long long>(mean_cardinality)(stream));

    std::normal_distribution<double> gauss;
    PointPatternSet set;
    set.dim = config_.dim;
    set.descriptors.reserve(n * config_.dim);
    Eigen::VectorXd z(config_.dim);
    for (std::size_t k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j < z.size(); ++j)
            z[j] = gauss(stream);
        const Eigen::VectorXd x = config_.mu0 + chol_ * z;
        set.push_back(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    }
    return set;
}

PointPatternSet SyntheticSampler::normal_set(RandomStream& stream) const { return draw(stream, config_.rho0); }

PointPatternSet SyntheticSampler::anomalous_set(RandomStream& stream) const
{
    auto set = draw(stream, config_.cardinality_factor * config_.rho0);
    const auto n = set.size();
    const auto shifted = static_cast<std::size_t>(std::ceil(config_.anomaly_fraction * static_cast<double>(n)));
    for (std::size_t k = 0; k < std::min(shifted, n); ++k) {
        for (std::uint32_t j = 0; j < set.dim; ++j) {
            auto& v = set.descriptors[k * set.dim + j];
            v = static_cast<float>(static_cast<double>(v) + shift_[j]);
        }
    }
    return set;
}

PointPatternSet sample_normal_set(const SyntheticConfig& config, RandomStream& stream)
{
    return SyntheticSampler(config).normal_set(stream);
}

PointPatternSet sample_anomalous_set(const SyntheticConfig& config, RandomStream& stream)
{
    return SyntheticSampler(config).anomalous_set(stream);
}

PointPatternSet synthetic_item(const SyntheticSampler& sampler, SyntheticKind kind, std::size_t index)
{
    auto stream = make_stream(sampler.config().seed, {static_cast<std::uint64_t>(kind), index});
    auto set = kind == SyntheticKind::test_anomalous ? sampler.anomalous_set(stream) : sampler.normal_set(stream);
    static constexpr const char* kNames[] = {"train", "test_normal", "test_anomalous"};
    set.source_id = std::string(kNames[static_cast<std::size_t>(kind)]) + "/" + std::to_string(index);
    return set;
}

Manifest generate_dataset(const SyntheticConfig& config, const DatasetCounts& counts,
                          const std::filesystem::path& out_dir, const std::string& category, int jobs)
{
    const SyntheticSampler sampler(config);
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "train", ec);
    std::filesystem::create_directories(out_dir / "test", ec);
    if (ec)
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    struct Job {
        SyntheticKind kind;
        std::size_t index;
        ManifestItem item;
    };
    std::vector<Job> jobs_list;
    for (std::size_t i = 0; i < counts.n_train; ++i)
        jobs_list.push_back({SyntheticKind::train, i, {"train/" + item_name("normal", i), 0, Split::train, {}}});
    for (std::size_t i = 0; i < counts.n_test_normal; ++i)
        jobs_list.push_back({SyntheticKind::test_normal, i, {"test/" + item_name("good", i), 0, Split::test, {}}});
    for (std::size_t i = 0; i < counts.n_test_anomalous; ++i)
        jobs_list.push_back({SyntheticKind::test_anomalous, i,
                             {"test/" + item_name("anomaly", i), 1, Split::test, std::string("synthetic_shift")}});

    kernels::parallel_for(jobs_list.size(), jobs, [&](std::size_t j) {
        const auto& job = jobs_list[j];
        write_ppf(synthetic_item(sampler, job.kind, job.index), out_dir / job.item.path);
    });

    Manifest manifest;
    manifest.category = category;
    for (auto& job : jobs_list)
        manifest.items.push_back(std::move(job.item));
    if (counts.n_train == 0)
        warn("synthetic manifest for '" + category + "' has no train items and cannot be used for fitting");
    const auto manifest_path = out_dir / "manifest.json";
    write_manifest(manifest, manifest_path);
    return read_manifest(manifest_path);
}

SyntheticConfig synthetic_config_from_json(const nlohmann::json& doc)
{
    try {
        SyntheticConfig cfg;
        cfg.dim = doc.at("dim").get<std::uint32_t>();
        cfg.rho0 = doc.at("rho0").get<double>();
        const auto d = static_cast<Eigen::Index>(cfg.dim);
        cfg.mu0 = Eigen::VectorXd::Zero(d);
        if (doc.contains("mu0")) {
            const auto mu = doc["mu0"].get<std::vector<double>>();
            if (mu.size() != cfg.dim)
                throw ConfigError("mu0 must have dim values");
            cfg.mu0 = Eigen::Map<const Eigen::VectorXd>(mu.data(), d);
        }
        cfg.sigma0 = Eigen::MatrixXd::Identity(d, d);
        if (doc.contains("sigma0")) {
            const auto s = doc["sigma0"].get<std::vector<double>>();
            if (s.size() != static_cast<std::size_t>(d * d))
                throw ConfigError("sigma0 must have dim*dim row-major values");
            for (Eigen::Index r = 0; r < d; ++r)
                for (Eigen::Index c = 0; c < d; ++c)
                    cfg.sigma0(r, c) = s[static_cast<std::size_t>(r * d + c)];
        }
        cfg.anomaly_shift_delta = doc.value("anomaly_shift_delta", 0.0);
        cfg.anomaly_fraction = doc.value("anomaly_fraction", 0.0);
        cfg.cardinality_factor = doc.value("cardinality_factor", 1.0);
        cfg.seed = doc.value("seed", std::uint64_t{0});
        cfg.fixed_cardinality = doc.value("fixed_cardinality", std::size_t{0});
        cfg.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("synthetic config: ") + e.what());
    }
}

nlohmann::json synthetic_config_to_json(const SyntheticConfig& config)
{
    nlohmann::json doc;
    doc["dim"] = config.dim;
    doc["rho0"] = config.rho0;
    doc["mu0"] = std::vector<double>(config.mu0.data(), config.mu0.data() + config.mu0.size());
    std::vector<double> sigma;
    for (Eigen::Index r = 0; r < config.sigma0.rows(); ++r)
        for (Eigen::Index c = 0; c < config.sigma0.cols(); ++c)
            sigma.push_back(config.sigma0(r, c));
    doc["sigma0"] = std::move(sigma);
    doc["anomaly_shift_delta"] = config.anomaly_shift_delta;
    doc["anomaly_fraction"] = config.anomaly_fraction;
    doc["cardinality_factor"] = config.cardinality_factor;
    doc["seed"] = config.seed;
    doc["fixed_cardinality"] = config.fixed_cardinality;
    return doc;
}

Eigen::MatrixXd random_spd(std::uint32_t dim, RandomStream& stream, double lo, double hi)
{
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> spread(lo, hi);
    Eigen::MatrixXd g(dim, dim);
    for (Eigen::Index r = 0; r < g.rows(); ++r)
        for (Eigen::Index c = 0; c < g.cols(); ++c)
            g(r, c) = gauss(stream);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Eigen::VectorXd eig(dim);
    for (Eigen::Index i = 0; i < eig.size(); ++i)
        eig[i] = spread(stream);
    Eigen::MatrixXd s = q * eig.asDiagonal() * q.transpose();
    return 0.5 * (s + s.transpose());
}

} // namespace rfsad
