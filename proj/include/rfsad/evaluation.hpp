#pragma once

#include "rfsad/estimation.hpp"
#include "rfsad/scoring.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rfsad {

struct RocPoint {
    double threshold = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
};

/// Rank-based (Mann-Whitney) AUC with average ranks for ties. Higher score
/// means more anomalous; label 1 is anomalous.
[[nodiscard]] double auc(std::span<const double> scores, std::span<const int> labels);

/// One point per distinct threshold, from (0,0) at threshold +inf down to (1,1).
[[nodiscard]] std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

[[nodiscard]] double trapezoid_area(std::span<const RocPoint> roc);

/// How raw scores are oriented before AUC/ROC. `anomaly` negates the
/// log-likelihood so that higher always means more anomalous; `raw` uses every
/// score as-is.
enum class Orientation { anomaly, raw };

[[nodiscard]] Orientation parse_orientation(std::string_view name);
[[nodiscard]] const char* to_string(Orientation orientation);
[[nodiscard]] double orient(ScoreMethod method, Orientation orientation, double raw_score);

struct ScoredItem {
    std::string path;
    int label = 0;
    double score = 0.0;  // raw, before orientation
};

struct EvalReport {
    std::string category;
    std::string method;
    double top_k_percent = 100.0;
    std::string orientation;
    double auc = 0.0;
    std::size_t n_normal = 0;
    std::size_t n_anomalous = 0;
    std::vector<RocPoint> roc;
    std::vector<ScoredItem> scores;
};

struct EvalOptions {
    Orientation orientation = Orientation::anomaly;
    int jobs = 0;
};

[[nodiscard]] EvalReport evaluate_category(const ModelParams& model, const SetSource& test_sets,
                                           std::span<const int> labels, const ScoringConfig& config,
                                           const std::string& category, const EvalOptions& options = {});

[[nodiscard]] nlohmann::json report_to_json(const EvalReport& report);
void write_report(const EvalReport& report, const std::filesystem::path& path);
[[nodiscard]] std::string roc_to_csv(std::span<const RocPoint> roc);
void write_roc_csv(std::span<const RocPoint> roc, const std::filesystem::path& path);

struct CategorySummary {
    double mean_auc = 0.0;
    double median_auc = 0.0;
};

[[nodiscard]] CategorySummary summarize(std::span<const EvalReport> reports);

struct FewShotResult {
    std::size_t shots = 0;
    std::size_t repeats = 0;
    std::uint64_t seed = 0;
    double mean_auc = 0.0;
    std::vector<double> per_repeat_auc;
    std::vector<std::string> warnings;
};

/// For every shot count n and repeat r, draws n training sets without
/// replacement from a stream keyed by (seed, n, r), fits a model and evaluates
/// it on the test sets.
[[nodiscard]] std::vector<FewShotResult> few_shot_experiment(const SetSource& train_pool, const SetSource& test_sets,
                                                             std::span<const int> labels,
                                                             std::span<const std::size_t> shots, std::size_t repeats,
                                                             std::uint64_t seed, const ScoringConfig& config,
                                                             const EvalOptions& options = {});

/// Draws `count` distinct indices from [0, pool) for one (seed, shots, repeat).
[[nodiscard]] std::vector<std::size_t> draw_without_replacement(std::size_t pool, std::size_t count,
                                                                std::uint64_t seed, std::size_t shots,
                                                                std::size_t repeat);

[[nodiscard]] std::string few_shot_to_csv(std::span<const FewShotResult> results);
void write_few_shot_csv(std::span<const FewShotResult> results, const std::filesystem::path& path);

} // namespace rfsad
