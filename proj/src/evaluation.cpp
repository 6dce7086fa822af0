#include "rfsad/evaluation.hpp"

#include "rfsad/errors.hpp"
#include "rfsad/fileutil.hpp"
#include "rfsad/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace rfsad {
namespace {

struct ClassCounts {
    std::size_t normal = 0;
    std::size_t anomalous = 0;
};

ClassCounts check_scored(std::span<const double> scores, std::span<const int> labels)
{
    if (scores.size() != labels.size())
        throw EvaluationError("scores and labels differ in length");
    ClassCounts counts;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 0)
            ++counts.normal;
        else if (labels[i] == 1)
            ++counts.anomalous;
        else
            throw EvaluationError("label must be 0 or 1");
        if (std::isnan(scores[i]))
            throw EvaluationError("score " + std::to_string(i) + " is NaN");
    }
    if (counts.normal == 0 || counts.anomalous == 0)
        throw EvaluationError("AUC needs both normal and anomalous items");
    return counts;
}

std::string format_double(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

double auc(std::span<const double> scores, std::span<const int> labels)
{
    const auto counts = check_scored(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]])
            ++j;
        // 1-based ranks i+1..j share their average
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]] == 1)
                rank_sum += avg_rank;
        i = j;
    }
    const auto n0 = static_cast<double>(counts.normal);
    const auto n1 = static_cast<double>(counts.anomalous);
    return (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n0 * n1);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels)
{
    const auto counts = check_scored(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<RocPoint> roc;
    roc.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            (labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        roc.push_back({threshold, static_cast<double>(tp) / static_cast<double>(counts.anomalous),
                       static_cast<double>(fp) / static_cast<double>(counts.normal)});
    }
    return roc;
}

double trapezoid_area(std::span<const RocPoint> roc)
{
    double area = 0.0;
    for (std::size_t i = 1; i < roc.size(); ++i)
        area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) / 2.0;
    return area;
}

Orientation parse_orientation(std::string_view name)
{
    if (name == "anomaly")
        return Orientation::anomaly;
    if (name == "raw")
        return Orientation::raw;
    throw ConfigError("unknown orientation '" + std::string(name) + "' (expected anomaly or raw)");
}

const char* to_string(Orientation orientation) { return orientation == Orientation::anomaly ? "anomaly" : "raw"; }

double orient(ScoreMethod method, Orientation orientation, double raw_score)
{
    return (method == ScoreMethod::loglik && orientation == Orientation::anomaly) ? -raw_score : raw_score;
}

EvalReport evaluate_category(const ModelParams& model, const SetSource& test_sets, std::span<const int> labels,
                             const ScoringConfig& config, const std::string& category, const EvalOptions& options)
{
    config.validate();
    if (labels.size() != test_sets.size())
        throw EvaluationError("label count does not match test set count");
    {
        // fail on single-class input before touching any file
        std::vector<double> placeholder(labels.size(), 0.0);
        check_scored(placeholder, labels);
    }

    const auto raw = score_batch(test_sets, model, config, options.jobs);
    std::vector<double> oriented(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        oriented[i] = orient(config.method, options.orientation, raw[i]);

    EvalReport report;
    report.category = category;
    report.method = to_string(config.method);
    report.top_k_percent = config.top_k_percent;
    report.orientation = to_string(options.orientation);
    report.auc = auc(oriented, labels);
    report.roc = roc_curve(oriented, labels);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        (labels[i] == 1 ? report.n_anomalous : report.n_normal) += 1;
        report.scores.push_back({test_sets.id(i), labels[i], raw[i]});
    }
    return report;
}

nlohmann::json report_to_json(const EvalReport& report)
{
    nlohmann::json doc;
    doc["category"] = report.category;
    doc["method"] = report.method;
    doc["top_k_percent"] = report.top_k_percent;
    doc["orientation"] = report.orientation;
    doc["auc"] = report.auc;
    doc["n_normal"] = report.n_normal;
    doc["n_anomalous"] = report.n_anomalous;
    auto& roc = doc["roc"] = nlohmann::json::array();
    for (const auto& p : report.roc) {
        nlohmann::json point{{"fpr", p.fpr}, {"tpr", p.tpr}};
        point["threshold"] = std::isinf(p.threshold) ? nlohmann::json(format_double(p.threshold))
                                                     : nlohmann::json(p.threshold);
        roc.push_back(std::move(point));
    }
    auto& scores = doc["scores"] = nlohmann::json::array();
    for (const auto& s : report.scores)
        scores.push_back({{"path", s.path}, {"label", s.label}, {"score", s.score}});
    return doc;
}

void write_report(const EvalReport& report, const std::filesystem::path& path)
{
    write_file_atomic(path, report_to_json(report).dump(2) + "\n");
}

std::string roc_to_csv(std::span<const RocPoint> roc)
{
    std::string out = "threshold,fpr,tpr\n";
    for (const auto& p : roc)
        out += format_double(p.threshold) + "," + format_double(p.fpr) + "," + format_double(p.tpr) + "\n";
    return out;
}

void write_roc_csv(std::span<const RocPoint> roc, const std::filesystem::path& path)
{
    write_file_atomic(path, roc_to_csv(roc));
}

CategorySummary summarize(std::span<const EvalReport> reports)
{
    if (reports.empty())
        throw EvaluationError("no category reports to summarize");
    std::vector<double> aucs;
    for (const auto& r : reports)
        aucs.push_back(r.auc);
    std::sort(aucs.begin(), aucs.end());
    CategorySummary s;
    s.mean_auc = std::accumulate(aucs.begin(), aucs.end(), 0.0) / static_cast<double>(aucs.size());
    const auto mid = aucs.size() / 2;
    s.median_auc = aucs.size() % 2 ? aucs[mid] : 0.5 * (aucs[mid - 1] + aucs[mid]);
    return s;
}

std::vector<std::size_t> draw_without_replacement(std::size_t pool, std::size_t count, std::uint64_t seed,
                                                  std::size_t shots, std::size_t repeat)
{
    if (count > pool)
        throw EvaluationError("cannot draw " + std::to_string(count) + " items from a pool of " + std::to_string(pool));
    auto stream = make_stream(seed, {shots, repeat});
    std::vector<std::size_t> idx(pool);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool - 1);
        std::swap(idx[i], idx[pick(stream)]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<FewShotResult> few_shot_experiment(const SetSource& train_pool, const SetSource& test_sets,
                                               std::span<const int> labels, std::span<const std::size_t> shots,
                                               std::size_t repeats, std::uint64_t seed, const ScoringConfig& config,
                                               const EvalOptions& options)
{
    if (repeats == 0)
        throw EvaluationError("few-shot experiment needs at least one repeat");
    for (auto n : shots) {
        if (n == 0 || n > train_pool.size())
            throw EvaluationError("shot count " + std::to_string(n) + " is outside [1, " +
                                  std::to_string(train_pool.size()) + "]");
    }

    std::vector<FewShotResult> results;
    for (auto n : shots) {
        FewShotResult result;
        result.shots = n;
        result.repeats = repeats;
        result.seed = seed;
        for (std::size_t r = 0; r < repeats; ++r) {
            const SubsetSets subset(train_pool, draw_without_replacement(train_pool.size(), n, seed, n, r));
            const auto model = fit_model(subset, options.jobs);
            for (const auto& w : model.warnings)
                result.warnings.push_back("shots " + std::to_string(n) + " repeat " + std::to_string(r) + ": " + w);
            result.per_repeat_auc.push_back(evaluate_category(model, test_sets, labels, config, {}, options).auc);
        }
        result.mean_auc = std::accumulate(result.per_repeat_auc.begin(), result.per_repeat_auc.end(), 0.0) /
                          static_cast<double>(repeats);
        results.push_back(std::move(result));
    }
    return results;
}

std::string few_shot_to_csv(std::span<const FewShotResult> results)
{
    std::string out = "shots,repeat,auc\n";
    for (const auto& r : results)
        for (std::size_t i = 0; i < r.per_repeat_auc.size(); ++i)
            out += std::to_string(r.shots) + "," + std::to_string(i) + "," + format_double(r.per_repeat_auc[i]) + "\n";
    return out;
}

void write_few_shot_csv(std::span<const FewShotResult> results, const std::filesystem::path& path)
{
    write_file_atomic(path, few_shot_to_csv(results));
}

} // namespace rfsad
