#include "rfsad/cli.hpp"

#include "rfsad/errors.hpp"
#include "rfsad/estimation.hpp"
#include "rfsad/evaluation.hpp"
#include "rfsad/fileutil.hpp"
#include "rfsad/model_io.hpp"
#include "rfsad/ppf_io.hpp"
#include "rfsad/scoring.hpp"
#include "rfsad/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rfsad::cli {
namespace {

std::string fmt17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct ScoreFlags {
    std::string method = "energy";
    double topk = 100.0;
    bool as_squared = false;
    std::string orientation = "anomaly";

    void add_to(CLI::App& cmd, bool with_orientation)
    {
        cmd.add_option("--method", method, "Score: energy, as or loglik")
            ->check(CLI::IsMember({"energy", "as", "loglik"}))
            ->capture_default_str();
        cmd.add_option("--topk", topk, "Percent of largest squared distances kept by the energy score")
            ->check(CLI::Validator(
                [](std::string& s) -> std::string {
                    try {
                        const double v = std::stod(s);
                        return (v > 0.0 && v <= 100.0) ? std::string{} : "must be in (0, 100]";
                    } catch (...) {
                        return "not a number";
                    }
                },
                "(0,100]"))
            ->capture_default_str();
        cmd.add_flag("--as-squared", as_squared, "Sum squared instead of plain distances for --method as");
        if (with_orientation)
            cmd.add_option("--orientation", orientation,
                           "anomaly: negate loglik so higher is more anomalous; raw: use scores as-is")
                ->check(CLI::IsMember({"anomaly", "raw"}))
                ->capture_default_str();
    }

    [[nodiscard]] ScoringConfig config() const
    {
        ScoringConfig cfg;
        cfg.method = parse_score_method(method);
        cfg.top_k_percent = topk;
        cfg.as_squared = as_squared;
        cfg.validate();
        return cfg;
    }
};

std::vector<std::size_t> parse_shots(const std::string& list)
{
    std::vector<std::size_t> shots;
    std::stringstream ss(list);
    std::string token;
    while (std::getline(ss, token, ',')) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(token, &pos);
        } catch (...) {
            pos = 0;
        }
        if (pos != token.size() || token.empty())
            throw ConfigError("--shots expects a comma-separated list of positive integers");
        shots.push_back(static_cast<std::size_t>(v));
    }
    if (shots.empty())
        throw ConfigError("--shots is empty");
    return shots;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Random-finite-set energy anomaly scoring for sets of local image descriptors", "rfsad"};
    app.require_subcommand(1);

    int jobs = 0;

    // fit
    auto* fit = app.add_subcommand("fit", "Fit a model from the train items of a manifest");
    std::string fit_manifest, fit_out;
    fit->add_option("--manifest", fit_manifest, "Dataset manifest (JSON)")->required();
    fit->add_option("--out", fit_out, "Model file to write (JSON)")->required();
    fit->add_option("--jobs", jobs, "Worker threads (0: runtime default)");

    // score
    auto* score = app.add_subcommand("score", "Score descriptor-set files with a fitted model");
    std::string score_model;
    std::vector<std::string> score_inputs;
    ScoreFlags score_flags;
    score->add_option("--model", score_model, "Model file")->required();
    score->add_option("--input", score_inputs, "PPF file(s) to score")->required();
    score_flags.add_to(*score, false);

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate AUC on the test items of a manifest");
    std::string eval_model, eval_manifest, eval_report, eval_roc;
    ScoreFlags eval_flags;
    eval->add_option("--model", eval_model, "Model file")->required();
    eval->add_option("--manifest", eval_manifest, "Dataset manifest")->required();
    eval->add_option("--report", eval_report, "Write the evaluation report (JSON)");
    eval->add_option("--roc", eval_roc, "Write the ROC curve (CSV)");
    eval->add_option("--jobs", jobs, "Worker threads (0: runtime default)");
    eval_flags.add_to(*eval, true);

    // fewshot
    auto* fewshot = app.add_subcommand("fewshot", "Few-shot experiment: fit on n random train items, evaluate");
    std::string fs_manifest, fs_out, fs_shots, fs_report;
    std::size_t fs_repeats = 10;
    std::uint64_t fs_seed = 0;
    ScoreFlags fs_flags;
    fewshot->add_option("--manifest", fs_manifest, "Dataset manifest")->required();
    fewshot->add_option("--shots", fs_shots, "Comma-separated shot counts, e.g. 1,5,10,16")->required();
    fewshot->add_option("--repeats", fs_repeats, "Repeats per shot count")->capture_default_str();
    fewshot->add_option("--seed", fs_seed, "Sampling seed")->required();
    fewshot->add_option("--out", fs_out, "Write per-repeat AUCs (CSV shots,repeat,auc)");
    fewshot->add_option("--report", fs_report, "Write results with warnings (JSON)");
    fewshot->add_option("--jobs", jobs, "Worker threads (0: runtime default)");
    fs_flags.add_to(*fewshot, true);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic Poisson-Gaussian dataset");
    std::string synth_config, synth_out;
    std::uint64_t synth_seed = 0;
    synth->add_option("--config", synth_config, "Generator config (JSON)")->required();
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--seed", synth_seed, "Generator seed (overrides the config's seed)")->required();
    synth->add_option("--jobs", jobs, "Worker threads (0: runtime default)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*fit) {
            const auto manifest = read_manifest(fit_manifest);
            require_trainable(manifest);
            const PpfFileSets train(item_paths(manifest.train_items()));
            const auto model = fit_model(train, jobs);
            write_model(model, fit_out);
            out << "fitted " << manifest.category << ": D=" << model.dim << " rho=" << fmt17(model.rho)
                << " alpha=" << fmt17(model.alpha) << " sets=" << model.n_train_sets
                << " points=" << model.n_train_points << "\n";
        } else if (*score) {
            const auto model = read_model(score_model);
            const auto cfg = score_flags.config();
            for (const auto& input : score_inputs) {
                const auto value = score_set(read_ppf(input), model, cfg);
                if (score_inputs.size() > 1)
                    out << input << " ";
                out << fmt17(value) << "\n";
            }
        } else if (*eval) {
            const auto model = read_model(eval_model);
            const auto manifest = read_manifest(eval_manifest);
            const auto items = manifest.test_items();
            const PpfFileSets test(item_paths(items));
            const auto labels = item_labels(items);
            const EvalOptions options{parse_orientation(eval_flags.orientation), jobs};
            const auto report = evaluate_category(model, test, labels, eval_flags.config(), manifest.category, options);
            if (!eval_report.empty())
                write_report(report, eval_report);
            if (!eval_roc.empty())
                write_roc_csv(report.roc, eval_roc);
            out << "auc " << fmt17(report.auc) << "\n";
        } else if (*fewshot) {
            const auto manifest = read_manifest(fs_manifest);
            require_trainable(manifest);
            const auto test_items = manifest.test_items();
            const PpfFileSets pool(item_paths(manifest.train_items()));
            const PpfFileSets test(item_paths(test_items));
            const auto labels = item_labels(test_items);
            const auto shots = parse_shots(fs_shots);
            const EvalOptions options{parse_orientation(fs_flags.orientation), jobs};
            const auto results =
                few_shot_experiment(pool, test, labels, shots, fs_repeats, fs_seed, fs_flags.config(), options);
            if (!fs_out.empty())
                write_few_shot_csv(results, fs_out);
            if (!fs_report.empty()) {
                nlohmann::json doc = nlohmann::json::array();
                for (const auto& r : results)
                    doc.push_back({{"shots", r.shots},
                                   {"repeats", r.repeats},
                                   {"seed", r.seed},
                                   {"mean_auc", r.mean_auc},
                                   {"per_repeat_auc", r.per_repeat_auc},
                                   {"warnings", r.warnings}});
                write_file_atomic(fs_report, doc.dump(2) + "\n");
            }
            for (const auto& r : results)
                out << "shots " << r.shots << " mean_auc " << fmt17(r.mean_auc) << "\n";
        } else if (*synth) {
            std::ifstream in(synth_config);
            if (!in)
                throw IoError("cannot open " + synth_config);
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw FormatError(synth_config + ": " + e.what());
            }
            doc["seed"] = synth_seed;
            const auto cfg = synthetic_config_from_json(doc);
            DatasetCounts counts;
            counts.n_train = doc.value("n_train", std::size_t{0});
            counts.n_test_normal = doc.value("n_test_normal", std::size_t{0});
            counts.n_test_anomalous = doc.value("n_test_anomalous", std::size_t{0});
            const auto manifest =
                generate_dataset(cfg, counts, synth_out, doc.value("category", std::string("synthetic")), jobs);
            out << "wrote " << manifest.items.size() << " sets to " << synth_out << "\n";
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    }
    return kExitOk;
}

int run(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace rfsad::cli
