#include "gauss_ad/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "gauss_ad/error.hpp"
#include "gauss_ad/eval.hpp"
#include "gauss_ad/feature_store.hpp"
#include "gauss_ad/model_io.hpp"
#include "gauss_ad/parallel.hpp"
#include "gauss_ad/scoring.hpp"
#include "gauss_ad/synthetic.hpp"

namespace gauss_ad::cli {

using nlohmann::ordered_json;

namespace {

struct RunConfig {
    std::string manifest;
    std::string model_dir;
    std::string metric = "mahalanobis";
    std::string shrinkage = "auto";
    std::string compression = "none";
    std::vector<std::string> levels;
    std::string fpr;
    std::size_t k = 5;
    std::uint64_t seed = 42;
    std::string out;
    std::string out_json;
    std::string out_txt;
    std::optional<double> sed_eps;
    std::string pool = "all";
    std::string scores;
    std::string labels;
    std::string level;
    std::optional<std::size_t> dim;
    bool store = false;
    std::vector<std::size_t> dims{8};
    std::size_t train = 200;
    std::size_t test_normal = 50;
    std::size_t test_anomalous = 50;
    double shift = 5.0;
};

LevelFitOptions fit_options(const RunConfig& cfg) {
    LevelFitOptions opt;
    opt.metric = parse_metric(cfg.metric);
    opt.shrinkage = Shrinkage::parse(cfg.shrinkage);
    opt.compression = Compression::parse(cfg.compression);
    opt.sed_epsilon = cfg.sed_eps;
    if (cfg.sed_eps && opt.metric != Metric::sed) throw UsageError("--sed-eps applies to the sed metric only");
    if (opt.compression.enabled() && opt.metric == Metric::l2)
        throw UsageError("compression is not defined for the l2 metric");
    return opt;
}

std::vector<const FeatureSet*> select_levels(const Dataset& ds, const std::vector<std::string>& names) {
    std::vector<const FeatureSet*> out;
    if (names.empty()) {
        for (const auto& set : ds.levels) out.push_back(&set);
        return out;
    }
    std::set<std::string> seen;
    for (const auto& name : names) {
        if (!seen.insert(name).second) throw UsageError("level '" + name + "' selected twice");
        out.push_back(&ds.level(name));
    }
    return out;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) out << text;
    else write_text_atomic(path, text);
}

int cmd_fit(const RunConfig& cfg, std::ostream& out) {
    const LevelFitOptions opt = fit_options(cfg);
    const Dataset ds = load_dataset(cfg.manifest);
    const auto levels = select_levels(ds, cfg.levels);

    std::vector<std::size_t> rows;
    const auto& ids = ds.sample_ids();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (pool_of(ids[i]) != Pool::train) continue;
        if (ds.labels.at(ids[i]).label != Label::normal)
            throw DataError("anomalous sample '" + ids[i] + "' in train pool");
        rows.push_back(i);
    }
    if (rows.empty()) throw DataError("manifest has no train pool samples");

    std::vector<StoredLevel> fitted(levels.size());
    parallel_for(levels.size(), [&](std::size_t l) {
        const FeatureSet& set = *levels[l];
        fitted[l].scorer = fit_level(set.level_name, select_rows(set.data, rows), opt);
        fitted[l].n_fit = rows.size();
        fitted[l].shrinkage_mode = opt.shrinkage.to_string();
    });
    save_model_set(cfg.model_dir, fitted);
    for (const auto& level : fitted)
        out << "fitted " << level.scorer.level_name << " dim=" << level.scorer.model_dim()
            << " n=" << level.n_fit << "\n";
    return 0;
}

int cmd_score(const RunConfig& cfg, std::ostream& out) {
    const Dataset ds = load_dataset(cfg.manifest);
    auto stored = load_model_set(cfg.model_dir);
    std::vector<LevelScorer> scorers;
    std::vector<std::string> order;
    const std::set<std::string> wanted(cfg.levels.begin(), cfg.levels.end());
    for (auto& level : stored) {
        if (!wanted.empty() && !wanted.contains(level.scorer.level_name)) continue;
        order.push_back(level.scorer.level_name);
        scorers.push_back(std::move(level.scorer));
    }
    if (scorers.empty()) throw UsageError("no model level matches --levels");
    if (!wanted.empty() && wanted.size() != scorers.size())
        throw UsageError("--levels names a level the model set does not contain");

    std::optional<Pool> pool;
    if (cfg.pool == "train") pool = Pool::train;
    else if (cfg.pool == "test") pool = Pool::test;
    else if (cfg.pool != "all") throw UsageError("--pool must be all, train or test");

    std::vector<FeatureSet> inputs;
    for (const auto& name : order) {
        const FeatureSet& src = ds.level(name);
        if (!pool) {
            inputs.push_back(src);
            continue;
        }
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < src.sample_ids.size(); ++i)
            if (pool_of(src.sample_ids[i]) == *pool) rows.push_back(i);
        if (rows.empty()) throw DataError("no samples in the " + cfg.pool + " pool");
        FeatureSet subset{src.level_name, select_rows(src.data, rows), {}};
        for (std::size_t i : rows) subset.sample_ids.push_back(src.sample_ids[i]);
        inputs.push_back(std::move(subset));
    }

    const auto records = score_dataset(scorers, inputs);
    std::ostringstream csv;
    write_scores_csv(csv, records, order);
    emit(csv.str(), cfg.out, out);
    return 0;
}

int cmd_threshold(const RunConfig& cfg, std::ostream& out) {
    if (cfg.level == "sum") throw UsageError("working point undefined for sum mode");
    if (cfg.fpr.empty()) throw UsageError("--fpr is required");
    const double fpr = parse_fpr(cfg.fpr);

    ordered_json points = ordered_json::array();
    if (cfg.dim) {
        if (!cfg.model_dir.empty()) throw UsageError("--dim and --model-dir are exclusive");
        if (cfg.store) throw UsageError("--store needs --model-dir");
        const WorkingPoint wp = threshold_for_fpr(*cfg.dim, fpr);
        points.push_back({{"dim", wp.dim}, {"target_fpr", wp.target_fpr}, {"threshold", wp.threshold}});
    } else {
        if (cfg.model_dir.empty()) throw UsageError("threshold needs --model-dir or --dim");
        const auto stored = load_model_set(cfg.model_dir);
        bool matched = false;
        for (const auto& level : stored) {
            const auto& s = level.scorer;
            if (!cfg.level.empty() && s.level_name != cfg.level) continue;
            matched = true;
            if (s.metric != Metric::mahalanobis)
                throw UsageError("level '" + s.level_name + "' uses metric " + to_string(s.metric) +
                                 "; working points need mahalanobis");
            const WorkingPoint wp = threshold_for_fpr(s.model_dim(), fpr);
            if (cfg.store) store_working_point(cfg.model_dir, s.level_name, wp);
            points.push_back({{"level_name", s.level_name},
                              {"dim", wp.dim},
                              {"target_fpr", wp.target_fpr},
                              {"threshold", wp.threshold}});
        }
        if (!matched) throw UsageError("model set has no level '" + cfg.level + "'");
    }
    const ordered_json doc{{"working_points", points}};
    emit(doc.dump(2) + "\n", cfg.out, out);
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
    const ScoreTable table = read_scores_csv(cfg.scores);
    LabelTable labels;
    if (!cfg.labels.empty()) {
        labels = read_labels_csv(cfg.labels);
    } else if (!cfg.manifest.empty()) {
        const fs::path manifest_path = cfg.manifest;
        const auto manifest = read_manifest(manifest_path);
        const fs::path p = manifest.labels_path;
        labels = read_labels_csv(p.is_absolute() ? p : manifest_path.parent_path() / p);
    } else {
        throw UsageError("evaluate needs --labels or --manifest");
    }
    std::vector<int> y;
    for (const auto& id : table.sample_ids) y.push_back(static_cast<int>(labels.at(id).label));

    std::optional<double> fpr;
    std::map<std::string, WorkingPoint> points;
    if (!cfg.fpr.empty()) {
        fpr = parse_fpr(cfg.fpr);
        if (cfg.model_dir.empty()) throw UsageError("--fpr needs --model-dir for level dimensions");
        for (const auto& level : load_model_set(cfg.model_dir))
            if (level.scorer.metric == Metric::mahalanobis)
                points.emplace(level.scorer.level_name, threshold_for_fpr(level.scorer.model_dim(), *fpr));
    }

    std::vector<std::string> columns = table.columns;
    if (!cfg.level.empty()) {
        (void)table.column(cfg.level);
        columns = {cfg.level};
    }
    ordered_json result = ordered_json::object();
    for (const auto& name : columns) {
        const auto& scores = table.column(name);
        ordered_json entry{{"auroc", auroc(scores, y)}};
        if (fpr && name != "sum") {
            const auto it = points.find(name);
            if (it != points.end()) {
                const Rates r = fpr_tpr_at(scores, y, it->second.threshold);
                entry["working_point"] = {{"dim", it->second.dim},
                                          {"target_fpr", it->second.target_fpr},
                                          {"threshold", it->second.threshold},
                                          {"achieved_fpr", r.fpr},
                                          {"achieved_tpr", r.tpr}};
            }
        }
        result[name] = entry;
    }
    const auto anomalous = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    const ordered_json doc{{"samples", y.size()},
                           {"anomalous", anomalous},
                           {"normal", y.size() - anomalous},
                           {"columns", result}};
    emit(doc.dump(2) + "\n", cfg.out_json.empty() ? cfg.out : cfg.out_json, out);
    return 0;
}

int cmd_kfold(const RunConfig& cfg, std::ostream& out) {
    KfoldConfig kc;
    kc.fit = fit_options(cfg);
    kc.levels = cfg.levels;
    kc.k = cfg.k;
    kc.seed = cfg.seed;
    if (!cfg.fpr.empty()) kc.target_fpr = parse_fpr(cfg.fpr);
    const Dataset ds = load_dataset(cfg.manifest);
    const EvalReport report = run_kfold(ds, kc);
    if (!cfg.out_json.empty()) write_text_atomic(cfg.out_json, report_to_json(report));
    const std::string text = report_to_text(report);
    if (!cfg.out_txt.empty()) write_text_atomic(cfg.out_txt, text);
    if (cfg.out_txt.empty()) out << text;
    return 0;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
    if (cfg.out.empty()) throw UsageError("synth needs --out DIR");
    SyntheticConfig sc;
    sc.dims = cfg.dims;
    sc.train = cfg.train;
    sc.test_normal = cfg.test_normal;
    sc.test_anomalous = cfg.test_anomalous;
    sc.shift = cfg.shift;
    sc.seed = cfg.seed;
    const auto ds = make_synthetic(sc);
    const auto manifest = write_dataset(cfg.out, ds.levels, ds.labels, "synthetic-mvg");
    out << manifest.string() << "\n";
    return 0;
}

void add_fit_flags(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--metric", cfg.metric, "Score metric: mahalanobis, sed or l2")
        ->capture_default_str();
    cmd->add_option("--shrinkage", cfg.shrinkage, "Covariance shrinkage: auto, none or fixed:<rho>")
        ->capture_default_str();
    cmd->add_option("--compression", cfg.compression,
                    "Component selection before fitting: none, pca:<q> or npca:<q>, q a fraction")
        ->capture_default_str();
    cmd->add_option("--sed-eps", cfg.sed_eps, "Floor for per-feature standard deviations (sed metric)");
}

}  // namespace

double parse_fpr(const std::string& text) {
    std::string body = text;
    double factor = 1.0;
    if (!body.empty() && body.back() == '%') {
        body.pop_back();
        factor = 0.01;
    }
    double value = 0.0;
    std::size_t used = 0;
    try {
        value = std::stod(body, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (body.empty() || used != body.size())
        throw UsageError("cannot parse FPR '" + text + "' (fraction, or percent with a % suffix)");
    value *= factor;
    if (!(value > 0.0 && value < 1.0)) throw UsageError("FPR '" + text + "' is outside (0,1)");
    return value;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Gaussian anomaly detection on pooled deep features", "gauss_ad"};
    app.require_subcommand(1);

    auto* fit = app.add_subcommand("fit", "Fit one model per level on the train pool of a manifest");
    fit->add_option("--manifest", cfg.manifest, "Dataset manifest JSON")->required();
    fit->add_option("--model-dir", cfg.model_dir, "Output model directory")->required();
    fit->add_option("--levels", cfg.levels, "Comma-separated subset of levels")->delimiter(',');
    add_fit_flags(fit, cfg);

    auto* score = app.add_subcommand("score", "Score samples of a manifest with a fitted model set");
    score->add_option("--manifest", cfg.manifest, "Dataset manifest JSON")->required();
    score->add_option("--model-dir", cfg.model_dir, "Model directory written by fit")->required();
    score->add_option("--out", cfg.out, "Scores CSV (stdout when omitted)");
    score->add_option("--levels", cfg.levels, "Comma-separated subset of levels")->delimiter(',');
    score->add_option("--pool", cfg.pool, "Samples to score: all, train or test")->capture_default_str();

    auto* threshold = app.add_subcommand("threshold", "Working point for a target false-positive rate");
    threshold->add_option("--fpr", cfg.fpr, "Target FPR: fraction (0.05) or percent (5%)")->required();
    threshold->add_option("--model-dir", cfg.model_dir, "Model directory written by fit");
    threshold->add_option("--level", cfg.level, "Single level (\"sum\" is rejected)");
    threshold->add_option("--dim", cfg.dim, "Model dimension, instead of --model-dir");
    threshold->add_flag("--store", cfg.store, "Record the working point in each level's meta.json");
    threshold->add_option("--out", cfg.out, "Output JSON (stdout when omitted)");

    auto* evaluate = app.add_subcommand("evaluate", "AUROC (and FPR/TPR at a working point) of a scores CSV");
    evaluate->add_option("--scores", cfg.scores, "Scores CSV written by score")->required();
    evaluate->add_option("--manifest", cfg.manifest, "Manifest whose labels CSV to use");
    evaluate->add_option("--labels", cfg.labels, "Labels CSV");
    evaluate->add_option("--level", cfg.level, "Evaluate one column only");
    evaluate->add_option("--fpr", cfg.fpr, "Target FPR for per-level working points");
    evaluate->add_option("--model-dir", cfg.model_dir, "Model directory (level dimensions for --fpr)");
    evaluate->add_option("--out-json", cfg.out_json, "Metrics JSON (stdout when omitted)");

    auto* kfold = app.add_subcommand("kfold", "k-fold AUROC evaluation over the train pool");
    kfold->add_option("--manifest", cfg.manifest, "Dataset manifest JSON")->required();
    kfold->add_option("--levels", cfg.levels, "Comma-separated subset of levels")->delimiter(',');
    kfold->add_option("--k", cfg.k, "Number of folds")->capture_default_str();
    kfold->add_option("--seed", cfg.seed, "Seed of the fold shuffle")->capture_default_str();
    kfold->add_option("--fpr", cfg.fpr, "Target FPR per fold (single level only)");
    kfold->add_option("--out-json", cfg.out_json, "Report JSON");
    kfold->add_option("--out-txt", cfg.out_txt, "Report as aligned text");
    add_fit_flags(kfold, cfg);

    auto* synth = app.add_subcommand("synth", "Write a synthetic Gaussian dataset with shifted anomalies");
    synth->add_option("--out", cfg.out, "Output directory")->required();
    synth->add_option("--dims", cfg.dims, "Comma-separated level dimensions")->delimiter(',')->capture_default_str();
    synth->add_option("--train", cfg.train, "Train pool size")->capture_default_str();
    synth->add_option("--test-normal", cfg.test_normal, "Normal test samples")->capture_default_str();
    synth->add_option("--test-anomalous", cfg.test_anomalous, "Anomalous test samples")->capture_default_str();
    synth->add_option("--shift", cfg.shift, "Anomaly shift in standard deviations along a random direction")->capture_default_str();
    synth->add_option("--seed", cfg.seed, "Generator seed")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "gauss_ad: error[usage]: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::usage);
    }

    try {
        if (*fit) return cmd_fit(cfg, out);
        if (*score) return cmd_score(cfg, out);
        if (*threshold) return cmd_threshold(cfg, out);
        if (*evaluate) return cmd_evaluate(cfg, out);
        if (*kfold) return cmd_kfold(cfg, out);
        if (*synth) return cmd_synth(cfg, out);
    } catch (const Error& e) {
        err << "gauss_ad: error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "gauss_ad: error[data]: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::data);
    } catch (const std::exception& e) {
        err << "gauss_ad: error[numeric]: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::numeric);
    }
    return static_cast<int>(ErrorKind::usage);
}

}  // namespace gauss_ad::cli
