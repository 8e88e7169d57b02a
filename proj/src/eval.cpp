#include "gauss_ad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "json.hpp"

#include "gauss_ad/error.hpp"
#include "gauss_ad/parallel.hpp"
#include "gauss_ad/rng.hpp"

namespace gauss_ad {
namespace {

void check_scored_labels(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw DataError("scores and labels differ in length");
    std::size_t normals = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw DataError("labels must be 0 or 1");
        if (!std::isfinite(scores[i])) throw DataError("non-finite score");
        normals += labels[i] == 0;
    }
    if (normals == 0 || normals == labels.size()) throw DataError("degenerate labels");
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
    check_scored_labels(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Twice the tie-corrected win count, kept integral.
    std::uint64_t twice_wins = 0;
    std::uint64_t normals_below = 0;
    std::uint64_t normals = 0;
    std::uint64_t anomalies = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::uint64_t group_normals = 0;
        std::uint64_t group_anomalies = 0;
        for (; j < order.size() && scores[order[j]] == scores[order[i]]; ++j) {
            if (labels[order[j]] == 0) ++group_normals;
            else ++group_anomalies;
        }
        twice_wins += group_anomalies * (2 * normals_below + group_normals);
        normals_below += group_normals;
        normals += group_normals;
        anomalies += group_anomalies;
        i = j;
    }
    return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(normals * anomalies));
}

Rates fpr_tpr_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
    check_scored_labels(scores, labels);
    std::size_t normals = 0, anomalies = 0, false_pos = 0, true_pos = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool flagged = scores[i] > threshold;
        if (labels[i] == 0) {
            ++normals;
            false_pos += flagged;
        } else {
            ++anomalies;
            true_pos += flagged;
        }
    }
    return {static_cast<double>(false_pos) / static_cast<double>(normals),
            static_cast<double>(true_pos) / static_cast<double>(anomalies)};
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw UsageError("k-fold needs k >= 2");
    if (k > n)
        throw UsageError("k-fold needs at least k samples: k = " + std::to_string(k) + ", n = " +
                         std::to_string(n));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);

    std::vector<std::vector<std::size_t>> folds(k);
    const std::size_t base = n / k;
    const std::size_t extra = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                        perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
        std::sort(folds[f].begin(), folds[f].end());
        pos += size;
    }
    return folds;
}

std::vector<std::vector<std::string>> kfold_split(std::span<const std::string> sample_ids,
                                                  std::size_t k, std::uint64_t seed) {
    std::vector<std::vector<std::string>> out;
    for (const auto& fold : kfold_split(sample_ids.size(), k, seed)) {
        auto& ids = out.emplace_back();
        for (std::size_t i : fold) ids.push_back(sample_ids[i]);
    }
    return out;
}

MeanSem mean_sem(std::span<const double> values) {
    if (values.empty()) throw DataError("mean of an empty sequence");
    const double k = static_cast<double>(values.size());
    MeanSem out;
    for (double v : values) out.mean += v;
    out.mean /= k;
    if (values.size() < 2) return out;
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sem = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
    return out;
}

EvalReport run_kfold(const Dataset& dataset, const KfoldConfig& config) {
    std::vector<const FeatureSet*> levels;
    if (config.levels.empty()) {
        for (const auto& set : dataset.levels) levels.push_back(&set);
    } else {
        std::set<std::string> seen;
        for (const auto& name : config.levels) {
            if (!seen.insert(name).second) throw UsageError("level '" + name + "' selected twice");
            levels.push_back(&dataset.level(name));
        }
    }
    if (config.target_fpr) {
        if (levels.size() != 1) throw UsageError("working point undefined for sum mode");
        if (config.fit.metric != Metric::mahalanobis)
            throw UsageError("working points need the mahalanobis metric");
    }

    const auto& ids = dataset.sample_ids();
    std::vector<std::size_t> train, test;
    std::vector<int> test_labels;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto label = dataset.labels.at(ids[i]).label;
        switch (pool_of(ids[i])) {
            case Pool::train:
                if (label != Label::normal)
                    throw DataError("anomalous sample '" + ids[i] + "' in train pool");
                train.push_back(i);
                break;
            case Pool::test:
                test.push_back(i);
                test_labels.push_back(static_cast<int>(label));
                break;
            case Pool::unknown: break;
        }
    }
    if (train.empty()) throw DataError("dataset has no train pool samples");
    if (test.empty()) throw DataError("dataset has no test pool samples");
    {
        const auto normals = std::count(test_labels.begin(), test_labels.end(), 0);
        if (normals == 0 || normals == static_cast<long>(test_labels.size()))
            throw DataError("degenerate labels");
    }

    const auto folds = kfold_split(train.size(), config.k, config.seed);
    EvalReport report;
    report.folds.resize(folds.size());

    parallel_for(folds.size(), [&](std::size_t f) {
        std::vector<std::size_t> fit_rows;
        for (std::size_t g = 0; g < folds.size(); ++g)
            if (g != f)
                for (std::size_t local : folds[g]) fit_rows.push_back(train[local]);
        std::sort(fit_rows.begin(), fit_rows.end());

        std::vector<LevelScorer> scorers;
        for (const auto* set : levels)
            scorers.push_back(fit_level(set->level_name, select_rows(set->data, fit_rows), config.fit));

        std::vector<double> scores(test.size());
        for (std::size_t t = 0; t < test.size(); ++t) {
            std::map<std::string, std::span<const double>> sample;
            for (const auto* set : levels) sample.emplace(set->level_name, set->data.row(test[t]));
            scores[t] = score_sum(scorers, sample).sum_score;
        }

        FoldResult result;
        result.fold_index = f;
        result.train_size = fit_rows.size();
        result.auroc = auroc(scores, test_labels);
        if (config.target_fpr) {
            const auto wp = threshold_for_fpr(scorers.front().model_dim(), *config.target_fpr);
            const auto rates = fpr_tpr_at(scores, test_labels, wp.threshold);
            result.working_point = WorkingPointResult{wp.target_fpr, wp.threshold, rates.fpr, rates.tpr};
        }
        report.folds[f] = result;
    });

    std::vector<double> aurocs, fprs, tprs;
    for (const auto& fold : report.folds) {
        aurocs.push_back(fold.auroc);
        if (fold.working_point) {
            fprs.push_back(fold.working_point->achieved_fpr);
            tprs.push_back(fold.working_point->achieved_tpr);
        }
    }
    report.auroc = mean_sem(aurocs);
    if (!fprs.empty()) {
        report.achieved_fpr = mean_sem(fprs);
        report.achieved_tpr = mean_sem(tprs);
    }
    report.metric = to_string(config.fit.metric);
    report.shrinkage = config.fit.shrinkage.to_string();
    report.compression = config.fit.compression.to_string();
    for (const auto* set : levels) report.levels.push_back(set->level_name);
    report.k = config.k;
    report.seed = config.seed;
    report.test_size = test.size();
    return report;
}

std::string report_to_json(const EvalReport& report) {
    using nlohmann::ordered_json;
    ordered_json folds = ordered_json::array();
    for (const auto& f : report.folds) {
        ordered_json row{{"fold_index", f.fold_index}, {"train_size", f.train_size}, {"auroc", f.auroc}};
        if (f.working_point)
            row["working_point"] = {{"target_fpr", f.working_point->target_fpr},
                                    {"threshold", f.working_point->threshold},
                                    {"achieved_fpr", f.working_point->achieved_fpr},
                                    {"achieved_tpr", f.working_point->achieved_tpr}};
        folds.push_back(row);
    }
    ordered_json aggregate{{"mean_auroc", report.auroc.mean}, {"sem_auroc", report.auroc.sem}};
    if (report.achieved_fpr) {
        aggregate["mean_achieved_fpr"] = report.achieved_fpr->mean;
        aggregate["sem_achieved_fpr"] = report.achieved_fpr->sem;
        aggregate["mean_achieved_tpr"] = report.achieved_tpr->mean;
        aggregate["sem_achieved_tpr"] = report.achieved_tpr->sem;
    }
    const ordered_json doc{{"metadata",
                            {{"metric", report.metric},
                             {"shrinkage", report.shrinkage},
                             {"compression", report.compression},
                             {"levels", report.levels},
                             {"k", report.k},
                             {"seed", report.seed},
                             {"test_size", report.test_size}}},
                           {"folds", folds},
                           {"aggregate", aggregate}};
    return doc.dump(2) + "\n";
}

std::string report_to_text(const EvalReport& report) {
    std::string out;
    char buf[256];
    std::string levels;
    for (const auto& l : report.levels) levels += (levels.empty() ? "" : ",") + l;
    std::snprintf(buf, sizeof buf, "metric=%s shrinkage=%s compression=%s k=%zu seed=%llu\n",
                  report.metric.c_str(), report.shrinkage.c_str(), report.compression.c_str(), report.k,
                  static_cast<unsigned long long>(report.seed));
    out += buf;
    out += "levels=" + levels + "\n";
    const bool wp = report.achieved_fpr.has_value();
    out += wp ? "fold  train   auroc     target_fpr  threshold   fpr       tpr\n"
              : "fold  train   auroc\n";
    for (const auto& f : report.folds) {
        if (f.working_point) {
            std::snprintf(buf, sizeof buf, "%-5zu %-7zu %-9.6f %-11.6g %-11.6f %-9.6f %-9.6f\n",
                          f.fold_index, f.train_size, f.auroc, f.working_point->target_fpr,
                          f.working_point->threshold, f.working_point->achieved_fpr,
                          f.working_point->achieved_tpr);
        } else {
            std::snprintf(buf, sizeof buf, "%-5zu %-7zu %-9.6f\n", f.fold_index, f.train_size, f.auroc);
        }
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "auroc %.6f +- %.6f (mean +- sem)\n", report.auroc.mean,
                  report.auroc.sem);
    out += buf;
    if (wp) {
        std::snprintf(buf, sizeof buf, "fpr   %.6f +- %.6f\ntpr   %.6f +- %.6f\n",
                      report.achieved_fpr->mean, report.achieved_fpr->sem, report.achieved_tpr->mean,
                      report.achieved_tpr->sem);
        out += buf;
    }
    return out;
}

}  // namespace gauss_ad
