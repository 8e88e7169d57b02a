#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gauss_ad/feature_store.hpp"
#include "gauss_ad/scoring.hpp"

namespace gauss_ad {

// Probability that a random anomalous sample outscores a random normal one,
// ties counted half. Labels are 0 (normal) or 1 (anomalous).
double auroc(std::span<const double> scores, std::span<const int> labels);

struct Rates {
    double fpr = 0.0;
    double tpr = 0.0;
};

// Rates of the rule "anomalous iff score > threshold".
Rates fpr_tpr_at(std::span<const double> scores, std::span<const int> labels, double threshold);

// Shuffles [0, n) with Fisher-Yates driven by xoshiro256** (seeded through
// splitmix64), then cuts k contiguous folds; the first n % k folds get one
// extra element. Indices inside a fold are ascending.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);
std::vector<std::vector<std::string>> kfold_split(std::span<const std::string> sample_ids,
                                                  std::size_t k, std::uint64_t seed);

struct MeanSem {
    double mean = 0.0;
    double sem = 0.0;  // sample std (divisor k - 1) / sqrt(k)
};

MeanSem mean_sem(std::span<const double> values);

struct KfoldConfig {
    LevelFitOptions fit;
    std::vector<std::string> levels;  // empty: every level of the dataset
    std::size_t k = 5;
    std::uint64_t seed = 42;
    std::optional<double> target_fpr;  // single Mahalanobis level only
};

struct WorkingPointResult {
    double target_fpr = 0.0;
    double threshold = 0.0;
    double achieved_fpr = 0.0;
    double achieved_tpr = 0.0;
};

struct FoldResult {
    std::size_t fold_index = 0;
    std::size_t train_size = 0;
    double auroc = 0.0;
    std::optional<WorkingPointResult> working_point;
};

struct EvalReport {
    std::vector<FoldResult> folds;
    MeanSem auroc;
    std::optional<MeanSem> achieved_fpr;
    std::optional<MeanSem> achieved_tpr;

    std::string metric;
    std::string shrinkage;
    std::string compression;
    std::vector<std::string> levels;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::size_t test_size = 0;
};

// Fits on k-1 folds of the all-normal train pool, scores the whole test pool
// with the summed level scores and averages the per-fold AUROC.
EvalReport run_kfold(const Dataset& dataset, const KfoldConfig& config);

std::string report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);

}  // namespace gauss_ad
