#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gauss_ad/feature_store.hpp"
#include "gauss_ad/gaussian.hpp"
#include "gauss_ad/specfun.hpp"
#include "gauss_ad/spectral.hpp"

namespace gauss_ad {

enum class Metric { mahalanobis, sed, l2 };

Metric parse_metric(const std::string& text);
std::string to_string(Metric metric);

// Mean-only model used by the L2 metric.
struct MeanModel {
    Vector mean;
};

using LevelModel = std::variant<MeanModel, DiagonalModel, GaussianModel>;

struct LevelScorer {
    std::string level_name;
    Metric metric = Metric::mahalanobis;
    LevelModel model;
    std::optional<Projection> projection;
    std::optional<double> sed_epsilon;

    // Dimension of the raw feature vectors this scorer accepts.
    std::size_t input_dim() const;
    // Dimension the metric is evaluated in (after projection).
    std::size_t model_dim() const;
};

struct LevelFitOptions {
    Metric metric = Metric::mahalanobis;
    Shrinkage shrinkage = Shrinkage::automatic();
    Compression compression = Compression::none();
    std::optional<double> sed_epsilon;
};

// Projection (if requested) is fitted on the raw rows, then the metric model
// on the projected rows.
LevelScorer fit_level(const std::string& level_name, const Matrix& x, const LevelFitOptions& options);

// Throws when metric and model kind disagree or dimensions do not chain.
void check_consistent(const LevelScorer& scorer);

double score_level(const LevelScorer& scorer, std::span<const double> x);

enum class Decision { normal, anomalous };

struct ScoreRecord {
    std::string sample_id;
    std::map<std::string, double> level_scores;
    double sum_score = 0.0;
    std::optional<Decision> decision;
};

// Unweighted sum of per-level scores, accumulated in ascending level-name
// order so the result does not depend on scorer order.
ScoreRecord score_sum(std::span<const LevelScorer> scorers,
                      const std::map<std::string, std::span<const double>>& sample,
                      std::string sample_id = {});

// Scores every sample of the given levels; output order follows input rows.
std::vector<ScoreRecord> score_dataset(std::span<const LevelScorer> scorers,
                                       std::span<const FeatureSet> levels);

// Anomalous iff score > threshold.
Decision classify(double score, const WorkingPoint& wp);

// `sample_id,<level>...,sum` with 9 significant digits; levels in the given order.
void write_scores_csv(std::ostream& out, std::span<const ScoreRecord> records,
                      std::span<const std::string> level_order);

struct ScoreTable {
    std::vector<std::string> columns;  // header after sample_id, "sum" included
    std::vector<std::string> sample_ids;
    std::vector<std::vector<double>> values;  // values[column][row]

    const std::vector<double>& column(const std::string& name) const;
};

ScoreTable read_scores_csv(const fs::path& path);

}  // namespace gauss_ad
