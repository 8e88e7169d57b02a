#include "gauss_ad/scoring.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "gauss_ad/error.hpp"
#include "gauss_ad/parallel.hpp"

namespace gauss_ad {

Metric parse_metric(const std::string& text) {
    if (text == "mahalanobis") return Metric::mahalanobis;
    if (text == "sed") return Metric::sed;
    if (text == "l2") return Metric::l2;
    throw UsageError("unknown metric '" + text + "' (expected mahalanobis, sed or l2)");
}

std::string to_string(Metric metric) {
    switch (metric) {
        case Metric::mahalanobis: return "mahalanobis";
        case Metric::sed: return "sed";
        case Metric::l2: return "l2";
    }
    return "mahalanobis";
}

std::size_t LevelScorer::model_dim() const {
    return std::visit(
        [](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, GaussianModel>) return m.dim();
            else return m.mean.size();
        },
        model);
}

std::size_t LevelScorer::input_dim() const {
    return projection ? projection->input_dim() : model_dim();
}

void check_consistent(const LevelScorer& scorer) {
    const bool kind_ok = (scorer.metric == Metric::mahalanobis &&
                          std::holds_alternative<GaussianModel>(scorer.model)) ||
                         (scorer.metric == Metric::sed &&
                          std::holds_alternative<DiagonalModel>(scorer.model)) ||
                         (scorer.metric == Metric::l2 && std::holds_alternative<MeanModel>(scorer.model));
    if (!kind_ok)
        throw DataError("level '" + scorer.level_name + "': metric " + to_string(scorer.metric) +
                        " does not match its model kind");
    if (scorer.projection && scorer.projection->output_dim() != scorer.model_dim())
        throw DataError("level '" + scorer.level_name + "': projection output dimension " +
                        std::to_string(scorer.projection->output_dim()) + " != model dimension " +
                        std::to_string(scorer.model_dim()));
}

LevelScorer fit_level(const std::string& level_name, const Matrix& x, const LevelFitOptions& options) {
    LevelScorer scorer;
    scorer.level_name = level_name;
    scorer.metric = options.metric;
    scorer.sed_epsilon = options.sed_epsilon;

    const Matrix* fit_rows = &x;
    Matrix projected;
    if (options.compression.enabled()) {
        scorer.projection = fit_projection(x, options.compression);
        projected = project(*scorer.projection, x);
        fit_rows = &projected;
    }

    switch (options.metric) {
        case Metric::mahalanobis: scorer.model = fit_gaussian(*fit_rows, options.shrinkage); break;
        case Metric::sed: {
            DiagonalModel diag = fit_diagonal(*fit_rows);
            if (!options.sed_epsilon) {
                // zero-variance check
                (void)sed(diag, diag.mean);
            }
            scorer.model = std::move(diag);
            break;
        }
        case Metric::l2: scorer.model = MeanModel{fit_empirical(*fit_rows).mean}; break;
    }
    return scorer;
}

double score_level(const LevelScorer& scorer, std::span<const double> x) {
    Vector projected;
    if (scorer.projection) {
        projected = project(*scorer.projection, x);
        x = projected;
    }
    switch (scorer.metric) {
        case Metric::mahalanobis: return mahalanobis(std::get<GaussianModel>(scorer.model), x);
        case Metric::sed: return sed(std::get<DiagonalModel>(scorer.model), x, scorer.sed_epsilon);
        case Metric::l2: return l2(std::get<MeanModel>(scorer.model).mean, x);
    }
    return 0.0;
}

ScoreRecord score_sum(std::span<const LevelScorer> scorers,
                      const std::map<std::string, std::span<const double>>& sample,
                      std::string sample_id) {
    ScoreRecord record;
    record.sample_id = std::move(sample_id);
    for (const auto& scorer : scorers) {
        const auto it = sample.find(scorer.level_name);
        if (it == sample.end()) throw DataError("missing level '" + scorer.level_name + "'");
        if (!record.level_scores.emplace(scorer.level_name, score_level(scorer, it->second)).second)
            throw DataError("duplicate level '" + scorer.level_name + "'");
    }
    for (const auto& [name, value] : record.level_scores) record.sum_score += value;
    return record;
}

std::vector<ScoreRecord> score_dataset(std::span<const LevelScorer> scorers,
                                       std::span<const FeatureSet> levels) {
    if (levels.empty()) throw DataError("no levels to score");
    std::map<std::string, const FeatureSet*> by_name;
    for (const auto& set : levels) {
        if (set.sample_ids != levels.front().sample_ids)
            throw DataError("level '" + set.level_name + "' orders samples differently");
        by_name[set.level_name] = &set;
    }
    for (const auto& scorer : scorers) {
        check_consistent(scorer);
        const auto it = by_name.find(scorer.level_name);
        if (it == by_name.end()) throw DataError("missing level '" + scorer.level_name + "'");
        if (it->second->dim() != scorer.input_dim())
            throw DataError("level '" + scorer.level_name + "': features have dimension " +
                            std::to_string(it->second->dim()) + ", model expects " +
                            std::to_string(scorer.input_dim()));
    }

    const auto& ids = levels.front().sample_ids;
    std::vector<ScoreRecord> records(ids.size());
    parallel_for(ids.size(), [&](std::size_t i) {
        std::map<std::string, std::span<const double>> sample;
        for (const auto& [name, set] : by_name) sample.emplace(name, set->data.row(i));
        records[i] = score_sum(scorers, sample, ids[i]);
    });
    return records;
}

Decision classify(double score, const WorkingPoint& wp) {
    return score > wp.threshold ? Decision::anomalous : Decision::normal;
}

void write_scores_csv(std::ostream& out, std::span<const ScoreRecord> records,
                      std::span<const std::string> level_order) {
    out << "sample_id";
    for (const auto& name : level_order) out << ',' << name;
    out << ",sum\n";
    char buf[64];
    for (const auto& rec : records) {
        out << rec.sample_id;
        for (const auto& name : level_order) {
            const auto it = rec.level_scores.find(name);
            if (it == rec.level_scores.end())
                throw DataError("record '" + rec.sample_id + "' lacks level '" + name + "'");
            std::snprintf(buf, sizeof buf, ",%.9g", it->second);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.9g\n", rec.sum_score);
        out << buf;
    }
}

const std::vector<double>& ScoreTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return values[i];
    throw DataError("scores have no column '" + name + "'");
}

ScoreTable read_scores_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    auto split = [](const std::string& line) {
        std::vector<std::string> parts;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) parts.push_back(item);
        if (!line.empty() && line.back() == ',') parts.emplace_back();
        return parts;
    };
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty scores file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split(line);
    if (header.size() < 2 || header.front() != "sample_id")
        throw DataError(path.string() + ": scores header must start with sample_id");
    ScoreTable table;
    table.columns.assign(header.begin() + 1, header.end());
    table.values.resize(table.columns.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line);
        if (fields.size() != header.size())
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": wrong field count");
        table.sample_ids.push_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(fields[c], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != fields[c].size() || !std::isfinite(v))
                throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad score '" +
                                fields[c] + "'");
            table.values[c - 1].push_back(v);
        }
    }
    return table;
}

}  // namespace gauss_ad
