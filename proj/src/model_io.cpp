#include "gauss_ad/model_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "gauss_ad/error.hpp"

namespace gauss_ad {

using nlohmann::ordered_json;

namespace {

constexpr int kModelFormat = 1;

Matrix row_matrix(const Vector& v) { return Matrix(1, v.size(), v); }

Vector read_row(const fs::path& path, std::size_t expected) {
    Matrix m = read_matrix_file(path);
    if (m.rows() != 1 || m.cols() != expected)
        throw DataError(path.string() + ": expected shape 1x" + std::to_string(expected) + ", found " +
                        std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    return m.values();
}

Matrix read_shaped(const fs::path& path, std::size_t rows, std::size_t cols) {
    Matrix m = read_matrix_file(path);
    if (m.rows() != rows || m.cols() != cols)
        throw DataError(path.string() + ": expected shape " + std::to_string(rows) + "x" +
                        std::to_string(cols) + ", found " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()));
    return m;
}

ordered_json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    try {
        return ordered_json::parse(in);
    } catch (const ordered_json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void check_level_name(const std::string& name) {
    if (name.empty() || name == "." || name == ".." ||
        name.find_first_of("/\\") != std::string::npos)
        throw DataError("level name '" + name + "' cannot be used as a directory name");
}

ordered_json working_point_json(const WorkingPoint& wp) {
    return {{"dim", wp.dim}, {"target_fpr", wp.target_fpr}, {"threshold", wp.threshold}};
}

}  // namespace

void save_level(const fs::path& dir, const StoredLevel& level) {
    const LevelScorer& s = level.scorer;
    check_consistent(s);
    fs::create_directories(dir);

    ordered_json meta{{"format_version", kModelFormat},
                      {"level_name", s.level_name},
                      {"metric", to_string(s.metric)},
                      {"dim", s.model_dim()},
                      {"input_dim", s.input_dim()},
                      {"n_fit", level.n_fit}};

    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, GaussianModel>) {
                meta["shrinkage_mode"] = level.shrinkage_mode;
                meta["shrinkage"] = m.shrinkage();
                write_matrix_file(row_matrix(m.mean()), dir / "mean.adfv");
                write_matrix_file(m.chol_factor(), dir / "chol.adfv");
            } else if constexpr (std::is_same_v<T, DiagonalModel>) {
                write_matrix_file(row_matrix(m.mean), dir / "mean.adfv");
                write_matrix_file(row_matrix(m.stddev), dir / "std.adfv");
            } else {
                write_matrix_file(row_matrix(m.mean), dir / "mean.adfv");
            }
        },
        s.model);
    if (s.sed_epsilon) meta["sed_epsilon"] = *s.sed_epsilon;

    ordered_json compression{{"mode", "none"}};
    if (s.projection) {
        const auto& p = *s.projection;
        compression = {{"mode", p.mode.mode == Compression::Mode::pca ? "pca" : "npca"},
                       {"q", p.mode.q},
                       {"total_variance", p.total_variance},
                       {"components", p.output_dim()}};
        write_matrix_file(p.basis, dir / "basis.adfv");
        write_matrix_file(row_matrix(p.eigenvalues), dir / "eigvals.adfv");
        write_matrix_file(row_matrix(p.center), dir / "center.adfv");
    }
    meta["compression"] = compression;
    if (level.working_point) meta["working_point"] = working_point_json(*level.working_point);
    write_text_atomic(dir / "meta.json", meta.dump(2) + "\n");
}

StoredLevel load_level(const fs::path& dir) {
    const ordered_json meta = read_json(dir / "meta.json");
    StoredLevel level;
    LevelScorer& s = level.scorer;
    try {
        if (meta.at("format_version").get<int>() != kModelFormat)
            throw DataError(dir.string() + ": unsupported model format_version");
        s.level_name = meta.at("level_name").get<std::string>();
        s.metric = parse_metric(meta.at("metric").get<std::string>());
        const auto dim = meta.at("dim").get<std::size_t>();
        const auto input_dim = meta.at("input_dim").get<std::size_t>();
        level.n_fit = meta.at("n_fit").get<std::size_t>();
        if (meta.contains("sed_epsilon")) s.sed_epsilon = meta.at("sed_epsilon").get<double>();

        const auto& comp = meta.at("compression");
        const auto mode = comp.at("mode").get<std::string>();
        if (mode != "none") {
            Projection p;
            const double q = comp.at("q").get<double>();
            if (mode == "pca") p.mode = Compression::pca(q);
            else if (mode == "npca") p.mode = Compression::npca(q);
            else throw DataError(dir.string() + ": unknown compression mode '" + mode + "'");
            p.total_variance = comp.at("total_variance").get<double>();
            if (comp.at("components").get<std::size_t>() != dim)
                throw DataError(dir.string() + ": compression components disagree with dim");
            p.basis = read_shaped(dir / "basis.adfv", input_dim, dim);
            p.eigenvalues = read_row(dir / "eigvals.adfv", dim);
            p.center = read_row(dir / "center.adfv", input_dim);
            s.projection = std::move(p);
        } else if (input_dim != dim) {
            throw DataError(dir.string() + ": input_dim differs from dim without compression");
        }

        Vector mean = read_row(dir / "mean.adfv", dim);
        switch (s.metric) {
            case Metric::mahalanobis:
                level.shrinkage_mode = meta.at("shrinkage_mode").get<std::string>();
                s.model = GaussianModel::from_factor(std::move(mean), read_shaped(dir / "chol.adfv", dim, dim),
                                                     meta.at("shrinkage").get<double>(), level.n_fit);
                break;
            case Metric::sed:
                s.model = DiagonalModel{std::move(mean), read_row(dir / "std.adfv", dim)};
                break;
            case Metric::l2: s.model = MeanModel{std::move(mean)}; break;
        }
        if (meta.contains("working_point")) {
            const auto& wp = meta.at("working_point");
            level.working_point = WorkingPoint{wp.at("dim").get<std::size_t>(),
                                               wp.at("target_fpr").get<double>(),
                                               wp.at("threshold").get<double>()};
            if (level.working_point->dim != dim)
                throw DataError(dir.string() + ": working point dimension differs from model");
        }
    } catch (const ordered_json::exception& e) {
        throw DataError(dir.string() + ": malformed meta.json: " + e.what());
    }
    check_consistent(s);
    return level;
}

void save_model_set(const fs::path& dir, std::span<const StoredLevel> levels) {
    if (levels.empty()) throw DataError("no levels to save");
    fs::create_directories(dir);
    ordered_json names = ordered_json::array();
    std::set<std::string> seen;
    for (const auto& level : levels) {
        const auto& name = level.scorer.level_name;
        check_level_name(name);
        if (!seen.insert(name).second) throw DataError("duplicate level '" + name + "'");
        save_level(dir / name, level);
        names.push_back(name);
    }
    const ordered_json index{{"format_version", kModelFormat}, {"levels", names}};
    write_text_atomic(dir / "index.json", index.dump(2) + "\n");
}

std::vector<StoredLevel> load_model_set(const fs::path& dir) {
    const ordered_json index = read_json(dir / "index.json");
    std::vector<StoredLevel> out;
    try {
        if (index.at("format_version").get<int>() != kModelFormat)
            throw DataError(dir.string() + ": unsupported model set format_version");
        for (const auto& name : index.at("levels")) {
            const auto level_name = name.get<std::string>();
            check_level_name(level_name);
            out.push_back(load_level(dir / level_name));
            if (out.back().scorer.level_name != level_name)
                throw DataError(dir.string() + ": level directory '" + level_name +
                                "' holds level '" + out.back().scorer.level_name + "'");
        }
    } catch (const ordered_json::exception& e) {
        throw DataError(dir.string() + ": malformed index.json: " + e.what());
    }
    if (out.empty()) throw DataError(dir.string() + ": model set has no levels");
    return out;
}

void store_working_point(const fs::path& model_dir, const std::string& level_name,
                         const WorkingPoint& wp) {
    check_level_name(level_name);
    const fs::path meta_path = model_dir / level_name / "meta.json";
    ordered_json meta = read_json(meta_path);
    const auto dim = meta.value("dim", std::size_t{0});
    if (wp.dim != dim)
        throw DataError("working point dimension " + std::to_string(wp.dim) + " differs from level '" +
                        level_name + "' dimension " + std::to_string(dim));
    meta["working_point"] = working_point_json(wp);
    write_text_atomic(meta_path, meta.dump(2) + "\n");
}

}  // namespace gauss_ad
