#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gauss_ad/feature_store.hpp"
#include "gauss_ad/scoring.hpp"
#include "gauss_ad/specfun.hpp"

namespace gauss_ad {

struct StoredLevel {
    LevelScorer scorer;
    std::size_t n_fit = 0;
    std::string shrinkage_mode;  // as requested at fit time, e.g. "auto"
    std::optional<WorkingPoint> working_point;
};

// One directory per level:
//   meta.json    dims, metric, shrinkage rho, n_fit, compression, working point
//   mean.adfv    1 x d
//   chol.adfv    d x d lower-triangular (mahalanobis)
//   std.adfv     1 x d (sed)
//   basis.adfv, eigvals.adfv, center.adfv   projection, when compressed
// Matrices are stored as binary32, so a reloaded model is the float-rounded
// version of the fitted one.
void save_level(const fs::path& dir, const StoredLevel& level);
StoredLevel load_level(const fs::path& dir);

// A model set: `index.json` listing the levels plus one subdirectory each.
void save_model_set(const fs::path& dir, std::span<const StoredLevel> levels);
std::vector<StoredLevel> load_model_set(const fs::path& dir);

// Rewrites only the working point in `<dir>/<level>/meta.json`.
void store_working_point(const fs::path& model_dir, const std::string& level_name,
                         const WorkingPoint& wp);

}  // namespace gauss_ad
