#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gauss_ad/matrix.hpp"

namespace gauss_ad {

namespace fs = std::filesystem;

// Feature vectors of n samples at one network level.
struct FeatureSet {
    std::string level_name;
    Matrix data;  // n x D
    std::vector<std::string> sample_ids;

    std::size_t size() const noexcept { return data.rows(); }
    std::size_t dim() const noexcept { return data.cols(); }
};

// Throws DataError unless n >= 1, D >= 1, all values finite and ids unique
// with one id per row.
void validate(const FeatureSet& set);

enum class Label : int { normal = 0, anomalous = 1 };

struct LabelEntry {
    Label label = Label::normal;
    std::string category;
};

// Rows of the labels CSV (`sample_id,label,category`), in file order.
class LabelTable {
public:
    void add(std::string sample_id, LabelEntry entry);

    bool contains(const std::string& sample_id) const { return index_.contains(sample_id); }
    const LabelEntry& at(const std::string& sample_id) const;
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    std::size_t size() const noexcept { return ids_.size(); }

private:
    std::vector<std::string> ids_;
    std::vector<LabelEntry> entries_;
    std::map<std::string, std::size_t> index_;
};

enum class Pooling { average };

struct LevelEntry {
    std::string level_name;
    std::size_t dim = 0;
    std::string file_path;  // relative paths resolve against the manifest directory
};

struct DatasetManifest {
    std::uint32_t format_version = 1;
    std::string model_id;
    Pooling pooling = Pooling::average;
    std::vector<LevelEntry> levels;
    std::string labels_path;
    std::size_t sample_count = 0;
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<FeatureSet> levels;  // manifest order, identical row order
    LabelTable labels;

    const std::vector<std::string>& sample_ids() const { return levels.front().sample_ids; }
    const FeatureSet& level(const std::string& name) const;
};

// ADFV codec: "ADFV", u32 version = 1, u32 rows, u32 cols, then rows*cols
// binary32 values, everything little-endian, row-major.
inline constexpr std::uint32_t kAdfvVersion = 1;

std::vector<std::uint8_t> encode_adfv(const Matrix& m);
Matrix decode_adfv(std::span<const std::uint8_t> bytes);

// Writes any finite matrix (model files included); temp file + rename.
void write_matrix_file(const Matrix& m, const fs::path& path);
Matrix read_matrix_file(const fs::path& path);

void write_feature_file(const FeatureSet& set, const fs::path& path);
// Ids are positional ("#0", "#1", ...) unless given.
FeatureSet read_feature_file(const fs::path& path, std::string level_name = {},
                             std::vector<std::string> sample_ids = {});

LabelTable read_labels_csv(const fs::path& path);
void write_labels_csv(const LabelTable& labels, const fs::path& path);

DatasetManifest read_manifest(const fs::path& path);
void write_manifest(const DatasetManifest& manifest, const fs::path& path);

// Sample ids of a level file live in a sidecar `<file>.ids`, one per line.
// Without sidecars the labels CSV row order supplies the ids.
fs::path ids_sidecar(const fs::path& feature_file);
std::vector<std::string> read_ids_file(const fs::path& path);
void write_ids_file(std::span<const std::string> ids, const fs::path& path);

Dataset load_dataset(const fs::path& manifest_path);

// Writes ADFV files, id sidecars, labels and manifest into `dir`.
fs::path write_dataset(const fs::path& dir, const std::vector<FeatureSet>& levels,
                       const LabelTable& labels, const std::string& model_id);

// Train/test membership derived from the sample id: the first `/`-separated
// path segment equal to "train" or "test" decides.
enum class Pool { train, test, unknown };
Pool pool_of(const std::string& sample_id);

// Writes `contents` to a temporary sibling and renames it over `path`.
void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> contents);
void write_text_atomic(const fs::path& path, const std::string& text);

}  // namespace gauss_ad
