#include "gauss_ad/feature_store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "gauss_ad/error.hpp"
#include "gauss_ad/kernels.hpp"
#include "gauss_ad/parallel.hpp"

namespace gauss_ad {

using json = nlohmann::json;

namespace {

constexpr std::uint8_t kMagic[4] = {0x41, 0x44, 0x46, 0x56};
constexpr std::size_t kHeaderSize = 16;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            parts.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(std::move(cur));
    return parts;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(std::move(line));
    }
    return out;
}

}  // namespace

void validate(const FeatureSet& set) {
    if (set.data.rows() == 0 || set.data.cols() == 0)
        throw DataError("feature set '" + set.level_name + "' is empty");
    if (set.sample_ids.size() != set.data.rows())
        throw DataError("feature set '" + set.level_name + "' has " +
                        std::to_string(set.sample_ids.size()) + " ids for " +
                        std::to_string(set.data.rows()) + " rows");
    for (std::size_t r = 0; r < set.data.rows(); ++r)
        for (double v : set.data.row(r))
            if (!std::isfinite(v))
                throw DataError("non-finite value in sample '" + set.sample_ids[r] + "'");
    std::set<std::string_view> seen;
    for (const auto& id : set.sample_ids)
        if (!seen.insert(id).second) throw DataError("duplicate sample id '" + id + "'");
}

void LabelTable::add(std::string sample_id, LabelEntry entry) {
    if (index_.contains(sample_id))
        throw DataError("duplicate label for sample '" + sample_id + "'");
    index_.emplace(sample_id, ids_.size());
    ids_.push_back(std::move(sample_id));
    entries_.push_back(std::move(entry));
}

const LabelEntry& LabelTable::at(const std::string& sample_id) const {
    const auto it = index_.find(sample_id);
    if (it == index_.end()) throw DataError("missing label for sample '" + sample_id + "'");
    return entries_[it->second];
}

const FeatureSet& Dataset::level(const std::string& name) const {
    for (const auto& set : levels)
        if (set.level_name == name) return set;
    throw DataError("level '" + name + "' not in dataset");
}

std::vector<std::uint8_t> encode_adfv(const Matrix& m) {
    if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX) throw DataError("matrix too large for ADFV");
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.reserve(kHeaderSize + 4 * m.values().size());
    put_u32(out, kAdfvVersion);
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (double v : m.values()) {
        const float f = static_cast<float>(v);
        if (!std::isfinite(f)) throw DataError("non-finite value cannot be stored");
        put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
    return out;
}

Matrix decode_adfv(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw DataError("bad magic: not an ADFV file");
    if (bytes.size() < kHeaderSize) throw DataError("truncated ADFV header");
    const std::uint32_t version = get_u32(bytes.data() + 4);
    if (version != kAdfvVersion)
        throw DataError("unsupported ADFV version " + std::to_string(version));
    const std::size_t rows = get_u32(bytes.data() + 8);
    const std::size_t cols = get_u32(bytes.data() + 12);
    const std::size_t count = rows * cols;
    const std::size_t payload = bytes.size() - kHeaderSize;
    if (payload < 4 * count)
        throw DataError("truncated ADFV payload: header declares " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " values, file holds " + std::to_string(payload / 4));
    if (payload > 4 * count) throw DataError("ADFV payload longer than declared shape");

    std::vector<float> floats(count);
    const std::uint8_t* p = bytes.data() + kHeaderSize;
    for (std::size_t i = 0; i < count; ++i) floats[i] = std::bit_cast<float>(get_u32(p + 4 * i));
    Matrix m(rows, cols);
    kernels::active().widen(floats.data(), m.data(), count);
    return m;
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> contents) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write '" + tmp.string() + "'");
        out.write(reinterpret_cast<const char*>(contents.data()),
                  static_cast<std::streamsize>(contents.size()));
        if (!out) throw DataError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw DataError("cannot rename onto '" + path.string() + "': " + ec.message());
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void write_matrix_file(const Matrix& m, const fs::path& path) {
    for (double v : m.values())
        if (!std::isfinite(v)) throw DataError("non-finite value cannot be stored");
    write_file_atomic(path, encode_adfv(m));
}

Matrix read_matrix_file(const fs::path& path) {
    const auto bytes = read_bytes(path);
    try {
        return decode_adfv(bytes);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_feature_file(const FeatureSet& set, const fs::path& path) {
    validate(set);
    write_matrix_file(set.data, path);
}

FeatureSet read_feature_file(const fs::path& path, std::string level_name,
                             std::vector<std::string> sample_ids) {
    FeatureSet set{std::move(level_name), read_matrix_file(path), std::move(sample_ids)};
    if (set.sample_ids.empty()) {
        set.sample_ids.reserve(set.data.rows());
        for (std::size_t i = 0; i < set.data.rows(); ++i) set.sample_ids.push_back("#" + std::to_string(i));
    }
    validate(set);
    return set;
}

LabelTable read_labels_csv(const fs::path& path) {
    const auto lines = lines_of(read_text(path));
    if (lines.empty() || lines.front() != "sample_id,label,category")
        throw DataError(path.string() + ": expected header 'sample_id,label,category'");
    LabelTable table;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split(lines[i], ',');
        if (fields.size() != 3)
            throw DataError(path.string() + ":" + std::to_string(i + 1) + ": expected 3 fields");
        Label label;
        if (fields[1] == "0") label = Label::normal;
        else if (fields[1] == "1") label = Label::anomalous;
        else throw DataError(path.string() + ":" + std::to_string(i + 1) + ": label must be 0 or 1");
        table.add(std::move(fields[0]), {label, std::move(fields[2])});
    }
    return table;
}

void write_labels_csv(const LabelTable& labels, const fs::path& path) {
    std::string text = "sample_id,label,category\n";
    for (const auto& id : labels.ids()) {
        if (id.find_first_of(",\n\r") != std::string::npos)
            throw DataError("sample id '" + id + "' cannot be stored in CSV");
        const auto& e = labels.at(id);
        text += id + "," + std::to_string(static_cast<int>(e.label)) + "," + e.category + "\n";
    }
    write_text_atomic(path, text);
}

DatasetManifest read_manifest(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    DatasetManifest m;
    try {
        m.format_version = doc.at("format_version").get<std::uint32_t>();
        m.model_id = doc.at("model_id").get<std::string>();
        const auto pooling = doc.at("pooling").get<std::string>();
        if (pooling != "average") throw DataError("unsupported pooling '" + pooling + "'");
        m.labels_path = doc.at("labels_path").get<std::string>();
        m.sample_count = doc.at("sample_count").get<std::size_t>();
        for (const auto& lv : doc.at("levels"))
            m.levels.push_back({lv.at("level_name").get<std::string>(), lv.at("D").get<std::size_t>(),
                                lv.at("file_path").get<std::string>()});
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": malformed manifest: " + e.what());
    }
    if (m.format_version != 1)
        throw DataError("unsupported manifest format_version " + std::to_string(m.format_version));
    return m;
}

void write_manifest(const DatasetManifest& m, const fs::path& path) {
    json levels = json::array();
    for (const auto& lv : m.levels)
        levels.push_back({{"level_name", lv.level_name}, {"D", lv.dim}, {"file_path", lv.file_path}});
    const json doc{{"format_version", m.format_version},
                   {"model_id", m.model_id},
                   {"pooling", "average"},
                   {"levels", levels},
                   {"labels_path", m.labels_path},
                   {"sample_count", m.sample_count}};
    write_text_atomic(path, doc.dump(2) + "\n");
}

fs::path ids_sidecar(const fs::path& feature_file) {
    fs::path p = feature_file;
    p += ".ids";
    return p;
}

std::vector<std::string> read_ids_file(const fs::path& path) {
    auto lines = lines_of(read_text(path));
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

void write_ids_file(std::span<const std::string> ids, const fs::path& path) {
    std::string text;
    for (const auto& id : ids) {
        if (id.find_first_of("\n\r") != std::string::npos)
            throw DataError("sample id contains a line break");
        text += id;
        text += '\n';
    }
    write_text_atomic(path, text);
}

Dataset load_dataset(const fs::path& manifest_path) {
    Dataset ds;
    ds.manifest = read_manifest(manifest_path);
    const auto& m = ds.manifest;
    if (m.levels.empty()) throw DataError("manifest declares no levels");
    std::set<std::string> names;
    for (const auto& lv : m.levels)
        if (!names.insert(lv.level_name).second)
            throw DataError("duplicate level name '" + lv.level_name + "'");

    const fs::path base = manifest_path.parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    ds.labels = read_labels_csv(resolve(m.labels_path));

    ds.levels.resize(m.levels.size());
    parallel_for(m.levels.size(), [&](std::size_t i) {
        const auto& lv = m.levels[i];
        const fs::path file = resolve(lv.file_path);
        Matrix data = read_matrix_file(file);
        if (data.rows() != m.sample_count || data.cols() != lv.dim)
            throw DataError("level '" + lv.level_name + "': file shape " + std::to_string(data.rows()) +
                            "x" + std::to_string(data.cols()) + " does not match manifest " +
                            std::to_string(m.sample_count) + "x" + std::to_string(lv.dim));
        std::vector<std::string> ids;
        if (const auto sidecar = ids_sidecar(file); fs::exists(sidecar)) {
            ids = read_ids_file(sidecar);
        } else {
            ids = ds.labels.ids();
        }
        if (ids.size() != m.sample_count)
            throw DataError("level '" + lv.level_name + "': " + std::to_string(ids.size()) +
                            " sample ids for " + std::to_string(m.sample_count) + " samples");
        ds.levels[i] = FeatureSet{lv.level_name, std::move(data), std::move(ids)};
        validate(ds.levels[i]);
    });

    for (std::size_t i = 1; i < ds.levels.size(); ++i)
        if (ds.levels[i].sample_ids != ds.levels[0].sample_ids)
            throw DataError("level '" + ds.levels[i].level_name +
                            "' orders its samples differently from level '" +
                            ds.levels[0].level_name + "'");
    for (const auto& id : ds.levels[0].sample_ids)
        if (!ds.labels.contains(id)) throw DataError("missing label for sample '" + id + "'");
    return ds;
}

fs::path write_dataset(const fs::path& dir, const std::vector<FeatureSet>& levels,
                       const LabelTable& labels, const std::string& model_id) {
    if (levels.empty()) throw DataError("no levels to write");
    fs::create_directories(dir);
    DatasetManifest m;
    m.model_id = model_id;
    m.labels_path = "labels.csv";
    m.sample_count = levels.front().size();
    for (const auto& set : levels) {
        if (set.sample_ids != levels.front().sample_ids)
            throw DataError("level '" + set.level_name + "' sample ids disagree");
        const std::string file = set.level_name + ".adfv";
        write_feature_file(set, dir / file);
        write_ids_file(set.sample_ids, ids_sidecar(dir / file));
        m.levels.push_back({set.level_name, set.dim(), file});
    }
    write_labels_csv(labels, dir / m.labels_path);
    const fs::path manifest_path = dir / "manifest.json";
    write_manifest(m, manifest_path);
    return manifest_path;
}

Pool pool_of(const std::string& sample_id) {
    for (const auto& segment : split(sample_id, '/')) {
        if (segment == "train") return Pool::train;
        if (segment == "test") return Pool::test;
    }
    return Pool::unknown;
}

}  // namespace gauss_ad
