#include "doctest.h"

#include <cmath>
#include <fstream>
#include <limits>

#include "gauss_ad/error.hpp"
#include "gauss_ad/feature_store.hpp"
#include "gauss_ad/rng.hpp"
#include "test_util.hpp"

using namespace gauss_ad;
using test_util::TempDir;

namespace {

std::vector<std::uint8_t> file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

FeatureSet make_set(std::string name, std::size_t n, std::size_t d, Rng& rng,
                    const std::vector<std::string>& ids) {
    FeatureSet set{std::move(name), Matrix(n, d), ids};
    for (std::size_t i = 0; i < n * d; ++i) set.data.data()[i] = static_cast<float>(rng.normal());
    return set;
}

std::vector<std::string> ids_for(std::size_t n_train, std::size_t n_test) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n_train; ++i) ids.push_back("train/good/" + std::to_string(i));
    for (std::size_t i = 0; i < n_test; ++i) ids.push_back("test/crack/" + std::to_string(i));
    return ids;
}

LabelTable labels_for(const std::vector<std::string>& ids) {
    LabelTable t;
    for (const auto& id : ids)
        t.add(id, {pool_of(id) == Pool::train ? Label::normal : Label::anomalous, "bottle"});
    return t;
}

}  // namespace

TEST_CASE("1x1 zero matrix encodes to header plus four zero bytes") {
    TempDir dir("fs");
    const FeatureSet set{"l", Matrix(1, 1, 0.0), {"a"}};
    write_feature_file(set, dir / "z.adfv");
    const auto bytes = file_bytes(dir / "z.adfv");
    const std::vector<std::uint8_t> expected = {0x41, 0x44, 0x46, 0x56, 1, 0, 0, 0, 1, 0, 0, 0,
                                                1,    0,    0,    0,    0, 0, 0, 0};
    CHECK(bytes == expected);
}

TEST_CASE("values are little-endian binary32, row-major") {
    const Matrix m(2, 1, std::vector<double>{1.0, -2.0});
    const auto bytes = encode_adfv(m);
    REQUIRE(bytes.size() == 24);
    // 1.0f = 0x3F800000, -2.0f = 0xC0000000
    CHECK(bytes[16] == 0x00);
    CHECK(bytes[19] == 0x3F);
    CHECK(bytes[18] == 0x80);
    CHECK(bytes[23] == 0xC0);
    CHECK(bytes[8] == 2);   // rows
    CHECK(bytes[12] == 1);  // cols
}

TEST_CASE("2x3 matrix round-trips bit-exactly") {
    TempDir dir("fs");
    const FeatureSet set{"l", Matrix(2, 3, std::vector<double>{0.1f, -2.5f, 3e-30f, 1e30f, -0.0f, 7.0f}),
                         {"a", "b"}};
    write_feature_file(set, dir / "m.adfv");
    const auto back = read_feature_file(dir / "m.adfv", "l", {"a", "b"});
    CHECK(back.data == set.data);
    CHECK(std::signbit(back.data(1, 1)));
    // read then write reproduces the file bytes
    write_feature_file(back, dir / "m2.adfv");
    CHECK(file_bytes(dir / "m.adfv") == file_bytes(dir / "m2.adfv"));
}

TEST_CASE("property: random float32 matrices survive write/read") {
    TempDir dir("fs");
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.below(9), d = 1 + rng.below(17);
        Matrix m(n, d);
        for (std::size_t i = 0; i < n * d; ++i)
            m.data()[i] = static_cast<float>(std::ldexp(rng.normal(), static_cast<int>(rng.below(60)) - 30));
        const auto bytes = encode_adfv(m);
        CHECK(decode_adfv(bytes) == m);
        CHECK(encode_adfv(decode_adfv(bytes)) == bytes);
    }
}

TEST_CASE("non-finite values are rejected") {
    TempDir dir("fs");
    FeatureSet set{"l", Matrix(1, 2, std::vector<double>{1.0, std::nan("")}), {"a"}};
    CHECK_THROWS_WITH_AS(write_feature_file(set, dir / "x.adfv"), doctest::Contains("non-finite"),
                         DataError);
    set.data(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(write_feature_file(set, dir / "x.adfv"), DataError);
    // finite in binary64 but overflows binary32
    set.data(0, 1) = 1e300;
    CHECK_THROWS_WITH(write_matrix_file(set.data, dir / "x.adfv"), doctest::Contains("non-finite"));
    CHECK_FALSE(fs::exists(dir / "x.adfv"));
}

TEST_CASE("decode errors") {
    auto bytes = encode_adfv(Matrix(4, 2, 1.0));
    SUBCASE("bad magic") {
        bytes[0] = 'X', bytes[1] = 'X', bytes[2] = 'X', bytes[3] = 'X';
        CHECK_THROWS_WITH(decode_adfv(bytes), doctest::Contains("bad magic"));
    }
    SUBCASE("truncated payload: 4 rows declared, 3 present") {
        bytes.resize(bytes.size() - 2 * 4);
        CHECK_THROWS_WITH(decode_adfv(bytes), doctest::Contains("truncated"));
    }
    SUBCASE("truncated header") {
        bytes.resize(10);
        CHECK_THROWS_WITH(decode_adfv(bytes), doctest::Contains("truncated"));
    }
    SUBCASE("unsupported version") {
        bytes[4] = 2;
        CHECK_THROWS_WITH(decode_adfv(bytes), doctest::Contains("version"));
    }
    SUBCASE("trailing bytes") {
        bytes.push_back(0);
        CHECK_THROWS_AS(decode_adfv(bytes), DataError);
    }
}

TEST_CASE("feature set invariants") {
    CHECK_THROWS_WITH(validate({"l", Matrix(2, 1, 0.0), {"a", "a"}}), doctest::Contains("duplicate"));
    CHECK_THROWS_AS(validate({"l", Matrix(2, 1, 0.0), {"a"}}), DataError);
    CHECK_THROWS_AS(validate({"l", Matrix(0, 3), {}}), DataError);
    CHECK_NOTHROW(validate({"l", Matrix(2, 1, 0.0), {"a", "b"}}));
}

TEST_CASE("labels CSV round trip and errors") {
    TempDir dir("fs");
    const auto ids = ids_for(2, 1);
    write_labels_csv(labels_for(ids), dir / "labels.csv");
    const auto back = read_labels_csv(dir / "labels.csv");
    CHECK(back.ids() == ids);
    CHECK(back.at("test/crack/0").label == Label::anomalous);
    CHECK(back.at("train/good/1").category == "bottle");

    std::ofstream(dir / "bad.csv") << "id,label\nx,0\n";
    CHECK_THROWS_WITH(read_labels_csv(dir / "bad.csv"), doctest::Contains("header"));
    std::ofstream(dir / "bad2.csv") << "sample_id,label,category\nx,2,c\n";
    CHECK_THROWS_AS(read_labels_csv(dir / "bad2.csv"), DataError);
    std::ofstream(dir / "dup.csv") << "sample_id,label,category\nx,0,c\nx,1,c\n";
    CHECK_THROWS_WITH(read_labels_csv(dir / "dup.csv"), doctest::Contains("duplicate"));
}

TEST_CASE("load_dataset with nine levels of the EfficientNet-B0 layout") {
    TempDir dir("fs");
    Rng rng(3);
    const std::vector<std::size_t> dims = {32, 16, 24, 40, 80, 112, 192, 320, 1280};
    const auto ids = ids_for(4, 2);
    std::vector<FeatureSet> levels;
    for (std::size_t l = 0; l < dims.size(); ++l)
        levels.push_back(make_set("level_" + std::to_string(l + 1), ids.size(), dims[l], rng, ids));
    const auto manifest = write_dataset(dir.path(), levels, labels_for(ids), "efficientnet-b0");

    const Dataset ds = load_dataset(manifest);
    REQUIRE(ds.levels.size() == 9);
    for (std::size_t l = 0; l < dims.size(); ++l) {
        CHECK(ds.levels[l].dim() == dims[l]);
        CHECK(ds.levels[l].data == levels[l].data);
        CHECK(ds.levels[l].sample_ids == ids);
    }
    CHECK(ds.manifest.model_id == "efficientnet-b0");

    // deterministic reload
    const Dataset again = load_dataset(manifest);
    for (std::size_t l = 0; l < dims.size(); ++l) CHECK(again.levels[l].data == ds.levels[l].data);
}

TEST_CASE("load_dataset errors") {
    TempDir dir("fs");
    Rng rng(5);
    const auto ids = ids_for(3, 1);
    const std::vector<FeatureSet> levels = {make_set("a", ids.size(), 4, rng, ids)};

    SUBCASE("no levels") {
        DatasetManifest m;
        m.model_id = "x";
        m.labels_path = "labels.csv";
        m.sample_count = 4;
        write_labels_csv(labels_for(ids), dir / "labels.csv");
        write_manifest(m, dir / "manifest.json");
        CHECK_THROWS_WITH(load_dataset(dir / "manifest.json"), doctest::Contains("no levels"));
    }
    SUBCASE("label missing for one sample") {
        LabelTable partial;
        for (std::size_t i = 0; i + 1 < ids.size(); ++i) partial.add(ids[i], {Label::normal, "c"});
        const auto manifest = write_dataset(dir.path(), levels, partial, "x");
        CHECK_THROWS_WITH(load_dataset(manifest), doctest::Contains(ids.back().c_str()));
    }
    SUBCASE("shape mismatch with manifest") {
        auto manifest_path = write_dataset(dir.path(), levels, labels_for(ids), "x");
        auto m = read_manifest(manifest_path);
        m.levels[0].dim = 5;
        write_manifest(m, manifest_path);
        CHECK_THROWS_WITH(load_dataset(manifest_path), doctest::Contains("does not match"));
    }
    SUBCASE("levels disagree on sample order") {
        auto other = make_set("b", ids.size(), 2, rng, ids);
        auto manifest_path = write_dataset(dir.path(), {levels[0], other}, labels_for(ids), "x");
        auto reordered = ids;
        std::swap(reordered[0], reordered[1]);
        write_ids_file(reordered, ids_sidecar(dir / "b.adfv"));
        CHECK_THROWS_WITH(load_dataset(manifest_path), doctest::Contains("differently"));
    }
    SUBCASE("without sidecars the labels order supplies ids") {
        auto manifest_path = write_dataset(dir.path(), levels, labels_for(ids), "x");
        fs::remove(ids_sidecar(dir / "a.adfv"));
        const Dataset ds = load_dataset(manifest_path);
        CHECK(ds.sample_ids() == ids);
    }
}

TEST_CASE("pool_of reads the train/test path segment") {
    CHECK(pool_of("train/good/001.png") == Pool::train);
    CHECK(pool_of("bottle/test/broken_large/000.png#3") == Pool::test);
    CHECK(pool_of("bottle/good/1") == Pool::unknown);
    CHECK(pool_of("trainer/x") == Pool::unknown);
}
