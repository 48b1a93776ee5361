#include "wiom/dataset.hpp"

#include "wiom/container.hpp"
#include "wiom/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace wiom;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

// Tiny handmade wiometric dataset: n records of shape 2x2, one or two BS.
Dataset tiny_features(std::size_t n, std::size_t bs_count = 1) {
    Dataset ds;
    ds.storage = DatasetStorage::Wiometric;
    ds.kind = WiometricKind::ACSI;
    ds.record_dims = {2, 2};
    for (std::size_t b = 0; b < bs_count; ++b) {
        ds.bs_ids.push_back(std::string(1, static_cast<char>('a' + b)));
        std::vector<float> v(n * 4);
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = static_cast<float>(i + 100 * b);
        ds.features.push_back(std::move(v));
    }
    for (std::size_t i = 0; i < n; ++i) {
        ds.poses.emplace_back(static_cast<double>(i), 2.0 * static_cast<double>(i),
                              static_cast<double>(10 * i));
        ds.lap_index.push_back(static_cast<std::uint32_t>(i * 2 / n)); // two laps
        ds.snapshot_index.push_back(static_cast<std::uint32_t>(i));
    }
    ds.provenance = {{"origin", "unit-test"}};
    return ds;
}

fs::path temp_dir(const std::string& leaf) {
    auto d = fs::temp_directory_path() / "wiom_dataset_test" / leaf;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("record accessors reshape and upcast") {
    auto ds = tiny_features(3);
    auto m = ds.feature_record(0, 1);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 2);
    // Record 1 holds values 4..7 row-major.
    CHECK(m(0, 0) == Approx(4.0));
    CHECK(m(0, 1) == Approx(5.0));
    CHECK(m(1, 0) == Approx(6.0));
    CHECK(m(1, 1) == Approx(7.0));
    CHECK_THROWS_AS(ds.csi_record(0, 1), ConfigError); // wrong storage
    CHECK(ds.bs_slot("a") == 0);
    CHECK_THROWS_AS(ds.bs_slot("zz"), ConfigError);
}

TEST_CASE("validate catches inconsistent shapes") {
    auto ds = tiny_features(4);
    CHECK_NOTHROW(ds.validate());
    auto broken = ds;
    broken.features[0].pop_back();
    CHECK_THROWS_AS(broken.validate(), ShapeError);
    broken = ds;
    broken.lap_index.pop_back();
    CHECK_THROWS_AS(broken.validate(), ShapeError);
    broken = ds;
    broken.snapshot_index[2] = 1; // not strictly increasing
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = ds;
    broken.lap_index[0] = 1; // laps must be non-decreasing
    CHECK_THROWS_AS(broken.validate(), ConfigError);
}

TEST_CASE("leu split rounds the test count half-up") {
    auto ds = tiny_features(7);
    auto split = split_leu(ds, 0.25, 5);
    CHECK(split.test_indices.size() == 2); // round(1.75) = 2
    CHECK(split.train_indices.size() == 5);
    auto even = split_leu(ds, 0.5, 5);
    CHECK(even.test_indices.size() == 4); // round(3.5) ties up
}

TEST_CASE("leu split partitions and is seed-deterministic") {
    auto ds = tiny_features(40);
    auto s1 = split_leu(ds, 0.25, 9);
    auto s2 = split_leu(ds, 0.25, 9);
    CHECK(s1.train_indices == s2.train_indices);
    CHECK(s1.test_indices == s2.test_indices);
    auto s3 = split_leu(ds, 0.25, 10);
    CHECK(s3.test_indices != s1.test_indices);

    CHECK(std::is_sorted(s1.train_indices.begin(), s1.train_indices.end()));
    CHECK(std::is_sorted(s1.test_indices.begin(), s1.test_indices.end()));
    std::set<std::size_t> all(s1.train_indices.begin(), s1.train_indices.end());
    all.insert(s1.test_indices.begin(), s1.test_indices.end());
    CHECK(all.size() == 40);
    CHECK(*all.rbegin() == 39);
    CHECK(s1.kind == SplitAssignment::Kind::LEU);
    CHECK(s1.test_fraction == Approx(0.25));
    CHECK(s1.seed == 9);

    CHECK_THROWS_AS(split_leu(ds, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(split_leu(ds, 1.0, 1), ConfigError);
}

TEST_CASE("stratified leu draws the fraction from each lap") {
    auto ds = tiny_features(40); // laps 0 and 1, 20 records each
    auto split = split_leu(ds, 0.25, 3, true);
    std::size_t lap0 = 0, lap1 = 0;
    for (auto i : split.test_indices) (ds.lap_index[i] == 0 ? lap0 : lap1)++;
    CHECK(lap0 == 5);
    CHECK(lap1 == 5);
}

TEST_CASE("heu split holds out exactly one lap") {
    auto ds = tiny_features(10); // records 0-4 lap 0, 5-9 lap 1
    auto split = split_heu(ds, 1);
    CHECK(split.kind == SplitAssignment::Kind::HEU);
    CHECK(split.held_out_lap == 1);
    CHECK(split.test_indices == std::vector<std::size_t>{5, 6, 7, 8, 9});
    CHECK(split.train_indices == std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK_THROWS_AS(split_heu(ds, 7), ConfigError);
}

TEST_CASE("normalizer matches hand-computed stats and floors zero spread") {
    Dataset ds = tiny_features(3);
    // Overwrite features: element 0 takes values {1, 3, 5}; element 1 constant.
    // Elements 2, 3 left as-is.
    ds.features[0] = {1.0f, 7.0f, 0.0f, 1.0f, 3.0f, 7.0f, 2.0f, 4.0f, 5.0f, 7.0f, 4.0f, 7.0f};
    auto stats = fit_normalizer(ds, std::vector<std::size_t>{0, 1, 2}, 0);
    REQUIRE(stats.mean.size() == 4);
    CHECK(stats.mean[0] == Approx(3.0));
    CHECK(stats.stdev[0] == Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-6)); // population std
    CHECK(stats.mean[1] == Approx(7.0));
    CHECK(stats.stdev[1] == Approx(1e-8)); // constant element floored
    CHECK(stats.mean[2] == Approx(2.0));

    // Record 2 is {5, 7, 4, 7}: elements 0, 2, 3 all sit 1.2247 sigma high,
    // the constant element normalizes to zero.
    auto z = normalized_record(ds, stats, 0, 2);
    REQUIRE(z.size() == 4);
    CHECK(z[0] == Approx(2.0 / std::sqrt(8.0 / 3.0)).epsilon(1e-5));
    CHECK(z[1] == Approx(0.0));
    CHECK(z[2] == Approx(2.0 / std::sqrt(8.0 / 3.0)).epsilon(1e-5));
    CHECK(z[3] == Approx(3.0 / std::sqrt(6.0)).epsilon(1e-5));
}

TEST_CASE("normalizer uses only the training rows") {
    auto ds = tiny_features(4);
    ds.features[0] = {0.0f, 0.0f, 0.0f, 0.0f, 2.0f, 2.0f, 2.0f, 2.0f,
                      4.0f, 4.0f, 4.0f, 4.0f, 100.0f, 100.0f, 100.0f, 100.0f};
    auto stats = fit_normalizer(ds, std::vector<std::size_t>{0, 1, 2}, 0);
    // Row 3 (the held-out outlier) must not leak into the stats.
    CHECK(stats.mean[0] == Approx(2.0));
    CHECK(stats.stdev[0] == Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-6));
    CHECK_THROWS_AS(fit_normalizer(ds, std::vector<std::size_t>{}, 0), ConfigError);
}

TEST_CASE("save and load round-trip bitwise") {
    auto dir = temp_dir("roundtrip");
    auto ds = tiny_features(6, 2);
    auto split = split_leu(ds, 0.5, 1);
    ds.normalizer = std::vector<NormStats>{fit_normalizer(ds, split, 0),
                                           fit_normalizer(ds, split, 1)};
    save_dataset(ds, dir);
    auto back = load_dataset(dir);
    CHECK(back.storage == ds.storage);
    CHECK(back.kind == ds.kind);
    CHECK(back.record_dims == ds.record_dims);
    CHECK(back.bs_ids == ds.bs_ids);
    CHECK(back.features == ds.features); // bitwise float equality
    CHECK(back.lap_index == ds.lap_index);
    CHECK(back.snapshot_index == ds.snapshot_index);
    REQUIRE(back.poses.size() == ds.poses.size());
    for (std::size_t i = 0; i < ds.poses.size(); ++i) {
        CHECK(back.poses[i].x_e == ds.poses[i].x_e);
        CHECK(back.poses[i].x_n == ds.poses[i].x_n);
        CHECK(back.poses[i].gamma == ds.poses[i].gamma);
    }
    REQUIRE(back.normalizer.has_value());
    CHECK((*back.normalizer)[0].mean == (*ds.normalizer)[0].mean);
    CHECK((*back.normalizer)[1].stdev == (*ds.normalizer)[1].stdev);
    CHECK(back.provenance["origin"] == "unit-test");

    // Saving the loaded copy reproduces identical files.
    auto dir2 = temp_dir("roundtrip2");
    save_dataset(back, dir2);
    for (const auto& entry : fs::directory_iterator(dir)) {
        auto name = entry.path().filename();
        CHECK(file_checksum(entry.path()) == file_checksum(dir2 / name));
    }
}

TEST_CASE("load rejects corrupted blobs and metadata") {
    auto dir = temp_dir("corrupt");
    auto ds = tiny_features(4);
    save_dataset(ds, dir);

    // Flip one payload byte in a record blob: checksum must catch it.
    auto blob = dir / "records_a.wiom";
    REQUIRE(fs::exists(blob));
    {
        std::fstream f(blob, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(-1, std::ios::end);
        f.put('\x7f');
    }
    CHECK_THROWS_AS(load_dataset(dir), IoError);

    // Restore by re-saving, then break the metadata JSON.
    save_dataset(ds, dir);
    CHECK_NOTHROW(load_dataset(dir));
    {
        std::ofstream f(dir / "metadata.json", std::ios::trunc);
        f << "{ not json";
    }
    CHECK_THROWS_AS(load_dataset(dir), IoError);

    CHECK_THROWS_AS(load_dataset(temp_dir("missing") / "nope"), IoError);
}

TEST_CASE("describe_dataset summarizes the directory") {
    auto dir = temp_dir("describe");
    auto ds = tiny_features(5, 2);
    save_dataset(ds, dir);
    auto text = describe_dataset(dir);
    CHECK(text.find("acsi") != std::string::npos);
    CHECK(text.find("[2, 2]") != std::string::npos);
    CHECK(text.find("5") != std::string::npos);
}

} // TEST_SUITE
