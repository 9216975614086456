#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <string>

#include "amto/data.hpp"
#include "amto/errors.hpp"
#include "amto/rng.hpp"

using namespace amto;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = (fs::temp_directory_path() / name).string();
    std::ofstream os(path, std::ios::trunc);
    os << content;
    return path;
}

}  // namespace

TEST_CASE("load_csv reads a small file back verbatim") {
    const auto path = write_temp("amto_data_small.csv",
                                 "1.5,2.5,0\n"
                                 "-1,0.25,1\n"
                                 "3,4,0\n"
                                 "0,0,1\n");
    const Dataset ds = load_csv(path, 2, 2);
    CHECK(ds.size() == 4);
    CHECK(ds.dim() == 2);
    CHECK(ds.class_count == 2);
    CHECK(ds.features(0, 0) == 1.5);
    CHECK(ds.features(1, 1) == 0.25);
    CHECK(ds.labels == std::vector<int>{0, 1, 0, 1});
    fs::remove(path);
}

TEST_CASE("load_csv honors the header flag and label column position") {
    const auto path = write_temp("amto_data_header.csv",
                                 "label,f0,f1\n"
                                 "1,10,20\n"
                                 "0,30,40\n");
    const Dataset ds = load_csv(path, 0, 2, true);
    CHECK(ds.size() == 2);
    CHECK(ds.features(0, 0) == 10);
    CHECK(ds.features(1, 1) == 40);
    CHECK(ds.labels == std::vector<int>{1, 0});
    fs::remove(path);
}

TEST_CASE("load_csv errors name the offending row") {
    const auto bad_label = write_temp("amto_data_badlabel.csv", "1,2,0\n3,4,5\n");
    CHECK_THROWS_WITH_AS(load_csv(bad_label, 2, 3),
                         doctest::Contains("row 2"), data_error);
    fs::remove(bad_label);

    const auto bad_cell = write_temp("amto_data_badcell.csv", "1,2,0\nx,4,1\n");
    CHECK_THROWS_WITH_AS(load_csv(bad_cell, 2, 2), doctest::Contains("row 2"), data_error);
    fs::remove(bad_cell);
}

TEST_CASE("write-then-load round-trips a generated dataset") {
    const Dataset ds = make_synthetic(SyntheticKind::ring, 60, 3, 0.2, 11);
    const auto path = (fs::temp_directory_path() / "amto_data_roundtrip.csv").string();
    write_csv(path, ds, 0);
    const Dataset back = load_csv(path, 0, 3);
    CHECK(back.labels == ds.labels);
    REQUIRE(back.features.data.size() == ds.features.data.size());
    for (std::size_t i = 0; i < ds.features.data.size(); ++i)
        CHECK(back.features.data[i] == ds.features.data[i]);  // shortest-form exact
    fs::remove(path);
}

TEST_CASE("synthetic classes are balanced") {
    const Dataset ds = make_synthetic(SyntheticKind::blobs, 100, 4, 1.0, 3);
    std::vector<int> counts(4, 0);
    for (int y : ds.labels) ++counts[static_cast<std::size_t>(y)];
    CHECK(counts == std::vector<int>{25, 25, 25, 25});

    const Dataset odd = make_synthetic(SyntheticKind::ring, 101, 4, 0.1, 3);
    std::vector<int> c2(4, 0);
    for (int y : odd.labels) ++c2[static_cast<std::size_t>(y)];
    const auto [lo, hi] = std::minmax_element(c2.begin(), c2.end());
    CHECK(*hi - *lo <= 1);
}

TEST_CASE("zero-noise blobs sit exactly on their centroids") {
    const Dataset ds = make_synthetic(SyntheticKind::blobs, 40, 4, 0.0, 8);
    std::set<std::pair<double, double>> per_class[4];
    for (std::size_t i = 0; i < ds.size(); ++i)
        per_class[ds.labels[i]].insert({ds.features(i, 0), ds.features(i, 1)});
    for (const auto& pts : per_class) CHECK(pts.size() == 1);
}

TEST_CASE("synthetic generation is deterministic in the seed") {
    const Dataset a = make_synthetic(SyntheticKind::two_moons, 80, 2, 0.3, 14);
    const Dataset b = make_synthetic(SyntheticKind::two_moons, 80, 2, 0.3, 14);
    CHECK(a.features.data == b.features.data);
    CHECK(a.labels == b.labels);
    const Dataset c = make_synthetic(SyntheticKind::two_moons, 80, 2, 0.3, 15);
    CHECK(a.features.data != c.features.data);
}

TEST_CASE("two_moons requires two classes") {
    CHECK_THROWS_AS(make_synthetic(SyntheticKind::two_moons, 30, 3, 0.1, 1), config_error);
}

TEST_CASE("label noise reassigns the requested fraction to other classes") {
    Dataset ds = make_synthetic(SyntheticKind::blobs, 200, 4, 0.5, 2);
    const std::vector<int> before = ds.labels;
    apply_label_noise(ds, 0.15, 99);
    int changed = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.labels[i] != before[i]) ++changed;
    CHECK(changed == 30);  // flips always land on a different class
    for (int y : ds.labels) {
        CHECK(y >= 0);
        CHECK(y < 4);
    }
}

TEST_CASE("sample_split partitions with the exact validation size") {
    const Dataset ds = make_synthetic(SyntheticKind::blobs, 100, 4, 1.0, 6);
    const SplitPair sp = sample_split(ds, 0.1, 42);
    CHECK(sp.val_indices.size() == 10);
    CHECK(sp.train_indices.size() == 90);

    std::set<std::uint32_t> all(sp.train_indices.begin(), sp.train_indices.end());
    for (auto v : sp.val_indices) {
        CHECK(all.count(v) == 0);
        all.insert(v);
    }
    CHECK(all.size() == 100);
    CHECK(*all.rbegin() == 99);
}

TEST_CASE("sample_split stratifies per class") {
    const Dataset ds = make_synthetic(SyntheticKind::blobs, 400, 4, 1.0, 6);
    const SplitPair sp = sample_split(ds, 0.25, 13);
    std::vector<int> val_counts(4, 0);
    for (auto v : sp.val_indices) ++val_counts[static_cast<std::size_t>(ds.labels[v])];
    for (int c : val_counts) CHECK(std::abs(c - 25) <= 1);
}

TEST_CASE("sample_split handles quotas that do not round per class") {
    // 3 classes x 10 samples, ratio 0.1: exact per-class quota is 1 each,
    // total 3 == round(0.1*30).
    const Dataset ds = make_synthetic(SyntheticKind::blobs, 30, 3, 1.0, 1);
    const SplitPair sp = sample_split(ds, 0.1, 9);
    CHECK(sp.val_indices.size() == 3);
}

TEST_CASE("splits are deterministic per seed and distinct across seeds") {
    const Dataset ds = make_synthetic(SyntheticKind::blobs, 1000, 4, 1.0, 7);
    const SplitPair a = sample_split(ds, 0.1, 1234);
    const SplitPair b = sample_split(ds, 0.1, 1234);
    CHECK(a.val_indices == b.val_indices);
    CHECK(a.train_indices == b.train_indices);

    int distinct = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const SplitPair x = sample_split(ds, 0.1, seed_combine(500, s));
        const SplitPair y = sample_split(ds, 0.1, seed_combine(500, s + 1));
        if (x.val_indices != y.val_indices) ++distinct;
    }
    CHECK(distinct == 100);
}

TEST_CASE("degenerate split ratios are rejected") {
    const Dataset ds = make_synthetic(SyntheticKind::blobs, 20, 2, 1.0, 2);
    CHECK_THROWS_AS(sample_split(ds, 0.001, 1), data_error);  // empty val
    CHECK_THROWS_AS(sample_split(ds, 0.9999, 1), data_error); // empty train
    CHECK_THROWS_AS(sample_split(ds, 0.0, 1), data_error);
    CHECK_THROWS_AS(sample_split(ds, 1.0, 1), data_error);
}

TEST_CASE("batch iterator tiles each epoch, short final batch included") {
    std::vector<std::uint32_t> idx(10);
    std::iota(idx.begin(), idx.end(), 100u);
    BatchIterator it(idx, 4, 5);
    const auto b1 = it.next_indices();
    const auto b2 = it.next_indices();
    const auto b3 = it.next_indices();
    CHECK(b1.size() == 4);
    CHECK(b2.size() == 4);
    CHECK(b3.size() == 2);

    std::vector<std::uint32_t> epoch;
    for (const auto& b : {b1, b2, b3}) epoch.insert(epoch.end(), b.begin(), b.end());
    std::sort(epoch.begin(), epoch.end());
    CHECK(epoch == idx);
    CHECK(it.epoch() == 1);
}

TEST_CASE("batch sequence is deterministic and epochs reshuffle") {
    std::vector<std::uint32_t> idx(12);
    std::iota(idx.begin(), idx.end(), 0u);
    BatchIterator a(idx, 5, 88), b(idx, 5, 88);
    std::vector<std::uint32_t> first_epoch, second_epoch;
    for (int i = 0; i < 3; ++i) {
        const auto ba = a.next_indices();
        CHECK(ba == b.next_indices());
        first_epoch.insert(first_epoch.end(), ba.begin(), ba.end());
    }
    for (int i = 0; i < 3; ++i) {
        const auto ba = a.next_indices();
        b.next_indices();
        second_epoch.insert(second_epoch.end(), ba.begin(), ba.end());
    }
    CHECK(first_epoch != second_epoch);  // different permutation per epoch
    std::sort(first_epoch.begin(), first_epoch.end());
    std::sort(second_epoch.begin(), second_epoch.end());
    CHECK(first_epoch == second_epoch);
}

TEST_CASE("gather_batch copies the named rows") {
    const Dataset ds = make_synthetic(SyntheticKind::blobs, 20, 2, 0.1, 4);
    const Batch b = gather_batch(ds, {3, 7, 19});
    CHECK(b.inputs.rows == 3);
    CHECK(b.labels.size() == 3);
    CHECK(b.inputs(1, 0) == ds.features(7, 0));
    CHECK(b.labels[2] == ds.labels[19]);
}

TEST_CASE("horizontal flip twice is the identity") {
    Rng rng(9);
    Matrix X(6, 12);  // rows of width 4, three segments each
    for (auto& v : X.data) v = rng.uniform(-1, 1);
    const Matrix once = flip_horizontal(X, 4);
    CHECK(once.data != X.data);
    const Matrix twice = flip_horizontal(once, 4);
    CHECK(twice.data == X.data);
    CHECK_THROWS_AS(flip_horizontal(X, 5), data_error);
}

TEST_CASE("dataset validation catches NaNs and bad labels") {
    Dataset ds = make_synthetic(SyntheticKind::blobs, 10, 2, 0.1, 1);
    validate_dataset(ds);
    Dataset bad = ds;
    bad.features(0, 0) = std::nan("");
    CHECK_THROWS_AS(validate_dataset(bad), data_error);
    Dataset bad2 = ds;
    bad2.labels[3] = 2;
    CHECK_THROWS_AS(validate_dataset(bad2), data_error);
}
