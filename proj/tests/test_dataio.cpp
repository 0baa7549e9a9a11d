#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lse/csv.hpp"
#include "lse/embedding.hpp"
#include "lse/error.hpp"
#include "lse/rng.hpp"
#include "lse/scaler.hpp"
#include "lse/split.hpp"
#include "support/oracles.hpp"

using namespace lse;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("lse_dataio_" + name);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

Dataset toy_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.features = Matrix(n, d);
    for (double& v : ds.features.values()) v = 10.0 * rng.normal();
    for (std::size_t i = 0; i < n; ++i) ds.ids.push_back("row" + std::to_string(i));
    for (std::size_t c = 0; c < d; ++c) ds.feature_names.push_back("f" + std::to_string(c));
    return ds;
}

}  // namespace

TEST_CASE("load_csv parses features, ids and target") {
    const fs::path path = temp_file("basic.csv");
    write_file(path, "id,f1,f2,y\n1,0.5,2,10\n2,1.5,3,20\n3,2.5,4,30\n");
    const Dataset ds = load_csv(path, "id", std::string("y"), Task::regression);
    CHECK(ds.num_rows() == 3);
    CHECK(ds.num_features() == 2);
    CHECK(ds.feature_names == std::vector<std::string>{"f1", "f2"});
    CHECK(ds.ids[1] == "2");
    CHECK(ds.features(2, 0) == 2.5);
    CHECK(ds.target == std::vector<double>{10, 20, 30});
}

TEST_CASE("load_csv error paths name the offender") {
    const fs::path path = temp_file("errors.csv");
    write_file(path, "id,f1\n1,1.0\n2,2.0\n");
    CHECK_THROWS_WITH_AS(load_csv(path, "id", std::string("y"), Task::regression),
                         doctest::Contains("target column 'y' not found"), Error);
    CHECK_THROWS_WITH_AS(load_csv(path, "obs", std::nullopt, std::nullopt),
                         doctest::Contains("id column 'obs' not found"), Error);

    const fs::path dup = temp_file("dup.csv");
    write_file(dup, "id,f1\n42,1.0\n42,2.0\n");
    CHECK_THROWS_WITH_AS(load_csv(dup, "id", std::nullopt, std::nullopt),
                         doctest::Contains("duplicate id '42'"), Error);

    const fs::path text = temp_file("text.csv");
    write_file(text, "id,f1\n1,abc\n");
    CHECK_THROWS_WITH_AS(load_csv(text, "id", std::nullopt, std::nullopt),
                         doctest::Contains("'abc'"), Error);
}

TEST_CASE("scaler fits on the training partition only") {
    Matrix features = Matrix::from_rows({{0}, {5}, {10}, {1000}});
    const ScalerParams scaler = fit_scaler(features, {0, 1, 2});
    CHECK(scaler.mins[0] == 0.0);
    CHECK(scaler.maxs[0] == 10.0);

    const Matrix scaled = transform(features, scaler);
    CHECK(scaled(0, 0) == 0.0);
    CHECK(scaled(1, 0) == 0.5);
    CHECK(scaled(2, 0) == 1.0);
    CHECK(scaled(3, 0) == 100.0);  // outside the fit range, not clipped
}

TEST_CASE("constant features scale to zero and invert to their minimum") {
    Matrix features = Matrix::from_rows({{7, 1}, {7, 2}, {7, 3}});
    const ScalerParams scaler = fit_scaler(features, {0, 1, 2});
    const Matrix scaled = transform(features, scaler);
    for (std::size_t i = 0; i < 3; ++i) CHECK(scaled(i, 0) == 0.0);
    const Matrix back = inverse_transform(scaled, scaler);
    for (std::size_t i = 0; i < 3; ++i) CHECK(back(i, 0) == 7.0);
}

TEST_CASE("transform then inverse is the identity on non-constant features") {
    Dataset ds = toy_dataset(50, 4, 31);
    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < 35; ++i) train_idx.push_back(i);
    const ScalerParams scaler = fit_scaler(ds.features, train_idx);
    const Matrix back = inverse_transform(transform(ds.features, scaler), scaler);
    for (std::size_t i = 0; i < ds.features.size(); ++i)
        CHECK(back.values()[i] == doctest::Approx(ds.features.values()[i]).epsilon(1e-12));
}

TEST_CASE("row_split allocates floor sizes with the remainder to train") {
    const RowSplit split = row_split(100, SplitFractions{0.70, 0.15, 0.15}, 1);
    CHECK(split.train_idx.size() == 70);
    CHECK(split.val_idx.size() == 15);
    CHECK(split.test_idx.size() == 15);

    const RowSplit again = row_split(100, SplitFractions{0.70, 0.15, 0.15}, 1);
    CHECK(split.train_idx == again.train_idx);
    CHECK(split.val_idx == again.val_idx);

    CHECK_THROWS_AS(row_split(2, SplitFractions{}, 1), Error);
    CHECK_THROWS_AS(row_split(100, SplitFractions{0.5, 0.2, 0.2}, 1), Error);
}

TEST_CASE("row_split partitions [0, n) exactly for many n") {
    Rng rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 3 + rng.below(400);
        const RowSplit split = row_split(n, SplitFractions{0.6, 0.2, 0.2}, rng.next_u64());
        std::vector<bool> seen(n, false);
        std::size_t count = 0;
        for (const auto* part : {&split.train_idx, &split.val_idx, &split.test_idx}) {
            for (std::size_t idx : *part) {
                REQUIRE(idx < n);
                REQUIRE(!seen[idx]);
                seen[idx] = true;
                ++count;
            }
        }
        CHECK(count == n);
    }
}

TEST_CASE("vertical_split by fraction keeps ids and target on both peers") {
    Dataset ds = toy_dataset(10, 12, 5);
    ds.target.assign(10, 1.0);
    VerticalSpec spec;
    spec.fraction = 0.5;
    const VerticalSplitResult split = vertical_split(ds, spec, 3);
    CHECK(split.peer_a.num_features() == 6);
    CHECK(split.peer_b.num_features() == 6);
    CHECK(split.peer_a.ids == ds.ids);
    CHECK(split.peer_b.ids == ds.ids);
    CHECK(split.peer_a.target == ds.target);

    // Union of feature names equals the original set, intersection empty.
    std::vector<std::string> all = split.peer_a.feature_names;
    all.insert(all.end(), split.peer_b.feature_names.begin(), split.peer_b.feature_names.end());
    std::sort(all.begin(), all.end());
    std::vector<std::string> expected = ds.feature_names;
    std::sort(expected.begin(), expected.end());
    CHECK(all == expected);
}

TEST_CASE("vertical_split explicit lists and error paths") {
    Dataset ds = toy_dataset(5, 3, 8);
    VerticalSpec spec;
    spec.peer_a_columns = {"f1", "f2"};
    spec.peer_b_columns = {"f0"};
    const VerticalSplitResult split = vertical_split(ds, spec, 0);
    CHECK(split.peer_a.feature_names == std::vector<std::string>{"f1", "f2"});
    CHECK(split.peer_b.feature_names == std::vector<std::string>{"f0"});
    CHECK(split.peer_a.features(0, 0) == ds.features(0, 1));

    VerticalSpec overlap;
    overlap.peer_a_columns = {"f1"};
    overlap.peer_b_columns = {"f1", "f2"};
    CHECK_THROWS_WITH_AS(vertical_split(ds, overlap, 0),
                         doctest::Contains("assigned to both peers"), Error);

    VerticalSpec incomplete;
    incomplete.peer_a_columns = {"f1"};
    incomplete.peer_b_columns = {"f2"};
    CHECK_THROWS_WITH_AS(vertical_split(ds, incomplete, 0), doctest::Contains("cover"), Error);
}

TEST_CASE("join_embeddings strict joins by id with peer-a columns first") {
    EmbeddingTable a, b;
    a.ids = {"1", "2", "3"};
    a.vectors = Matrix(3, 4, 1.0);
    a.source_tag = "a";
    b.ids = {"3", "1", "2"};
    b.vectors = Matrix(3, 3, 2.0);
    b.source_tag = "b";
    b.vectors(0, 0) = 9.0;  // belongs to id "3"

    const JoinedEmbeddings joined = join_embeddings(a, b, JoinMode::strict);
    CHECK(joined.features.rows() == 3);
    CHECK(joined.features.cols() == 7);
    CHECK(joined.ids == std::vector<std::string>{"1", "2", "3"});
    CHECK(joined.features(2, 4) == 9.0);  // row for "3" aligned from b
    CHECK(joined.features(0, 0) == 1.0);
}

TEST_CASE("join_embeddings strict reports missing counts, inner intersects") {
    EmbeddingTable a, b;
    a.ids = {"1", "2", "3"};
    a.vectors = Matrix(3, 2, 0.0);
    b.ids = {"2", "3", "4"};
    b.vectors = Matrix(3, 2, 0.0);
    CHECK_THROWS_WITH_AS(join_embeddings(a, b, JoinMode::strict),
                         doctest::Contains("1 missing in b, 1 missing in a"), Error);

    const JoinedEmbeddings inner = join_embeddings(a, b, JoinMode::inner);
    CHECK(inner.ids == std::vector<std::string>{"2", "3"});
}

TEST_CASE("csv round trip preserves cells through 17 significant digits") {
    Dataset ds = toy_dataset(40, 5, 67);
    ds.target.resize(40);
    Rng rng(99);
    for (double& v : ds.target) v = 1000.0 * rng.normal();
    ds.task = Task::regression;

    const fs::path path = temp_file("roundtrip.csv");
    save_csv(ds, path, "id", "y");
    const Dataset back = load_csv(path, "id", std::string("y"), Task::regression);
    REQUIRE(back.num_rows() == ds.num_rows());
    REQUIRE(back.num_features() == ds.num_features());

    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < 30; ++i) train_idx.push_back(i);
    const ScalerParams scaler = fit_scaler(back.features, train_idx);
    const Matrix cycled = inverse_transform(transform(back.features, scaler), scaler);
    for (std::size_t i = 0; i < cycled.size(); ++i) {
        CHECK(cycled.values()[i] ==
              doctest::Approx(ds.features.values()[i]).epsilon(1e-9));
    }
}
