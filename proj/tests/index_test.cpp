#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "medrag/embedder.hpp"
#include "medrag/errors.hpp"
#include "medrag/vector_index.hpp"

using namespace medrag;

namespace {
std::vector<float> unit(int dim, int axis) {
    std::vector<float> v(static_cast<std::size_t>(dim), 0.0f);
    v[static_cast<std::size_t>(axis)] = 1.0f;
    return v;
}

std::vector<float> random_unit(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<float> v(static_cast<std::size_t>(dim));
    double norm = 0.0;
    for (auto& x : v) {
        x = static_cast<float>(normal(rng));
        norm += static_cast<double>(x) * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x = static_cast<float>(x / norm);
    return v;
}

VectorIndex index_of(const std::vector<std::pair<std::string, std::vector<float>>>& rows) {
    std::vector<std::string> ids;
    std::vector<float> flat;
    for (const auto& [id, v] : rows) {
        ids.push_back(id);
        flat.insert(flat.end(), v.begin(), v.end());
    }
    return VectorIndex::build(std::move(ids), std::move(flat),
                              static_cast<int>(rows.front().second.size()), true);
}

// independent oracle: full sort by (score desc, id asc)
std::vector<SearchHit> brute_force(const VectorIndex& index,
                                   const std::vector<float>& query, int k) {
    std::vector<SearchHit> all;
    for (std::size_t i = 0; i < index.size(); ++i) {
        double dot = 0.0;
        const float* row = index.row(i);
        for (int d = 0; d < index.dim(); ++d)
            dot += static_cast<double>(row[d]) * query[static_cast<std::size_t>(d)];
        all.push_back({index.ids()[i], dot});
    }
    std::sort(all.begin(), all.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (static_cast<int>(all.size()) > k) all.resize(static_cast<std::size_t>(k));
    return all;
}
}  // namespace

TEST_CASE("hash_embed is deterministic") {
    auto a = hash_embed("metastatic melanoma of the skin", 64, 7);
    auto b = hash_embed("metastatic melanoma of the skin", 64, 7);
    CHECK(a == b);
    auto c = hash_embed("metastatic melanoma of the skin", 64, 8);
    CHECK(a != c);  // different seed, different vector
}

TEST_CASE("hash_embed output is unit norm") {
    auto v = hash_embed("one two three four five six", 32, 1);
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-6);
}

TEST_CASE("hash_embed: disjoint vocabularies score near zero") {
    std::string a = "tumor biopsy lesion imaging margin resection grading staging";
    std::string b = "voltage circuit resistor capacitor inductor amplifier waveform antenna";
    double cos = cosine(hash_embed(a, 256, 7), hash_embed(b, 256, 7));
    CHECK(std::abs(cos) < 0.2);
}

TEST_CASE("hash_embed degenerate inputs map to e_0") {
    auto v = hash_embed("", 16, 3);
    CHECK(v[0] == 1.0f);
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] == 0.0f);
    CHECK(hash_embed("   \t  \n", 16, 3) == v);
}

TEST_CASE("hash_embed cosine is symmetric and bounded") {
    std::mt19937_64 rng(5);
    std::vector<std::string> words = {"alpha", "beta", "gamma", "delta", "epsilon"};
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    for (int round = 0; round < 50; ++round) {
        std::string x, y;
        for (int i = 0; i < 6; ++i) {
            x += words[pick(rng)] + " ";
            y += words[pick(rng)] + " ";
        }
        auto ex = hash_embed(x, 64, 2);
        auto ey = hash_embed(y, 64, 2);
        double xy = cosine(ex, ey);
        CHECK(xy == doctest::Approx(cosine(ey, ex)));
        CHECK(xy <= 1.0 + 1e-9);
        CHECK(xy >= -1.0 - 1e-9);
    }
}

TEST_CASE("embedder preferred sizes follow the family") {
    HashEmbedder bert(64, 0, EmbedderFamily::bert);
    CHECK(bert.preferred_chunk_tokens() == 128);
    CHECK(bert.preferred_overlap_tokens() == 32);
    HashEmbedder generic(64, 0, EmbedderFamily::generic);
    CHECK(generic.preferred_chunk_tokens() == 512);
    CHECK(generic.preferred_overlap_tokens() == 32);
}

TEST_CASE("search: orthonormal rows") {
    auto index = index_of({{"a", unit(8, 0)}, {"b", unit(8, 1)}});
    auto hits = search(index, unit(8, 0), 1);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].id == "a");
    CHECK(hits[0].score == doctest::Approx(1.0));
}

TEST_CASE("search: k larger than n returns all rows") {
    auto index = index_of({{"a", unit(8, 0)}, {"b", unit(8, 1)}});
    CHECK(search(index, unit(8, 0), 10).size() == 2);
}

TEST_CASE("search: dimension mismatch is an error") {
    auto index = index_of({{"a", unit(8, 0)}});
    CHECK_THROWS_AS(search(index, unit(16, 0), 1), std::invalid_argument);
}

TEST_CASE("search equals the brute-force oracle on random instances") {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 10; ++round) {
        int dim = 16 << (round % 3);
        int n = 100 + round * 37;
        std::vector<std::pair<std::string, std::vector<float>>> rows;
        for (int i = 0; i < n; ++i) {
            rows.emplace_back("id" + std::to_string(1000 + i), random_unit(rng, dim));
        }
        // constructed ties: duplicate vectors under distinct ids
        rows.emplace_back("tie_b", rows[0].second);
        rows.emplace_back("tie_a", rows[0].second);
        auto index = index_of(rows);
        auto query = random_unit(rng, dim);
        for (int k : {1, 10, 25}) {
            auto fast = search(index, query, k);
            auto slow = brute_force(index, query, k);
            REQUIRE(fast.size() == slow.size());
            for (std::size_t i = 0; i < fast.size(); ++i) {
                CHECK(fast[i].id == slow[i].id);
                CHECK(fast[i].score == slow[i].score);
            }
        }
    }
}

TEST_CASE("ties break by ascending id") {
    auto v = unit(8, 0);
    auto index = index_of({{"222", v}, {"111", v}, {"121", v}});
    auto hits = search(index, v, 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].id == "111");
    CHECK(hits[1].id == "121");
    CHECK(hits[2].id == "222");
}

TEST_CASE("save/load round trip is bit-exact") {
    std::mt19937_64 rng(3);
    std::vector<std::pair<std::string, std::vector<float>>> rows;
    for (int i = 0; i < 3; ++i) {
        rows.emplace_back("pmid" + std::to_string(i), random_unit(rng, 8));
    }
    auto index = index_of(rows);
    std::string bytes = save_index(index);
    auto loaded = load_index(bytes);
    CHECK(loaded == index);
    // and via the file helpers
    testutil::TempDir dir;
    save_index_file(index, dir.path / "x.hvix");
    CHECK(load_index_file(dir.path / "x.hvix") == index);
}

TEST_CASE("load_index distinguishes corruption kinds") {
    auto index = index_of({{"a", unit(8, 0)}});
    std::string bytes = save_index(index);

    SUBCASE("bad magic") {
        std::string bad = bytes;
        bad[0] = 'Z';
        try {
            load_index(bad);
            FAIL("expected IndexLoadError");
        } catch (const IndexLoadError& e) {
            CHECK(e.kind == IndexLoadError::Kind::bad_magic);
        }
    }
    SUBCASE("truncated payload") {
        std::string bad = bytes.substr(0, bytes.size() - 4);
        try {
            load_index(bad);
            FAIL("expected IndexLoadError");
        } catch (const IndexLoadError& e) {
            CHECK(e.kind == IndexLoadError::Kind::truncated);
        }
    }
    SUBCASE("trailing garbage") {
        std::string bad = bytes + "xx";
        try {
            load_index(bad);
            FAIL("expected IndexLoadError");
        } catch (const IndexLoadError& e) {
            CHECK(e.kind == IndexLoadError::Kind::mismatch);
        }
    }
    SUBCASE("unsupported version") {
        std::string bad = bytes;
        bad[4] = 99;
        try {
            load_index(bad);
            FAIL("expected IndexLoadError");
        } catch (const IndexLoadError& e) {
            CHECK(e.kind == IndexLoadError::Kind::bad_version);
        }
    }
}

TEST_CASE("load_precomputed: jsonl object form") {
    testutil::TempDir dir;
    testutil::write_file(dir.path / "emb.jsonl",
                         "{\"pmid\":\"111\",\"vector\":[1,0,0,0,0,0,0,0]}\n"
                         "{\"pmid\":\"222\",\"vector\":[0,1,0,0,0,0,0,0]}\n");
    auto index = load_precomputed(dir.path / "emb.jsonl");
    CHECK(index.size() == 2);
    CHECK(index.dim() == 8);
    CHECK(index.ids() == std::vector<std::string>{"111", "222"});
}

TEST_CASE("load_precomputed: parallel array + ids form with re-normalization") {
    testutil::TempDir dir;
    testutil::write_file(dir.path / "emb.jsonl",
                         "[2,0,0,0,0,0,0,0]\n"
                         "[0,1,0,0,0,0,0,0]\n");
    testutil::write_file(dir.path / "ids.txt", "111\n222\n");
    auto index = load_precomputed(dir.path / "emb.jsonl", dir.path / "ids.txt");
    CHECK(index.size() == 2);
    CHECK(index.row(0)[0] == doctest::Approx(1.0f));  // re-normalized
}

TEST_CASE("load_precomputed error cases") {
    testutil::TempDir dir;
    SUBCASE("row count mismatch") {
        testutil::write_file(dir.path / "emb.jsonl", "[1,0,0,0,0,0,0,0]\n");
        testutil::write_file(dir.path / "ids.txt", "111\n222\n");
        CHECK_THROWS_AS(load_precomputed(dir.path / "emb.jsonl", dir.path / "ids.txt"),
                        Error);
    }
    SUBCASE("zero row cannot normalize") {
        testutil::write_file(dir.path / "emb.jsonl",
                             "{\"pmid\":\"1\",\"vector\":[0,0,0,0,0,0,0,0]}\n");
        try {
            load_precomputed(dir.path / "emb.jsonl");
            FAIL("expected Error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("cannot normalize") != std::string::npos);
        }
    }
    SUBCASE("non-finite value names the row") {
        testutil::write_file(dir.path / "emb.jsonl",
                             "{\"pmid\":\"1\",\"vector\":[1,0,0,0,0,0,0,0]}\n"
                             "{\"pmid\":\"2\",\"vector\":[1,0,0,null,0,0,0,0]}\n");
        try {
            load_precomputed(dir.path / "emb.jsonl");
            FAIL("expected Error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("row 1") != std::string::npos);
        }
    }
}
