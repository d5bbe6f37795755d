#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "medrag/bm25.hpp"
#include "medrag/json_io.hpp"
#include "medrag/pipeline.hpp"
#include "medrag/prompts.hpp"

using namespace medrag;
using testutil::make_chunk;
using testutil::MockTransport;

namespace {

std::vector<float> axis(int dim, int i, float scale = 1.0f) {
    std::vector<float> v(static_cast<std::size_t>(dim), 0.0f);
    v[static_cast<std::size_t>(i)] = scale;
    return v;
}

Document simple_doc(const std::string& pmid, SourceCategory category, int year = 2020) {
    Document d;
    d.pmid = pmid;
    d.title = "Title " + pmid;
    d.pub_date = Date{year, 1, 1};
    if (category == SourceCategory::D1) {
        d.abstract = "Abstract text for document " + pmid + ".";
    } else {
        d.pmcid = "PMC" + pmid;
        d.abstract = "Abstract text for document " + pmid + ".";
        if (category == SourceCategory::D2) d.publication_types.insert("Review");
    }
    d.publication_types.insert("Journal Article");
    d.source_category = category;
    return d;
}

// eutils mock over a small corpus: esearch returns `term_ids`, efetch
// renders whatever ids were asked for from `corpus`.
std::shared_ptr<MockTransport> make_eutils_mock(std::vector<Document> corpus,
                                                std::vector<std::string> term_ids) {
    return std::make_shared<MockTransport>([corpus = std::move(corpus),
                                            term_ids = std::move(term_ids)](
                                               const std::string& url) {
        if (url.find("esearch.fcgi") != std::string::npos) {
            return testutil::ok_response(
                testutil::esearch_body(static_cast<long>(term_ids.size()), term_ids));
        }
        // efetch: find requested ids
        std::string ids_param = testutil::url_param(url, "id");
        std::vector<Document> hit;
        std::string db = testutil::url_param(url, "db");
        std::size_t pos = 0;
        while (pos <= ids_param.size()) {
            auto comma = ids_param.find(',', pos);
            if (comma == std::string::npos) comma = ids_param.size();
            std::string id = ids_param.substr(pos, comma - pos);
            for (const auto& doc : corpus) {
                if (db == "pubmed" && doc.pmid == id) hit.push_back(doc);
                if (db == "pmc" && doc.pmcid && doc.pmcid->substr(3) == id)
                    hit.push_back(doc);
            }
            pos = comma + 1;
        }
        return testutil::ok_response(db == "pmc" ? testutil::make_pmc_xml(hit)
                                                 : testutil::make_pubmed_xml(hit));
    });
}

LadderGenerator rule_rewriter(int max_levels = 4) {
    return [max_levels](const std::string& raw) {
        return generate_ladder_rule_based(normalize(raw), max_levels);
    };
}

EutilsClient make_client(std::shared_ptr<Transport> transport) {
    return EutilsClient(std::move(transport), RateLimitPolicy{10, std::nullopt},
                        std::make_shared<SimClock>());
}

}  // namespace

TEST_CASE("hsrdr_retrieve partitions evidence by retrieval path") {
    std::vector<Document> corpus = {simple_doc("111", SourceCategory::D1),
                                    simple_doc("222", SourceCategory::D1),
                                    simple_doc("333", SourceCategory::D1)};
    // semantic path returns {111, 222}: scripted query vector matches
    auto index = VectorIndex::build({"111", "222", "333"},
                                    [] {
                                        std::vector<float> rows;
                                        auto r0 = axis(8, 0);
                                        auto r1 = axis(8, 1);
                                        auto r2 = axis(8, 2);
                                        rows.insert(rows.end(), r0.begin(), r0.end());
                                        rows.insert(rows.end(), r1.begin(), r1.end());
                                        rows.insert(rows.end(), r2.begin(), r2.end());
                                        return rows;
                                    }(),
                                    8);
    std::vector<float> query_vec(8, 0.0f);
    query_vec[0] = 0.8f;
    query_vec[1] = 0.6f;  // unit: favors 111 then 222
    testutil::ScriptedEmbedder embedder(8, {{"the cancer question", query_vec}});

    auto transport = make_eutils_mock(corpus, {"222", "333"});
    auto eutils = make_client(transport);
    HsrdrConfig cfg;
    cfg.k_semantic = 2;
    cfg.fetch_full_text = false;

    auto pool = hsrdr_retrieve("the cancer question", index, embedder, eutils,
                               rule_rewriter(), cfg);
    CHECK(pool.evidence_category_by_pmid.at("111") == EvidenceCategory::E1);
    CHECK(pool.evidence_category_by_pmid.at("333") == EvidenceCategory::E2);
    CHECK(pool.evidence_category_by_pmid.at("222") == EvidenceCategory::E3);
    CHECK(pool.documents.size() == 3);
    CHECK_FALSE(pool.term_path_failed);
}

TEST_CASE("hsrdr_retrieve drops sources outside sources_enabled") {
    std::vector<Document> corpus = {simple_doc("111", SourceCategory::D1),
                                    simple_doc("222", SourceCategory::D2),
                                    simple_doc("333", SourceCategory::D3)};
    auto index = VectorIndex::build({"111"}, axis(8, 0), 8);
    testutil::ScriptedEmbedder embedder(8, {{"q", axis(8, 0)}});
    auto transport = make_eutils_mock(corpus, {"222", "333"});
    auto eutils = make_client(transport);

    HsrdrConfig cfg;
    cfg.sources_enabled = {SourceCategory::D1, SourceCategory::D2};
    cfg.fetch_full_text = false;
    auto pool = hsrdr_retrieve("q", index, embedder, eutils, rule_rewriter(), cfg);
    REQUIRE(pool.documents.size() == 2);
    for (const auto& doc : pool.documents) {
        CHECK(doc.source_category != SourceCategory::D3);
    }
    // the partition still covers the dropped id
    CHECK(pool.evidence_category_by_pmid.count("333") == 1);
}

TEST_CASE("hsrdr_retrieve monotonicity: removing D3 never adds documents") {
    std::vector<Document> corpus = {simple_doc("111", SourceCategory::D1),
                                    simple_doc("222", SourceCategory::D2),
                                    simple_doc("333", SourceCategory::D3),
                                    simple_doc("444", SourceCategory::D3)};
    auto index = VectorIndex::build({"111"}, axis(8, 0), 8);
    testutil::ScriptedEmbedder embedder(8, {{"q", axis(8, 0)}});
    auto eutils_all = make_client(make_eutils_mock(corpus, {"222", "333", "444"}));
    auto eutils_d12 = make_client(make_eutils_mock(corpus, {"222", "333", "444"}));

    HsrdrConfig all;
    all.fetch_full_text = false;
    HsrdrConfig d12 = all;
    d12.sources_enabled = {SourceCategory::D1, SourceCategory::D2};

    auto pool_all = hsrdr_retrieve("q", index, embedder, eutils_all, rule_rewriter(), all);
    auto pool_d12 = hsrdr_retrieve("q", index, embedder, eutils_d12, rule_rewriter(), d12);
    CHECK(pool_d12.documents.size() <= pool_all.documents.size());
    std::set<std::string> all_ids;
    for (const auto& d : pool_all.documents) all_ids.insert(d.pmid);
    for (const auto& d : pool_d12.documents) CHECK(all_ids.count(d.pmid) == 1);
}

TEST_CASE("hsrdr_retrieve degrades to semantic-only when the term path dies") {
    std::vector<Document> corpus = {simple_doc("111", SourceCategory::D1)};
    auto index = VectorIndex::build({"111"}, axis(8, 0), 8);
    testutil::ScriptedEmbedder embedder(8, {{"q", axis(8, 0)}});
    auto transport = std::make_shared<MockTransport>([&](const std::string& url) {
        if (url.find("esearch") != std::string::npos) {
            return HttpResponse{500, {}, "down"};
        }
        return testutil::ok_response(testutil::make_pubmed_xml(corpus));
    });
    auto eutils = make_client(transport);
    HsrdrConfig cfg;
    cfg.fetch_full_text = false;
    auto pool = hsrdr_retrieve("q", index, embedder, eutils, rule_rewriter(), cfg);
    CHECK(pool.term_path_failed);
    REQUIRE(pool.documents.size() == 1);
    CHECK(pool.evidence_category_by_pmid.at("111") == EvidenceCategory::E1);
}

TEST_CASE("hsrdr_retrieve with both paths empty returns an empty pool") {
    std::vector<Document> corpus;
    VectorIndex empty_index;
    testutil::ScriptedEmbedder embedder(8, {});
    auto transport = make_eutils_mock(corpus, {});
    auto eutils = make_client(transport);
    HsrdrConfig cfg;
    cfg.fetch_full_text = false;
    auto pool = hsrdr_retrieve("q", empty_index, embedder, eutils, rule_rewriter(), cfg);
    CHECK(pool.documents.empty());
    CHECK(pool.evidence_category_by_pmid.empty());
}

TEST_CASE("hsrdr_retrieve attaches PMC full text for D2/D3 documents") {
    auto d2 = simple_doc("222", SourceCategory::D2);
    d2.full_text = "Full body paragraph for the review.";
    std::vector<Document> corpus = {d2};
    auto index = VectorIndex::build({"222"}, axis(8, 0), 8);
    testutil::ScriptedEmbedder embedder(8, {{"q", axis(8, 0)}});
    auto eutils = make_client(make_eutils_mock(corpus, {}));
    HsrdrConfig cfg;  // fetch_full_text = true
    auto pool = hsrdr_retrieve("q", index, embedder, eutils, rule_rewriter(), cfg);
    REQUIRE(pool.documents.size() == 1);
    REQUIRE(pool.documents[0].full_text.has_value());
    CHECK(*pool.documents[0].full_text == "Full body paragraph for the review.");
}

TEST_CASE("evidence partition property on random path pairs") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> n_ids(0, 12);
    std::uniform_int_distribution<int> id_pick(100, 130);
    for (int round = 0; round < 100; ++round) {
        std::set<std::string> semantic, term;
        int ns = n_ids(rng), nt = n_ids(rng);
        for (int i = 0; i < ns; ++i) semantic.insert(std::to_string(id_pick(rng)));
        for (int i = 0; i < nt; ++i) term.insert(std::to_string(id_pick(rng)));

        // the partition rule, as the pipeline computes it
        std::map<std::string, EvidenceCategory> categories;
        std::set<std::string> all;
        for (const auto& id : semantic) all.insert(id);
        for (const auto& id : term) all.insert(id);
        for (const auto& id : all) {
            bool in_s = semantic.count(id) > 0, in_t = term.count(id) > 0;
            categories[id] = in_s && in_t ? EvidenceCategory::E3
                                         : (in_s ? EvidenceCategory::E1
                                                 : EvidenceCategory::E2);
        }
        std::set<std::string> e1, e2, e3;
        for (const auto& [id, cat] : categories) {
            if (cat == EvidenceCategory::E1) e1.insert(id);
            if (cat == EvidenceCategory::E2) e2.insert(id);
            if (cat == EvidenceCategory::E3) e3.insert(id);
        }
        // E3 = intersection; E1/E2 = set differences; partition of union
        for (const auto& id : e3) CHECK((semantic.count(id) && term.count(id)));
        for (const auto& id : e1) CHECK((semantic.count(id) && !term.count(id)));
        for (const auto& id : e2) CHECK((term.count(id) && !semantic.count(id)));
        CHECK(e1.size() + e2.size() + e3.size() == all.size());
    }
}

TEST_CASE("two_stage_retrieve without reranker follows dense order") {
    std::vector<Chunk> chunks = {
        make_chunk("a", 0, "tumor staging and margins"),
        make_chunk("b", 0, "resistor capacitor circuits"),
        make_chunk("c", 0, "tumor margins guide resection"),
    };
    HashEmbedder embedder(64, 7);
    auto evidence = two_stage_retrieve("tumor margins", chunks, embedder, nullptr, 3, 3);
    REQUIRE(evidence.size() == 3);
    CHECK(evidence[0].rank == 1);
    CHECK(evidence[1].rank == 2);
    CHECK(evidence[2].rank == 3);
    // the circuits chunk cannot win
    CHECK(evidence[0].doc_id != "b");
    // scores non-increasing
    CHECK(evidence[0].score >= evidence[1].score);
    CHECK(evidence[1].score >= evidence[2].score);
}

TEST_CASE("two_stage_retrieve: reranker fully reorders the dense candidates") {
    // dense stage favors exact token repetition; the overlap reranker
    // normalizes by distinct query terms and inverts the order
    std::vector<Chunk> chunks = {
        make_chunk("x", 0, "apple apple apple apple apple apple"),
        make_chunk("y", 0, "apple banana cherry"),
        make_chunk("z", 0, "unrelated words only here"),
    };
    testutil::ScriptedEmbedder embedder(
        8, {
               {"apple banana cherry", axis(8, 0)},
               {chunks[0].full_text(), axis(8, 0)},          // dense: x first
               {chunks[1].full_text(), axis(8, 1)},
               {chunks[2].full_text(), axis(8, 2)},
           });
    TermOverlapReranker reranker;
    auto evidence = two_stage_retrieve("apple banana cherry", chunks, embedder,
                                       &reranker, 3, 3);
    REQUIRE(evidence.size() == 3);
    CHECK(evidence[0].doc_id == "y");  // 3/3 overlap
    CHECK(evidence[0].score == doctest::Approx(1.0));
    CHECK(evidence[1].doc_id == "x");  // 1/3 overlap
    CHECK(evidence[2].doc_id == "z");  // 0
}

TEST_CASE("two_stage_retrieve with an identity-ranking reranker equals dense order") {
    std::vector<Chunk> chunks;
    for (int i = 0; i < 8; ++i) {
        chunks.push_back(make_chunk("doc" + std::to_string(i), 0,
                                    "tumor margins sentence " + std::to_string(i) +
                                        (i % 2 ? " resection" : " staging")));
    }
    HashEmbedder embedder(64, 7);

    // reranker scoring by the same embedding dot product: same argsort
    struct EmbedDotReranker final : Reranker {
        const Embedder& e;
        explicit EmbedDotReranker(const Embedder& emb) : e(emb) {}
        double score(const std::string& q, const std::string& p) const override {
            auto vq = e.embed_one(q);
            auto vp = e.embed_one(p);
            double dot = 0.0;
            for (std::size_t i = 0; i < vq.size(); ++i)
                dot += static_cast<double>(vq[i]) * vp[i];
            return dot;
        }
    } reranker(embedder);

    auto dense = two_stage_retrieve("tumor staging", chunks, embedder, nullptr, 8, 5);
    auto reranked = two_stage_retrieve("tumor staging", chunks, embedder, &reranker, 8, 5);
    REQUIRE(dense.size() == reranked.size());
    for (std::size_t i = 0; i < dense.size(); ++i) {
        CHECK(dense[i].doc_id == reranked[i].doc_id);  // argsort equality
        CHECK(dense[i].rank == reranked[i].rank);
    }
}

TEST_CASE("two_stage_retrieve truncation and preconditions") {
    std::vector<Chunk> chunks = {make_chunk("a", 0, "one"), make_chunk("b", 0, "two"),
                                 make_chunk("c", 0, "three")};
    HashEmbedder embedder(64, 7);
    auto evidence = two_stage_retrieve("one", chunks, embedder, nullptr, 20, 5);
    REQUIRE(evidence.size() == 3);
    CHECK(evidence[0].rank == 1);
    CHECK(evidence[2].rank == 3);

    CHECK(two_stage_retrieve("q", {}, embedder, nullptr, 20, 5).empty());
    CHECK_THROWS_AS(two_stage_retrieve("q", chunks, embedder, nullptr, 3, 5),
                    std::invalid_argument);
}

TEST_CASE("two_stage_retrieve copies categories from chunk metadata") {
    auto chunk = make_chunk("a", 0, "tumor text", "",
                            {{"evidence_category", "E3"}, {"source_category", "D2"}});
    HashEmbedder embedder(64, 7);
    auto evidence = two_stage_retrieve("tumor", {chunk}, embedder, nullptr, 1, 1);
    REQUIRE(evidence.size() == 1);
    CHECK(evidence[0].evidence_category == EvidenceCategory::E3);
    CHECK(evidence[0].source_category == SourceCategory::D2);
}

TEST_CASE("bm25_search matches the worked two-chunk example") {
    std::vector<Chunk> chunks = {make_chunk("c1", 0, "cancer cancer"),
                                 make_chunk("c2", 0, "cancer therapy")};
    auto hits = bm25_search("therapy", chunks, 2);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].doc_id == "c2");
    // idf = ln((2-1+0.5)/(1+0.5)+1) = ln 2; tf part = 1*(k1+1)/(1+k1*(1-b+b*1)) = 1
    CHECK(hits[0].score == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(hits[1].score == doctest::Approx(0.0));
}

TEST_CASE("bm25_search: absent query term scores zero everywhere") {
    std::vector<Chunk> chunks = {make_chunk("c1", 0, "alpha beta"),
                                 make_chunk("c2", 0, "gamma delta")};
    auto hits = bm25_search("omega", chunks, 2);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].score == 0.0);
    CHECK(hits[1].score == 0.0);
    // tie rule: doc_id ascending
    CHECK(hits[0].doc_id == "c1");
}

TEST_CASE("bm25_search: duplicate chunks tie and break by (doc_id, chunk_index)") {
    std::vector<Chunk> chunks = {make_chunk("b", 1, "cancer therapy"),
                                 make_chunk("b", 0, "cancer therapy"),
                                 make_chunk("a", 0, "cancer therapy")};
    auto hits = bm25_search("therapy", chunks, 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].doc_id == "a");
    CHECK(hits[1].doc_id == "b");
    CHECK(*hits[1].chunk_index == 0);
    CHECK(hits[2].doc_id == "b");
    CHECK(*hits[2].chunk_index == 1);
    CHECK(hits[0].score == hits[1].score);
}

namespace {
// independent BM25 oracle: textbook formula, no shared code with bm25.cpp
std::vector<double> bm25_oracle(const std::string& query,
                                const std::vector<Chunk>& chunks, double k1, double b) {
    std::size_t n = chunks.size();
    double avgdl = 0.0;
    for (const auto& c : chunks) avgdl += c.token_count;
    avgdl /= static_cast<double>(n);
    std::vector<double> scores(n, 0.0);
    for (const auto& term : word_tokens(query)) {
        long df = 0;
        for (const auto& c : chunks) {
            auto toks = word_tokens(c.full_text());
            if (std::find(toks.begin(), toks.end(), term) != toks.end()) ++df;
        }
        if (df == 0) continue;
        double idf =
            std::log((static_cast<double>(n) - df + 0.5) / (df + 0.5) + 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto toks = word_tokens(chunks[i].full_text());
            double tf = static_cast<double>(std::count(toks.begin(), toks.end(), term));
            if (tf == 0) continue;
            double dl = chunks[i].token_count;
            scores[i] += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl));
        }
    }
    return scores;
}
}  // namespace

TEST_CASE("bm25_search equals the brute-force oracle on random corpora") {
    std::mt19937_64 rng(17);
    std::vector<std::string> vocabulary = {"tumor", "therapy", "margin", "biopsy",
                                           "staging", "outcome", "cohort", "dose"};
    std::uniform_int_distribution<std::size_t> pick(0, vocabulary.size() - 1);
    std::uniform_int_distribution<int> n_chunks(2, 12), n_words(2, 20), n_query(1, 4);
    for (int round = 0; round < 30; ++round) {
        std::vector<Chunk> chunks;
        int nc = n_chunks(rng);
        for (int i = 0; i < nc; ++i) {
            std::string text;
            int nw = n_words(rng);
            for (int w = 0; w < nw; ++w) {
                if (!text.empty()) text += " ";
                text += vocabulary[pick(rng)];
            }
            chunks.push_back(make_chunk("d" + std::to_string(i / 2), i % 2, text));
        }
        std::string query;
        int nq = n_query(rng);
        for (int i = 0; i < nq; ++i) {
            if (!query.empty()) query += " ";
            query += vocabulary[pick(rng)];
        }
        auto oracle = bm25_oracle(query, chunks, 1.2, 0.75);
        auto hits = bm25_search(query, chunks, nc);
        REQUIRE(hits.size() == chunks.size());
        for (const auto& hit : hits) {
            for (std::size_t i = 0; i < chunks.size(); ++i) {
                if (chunks[i].doc_id == hit.doc_id &&
                    chunks[i].chunk_index == *hit.chunk_index) {
                    CHECK(hit.score == doctest::Approx(oracle[i]).epsilon(1e-9));
                }
            }
        }
        // scores non-increasing with rank
        for (std::size_t i = 1; i < hits.size(); ++i) {
            CHECK(hits[i - 1].score >= hits[i].score);
        }
    }
}

TEST_CASE("assemble_context renders rank-ordered blocks within budget") {
    std::vector<Chunk> chunks;
    std::vector<EvidenceItem> evidence;
    for (int i = 0; i < 5; ++i) {
        auto c = make_chunk("p" + std::to_string(i), 0,
                            "Sentence one of block " + std::to_string(i) +
                                ". Sentence two stays short.",
                            "", {{"pub_year", "2020"}, {"source_category", "D1"}});
        chunks.push_back(c);
        EvidenceItem e;
        e.doc_id = c.doc_id;
        e.chunk_index = 0;
        e.rank = i + 1;
        e.score = 1.0 - i * 0.1;
        evidence.push_back(e);
    }

    SUBCASE("generous budget: all five blocks in rank order") {
        auto context = assemble_context(evidence, chunks, 1000);
        CHECK(context.find("[1] (p0, 2020, D1)") != std::string::npos);
        CHECK(context.find("[5] (p4, 2020, D1)") != std::string::npos);
        CHECK(context.find("[1]") < context.find("[2]"));
        CHECK(context.find("[4]") < context.find("[5]"));
    }
    SUBCASE("budget for exactly two blocks") {
        // each block: header 4 tokens + body 10 tokens = 14
        auto context = assemble_context(evidence, chunks, 28);
        CHECK(context.find("[2]") != std::string::npos);
        CHECK(context.find("[3]") == std::string::npos);
    }
    SUBCASE("tiny budget truncates the rank-1 block at a sentence boundary") {
        auto context = assemble_context(evidence, chunks, 10);
        CHECK(context.find("[1] (p0, 2020, D1)") != std::string::npos);
        CHECK(context.find("Sentence one of block 0.") != std::string::npos);
        CHECK(context.find("Sentence two") == std::string::npos);
        CHECK(context.find("[2]") == std::string::npos);
    }
    SUBCASE("empty evidence gives an empty context") {
        CHECK(assemble_context({}, chunks, 100).empty());
    }
}

TEST_CASE("parse_final_answer letter extraction") {
    CHECK(parse_final_answer("Thinking...\nAnswer: B", 4) == std::string("B"));
    CHECK(parse_final_answer("answer: (c)", 4) == std::string("C"));
    CHECK(parse_final_answer("Answer: d\n", 4) == std::string("D"));
    CHECK(parse_final_answer("The answer is A. Wait.\nAnswer: C", 4) ==
          std::string("C"));  // last marker wins
    CHECK_FALSE(parse_final_answer("no final line at all", 4).has_value());
    CHECK_FALSE(parse_final_answer("Answer: F", 4).has_value());  // out of range
    CHECK_FALSE(parse_final_answer("Answer: Because ...", 4).has_value());
    // open question: rest of line
    CHECK(parse_final_answer("Answer: vitamin d supplementation", 0) ==
          std::string("vitamin d supplementation"));
}

TEST_CASE("answer pipeline: multiple choice parse, abstain and no-retrieval modes") {
    std::vector<Document> corpus = {simple_doc("111", SourceCategory::D1),
                                    simple_doc("222", SourceCategory::D1)};
    auto embedder = std::make_shared<HashEmbedder>(64, 7);
    std::vector<std::string> ids;
    std::vector<float> flat;
    for (const auto& d : corpus) {
        ids.push_back(d.pmid);
        auto v = embedder->embed_one(*d.abstract);
        flat.insert(flat.end(), v.begin(), v.end());
    }
    auto hash_index = VectorIndex::build(std::move(ids), std::move(flat), 64);

    auto transport = make_eutils_mock(corpus, {"222"});
    auto eutils = make_client(transport);

    QuestionRecord q;
    q.id = "q1";
    q.question = "Which document describes item one?";
    q.options = {"first", "second", "third"};
    q.gold = "A";

    auto run_with = [&](const std::string& response, bool retrieval) {
        FixtureGenerationClient generator({}, response);
        QaPipeline::Components components;
        components.semantic_index = &hash_index;
        components.embedder = embedder;
        components.eutils = &eutils;
        components.rewriter = rule_rewriter();
        components.generator = &generator;
        PipelineConfig config;
        config.hsrdr.fetch_full_text = false;
        config.retrieval_enabled = retrieval;
        QaPipeline pipeline(components, config);
        return pipeline.answer(q);
    };

    auto record = run_with("Reasoning chain.\nAnswer: A", true);
    CHECK(record.parsed_answer == std::string("A"));
    CHECK(record.answered_correctly());
    CHECK(record.mode == "rag");
    CHECK_FALSE(record.context.empty());
    CHECK_FALSE(record.evidence.empty());
    CHECK_FALSE(record.ladder.levels.empty());

    auto abstained = run_with("I really cannot decide here.", true);
    CHECK_FALSE(abstained.parsed_answer.has_value());
    CHECK_FALSE(abstained.answered_correctly());

    auto baseline = run_with("Answer: B", false);
    CHECK(baseline.mode == "no_retrieval");
    CHECK(baseline.context.empty());
    CHECK(baseline.evidence.empty());
    CHECK(baseline.parsed_answer == std::string("B"));
}

TEST_CASE("answer records serialize and parse back") {
    AnswerRecord record;
    record.question_id = "q9";
    record.question = "What?";
    record.options = {"x", "y"};
    record.gold = "B";
    record.mode = "rag";
    record.ladder.levels = {"(a[Title/Abstract] AND b[Title/Abstract])"};
    record.ladder.origin = LadderOrigin::llm;
    record.ladder.level_used = 0;
    record.evidence_counts = {{"E1", 2}, {"E3", 1}};
    record.source_counts = {{"D1", 3}};
    EvidenceItem item;
    item.doc_id = "111";
    item.chunk_index = 2;
    item.score = 0.5;
    item.rank = 1;
    item.evidence_category = EvidenceCategory::E1;
    item.source_category = SourceCategory::D1;
    record.evidence.push_back(item);
    record.context = "[1] (111, 2020, D1) text";
    record.raw_output = "Answer: B";
    record.parsed_answer = "B";

    auto round = answer_record_from_json(to_json_line(record));
    CHECK(round.question_id == record.question_id);
    CHECK(round.gold == record.gold);
    CHECK(round.ladder.levels == record.ladder.levels);
    CHECK(round.ladder.origin == LadderOrigin::llm);
    CHECK(round.evidence_counts == record.evidence_counts);
    REQUIRE(round.evidence.size() == 1);
    CHECK(round.evidence[0] == record.evidence[0]);
    CHECK(round.parsed_answer == record.parsed_answer);
}
