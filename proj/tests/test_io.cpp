// Persistence: JSON-lines ingestion/output and the binary index format.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include "json.hpp"

#include "fusegraph/corpus.hpp"
#include "fusegraph/index.hpp"
#include "fusegraph/io.hpp"
#include "fusegraph/rng.hpp"
#include "fusegraph/search.hpp"
#include "fusegraph/synth.hpp"
#include "fusegraph/update.hpp"

using namespace fusegraph;

namespace {

std::string error_code(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    REQUIRE(out.good());
}

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

/// A corpus exercising every section: sparse paths, keywords, entities, KG.
HybridIndex rich_index(uint32_t docs = 400) {
    SynthParams sp;
    sp.docs = docs;
    sp.dense_dim = 8;
    sp.entity_vocab = 25;
    sp.entity_rate = 0.3;
    sp.kg_triplets = 40;
    sp.chains = 2;
    sp.seed = 110;
    SynthData data = generate_corpus(sp);
    BuildParams bp;
    bp.degree = 8;
    bp.knn_k = 16;
    bp.seed = 42;
    return build_hybrid_index(std::move(data.store), std::move(data.kg), bp);
}

bool same_hits(const SearchResult& a, const SearchResult& b) {
    if (a.hits.size() != b.hits.size() || a.warnings != b.warnings || a.error != b.error)
        return false;
    for (std::size_t i = 0; i < a.hits.size(); ++i)
        if (a.hits[i].doc_id != b.hits[i].doc_id || a.hits[i].node != b.hits[i].node ||
            a.hits[i].score != b.hits[i].score)
            return false;
    return true;
}

} // namespace

TEST_CASE("the binary index round-trips to identical bytes and identical answers") {
    HybridIndex index = rich_index();
    mark_delete(index, std::vector<uint64_t>{3, 77, 200});

    TempFile f1("tmp_io_rt1.bin"), f2("tmp_io_rt2.bin");
    const uint64_t written = serialize_index(index, f1.path);
    CHECK(written == slurp(f1.path).size());

    HybridIndex loaded = deserialize_index(f1.path, true);
    CHECK(loaded.size() == index.size());
    CHECK(loaded.degree == index.degree);
    CHECK(loaded.knn_k == index.knn_k);
    CHECK(loaded.build_seed == index.build_seed);
    CHECK(loaded.store.docs[3].deleted);
    CHECK(loaded.store.docs[77].deleted);
    CHECK(!loaded.store.docs[4].deleted);

    serialize_index(loaded, f2.path);
    CHECK(slurp(f1.path) == slurp(f2.path));

    // One hundred mixed queries replay identically on the loaded copy.
    SynthParams sp;
    sp.dense_dim = 8;
    sp.entity_vocab = 25;
    SplitMix64 rng(111);
    std::vector<QuerySpec> queries;
    for (int t = 0; t < 100; ++t) {
        QuerySpec q;
        q.vector = random_query_vector(sp, rng);
        q.weights = random_simplex_weights(rng);
        q.k = 10;
        q.beam_width = 48;
        if (t % 4 == 0) {
            const auto& kw = index.store.docs[bounded(rng, index.size())].keywords;
            if (!kw.empty()) q.required_keywords = {kw[0]};
        }
        if (t % 5 == 0) {
            q.weights.entity = 0.3f;
            q.entities = {static_cast<uint32_t>(bounded(rng, 25))};
        }
        queries.push_back(std::move(q));
    }
    const auto before = batch_query(index, queries);
    const auto after = batch_query(loaded, queries);
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(same_hits(before[i], after[i]));
}

TEST_CASE("an index without optional payloads omits their sections") {
    DocumentStore store;
    SplitMix64 rng(112);
    for (uint32_t i = 0; i < 60; ++i) {
        DenseVector v;
        v.values.resize(6);
        for (float& x : v.values) x = static_cast<float>(gaussian(rng));
        store.docs.push_back(make_document(i, std::move(v), {}, {}));
    }
    validate_corpus(store);
    BuildParams bp;
    bp.degree = 4;
    bp.knn_k = 8;
    HybridIndex index = build_hybrid_index(std::move(store), {}, bp);

    TempFile lean("tmp_io_lean.bin"), back("tmp_io_lean2.bin");
    serialize_index(index, lean.path);

    HybridIndex loaded = deserialize_index(lean.path, true);
    CHECK(loaded.kg.empty());
    CHECK(loaded.entity_map.empty());
    for (std::size_t u = 0; u < loaded.size(); ++u) {
        CHECK(loaded.keyword[u].empty());
        CHECK(loaded.logical[u].empty());
        CHECK(loaded.store.docs[u].entities.empty());
    }
    serialize_index(loaded, back.path);
    CHECK(slurp(lean.path) == slurp(back.path));

    // The rich file carries strictly more section machinery.
    HybridIndex fat = rich_index(60);
    TempFile fatf("tmp_io_fat.bin");
    serialize_index(fat, fatf.path);
    CHECK(slurp(fatf.path).size() > slurp(lean.path).size());
}

TEST_CASE("damaged index files fail with the matching error code") {
    HybridIndex index = rich_index(80);
    TempFile good("tmp_io_good.bin");
    serialize_index(index, good.path);
    const std::string bytes = slurp(good.path);
    TempFile bad("tmp_io_bad.bin");

    SUBCASE("a flipped payload byte is a checksum failure") {
        std::string corrupt = bytes;
        corrupt.back() = static_cast<char>(corrupt.back() ^ 0x5a);
        spit(bad.path, corrupt);
        CHECK(error_code([&] { deserialize_index(bad.path); }) == "checksum-failure");
    }
    SUBCASE("a wrong magic is not an index") {
        std::string corrupt = bytes;
        corrupt[0] = 'X';
        spit(bad.path, corrupt);
        CHECK(error_code([&] { deserialize_index(bad.path); }) == "not-an-index");
    }
    SUBCASE("a tiny file is not an index") {
        spit(bad.path, "HYB");
        CHECK(error_code([&] { deserialize_index(bad.path); }) == "not-an-index");
    }
    SUBCASE("a bumped format version is a version mismatch") {
        std::string corrupt = bytes;
        corrupt[8] = 9; // low byte of the little-endian version word
        spit(bad.path, corrupt);
        CHECK(error_code([&] { deserialize_index(bad.path); }) == "version-mismatch");
    }
    SUBCASE("a cut-off tail is a truncated file") {
        spit(bad.path, bytes.substr(0, bytes.size() - 10));
        CHECK(error_code([&] { deserialize_index(bad.path); }) == "truncated-file");
    }
    SUBCASE("a header without sections is a truncated file") {
        spit(bad.path, bytes.substr(0, 72));
        CHECK(error_code([&] { deserialize_index(bad.path); }) == "truncated-file");
    }
    SUBCASE("a missing path is an io error") {
        CHECK(error_code([&] { deserialize_index("tmp_io_nowhere.bin"); }) == "io-error");
    }
}

TEST_CASE("corpus, knowledge graph, queries, and truth survive JSONL round trips") {
    SynthParams sp;
    sp.docs = 50;
    sp.dense_dim = 4;
    sp.entity_vocab = 10;
    sp.entity_rate = 0.4;
    sp.kg_triplets = 20;
    sp.seed = 113;
    SynthData data = generate_corpus(sp);

    SUBCASE("corpus") {
        TempFile f("tmp_io_corpus.jsonl");
        write_corpus(f.path, data.store);
        DocumentStore loaded = load_corpus(f.path);
        REQUIRE(loaded.size() == data.store.size());
        CHECK(loaded.dense_dim == data.store.dense_dim);
        CHECK(loaded.learned_dim == data.store.learned_dim);
        CHECK(loaded.statistical_dim == data.store.statistical_dim);
        for (std::size_t i = 0; i < loaded.size(); ++i) {
            const auto& a = data.store.docs[i];
            const auto& b = loaded.docs[i];
            CHECK(a.doc_id == b.doc_id);
            CHECK(a.vector.dense.values == b.vector.dense.values);
            CHECK(a.vector.learned.indices == b.vector.learned.indices);
            CHECK(a.vector.learned.values == b.vector.learned.values);
            CHECK(a.vector.statistical.indices == b.vector.statistical.indices);
            CHECK(a.vector.statistical.values == b.vector.statistical.values);
            CHECK(a.keywords == b.keywords);
            CHECK(a.entities == b.entities);
            CHECK(a.vector.squared_norm == b.vector.squared_norm);
        }
    }
    SUBCASE("knowledge graph") {
        TempFile f("tmp_io_kg.jsonl");
        write_kg(f.path, data.kg);
        KnowledgeGraph loaded = load_kg(f.path);
        CHECK(loaded.triplets() == data.kg.triplets());
    }
    SUBCASE("queries") {
        SplitMix64 rng(114);
        std::vector<QuerySpec> queries;
        for (int t = 0; t < 10; ++t) {
            QuerySpec q;
            q.vector = random_query_vector(sp, rng);
            q.weights = random_simplex_weights(rng);
            q.weights.entity = 0.25f;
            q.required_keywords = {1, 5};
            q.entities = {2};
            q.k = 7;
            q.beam_width = 40;
            queries.push_back(std::move(q));
        }
        TempFile f("tmp_io_queries.jsonl");
        write_queries(f.path, queries);
        auto loaded = load_queries(f.path);
        REQUIRE(loaded.size() == queries.size());
        for (std::size_t i = 0; i < loaded.size(); ++i) {
            const auto& a = queries[i];
            const auto& b = loaded[i];
            CHECK(a.vector.dense.values == b.vector.dense.values);
            CHECK(a.vector.learned.indices == b.vector.learned.indices);
            CHECK(a.vector.learned.values == b.vector.learned.values);
            CHECK(a.vector.statistical.values == b.vector.statistical.values);
            CHECK(a.weights.dense == b.weights.dense);
            CHECK(a.weights.learned == b.weights.learned);
            CHECK(a.weights.statistical == b.weights.statistical);
            CHECK(a.weights.entity == b.weights.entity);
            CHECK(a.required_keywords == b.required_keywords);
            CHECK(a.entities == b.entities);
            CHECK(a.k == b.k);
            CHECK(a.beam_width == b.beam_width);
        }
    }
    SUBCASE("query defaults fill absent fields") {
        TempFile f("tmp_io_qdef.jsonl");
        spit(f.path, "{\"dense\":[1.0,0.0]}\n");
        QueryDefaults defaults;
        defaults.k = 7;
        defaults.beam = 33;
        defaults.max_entity_hops = 5;
        auto loaded = load_queries(f.path, defaults);
        REQUIRE(loaded.size() == 1);
        CHECK(loaded[0].k == 7);
        CHECK(loaded[0].beam_width == 33);
        CHECK(loaded[0].max_entity_hops == 5);
        CHECK(loaded[0].weights.dense == 1.0f);
        CHECK(loaded[0].required_keywords.empty());
    }
    SUBCASE("truth") {
        std::vector<TruthEntry> truth{{0, {5, 3, 9}}, {1, {}}, {7, {1}}};
        TempFile f("tmp_io_truth.jsonl");
        write_truth(f.path, truth);
        auto loaded = load_truth(f.path);
        REQUIRE(loaded.size() == truth.size());
        for (std::size_t i = 0; i < truth.size(); ++i) {
            CHECK(loaded[i].qid == truth[i].qid);
            CHECK(loaded[i].relevant == truth[i].relevant);
        }
    }
    SUBCASE("malformed lines carry the line number") {
        TempFile f("tmp_io_badline.jsonl");
        spit(f.path, "{\"qid\":0,\"relevant\":[1]}\nnot json\n");
        try {
            load_truth(f.path);
            FAIL("expected a bad-json error");
        } catch (const Error& e) {
            CHECK(std::string(e.code()) == "bad-json");
            CHECK(std::string(e.what()).find(":2") != std::string::npos);
        }
    }
}

TEST_CASE("result and report writers emit the documented shapes") {
    SearchResult ok;
    ok.hits = {{42, 0, 1.5}, {7, 1, 0.25}};
    ok.warnings = {"keyword-shortfall"};
    SearchResult failed;
    failed.error = "invalid-k: k must be positive";
    std::vector<SearchResult> results{ok, failed};

    TempFile rf("tmp_io_results.jsonl");
    write_results(rf.path, results);
    std::ifstream in(rf.path);
    std::string line;
    REQUIRE(std::getline(in, line));
    auto j0 = nlohmann::json::parse(line);
    CHECK(j0.at("qid") == 0);
    REQUIRE(j0.at("results").size() == 2);
    CHECK(j0.at("results")[0].at("id") == 42);
    CHECK(j0.at("results")[0].at("score") == 1.5);
    CHECK(j0.at("warnings")[0] == "keyword-shortfall");
    REQUIRE(std::getline(in, line));
    auto j1 = nlohmann::json::parse(line);
    CHECK(j1.at("qid") == 1);
    CHECK(j1.at("results").empty());
    CHECK(std::string(j1.at("warnings")[0]).find("invalid-k") != std::string::npos);

    std::vector<BenchRow> rows{{16, 1000.0, 0.91, 0.95, 1.0}, {32, 700.0, 0.97, 0.98, 1.4}};
    TempFile cf("tmp_io_report.csv");
    write_report_csv(cf.path, rows);
    const std::string csv = slurp(cf.path);
    CHECK(csv.rfind("beam,qps,recall,ndcg,latency_ms\n", 0) == 0);
    CHECK(csv.find("\n16,") != std::string::npos);
    CHECK(csv.find("\n32,") != std::string::npos);

    const std::string table = format_report_table(rows);
    CHECK(table.find("beam") != std::string::npos);
    CHECK(table.find("0.9100") != std::string::npos);
    CHECK(table.find("0.9800") != std::string::npos);
}
