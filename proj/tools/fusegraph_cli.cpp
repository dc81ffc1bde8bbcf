// Command-line front end: build, query, bench, insert, delete, gen, validate.
//
// Every subcommand reads its inputs, writes to the declared output paths and
// never mutates an input file. Errors print one machine-parsable line
// ("error: <code>: <detail>") on stderr; usage problems additionally print
// the help text and exit with code 2.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fusegraph/error.hpp"
#include "fusegraph/eval.hpp"
#include "fusegraph/index.hpp"
#include "fusegraph/io.hpp"
#include "fusegraph/search.hpp"
#include "fusegraph/synth.hpp"
#include "fusegraph/update.hpp"

namespace {

using namespace fusegraph;

struct BuildArgs {
    std::string corpus;
    std::string kg;
    std::string out;
    uint32_t degree = 32;
    uint32_t knn_k = 32;
    uint32_t iters = 10;
    uint64_t seed = 42;
    uint32_t x_hops = 2;
    unsigned threads = 0;
};

int run_build(const BuildArgs& a) {
    DocumentStore store = load_corpus(a.corpus);
    KnowledgeGraph kg;
    if (!a.kg.empty()) kg = load_kg(a.kg);

    BuildParams params;
    params.degree = a.degree;
    params.knn_k = a.knn_k;
    params.knn_iterations = a.iters;
    params.seed = a.seed;
    params.default_entity_hops = a.x_hops;
    params.threads = a.threads;

    HybridIndex index = build_hybrid_index(std::move(store), std::move(kg), params);
    const uint64_t bytes = serialize_index(index, a.out);
    std::printf("built %zu docs (degree %u) -> %s (%llu bytes)\n", index.size(), index.degree,
                a.out.c_str(), static_cast<unsigned long long>(bytes));
    return 0;
}

struct QueryArgs {
    std::string index;
    std::string queries;
    std::string out = "-";
    uint32_t k = 10;
    uint32_t beam = 64;
    uint32_t x_hops = 0;
    bool x_hops_set = false;
    unsigned threads = 0;
};

int run_query(const QueryArgs& a) {
    HybridIndex index = deserialize_index(a.index);

    QueryDefaults defaults;
    defaults.k = a.k;
    defaults.beam = a.beam;
    defaults.max_entity_hops = a.x_hops_set ? a.x_hops : index.default_entity_hops;
    std::vector<QuerySpec> queries = load_queries(a.queries, defaults);

    std::vector<SearchResult> results = batch_query(index, queries, a.threads);
    write_results(a.out == "-" ? "/dev/stdout" : a.out, results);
    return 0;
}

struct BenchArgs {
    std::string index;
    std::string queries;
    std::string truth;
    std::string out;
    std::vector<uint32_t> beams;
    unsigned threads = 0;
};

int run_bench(const BenchArgs& a) {
    HybridIndex index = deserialize_index(a.index);
    std::vector<QuerySpec> queries = load_queries(a.queries);
    std::vector<TruthEntry> entries = load_truth(a.truth);

    std::vector<std::vector<uint64_t>> truth(queries.size());
    for (const TruthEntry& e : entries) {
        if (e.qid >= truth.size())
            throw Error("truth-mismatch",
                        "truth qid " + std::to_string(e.qid) + " has no matching query");
        truth[e.qid] = e.relevant;
    }

    std::vector<uint32_t> beams = a.beams;
    if (beams.empty()) beams = {16, 32, 64, 128};

    std::vector<BenchRow> rows = run_benchmark(index, queries, truth, beams, a.threads);
    if (a.out.empty()) {
        write_report_csv("/dev/stdout", rows);
    } else {
        write_report_csv(a.out, rows);
        std::fputs(format_report_table(rows).c_str(), stdout);
    }
    return 0;
}

struct InsertArgs {
    std::string index;
    std::string corpus;
    std::string out;
    uint32_t knn_k = 0;
    uint32_t iters = 10;
    unsigned threads = 0;
};

int run_insert(const InsertArgs& a) {
    HybridIndex index = deserialize_index(a.index);
    DocumentStore batch = load_corpus(a.corpus);

    InsertParams params;
    params.knn_k = a.knn_k;
    params.nn_descent_iterations = a.iters;
    params.threads = a.threads;
    insert_batch(index, std::move(batch.docs), params);

    const uint64_t bytes = serialize_index(index, a.out);
    std::printf("inserted -> %zu docs total, %s (%llu bytes)\n", index.size(), a.out.c_str(),
                static_cast<unsigned long long>(bytes));
    return 0;
}

struct DeleteArgs {
    std::string index;
    std::string out;
    std::vector<uint64_t> ids;
};

int run_delete(const DeleteArgs& a) {
    HybridIndex index = deserialize_index(a.index);
    mark_delete(index, a.ids);
    const uint64_t bytes = serialize_index(index, a.out);
    std::printf("deleted %zu ids -> %s (%llu bytes)\n", a.ids.size(), a.out.c_str(),
                static_cast<unsigned long long>(bytes));
    return 0;
}

struct GenArgs {
    std::string out;
    uint32_t docs = 1000;
    uint32_t dense_dim = 16;
    uint32_t entity_vocab = 0;
    uint32_t kg_triplets = 0;
    uint32_t chains = 0;
    uint32_t num_queries = 20;
    uint32_t k = 10;
    uint64_t seed = 1;
    unsigned threads = 0;
};

int run_gen(const GenArgs& a) {
    SynthParams params;
    params.docs = a.docs;
    params.dense_dim = a.dense_dim;
    params.entity_vocab = a.entity_vocab;
    params.kg_triplets = a.kg_triplets;
    params.chains = a.chains;
    params.seed = a.seed;

    SynthData data = generate_corpus(params);

    SplitMix64 rng(mix_seed(a.seed, 0x71e5));
    std::vector<QuerySpec> queries;
    std::vector<TruthEntry> truth;
    queries.reserve(a.num_queries);
    for (uint32_t i = 0; i < a.num_queries; ++i) {
        QuerySpec q;
        q.vector = random_query_vector(params, rng);
        q.weights = random_simplex_weights(rng);
        q.k = a.k;
        queries.push_back(std::move(q));
    }
    for (uint32_t i = 0; i < a.num_queries; ++i) {
        TruthEntry e;
        e.qid = i;
        for (const SearchHit& hit : brute_force_topk(data.store, queries[i], a.threads))
            e.relevant.push_back(hit.doc_id);
        truth.push_back(std::move(e));
    }

    std::filesystem::create_directories(a.out);
    const std::string prefix = a.out + "/";
    write_corpus(prefix + "corpus.jsonl", data.store);
    write_queries(prefix + "queries.jsonl", queries);
    write_truth(prefix + "truth.jsonl", truth);
    if (!data.kg.empty()) write_kg(prefix + "kg.jsonl", data.kg);
    std::printf("generated %u docs, %u queries -> %s\n", a.docs, a.num_queries, a.out.c_str());
    return 0;
}

int run_validate(const std::string& path) {
    HybridIndex index = deserialize_index(path, /*validate=*/true);
    std::printf("index ok: %zu docs, degree %u\n", index.size(), index.degree);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid graph index for dense, sparse, keyword and knowledge-hop search"};
    app.require_subcommand(1);

    BuildArgs build_args;
    CLI::App* build = app.add_subcommand("build", "Build an index from a corpus");
    build->add_option("--corpus", build_args.corpus, "Corpus JSON-lines")->required();
    build->add_option("--kg", build_args.kg, "Knowledge-graph triplets JSON-lines");
    build->add_option("--out", build_args.out, "Output index file")->required();
    build->add_option("--degree", build_args.degree, "Semantic edges per node (even)");
    build->add_option("--knn-k", build_args.knn_k, "Candidate-list width (>= degree)");
    build->add_option("--iters", build_args.iters, "Neighbour-descent iteration budget");
    build->add_option("--seed", build_args.seed, "Build seed");
    build->add_option("--x-hops", build_args.x_hops, "Default entity-hop cutoff for queries");
    build->add_option("--threads", build_args.threads, "Worker count (0 = all cores)");

    QueryArgs query_args;
    CLI::App* query = app.add_subcommand("query", "Run queries against an index");
    query->add_option("--index", query_args.index, "Index file")->required();
    query->add_option("--queries", query_args.queries, "Queries JSON-lines")->required();
    query->add_option("--out", query_args.out, "Results JSON-lines ('-' = stdout)");
    query->add_option("--k", query_args.k, "Default result count");
    query->add_option("--beam", query_args.beam, "Default beam width");
    auto* xh = query->add_option("--x-hops", query_args.x_hops, "Default entity-hop cutoff");
    query->add_option("--threads", query_args.threads, "Worker count (0 = all cores)");

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "Benchmark an index against ground truth");
    bench->add_option("--index", bench_args.index, "Index file")->required();
    bench->add_option("--queries", bench_args.queries, "Queries JSON-lines")->required();
    bench->add_option("--truth", bench_args.truth, "Truth JSON-lines")->required();
    bench->add_option("--beam", bench_args.beams, "Beam widths to sweep (repeatable)");
    bench->add_option("--out", bench_args.out, "CSV report path (default: CSV on stdout)");
    bench->add_option("--threads", bench_args.threads, "Worker count (0 = all cores)");

    InsertArgs insert_args;
    CLI::App* insert = app.add_subcommand("insert", "Insert new documents into an index");
    insert->add_option("--index", insert_args.index, "Input index file")->required();
    insert->add_option("--corpus", insert_args.corpus, "New documents JSON-lines")->required();
    insert->add_option("--out", insert_args.out, "Output index file")->required();
    insert->add_option("--knn-k", insert_args.knn_k, "Candidate width (0 = build-time value)");
    insert->add_option("--iters", insert_args.iters, "Neighbour-descent iteration budget");
    insert->add_option("--threads", insert_args.threads, "Worker count (0 = all cores)");

    DeleteArgs delete_args;
    CLI::App* del = app.add_subcommand("delete", "Mark documents as deleted");
    del->add_option("--index", delete_args.index, "Input index file")->required();
    del->add_option("--out", delete_args.out, "Output index file")->required();
    del->add_option("ids", delete_args.ids, "Doc ids to delete")->required();

    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic corpus, queries and truth");
    gen->add_option("--out", gen_args.out, "Output directory")->required();
    gen->add_option("--docs", gen_args.docs, "Document count");
    gen->add_option("--dense-dim", gen_args.dense_dim, "Dense dimension");
    gen->add_option("--entity-vocab", gen_args.entity_vocab, "Entity vocabulary (0 = none)");
    gen->add_option("--kg-triplets", gen_args.kg_triplets, "Random knowledge-graph triplets");
    gen->add_option("--chains", gen_args.chains, "Planted two-hop entity chains");
    gen->add_option("--num-queries", gen_args.num_queries, "Query count");
    gen->add_option("--k", gen_args.k, "Truth depth per query");
    gen->add_option("--seed", gen_args.seed, "Generation seed");
    gen->add_option("--threads", gen_args.threads, "Worker count (0 = all cores)");

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "Run the full invariant scan on an index");
    validate->add_option("--index", validate_path, "Index file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: usage: %s\n", e.what());
        std::fputs(app.help().c_str(), stderr);
        return 2;
    }

    query_args.x_hops_set = xh->count() > 0;

    try {
        if (build->parsed()) return run_build(build_args);
        if (query->parsed()) return run_query(query_args);
        if (bench->parsed()) return run_bench(bench_args);
        if (insert->parsed()) return run_insert(insert_args);
        if (del->parsed()) return run_delete(delete_args);
        if (gen->parsed()) return run_gen(gen_args);
        if (validate->parsed()) return run_validate(validate_path);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: io-error: %s\n", e.what());
        return 1;
    }
    return 0;
}
