#include "fusegraph/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fusegraph/corpus.hpp"
#include "fusegraph/error.hpp"
#include "fusegraph/parallel.hpp"
#include "fusegraph/scoring.hpp"

namespace fusegraph {

std::vector<SearchHit> brute_force_topk(const DocumentStore& store, const QuerySpec& q,
                                        unsigned threads) {
    validate_weights(q.weights);
    if (q.k == 0) throw Error("invalid-k", "k must be positive");

    const FusedVector weighted = build_query_vector(q.vector, q.weights);
    const std::size_t n = store.size();
    std::vector<Score> scores(n);
    parallel_for(n, threads, [&](std::size_t i) {
        scores[i] = hybrid_score(weighted, store.docs[i].vector);
    });

    std::vector<uint32_t> nodes;
    nodes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const DocumentRecord& doc = store.docs[i];
        if (doc.deleted) continue;
        if (!q.required_keywords.empty()) {
            const bool ok = std::all_of(q.required_keywords.begin(), q.required_keywords.end(),
                                        [&](uint32_t t) { return sorted_contains(doc.keywords, t); });
            if (!ok) continue;
        }
        nodes.push_back(static_cast<uint32_t>(i));
    }

    const std::size_t take = std::min<std::size_t>(q.k, nodes.size());
    std::partial_sort(nodes.begin(), nodes.begin() + take, nodes.end(),
                      [&](uint32_t a, uint32_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return store.docs[a].doc_id < store.docs[b].doc_id;
                      });
    nodes.resize(take);

    std::vector<SearchHit> hits;
    hits.reserve(take);
    for (uint32_t node : nodes) hits.push_back({store.docs[node].doc_id, node, scores[node]});
    return hits;
}

double recall_at_k(std::span<const uint64_t> result, std::span<const uint64_t> truth, uint32_t k) {
    if (k == 0) throw Error("invalid-k", "recall@k needs k > 0");
    std::vector<uint64_t> sorted_truth(truth.begin(), truth.end());
    std::sort(sorted_truth.begin(), sorted_truth.end());
    std::size_t hits = 0;
    const std::size_t take = std::min<std::size_t>(k, result.size());
    for (std::size_t i = 0; i < take; ++i)
        if (std::binary_search(sorted_truth.begin(), sorted_truth.end(), result[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(k);
}

double ndcg_at_k(std::span<const uint64_t> result,
                 const std::unordered_map<uint64_t, double>& gains, uint32_t k) {
    if (k == 0) throw Error("invalid-k", "nDCG@k needs k > 0");

    double dcg = 0.0;
    const std::size_t take = std::min<std::size_t>(k, result.size());
    for (std::size_t i = 0; i < take; ++i) {
        auto it = gains.find(result[i]);
        if (it != gains.end())
            dcg += it->second / std::log2(static_cast<double>(i) + 2.0);
    }

    std::vector<double> ideal;
    ideal.reserve(gains.size());
    for (const auto& [id, g] : gains) ideal.push_back(g);
    std::sort(ideal.begin(), ideal.end(), std::greater<>());

    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(k, ideal.size()); ++i)
        idcg += ideal[i] / std::log2(static_cast<double>(i) + 2.0);

    return idcg > 0.0 ? dcg / idcg : 0.0;
}

std::vector<BenchRow> run_benchmark(const HybridIndex& index, std::span<const QuerySpec> queries,
                                    std::span<const std::vector<uint64_t>> truth,
                                    std::span<const uint32_t> beams, unsigned threads) {
    if (queries.size() != truth.size())
        throw Error("truth-mismatch", "query and truth counts differ: " +
                                          std::to_string(queries.size()) + " vs " +
                                          std::to_string(truth.size()));

    std::vector<BenchRow> rows;
    for (uint32_t beam : beams) {
        std::vector<QuerySpec> run(queries.begin(), queries.end());
        for (QuerySpec& q : run) q.beam_width = std::max(beam, q.k);

        const auto start = std::chrono::steady_clock::now();
        const auto results = batch_query(index, run, threads);
        const auto stop = std::chrono::steady_clock::now();
        const double seconds = std::chrono::duration<double>(stop - start).count();

        BenchRow row;
        row.beam = beam;
        if (!run.empty()) {
            row.qps = static_cast<double>(run.size()) / std::max(seconds, 1e-12);
            row.latency_ms = seconds * 1000.0 / static_cast<double>(run.size());
        }
        for (std::size_t i = 0; i < run.size(); ++i) {
            if (!results[i].error.empty())
                throw Error("query-failed", "query " + std::to_string(i) + ": " +
                                                results[i].error);
            std::vector<uint64_t> ids;
            ids.reserve(results[i].hits.size());
            for (const SearchHit& h : results[i].hits) ids.push_back(h.doc_id);
            std::unordered_map<uint64_t, double> gains;
            for (uint64_t t : truth[i]) gains[t] = 1.0;
            row.recall += recall_at_k(ids, truth[i], run[i].k);
            row.ndcg += ndcg_at_k(ids, gains, run[i].k);
        }
        if (!run.empty()) {
            row.recall /= static_cast<double>(run.size());
            row.ndcg /= static_cast<double>(run.size());
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace fusegraph
