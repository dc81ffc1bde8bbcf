#pragma once

/// Ground-truth oracles and retrieval metrics.

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "fusegraph/index.hpp"
#include "fusegraph/search.hpp"
#include "fusegraph/types.hpp"

namespace fusegraph {

/// Exhaustive weighted top-k over non-deleted documents; ties break on
/// ascending doc id. When the query requires keywords, documents lacking any
/// required term are filtered out before ranking (conjunctive). Entity-hop
/// rewards are out of scope here: this is the pure vector-space truth.
std::vector<SearchHit> brute_force_topk(const DocumentStore& store, const QuerySpec& q,
                                        unsigned threads = 1);

/// |result[0..k) ∩ truth| / k. Throws on k = 0.
double recall_at_k(std::span<const uint64_t> result, std::span<const uint64_t> truth, uint32_t k);

/// DCG over the first k results with gains/log2(rank+1), normalized by the
/// ideal ordering of all gains; 0 when no positive gain exists.
double ndcg_at_k(std::span<const uint64_t> result,
                 const std::unordered_map<uint64_t, double>& gains, uint32_t k);

struct BenchRow {
    uint32_t beam = 0;
    double qps = 0.0;
    double recall = 0.0;
    double ndcg = 0.0;
    double latency_ms = 0.0;
};

/// One row per beam width: every query is re-run at that beam, timed as a
/// batch, and scored against the truth lists (binary gains). Queries keep
/// their own k.
std::vector<BenchRow> run_benchmark(const HybridIndex& index, std::span<const QuerySpec> queries,
                                    std::span<const std::vector<uint64_t>> truth,
                                    std::span<const uint32_t> beams, unsigned threads = 1);

} // namespace fusegraph
