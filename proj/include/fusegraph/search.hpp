#pragma once

/// Weighted greedy beam search over the hybrid index.
///
/// One traversal serves any weight vector: the query vector is scaled by the
/// path weights up front (the index itself is never touched). The search
/// keeps three pools:
///   - cand:   the beam — best `beam_width` scored nodes, expanded
///             nearest-first until no unexpanded entry remains,
///   - topk:   best k non-deleted nodes seen anywhere,
///   - kwCand: nodes evicted from topk that share at least one required
///             keyword, kept so the final filter can still return them.
///
/// Entity context rides along the traversal: entity-seeded entries start at
/// hop 0; while a node's hop is below the query's hop cap, its expansion
/// assigns each neighbour the smallest related entity and hop+1, and the
/// neighbour's distance is discounted by weights.entity / hop. Logical edges
/// are loaded only for the group matching the node's current entity, and
/// keyword edges only when the node shares a required keyword.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fusegraph/index.hpp"
#include "fusegraph/types.hpp"

namespace fusegraph {

struct SearchHit {
    uint64_t doc_id = 0;
    uint32_t node = 0;
    /// Weighted similarity plus any entity-hop reward (higher is better).
    Score score = 0.0;
};

struct SearchResult {
    std::vector<SearchHit> hits; ///< at most k; may be shorter on keyword shortfall
    std::vector<std::string> warnings;
    std::string error;           ///< nonempty when a batched query failed validation
    std::size_t expanded = 0;    ///< nodes expanded (diagnostic)
};

struct SearchOptions {
    uint32_t entry_count = kDefaultEntryCount;
    /// true: returned docs must contain every required keyword; false: any.
    bool conjunctive_filter = true;
};

/// One seeded entry point; `entity` is meaningful only when `has_entity`.
struct EntrySeed {
    uint32_t node = 0;
    uint32_t entity = 0;
    bool has_entity = false;
};

/// Entity seeds (hop 0) when the query names entities and the entity weight
/// is positive; otherwise the `entry_count` largest-norm nodes. When entity
/// mode matches nothing, falls back to norm seeds and sets *fallback.
std::vector<EntrySeed> select_entry_points(const HybridIndex& index, const QuerySpec& q,
                                           uint32_t entry_count, bool* fallback = nullptr);

/// A pool entry: adjusted distance (negated reward-adjusted similarity),
/// lower is better; ties break on ascending node id.
struct PoolEntry {
    Score dist = 0.0;
    uint32_t node = 0;
};

/// Final assembly: merges the top-k pool with the keyword twin pool, drops
/// deleted nodes, applies the keyword filter when `required` is nonempty,
/// ranks by adjusted distance, truncates to k. Sets *shortfall when fewer
/// than k qualify (the result is not padded: every returned doc satisfies
/// the filter).
std::vector<PoolEntry> keyword_postfilter(const DocumentStore& store,
                                          std::span<const PoolEntry> topk,
                                          std::span<const PoolEntry> keyword_pool,
                                          std::span<const uint32_t> required, uint32_t k,
                                          bool conjunctive, bool* shortfall = nullptr);

SearchResult search(const HybridIndex& index, const QuerySpec& q, const SearchOptions& opts = {});

/// Runs queries in parallel; each query's result is identical to a serial
/// run. Per-query validation errors land in that result's `error` field
/// without aborting the batch.
std::vector<SearchResult> batch_query(const HybridIndex& index, std::span<const QuerySpec> queries,
                                      unsigned threads = 1, const SearchOptions& opts = {});

} // namespace fusegraph
