#pragma once

/// The hybrid index: one graph serving dense, learned-sparse, statistical
/// and knowledge-hop retrieval at any query-time weighting.
///
/// Construction builds the k-NN graph on *unweighted* fused vectors, refines
/// it into fixed-degree semantic edges plus keyword edges, and grafts
/// logical edges from the knowledge graph. Queries re-weight only their own
/// vector, so one build serves every weight vector (the index never changes
/// during search).

#include <cstdint>
#include <vector>

#include "fusegraph/logical.hpp"
#include "fusegraph/refine.hpp"
#include "fusegraph/types.hpp"

namespace fusegraph {

struct BuildParams {
    uint32_t degree = 32;         ///< d: semantic edges per node; must be even
    uint32_t knn_k = 32;          ///< k-NN list width; must be >= degree
    uint32_t knn_iterations = 10; ///< neighbour-descent pass budget
    uint64_t seed = 42;
    uint32_t logical_cap = 64;      ///< logical edges per (node, source entity)
    uint32_t default_entity_hops = 2; ///< default hop cutoff recorded for queries
    bool per_neighbour_keyword_check = false;
    unsigned threads = 1;
};

/// Immutable after construction (except through the maintenance API).
struct HybridIndex {
    DocumentStore store;
    KnowledgeGraph kg;

    uint32_t degree = 0;
    uint32_t knn_k = 0; ///< construction-time candidate width, reused by inserts
    uint32_t logical_cap = 64;
    uint32_t default_entity_hops = 2;
    uint64_t build_seed = 0;

    std::vector<std::vector<uint32_t>> semantic;   ///< exactly `degree` per node
    std::vector<std::vector<uint32_t>> keyword;    ///< recycled pruned edges
    std::vector<std::vector<LogicalEdge>> logical; ///< grouped by source entity
    EntityMap entity_map;
    /// All nodes by descending squared norm (ties by id); the first few serve
    /// as default entry points when no entity seeds apply.
    std::vector<uint32_t> norm_order;

    std::size_t size() const noexcept { return store.size(); }
};

/// Number of norm-based entry points a search starts from.
inline constexpr uint32_t kDefaultEntryCount = 32;

/// Full build pipeline. The corpus must already be validated; `kg` may be
/// empty, in which case no logical edges exist. `trace`, when given, records
/// per-node refinery intermediates for structural inspection.
HybridIndex build_hybrid_index(DocumentStore store, KnowledgeGraph kg, const BuildParams& params,
                               RefineTrace* trace = nullptr);

/// Recomputes the norm-sorted entry list (used after maintenance).
void rebuild_norm_order(HybridIndex& index);

/// Scans every structural invariant: degree exactness, keyword/semantic
/// disjointness, no self-loops or duplicates, logical-edge soundness
/// (source mentioned, target not, via mentions target, triplet in the KG),
/// entity-map round trip, and norm-order consistency. Throws on violation.
void validate_index(const HybridIndex& index);

} // namespace fusegraph
