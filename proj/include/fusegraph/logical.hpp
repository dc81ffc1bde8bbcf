#pragma once

/// Knowledge-graph augmentation: logical edges let the search jump from a
/// document straight to documents about *related* entities, even when the
/// two are far apart in vector space.
///
/// For a node u and each entity s it mentions, every triplet (s, r, t) with
/// t not mentioned by u produces edges to all nodes that do mention t. Edges
/// are grouped by source entity so the query path can expand exactly the
/// group matching its current entity context.

#include <cstdint>
#include <map>
#include <vector>

#include "fusegraph/types.hpp"

namespace fusegraph {

/// entity id → nodes mentioning it, ascending and unique.
using EntityMap = std::map<uint32_t, std::vector<uint32_t>>;

EntityMap build_entity_map(const DocumentStore& store);

/// One knowledge-hop edge out of a node: from its own entity `source` via
/// `relation` to entity `target`, landing on node `via` (which mentions
/// `target`; the owning node does not).
struct LogicalEdge {
    uint32_t source = 0;
    uint32_t relation = 0;
    uint32_t target = 0;
    uint32_t via = 0;

    bool operator==(const LogicalEdge&) const = default;
};

struct LogicalParams {
    /// Edge budget per (node, source entity); when a group overflows, edges
    /// whose target entity has higher knowledge-graph degree win, so the
    /// best-connected continuations survive.
    uint32_t per_entity_cap = 64;
    unsigned threads = 1;
};

/// Logical edges of one node, grouped by ascending source entity; inside a
/// group, descending target degree, then ascending (target, via). Unique on
/// (source, target, via).
std::vector<LogicalEdge> derive_logical_edges_for(const DocumentStore& store, uint32_t node,
                                                  const KnowledgeGraph& kg,
                                                  const EntityMap& entity_map,
                                                  uint32_t per_entity_cap);

/// Same, over every node of the corpus.
std::vector<std::vector<LogicalEdge>> derive_logical_edges(const DocumentStore& store,
                                                           const KnowledgeGraph& kg,
                                                           const EntityMap& entity_map,
                                                           const LogicalParams& params);

} // namespace fusegraph
