#include "fusegraph/logical.hpp"

#include <algorithm>

#include "fusegraph/parallel.hpp"

namespace fusegraph {

EntityMap build_entity_map(const DocumentStore& store) {
    EntityMap map;
    for (std::size_t n = 0; n < store.docs.size(); ++n)
        for (uint32_t e : store.docs[n].entities)
            map[e].push_back(static_cast<uint32_t>(n));
    return map; // node order is ascending by construction
}

std::vector<LogicalEdge> derive_logical_edges_for(const DocumentStore& store, uint32_t node,
                                                  const KnowledgeGraph& kg,
                                                  const EntityMap& entity_map,
                                                  uint32_t per_entity_cap) {
    const auto& own = store.docs[node].entities;
    std::vector<LogicalEdge> out;

    for (uint32_t source : own) {
        std::vector<LogicalEdge> group;
        // kg.neighbors lists one entry per (target, relation); a pair linked
        // by several relations must not duplicate its edges, so only the
        // first (smallest) relation per target is expanded.
        bool have_prev = false;
        uint32_t prev_target = 0;
        for (const auto& [target, relation] : kg.neighbors(source)) {
            if (have_prev && target == prev_target) continue;
            have_prev = true;
            prev_target = target;
            if (sorted_contains(own, target)) continue;
            auto it = entity_map.find(target);
            if (it == entity_map.end()) continue;
            for (uint32_t via : it->second) {
                if (via == node) continue;
                group.push_back({source, relation, target, via});
            }
        }
        std::stable_sort(group.begin(), group.end(),
                         [&](const LogicalEdge& a, const LogicalEdge& b) {
                             const std::size_t da = kg.degree(a.target);
                             const std::size_t db = kg.degree(b.target);
                             if (da != db) return da > db;
                             if (a.target != b.target) return a.target < b.target;
                             return a.via < b.via;
                         });
        if (group.size() > per_entity_cap) group.resize(per_entity_cap);
        out.insert(out.end(), group.begin(), group.end());
    }
    return out;
}

std::vector<std::vector<LogicalEdge>> derive_logical_edges(const DocumentStore& store,
                                                           const KnowledgeGraph& kg,
                                                           const EntityMap& entity_map,
                                                           const LogicalParams& params) {
    const std::size_t n = store.size();
    std::vector<std::vector<LogicalEdge>> edges(n);
    parallel_for(n, params.threads, [&](std::size_t u) {
        edges[u] = derive_logical_edges_for(store, static_cast<uint32_t>(u), kg, entity_map,
                                            params.per_entity_cap);
    });
    return edges;
}

} // namespace fusegraph
