#include "fusegraph/index.hpp"

#include <algorithm>
#include <numeric>

#include "fusegraph/error.hpp"
#include "fusegraph/knn_graph.hpp"
#include "fusegraph/log.hpp"

namespace fusegraph {

void rebuild_norm_order(HybridIndex& index) {
    index.norm_order.resize(index.size());
    std::iota(index.norm_order.begin(), index.norm_order.end(), 0u);
    // Largest norms first: under inner-product scoring, high-norm nodes are
    // the likeliest global winners and make the strongest entry hubs.
    std::sort(index.norm_order.begin(), index.norm_order.end(), [&](uint32_t a, uint32_t b) {
        const double na = index.store.docs[a].vector.squared_norm;
        const double nb = index.store.docs[b].vector.squared_norm;
        if (na != nb) return na > nb;
        return a < b;
    });
}

HybridIndex build_hybrid_index(DocumentStore store, KnowledgeGraph kg, const BuildParams& params,
                               RefineTrace* trace) {
    if (params.degree % 2 != 0)
        throw Error("degree-not-even", "semantic degree must be even, got " +
                                           std::to_string(params.degree));
    if (params.knn_k < params.degree)
        throw Error("invalid-k", "knn_k must be at least the degree");
    if (store.size() < params.degree + 1)
        throw Error("corpus-too-small", "need more than degree=" +
                                            std::to_string(params.degree) + " documents");

    HybridIndex index;
    index.degree = params.degree;
    index.knn_k = params.knn_k;
    index.logical_cap = params.logical_cap;
    index.default_entity_hops = params.default_entity_hops;
    index.build_seed = params.seed;

    KnnBuildParams knn;
    knn.k = params.knn_k;
    knn.max_iterations = params.knn_iterations;
    knn.seed = params.seed;
    knn.threads = params.threads;
    KnnGraph graph = build_knn_graph(store, knn);
    log::info("build: knn graph ready (%zu nodes, k=%u)", graph.size(), graph.k);

    RefineParams refine;
    refine.degree = params.degree;
    refine.per_neighbour_keyword_check = params.per_neighbour_keyword_check;
    refine.threads = params.threads;
    RefinedEdges edges = refine_graph(store, graph, refine, trace);
    index.semantic = std::move(edges.semantic);
    index.keyword = std::move(edges.keyword);

    index.store = std::move(store);
    index.kg = std::move(kg);
    index.entity_map = build_entity_map(index.store);

    LogicalParams logical;
    logical.per_entity_cap = params.logical_cap;
    logical.threads = params.threads;
    index.logical = derive_logical_edges(index.store, index.kg, index.entity_map, logical);

    rebuild_norm_order(index);
    log::info("build: index complete (degree=%u)", index.degree);
    return index;
}

namespace {

void check(bool ok, const char* what, std::size_t node) {
    if (!ok)
        throw Error("invariant-violation",
                    std::string(what) + " at node " + std::to_string(node));
}

} // namespace

void validate_index(const HybridIndex& index) {
    const std::size_t n = index.size();
    if (index.semantic.size() != n || index.keyword.size() != n || index.logical.size() != n)
        throw Error("invariant-violation", "edge table sizes disagree with the corpus");

    for (std::size_t u = 0; u < n; ++u) {
        const auto& sem = index.semantic[u];
        check(sem.size() == index.degree, "semantic degree", u);

        auto sorted = sem;
        std::sort(sorted.begin(), sorted.end());
        check(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
              "duplicate semantic edge", u);
        check(!std::binary_search(sorted.begin(), sorted.end(), static_cast<uint32_t>(u)),
              "semantic self-loop", u);
        for (uint32_t v : sem) check(v < n, "semantic edge out of range", u);

        for (uint32_t v : index.keyword[u]) {
            check(v < n && v != u, "keyword edge target", u);
            check(!std::binary_search(sorted.begin(), sorted.end(), v),
                  "keyword/semantic overlap", u);
        }

        const auto& own = index.store.docs[u].entities;
        for (const LogicalEdge& e : index.logical[u]) {
            check(sorted_contains(own, e.source), "logical source not mentioned", u);
            check(!sorted_contains(own, e.target), "logical target mentioned by owner", u);
            check(e.via < n && e.via != u, "logical via node", u);
            check(sorted_contains(index.store.docs[e.via].entities, e.target),
                  "logical via lacks target entity", u);
            check(index.kg.has_relation(e.source, e.target), "logical edge not in KG", u);
        }
    }

    // Entity map round trip: u under e iff e ∈ entities(u).
    for (const auto& [entity, nodes] : index.entity_map) {
        check(std::is_sorted(nodes.begin(), nodes.end()), "entity map order", entity);
        for (uint32_t u : nodes)
            check(u < n && sorted_contains(index.store.docs[u].entities, entity),
                  "entity map stale node", entity);
    }
    for (std::size_t u = 0; u < n; ++u)
        for (uint32_t e : index.store.docs[u].entities) {
            auto it = index.entity_map.find(e);
            check(it != index.entity_map.end() &&
                      std::binary_search(it->second.begin(), it->second.end(),
                                         static_cast<uint32_t>(u)),
                  "entity map missing node", u);
        }

    check(index.norm_order.size() == n, "norm order size", 0);
    for (std::size_t i = 1; i < index.norm_order.size(); ++i) {
        const double a = index.store.docs[index.norm_order[i - 1]].vector.squared_norm;
        const double b = index.store.docs[index.norm_order[i]].vector.squared_norm;
        check(a > b || (a == b && index.norm_order[i - 1] < index.norm_order[i]),
              "norm order broken", i);
    }
}

} // namespace fusegraph
