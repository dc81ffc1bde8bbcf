#include "fusegraph/types.hpp"

#include <algorithm>
#include <cmath>

#include "fusegraph/scoring.hpp"

namespace fusegraph {

void validate_weights(const Weights& w) {
    const float parts[4] = {w.dense, w.learned, w.statistical, w.entity};
    for (float p : parts) {
        if (!std::isfinite(p) || p < 0.0f)
            throw Error("invalid-weights", "weights must be finite and non-negative");
    }
    if (w.dense <= 0.0f && w.learned <= 0.0f && w.statistical <= 0.0f)
        throw Error("invalid-weights", "at least one vector-path weight must be positive");
}

void validate_query(const QuerySpec& q) {
    validate_weights(q.weights);
    if (q.k == 0) throw Error("invalid-k", "k must be positive");
    if (q.beam_width < q.k)
        throw Error("beam-too-small", "beam_width must be at least k");
    if (q.weights.entity > 0.0f && q.entities.empty())
        throw Error("entities-required", "entity weight is positive but the query names no entities");
}

KnowledgeGraph::KnowledgeGraph(std::vector<Triplet> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        if (a.source != b.source) return a.source < b.source;
        if (a.relation != b.relation) return a.relation < b.relation;
        return a.target < b.target;
    });
    triplets.erase(std::unique(triplets.begin(), triplets.end()), triplets.end());
    triplets_ = std::move(triplets);
    for (const Triplet& t : triplets_) {
        adjacency_[t.source].emplace_back(t.target, t.relation);
        adjacency_[t.target].emplace_back(t.source, t.relation);
    }
    for (auto& [entity, list] : adjacency_) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
}

std::span<const std::pair<uint32_t, uint32_t>> KnowledgeGraph::neighbors(uint32_t entity) const {
    auto it = adjacency_.find(entity);
    if (it == adjacency_.end()) return {};
    return {it->second.data(), it->second.size()};
}

bool KnowledgeGraph::has_relation(uint32_t a, uint32_t b) const {
    auto list = neighbors(a);
    auto it = std::lower_bound(list.begin(), list.end(), std::pair<uint32_t, uint32_t>{b, 0});
    return it != list.end() && it->first == b;
}

uint32_t KnowledgeGraph::relation_between(uint32_t a, uint32_t b) const {
    auto list = neighbors(a);
    auto it = std::lower_bound(list.begin(), list.end(), std::pair<uint32_t, uint32_t>{b, 0});
    if (it == list.end() || it->first != b)
        throw Error("no-relation", "entities are not related in the knowledge graph");
    return it->second;
}

uint32_t DocumentStore::node_of(uint64_t doc_id) const {
    auto it = id_to_node.find(doc_id);
    if (it == id_to_node.end())
        throw Error("unknown-id", "doc id " + std::to_string(doc_id) + " not in corpus");
    return it->second;
}

void finalize_fused(FusedVector& v) {
    double acc = dense_dot(v.dense, v.dense);
    acc += sparse_dot(v.learned, v.learned);
    acc += sparse_dot(v.statistical, v.statistical);
    v.squared_norm = acc;
}

std::vector<uint32_t> sorted_unique(std::vector<uint32_t> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

bool sorted_contains(std::span<const uint32_t> sorted, uint32_t id) {
    return std::binary_search(sorted.begin(), sorted.end(), id);
}

std::vector<uint32_t> sorted_intersection(std::span<const uint32_t> a, std::span<const uint32_t> b) {
    std::vector<uint32_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

} // namespace fusegraph
