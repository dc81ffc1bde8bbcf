#include "fusegraph/search.hpp"

#include <algorithm>

#include "fusegraph/corpus.hpp"
#include "fusegraph/parallel.hpp"
#include "fusegraph/scoring.hpp"

namespace fusegraph {

namespace {

bool entry_less(const PoolEntry& a, const PoolEntry& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.node < b.node;
}

/// Sorted fixed-capacity pool (ascending adjusted distance).
class Pool {
public:
    explicit Pool(std::size_t capacity) : capacity_(capacity) {}

    /// Inserts or repositions `e`; returns the id evicted to make room, or
    /// -1 when nothing was displaced. Content is insertion-order independent:
    /// the pool always holds the best `capacity` entries offered so far.
    int64_t offer(PoolEntry e) {
        auto pos = std::find_if(entries_.begin(), entries_.end(),
                                [&](const PoolEntry& x) { return x.node == e.node; });
        if (pos != entries_.end()) {
            if (!entry_less(e, *pos)) return -1; // no improvement
            entries_.erase(pos);
        } else if (entries_.size() == capacity_) {
            if (!entry_less(e, entries_.back())) return -1; // not good enough
        }
        entries_.insert(std::upper_bound(entries_.begin(), entries_.end(), e, entry_less), e);
        if (entries_.size() > capacity_) {
            const int64_t evicted = entries_.back().node;
            entries_.pop_back();
            return evicted;
        }
        return -1;
    }

    bool contains(uint32_t node) const {
        return std::any_of(entries_.begin(), entries_.end(),
                           [&](const PoolEntry& x) { return x.node == node; });
    }

    const std::vector<PoolEntry>& entries() const { return entries_; }

private:
    std::size_t capacity_;
    std::vector<PoolEntry> entries_;
};

struct NodeState {
    Score raw = 0.0; ///< plain adjusted-free distance −hybrid_score
    uint32_t ent = 0;
    uint32_t hop = 0;
    bool has_ctx = false;
    bool scored = false;
    bool expanded = false;
};

} // namespace

std::vector<EntrySeed> select_entry_points(const HybridIndex& index, const QuerySpec& q,
                                           uint32_t entry_count, bool* fallback) {
    if (fallback) *fallback = false;
    std::vector<EntrySeed> seeds;

    if (!q.entities.empty() && q.weights.entity > 0.0f) {
        for (uint32_t e : q.entities) {
            auto it = index.entity_map.find(e);
            if (it == index.entity_map.end()) continue;
            for (uint32_t node : it->second) seeds.push_back({node, e, true});
        }
        if (!seeds.empty()) {
            // A node matching several query entities keeps the smallest one.
            std::sort(seeds.begin(), seeds.end(), [](const EntrySeed& a, const EntrySeed& b) {
                if (a.node != b.node) return a.node < b.node;
                return a.entity < b.entity;
            });
            seeds.erase(std::unique(seeds.begin(), seeds.end(),
                                    [](const EntrySeed& a, const EntrySeed& b) {
                                        return a.node == b.node;
                                    }),
                        seeds.end());
            return seeds;
        }
        if (fallback) *fallback = true;
    }

    const std::size_t count = std::min<std::size_t>(entry_count, index.norm_order.size());
    seeds.reserve(count);
    for (std::size_t i = 0; i < count; ++i) seeds.push_back({index.norm_order[i], 0, false});
    return seeds;
}

std::vector<PoolEntry> keyword_postfilter(const DocumentStore& store,
                                          std::span<const PoolEntry> topk,
                                          std::span<const PoolEntry> keyword_pool,
                                          std::span<const uint32_t> required, uint32_t k,
                                          bool conjunctive, bool* shortfall) {
    std::vector<PoolEntry> merged(topk.begin(), topk.end());
    if (!required.empty()) merged.insert(merged.end(), keyword_pool.begin(), keyword_pool.end());

    // Dedupe by node keeping the best distance, then rank.
    std::sort(merged.begin(), merged.end(), [](const PoolEntry& a, const PoolEntry& b) {
        if (a.node != b.node) return a.node < b.node;
        return a.dist < b.dist;
    });
    merged.erase(std::unique(merged.begin(), merged.end(),
                             [](const PoolEntry& a, const PoolEntry& b) {
                                 return a.node == b.node;
                             }),
                 merged.end());
    std::sort(merged.begin(), merged.end(), entry_less);

    std::vector<PoolEntry> out;
    out.reserve(k);
    for (const PoolEntry& e : merged) {
        if (out.size() == k) break;
        const DocumentRecord& doc = store.docs[e.node];
        if (doc.deleted) continue;
        if (!required.empty()) {
            const bool ok =
                conjunctive
                    ? std::all_of(required.begin(), required.end(),
                                  [&](uint32_t t) { return sorted_contains(doc.keywords, t); })
                    : std::any_of(required.begin(), required.end(),
                                  [&](uint32_t t) { return sorted_contains(doc.keywords, t); });
            if (!ok) continue;
        }
        out.push_back(e);
    }
    if (shortfall) *shortfall = !required.empty() && out.size() < k;
    return out;
}

SearchResult search(const HybridIndex& index, const QuerySpec& q, const SearchOptions& opts) {
    validate_query(q);
    SearchResult result;

    const std::size_t n = index.size();
    const FusedVector weighted = build_query_vector(q.vector, q.weights);
    const auto& required = q.required_keywords;
    const double entity_weight = q.weights.entity;

    std::vector<NodeState> state(n);
    Pool cand(q.beam_width);
    Pool topk(q.k);
    std::vector<uint32_t> kw_twin;
    std::vector<bool> in_kw_twin(n, false);

    auto adjusted = [&](uint32_t node) {
        const NodeState& s = state[node];
        if (s.has_ctx && s.hop >= 1)
            return s.raw - entity_weight / static_cast<double>(s.hop);
        return s.raw;
    };

    auto shares_required = [&](uint32_t node) {
        const auto& kw = index.store.docs[node].keywords;
        return std::any_of(required.begin(), required.end(),
                           [&](uint32_t t) { return sorted_contains(kw, t); });
    };

    // Offers a node at its current adjusted distance to both pools. Deleted
    // nodes stay routable (cand) but never reach topk or the twin pool.
    auto offer = [&](uint32_t node) {
        const PoolEntry e{adjusted(node), node};
        cand.offer(e);
        if (index.store.docs[node].deleted) return;
        const int64_t evicted = topk.offer(e);
        if (evicted >= 0 && !required.empty() && !in_kw_twin[evicted] &&
            shares_required(static_cast<uint32_t>(evicted))) {
            in_kw_twin[evicted] = true;
            kw_twin.push_back(static_cast<uint32_t>(evicted));
        }
    };

    auto score_node = [&](uint32_t node) {
        if (state[node].scored) return;
        state[node].scored = true;
        state[node].raw = to_distance(hybrid_score(weighted, index.store.docs[node].vector));
    };

    // Assigns entity context (ent, hop) if it beats the current one: smaller
    // hop wins, then smaller entity. Returns true when the state changed.
    auto assign_ctx = [&](uint32_t node, uint32_t ent, uint32_t hop) {
        NodeState& s = state[node];
        if (s.has_ctx && (s.hop < hop || (s.hop == hop && s.ent <= ent))) return false;
        s.has_ctx = true;
        s.ent = ent;
        s.hop = hop;
        return true;
    };

    bool fallback = false;
    const auto seeds = select_entry_points(index, q, opts.entry_count, &fallback);
    if (fallback) result.warnings.emplace_back("entity-fallback");

    std::vector<uint32_t> seed_nodes;
    seed_nodes.reserve(seeds.size());
    for (const EntrySeed& s : seeds) seed_nodes.push_back(s.node);
    const auto seed_scores = batch_scores(weighted, seed_nodes, index.store);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const uint32_t node = seeds[i].node;
        state[node].scored = true;
        state[node].raw = to_distance(seed_scores[i]);
        if (seeds[i].has_entity) assign_ctx(node, seeds[i].entity, 0);
        offer(node);
    }

    std::vector<uint32_t> neighbours;                          // unique, reach order
    std::vector<std::pair<uint32_t, uint32_t>> logical_ctx;    // (via, target entity)
    while (true) {
        const auto& entries = cand.entries();
        auto it = std::find_if(entries.begin(), entries.end(), [&](const PoolEntry& e) {
            return !state[e.node].expanded;
        });
        if (it == entries.end()) break;
        const uint32_t u = it->node;
        state[u].expanded = true;
        ++result.expanded;

        neighbours.clear();
        logical_ctx.clear();
        auto add = [&](uint32_t o) {
            if (std::find(neighbours.begin(), neighbours.end(), o) == neighbours.end())
                neighbours.push_back(o);
        };
        for (uint32_t o : index.semantic[u]) add(o);
        if (!required.empty() && shares_required(u))
            for (uint32_t o : index.keyword[u]) add(o);

        const bool propagate = state[u].has_ctx && state[u].hop < q.max_entity_hops;
        if (propagate) {
            for (const LogicalEdge& e : index.logical[u]) {
                if (e.source != state[u].ent) continue;
                add(e.via);
                logical_ctx.emplace_back(e.via, e.target);
            }
        }

        for (uint32_t o : neighbours) {
            score_node(o);
            if (propagate) {
                const uint32_t hop = state[u].hop + 1;
                // A knowledge-graph relation from u's entity to one of o's
                // entities carries the context over; smallest such entity.
                for (uint32_t e : index.store.docs[o].entities) {
                    if (index.kg.has_relation(state[u].ent, e)) {
                        assign_ctx(o, e, hop);
                        break;
                    }
                }
                for (const auto& [via, target] : logical_ctx)
                    if (via == o) assign_ctx(o, target, hop);
            }
            offer(o);
        }
    }

    std::vector<PoolEntry> kw_entries;
    kw_entries.reserve(kw_twin.size());
    for (uint32_t node : kw_twin) kw_entries.push_back({adjusted(node), node});

    bool shortfall = false;
    const auto final_entries = keyword_postfilter(index.store, topk.entries(), kw_entries,
                                                  required, q.k, opts.conjunctive_filter,
                                                  &shortfall);
    if (shortfall) result.warnings.emplace_back("keyword-shortfall");

    result.hits.reserve(final_entries.size());
    for (const PoolEntry& e : final_entries)
        result.hits.push_back({index.store.docs[e.node].doc_id, e.node, -e.dist});
    return result;
}

std::vector<SearchResult> batch_query(const HybridIndex& index, std::span<const QuerySpec> queries,
                                      unsigned threads, const SearchOptions& opts) {
    std::vector<SearchResult> results(queries.size());
    parallel_for(queries.size(), threads, [&](std::size_t i) {
        try {
            results[i] = search(index, queries[i], opts);
        } catch (const Error& e) {
            results[i].error = e.what();
        }
    });
    return results;
}

} // namespace fusegraph
