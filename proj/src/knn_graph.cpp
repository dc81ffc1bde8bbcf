#include "fusegraph/knn_graph.hpp"

#include <algorithm>

#include "fusegraph/error.hpp"
#include "fusegraph/log.hpp"
#include "fusegraph/parallel.hpp"
#include "fusegraph/rng.hpp"
#include "fusegraph/scoring.hpp"

namespace fusegraph {

namespace {

bool better(const KnnEntry& a, const KnnEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

Score pair_score(const DocumentStore& store, uint32_t a, uint32_t b) {
    return hybrid_score(store.docs[a].vector, store.docs[b].vector);
}

/// k distinct nodes from [0, n) \ {self}. Rejection sampling when k is small
/// relative to n, otherwise a partial Fisher–Yates shuffle.
std::vector<uint32_t> sample_neighbours(uint32_t n, uint32_t self, uint32_t k, SplitMix64& rng) {
    std::vector<uint32_t> picks;
    picks.reserve(k);
    if (static_cast<uint64_t>(k) * 4 < n) {
        while (picks.size() < k) {
            const auto cand = static_cast<uint32_t>(bounded(rng, n));
            if (cand == self) continue;
            if (std::find(picks.begin(), picks.end(), cand) != picks.end()) continue;
            picks.push_back(cand);
        }
    } else {
        std::vector<uint32_t> all;
        all.reserve(n - 1);
        for (uint32_t i = 0; i < n; ++i)
            if (i != self) all.push_back(i);
        for (uint32_t i = 0; i < k; ++i) {
            const auto j = i + static_cast<uint32_t>(bounded(rng, all.size() - i));
            std::swap(all[i], all[j]);
            picks.push_back(all[i]);
        }
    }
    return picks;
}

} // namespace

KnnGraph init_random_graph(const DocumentStore& store, uint32_t k, uint64_t seed,
                           unsigned threads) {
    const auto n = static_cast<uint32_t>(store.size());
    if (k == 0) throw Error("invalid-k", "neighbour count must be positive");
    if (n < k + 1)
        throw Error("corpus-too-small", "need at least " + std::to_string(k + 1) +
                                            " documents for k=" + std::to_string(k));

    KnnGraph graph;
    graph.k = k;
    graph.lists.resize(n);
    parallel_for(n, threads, [&](std::size_t u) {
        SplitMix64 rng(mix_seed(seed, u));
        auto picks = sample_neighbours(n, static_cast<uint32_t>(u), k, rng);
        auto& list = graph.lists[u];
        list.reserve(k);
        for (uint32_t v : picks)
            list.push_back({v, pair_score(store, static_cast<uint32_t>(u), v), true});
        std::sort(list.begin(), list.end(), better);
    });
    return graph;
}

std::size_t nn_descent_iterate(const DocumentStore& store, KnnGraph& graph, unsigned threads) {
    const std::size_t n = graph.size();
    const uint32_t k = graph.k;

    // Reverse adjacency, capped at k entries per node by descending edge
    // score so list sizes stay bounded regardless of in-degree skew.
    std::vector<std::vector<KnnEntry>> reverse(n);
    for (std::size_t u = 0; u < n; ++u)
        for (const KnnEntry& e : graph.lists[u])
            reverse[e.id].push_back({static_cast<uint32_t>(u), e.score, e.fresh});
    parallel_for(n, threads, [&](std::size_t u) {
        auto& list = reverse[u];
        std::sort(list.begin(), list.end(), better);
        if (list.size() > k) list.resize(k);
    });

    std::vector<std::vector<KnnEntry>> next(n);
    std::vector<std::size_t> updates(n, 0);

    parallel_for(n, threads, [&](std::size_t u) {
        const auto uid = static_cast<uint32_t>(u);

        // Two-hop candidates through both edge directions. A pair only needs
        // scoring while at least one hop on some path to it is fresh; a pair
        // whose every path is stale was already tried in an earlier pass.
        std::vector<std::pair<uint32_t, bool>> pool; // (candidate, fresh path)
        auto walk = [&](const KnnEntry& hop1) {
            auto extend = [&](const KnnEntry& hop2) {
                if (hop2.id == uid) return;
                pool.emplace_back(hop2.id, hop1.fresh || hop2.fresh);
            };
            for (const KnnEntry& e : graph.lists[hop1.id]) extend(e);
            for (const KnnEntry& e : reverse[hop1.id]) extend(e);
        };
        for (const KnnEntry& e : graph.lists[u]) walk(e);
        for (const KnnEntry& e : reverse[u]) walk(e);

        std::sort(pool.begin(), pool.end());
        // Collapse duplicates, OR-ing the path-freshness flags (sorted order
        // puts a candidate's fresh=false entries first, so the last wins...
        // false < true, hence checking the final duplicate is enough).
        std::vector<std::pair<uint32_t, bool>> cands;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (i + 1 < pool.size() && pool[i + 1].first == pool[i].first) continue;
            if (pool[i].second) cands.push_back(pool[i]);
        }

        // Drop candidates already present; their scores are known.
        std::vector<uint32_t> have;
        have.reserve(graph.lists[u].size());
        for (const KnnEntry& e : graph.lists[u]) have.push_back(e.id);
        std::sort(have.begin(), have.end());

        std::vector<KnnEntry> merged = graph.lists[u];
        for (KnnEntry& e : merged) e.fresh = false; // participated this pass
        for (const auto& [cand, _] : cands) {
            if (std::binary_search(have.begin(), have.end(), cand)) continue;
            merged.push_back({cand, pair_score(store, uid, cand), true});
        }
        std::sort(merged.begin(), merged.end(), better);
        if (merged.size() > k) merged.resize(k);

        std::size_t changed = 0;
        for (const KnnEntry& e : merged)
            if (!std::binary_search(have.begin(), have.end(), e.id)) ++changed;
        updates[u] = changed;
        next[u] = std::move(merged);
    });

    graph.lists = std::move(next);
    std::size_t total = 0;
    for (std::size_t c : updates) total += c;
    return total;
}

KnnGraph build_knn_graph(const DocumentStore& store, const KnnBuildParams& params) {
    const auto n = static_cast<uint32_t>(store.size());
    uint32_t k = params.k;
    if (n >= 2 && k >= n) {
        k = n - 1;
        log::warn("knn: k clamped to %u (corpus holds %u docs)", k, n);
    }

    KnnGraph graph = init_random_graph(store, k, params.seed, params.threads);
    const double denom = static_cast<double>(store.size()) * k;
    for (uint32_t it = 0; it < params.max_iterations; ++it) {
        const std::size_t changed = nn_descent_iterate(store, graph, params.threads);
        log::debug("knn: pass %u replaced %zu entries", it + 1, changed);
        if (static_cast<double>(changed) / denom < params.convergence) break;
    }
    return graph;
}

} // namespace fusegraph
