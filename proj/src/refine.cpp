#include "fusegraph/refine.hpp"

#include <algorithm>
#include <numeric>

#include "fusegraph/parallel.hpp"
#include "fusegraph/scoring.hpp"

namespace fusegraph {

ScoreMatrix candidate_pair_scores(const DocumentStore& store, std::span<const Candidate> cands) {
    const std::size_t k = cands.size();
    ScoreMatrix pairs(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const FusedVector& vi = store.docs[cands[i].id].vector;
        for (std::size_t j = i + 1; j < k; ++j) {
            const Score s = hybrid_score(vi, store.docs[cands[j].id].vector);
            pairs[i * k + j] = s;
            pairs[j * k + i] = s;
        }
    }
    return pairs;
}

std::vector<uint32_t> count_detourable_routes(std::span<const Candidate> cands,
                                              const ScoreMatrix& pairs) {
    const std::size_t k = cands.size();
    std::vector<uint32_t> detours(k, 0);
    for (std::size_t v = 0; v < k; ++v) {
        const Score dis_uv = to_distance(cands[v].score);
        for (std::size_t x = 0; x < k; ++x) {
            if (x == v) continue;
            const Score dis_ux = to_distance(cands[x].score);
            const Score dis_xv = to_distance(pairs[x * k + v]);
            if (std::max(dis_ux, dis_xv) < dis_uv) ++detours[v];
        }
    }
    return detours;
}

std::vector<uint32_t> rank_candidates(std::vector<Candidate>& cands, ScoreMatrix& pairs) {
    const std::size_t k = cands.size();
    std::vector<uint32_t> detours = count_detourable_routes(cands, pairs);

    std::vector<uint32_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (detours[a] != detours[b]) return detours[a] < detours[b];
        if (cands[a].score != cands[b].score) return cands[a].score > cands[b].score;
        return cands[a].id < cands[b].id;
    });

    std::vector<Candidate> sorted_cands(k);
    std::vector<uint32_t> sorted_detours(k);
    ScoreMatrix sorted_pairs(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        sorted_cands[i] = cands[order[i]];
        sorted_detours[i] = detours[order[i]];
        for (std::size_t j = 0; j < k; ++j)
            sorted_pairs[i * k + j] = pairs[order[i] * k + order[j]];
    }
    cands = std::move(sorted_cands);
    pairs = std::move(sorted_pairs);
    return sorted_detours;
}

PruneOutcome prune_neighbours(const DocumentStore& store, uint32_t node,
                              std::span<const Candidate> ordered, const ScoreMatrix& pairs,
                              uint32_t degree, bool per_neighbour_keyword_check) {
    const std::size_t k = ordered.size();
    PruneOutcome out;
    if (k == 0) return out;

    const auto& node_kw = store.docs[node].keywords;

    // Positions (into `ordered`) of kept candidates, for score-matrix lookups.
    std::vector<std::size_t> kept_pos;
    out.kept.push_back(ordered[0].id); // hardest-to-replace edge always survives
    kept_pos.push_back(0);

    for (std::size_t v = 1; v < k; ++v) {
        const Score self_ip = store.docs[ordered[v].id].vector.squared_norm;
        std::size_t pruner = k; // first kept neighbour that dominates v, if any
        for (std::size_t w : kept_pos) {
            if (pairs[w * k + v] >= self_ip) {
                pruner = w;
                break;
            }
        }

        if (pruner == k && out.kept.size() < degree) {
            out.kept.push_back(ordered[v].id);
            kept_pos.push_back(v);
            continue;
        }

        // Dropped. Recycle onto the keyword list when the keywords this
        // candidate shares with the node are not already reachable through
        // the kept neighbours.
        auto shared = sorted_intersection(node_kw, store.docs[ordered[v].id].keywords);
        if (shared.empty()) continue;

        bool covered;
        if (per_neighbour_keyword_check && pruner != k) {
            const auto& kw = store.docs[ordered[pruner].id].keywords;
            covered = std::all_of(shared.begin(), shared.end(),
                                  [&](uint32_t s) { return sorted_contains(kw, s); });
        } else {
            covered = std::all_of(shared.begin(), shared.end(), [&](uint32_t s) {
                for (std::size_t w : kept_pos)
                    if (sorted_contains(store.docs[ordered[w].id].keywords, s)) return true;
                return false;
            });
        }
        if (!covered) out.recycled.push_back(ordered[v].id);
    }
    return out;
}

namespace {

/// Step 3: degree/2 forward + degree/2 reverse, padded back to `degree`.
std::vector<std::vector<uint32_t>> merge_reverse_edges(
    const std::vector<std::vector<uint32_t>>& kept,
    const std::vector<std::vector<Candidate>>& ordered, uint32_t degree, unsigned threads) {
    const std::size_t n = kept.size();
    const uint32_t half = degree / 2;

    // keepers[v] = nodes whose kept list contains v, tagged with the position
    // so earlier (harder-to-replace) keepers win the reverse slots.
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> keepers(n); // (pos, keeper)
    for (std::size_t w = 0; w < n; ++w)
        for (std::size_t p = 0; p < kept[w].size(); ++p)
            keepers[kept[w][p]].emplace_back(static_cast<uint32_t>(p), static_cast<uint32_t>(w));

    std::vector<std::vector<uint32_t>> semantic(n);
    parallel_for(n, threads, [&](std::size_t u) {
        auto& list = semantic[u];
        list.reserve(degree);
        auto has = [&](uint32_t id) {
            return std::find(list.begin(), list.end(), id) != list.end();
        };

        const std::size_t forward = std::min<std::size_t>(half, kept[u].size());
        for (std::size_t i = 0; i < forward; ++i) list.push_back(kept[u][i]);

        auto& rev = keepers[u];
        std::sort(rev.begin(), rev.end());
        for (const auto& [pos, w] : rev) {
            if (list.size() >= forward + half) break;
            if (!has(w)) list.push_back(w);
        }

        // Pad: remaining kept edges first, then the ranked candidate list.
        for (std::size_t i = forward; i < kept[u].size() && list.size() < degree; ++i)
            if (!has(kept[u][i])) list.push_back(kept[u][i]);
        for (const Candidate& c : ordered[u]) {
            if (list.size() >= degree) break;
            if (!has(c.id)) list.push_back(c.id);
        }
    });
    return semantic;
}

} // namespace

RefinedEdges refine_graph(const DocumentStore& store, const KnnGraph& knn,
                          const RefineParams& params, RefineTrace* trace) {
    const std::size_t n = knn.size();
    RefinedEdges edges;
    edges.semantic.resize(n);
    edges.keyword.resize(n);

    std::vector<std::vector<uint32_t>> kept(n);
    std::vector<std::vector<Candidate>> ordered(n);
    if (trace) {
        trace->ordered.resize(n);
        trace->detours.resize(n);
        trace->kept.resize(n);
    }

    parallel_for(n, params.threads, [&](std::size_t u) {
        std::vector<Candidate> cands;
        cands.reserve(knn.lists[u].size());
        for (const KnnEntry& e : knn.lists[u]) cands.push_back({e.id, e.score});

        ScoreMatrix pairs = candidate_pair_scores(store, cands);
        std::vector<uint32_t> detours = rank_candidates(cands, pairs);
        PruneOutcome outcome =
            prune_neighbours(store, static_cast<uint32_t>(u), cands, pairs, params.degree,
                             params.per_neighbour_keyword_check);

        if (trace) {
            trace->ordered[u] = cands;
            trace->detours[u] = detours;
            trace->kept[u] = outcome.kept;
        }
        kept[u] = std::move(outcome.kept);
        ordered[u] = std::move(cands);
        edges.keyword[u] = std::move(outcome.recycled);
    });

    edges.semantic = merge_reverse_edges(kept, ordered, params.degree, params.threads);

    // The merge can pull a recycled id back into the semantic list (as a
    // reverse edge or padding); keyword lists stay disjoint from it.
    parallel_for(n, params.threads, [&](std::size_t u) {
        auto& kw = edges.keyword[u];
        const auto& sem = edges.semantic[u];
        kw.erase(std::remove_if(kw.begin(), kw.end(),
                                [&](uint32_t id) {
                                    return std::find(sem.begin(), sem.end(), id) != sem.end();
                                }),
                 kw.end());
    });
    return edges;
}

} // namespace fusegraph
