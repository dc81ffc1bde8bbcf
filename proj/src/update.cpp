#include "fusegraph/update.hpp"

#include <algorithm>

#include "fusegraph/corpus.hpp"
#include "fusegraph/knn_graph.hpp"
#include "fusegraph/log.hpp"
#include "fusegraph/parallel.hpp"
#include "fusegraph/rng.hpp"
#include "fusegraph/scoring.hpp"
#include "fusegraph/search.hpp"

namespace fusegraph {

namespace {

/// Candidate source (a): beam search over the existing graph, unit weights.
std::vector<Candidate> index_candidates(const HybridIndex& index, const FusedVector& vec,
                                        uint32_t k) {
    QuerySpec q;
    q.vector = vec;
    q.k = k;
    q.beam_width = 2 * k;
    const SearchResult r = search(index, q);
    std::vector<Candidate> out;
    out.reserve(r.hits.size());
    for (const SearchHit& h : r.hits) out.push_back({h.node, h.score});
    return out;
}

} // namespace

void insert_batch(HybridIndex& index, std::vector<DocumentRecord> new_docs,
                  const InsertParams& params) {
    if (new_docs.empty()) return;

    const auto n_old = static_cast<uint32_t>(index.size());
    const auto batch = static_cast<uint32_t>(new_docs.size());
    const uint32_t d = index.degree;
    const uint32_t kk = params.knn_k ? params.knn_k : index.knn_k;
    if (kk < d) throw Error("invalid-k", "insert candidate width must be at least the degree");

    // Validate the batch before touching anything.
    for (DocumentRecord& doc : new_docs) {
        const std::string where = "doc " + std::to_string(doc.doc_id);
        if (index.store.id_to_node.count(doc.doc_id))
            throw Error("duplicate-id", where + ": id already in the index");
        if (doc.vector.dense.dim() != index.store.dense_dim)
            throw Error("dim-mismatch", where + ": dense dimension " +
                                            std::to_string(doc.vector.dense.dim()) +
                                            " differs from corpus " +
                                            std::to_string(index.store.dense_dim));
        validate_fused(doc.vector, where);
        doc.keywords = sorted_unique(std::move(doc.keywords));
        doc.entities = sorted_unique(std::move(doc.entities));
        doc.deleted = false;
        finalize_fused(doc.vector);
    }
    for (std::size_t i = 1; i < new_docs.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (new_docs[i].doc_id == new_docs[j].doc_id)
                throw Error("duplicate-id", "doc " + std::to_string(new_docs[i].doc_id) +
                                                ": id repeated within the batch");

    // (a) per new doc, nearest existing nodes through the current graph.
    std::vector<std::vector<Candidate>> from_index(batch);
    parallel_for(batch, params.threads, [&](std::size_t i) {
        from_index[i] = index_candidates(index, new_docs[i].vector, kk);
    });

    // (b) neighbour-descent among the batch itself (skipped for a lone doc).
    std::vector<std::vector<Candidate>> from_batch(batch);
    if (batch > 1) {
        DocumentStore batch_store;
        batch_store.dense_dim = index.store.dense_dim;
        batch_store.docs = new_docs; // copies; the originals move into the index later
        for (uint32_t i = 0; i < batch; ++i) batch_store.id_to_node[new_docs[i].doc_id] = i;

        KnnBuildParams knn;
        knn.k = std::min(kk, batch - 1);
        knn.max_iterations = params.nn_descent_iterations;
        knn.seed = mix_seed(index.build_seed, n_old);
        knn.threads = params.threads;
        const KnnGraph g = build_knn_graph(batch_store, knn);
        for (uint32_t i = 0; i < batch; ++i)
            for (const KnnEntry& e : g.lists[i])
                from_batch[i].push_back({n_old + e.id, e.score});
    }

    for (uint32_t i = 0; i < batch; ++i)
        if (from_index[i].size() + from_batch[i].size() < d)
            throw Error("corpus-too-small",
                        "doc " + std::to_string(new_docs[i].doc_id) + ": only " +
                            std::to_string(from_index[i].size() + from_batch[i].size()) +
                            " insert candidates for degree " + std::to_string(d));

    // Append documents; edge lists for the new nodes are built below.
    index.store.docs.reserve(n_old + batch);
    for (uint32_t i = 0; i < batch; ++i) {
        index.store.id_to_node[new_docs[i].doc_id] = n_old + i;
        for (uint32_t e : new_docs[i].entities) index.entity_map[e].push_back(n_old + i);
        index.store.docs.push_back(std::move(new_docs[i]));
    }

    // Merge the two candidate sources and refine each new node.
    std::vector<std::vector<uint32_t>> kept(batch);
    std::vector<std::vector<Candidate>> ordered(batch);
    std::vector<std::vector<uint32_t>> recycled(batch);
    parallel_for(batch, params.threads, [&](std::size_t i) {
        std::vector<Candidate> cands = from_index[i];
        cands.insert(cands.end(), from_batch[i].begin(), from_batch[i].end());
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.id < b.id;
        });
        if (cands.size() > kk) cands.resize(kk);

        ScoreMatrix pairs = candidate_pair_scores(index.store, cands);
        rank_candidates(cands, pairs);
        PruneOutcome outcome = prune_neighbours(index.store, n_old + static_cast<uint32_t>(i),
                                                cands, pairs, d, false);
        kept[i] = std::move(outcome.kept);
        recycled[i] = std::move(outcome.recycled);
        ordered[i] = std::move(cands);
    });

    // Reverse half among the batch (old nodes never re-select forward edges).
    const uint32_t half = d / 2;
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> keepers(batch); // (pos, keeper)
    for (uint32_t w = 0; w < batch; ++w)
        for (std::size_t p = 0; p < kept[w].size(); ++p)
            if (kept[w][p] >= n_old)
                keepers[kept[w][p] - n_old].emplace_back(static_cast<uint32_t>(p), n_old + w);

    index.semantic.resize(n_old + batch);
    index.keyword.resize(n_old + batch);
    index.logical.resize(n_old + batch);
    parallel_for(batch, params.threads, [&](std::size_t i) {
        auto& list = index.semantic[n_old + i];
        list.reserve(d);
        auto has = [&](uint32_t id) {
            return std::find(list.begin(), list.end(), id) != list.end();
        };
        const std::size_t forward = std::min<std::size_t>(half, kept[i].size());
        for (std::size_t p = 0; p < forward; ++p) list.push_back(kept[i][p]);
        std::sort(keepers[i].begin(), keepers[i].end());
        for (const auto& [pos, w] : keepers[i]) {
            if (list.size() >= forward + half) break;
            if (!has(w)) list.push_back(w);
        }
        for (std::size_t p = forward; p < kept[i].size() && list.size() < d; ++p)
            if (!has(kept[i][p])) list.push_back(kept[i][p]);
        for (const Candidate& c : ordered[i]) {
            if (list.size() >= d) break;
            if (!has(c.id)) list.push_back(c.id);
        }

        auto& kw = index.keyword[n_old + i];
        for (uint32_t id : recycled[i])
            if (!has(id)) kw.push_back(id);

        index.logical[n_old + i] = derive_logical_edges_for(
            index.store, n_old + static_cast<uint32_t>(i), index.kg, index.entity_map,
            index.logical_cap);
    });

    // Existing nodes accommodate new reverse edges by replacing their weakest
    // reverse slot (positions d/2..d-1) when the new edge scores higher.
    // Deterministic order: ascending new node, then its kept list order.
    std::vector<std::vector<Score>> slot_scores(n_old); // lazily filled per touched node
    for (uint32_t i = 0; i < batch; ++i) {
        const uint32_t u = n_old + i;
        const FusedVector& uvec = index.store.docs[u].vector;
        for (uint32_t w : kept[i]) {
            if (w >= n_old) continue;
            auto& sem = index.semantic[w];
            if (std::find(sem.begin(), sem.end(), u) != sem.end()) continue;
            auto& scores = slot_scores[w];
            if (scores.empty()) {
                scores.resize(d - half);
                for (std::size_t s = half; s < d; ++s)
                    scores[s - half] =
                        hybrid_score(index.store.docs[w].vector, index.store.docs[sem[s]].vector);
            }
            const auto weakest = static_cast<std::size_t>(
                std::min_element(scores.begin(), scores.end()) - scores.begin());
            const Score incoming = hybrid_score(index.store.docs[w].vector, uvec);
            if (incoming > scores[weakest]) {
                sem[half + weakest] = u;
                scores[weakest] = incoming;
            }
        }
    }

    rebuild_norm_order(index);
    log::info("insert: %u docs added (corpus now %zu)", batch, index.size());
}

void mark_delete(HybridIndex& index, std::span<const uint64_t> doc_ids) {
    // Resolve every id first so a bad one leaves the index untouched.
    std::vector<uint32_t> nodes;
    nodes.reserve(doc_ids.size());
    for (uint64_t id : doc_ids) nodes.push_back(index.store.node_of(id));
    for (uint32_t node : nodes) index.store.docs[node].deleted = true;
}

} // namespace fusegraph
