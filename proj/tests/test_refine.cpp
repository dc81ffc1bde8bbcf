// Edge refinery: detour ranking, inner-product pruning, keyword recycling
// and the reverse merge, each checked against independent re-evaluation.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <vector>

#include "fusegraph/corpus.hpp"
#include "fusegraph/knn_graph.hpp"
#include "fusegraph/refine.hpp"
#include "fusegraph/rng.hpp"
#include "fusegraph/scoring.hpp"
#include "fusegraph/synth.hpp"
#include "fusegraph/types.hpp"

using namespace fusegraph;

namespace {

DocumentStore random_store(uint32_t n, uint32_t dim, uint32_t kw_vocab, uint64_t seed) {
    SplitMix64 rng(seed);
    DocumentStore store;
    for (uint32_t i = 0; i < n; ++i) {
        DenseVector v;
        v.values.resize(dim);
        for (float& x : v.values) x = static_cast<float>(gaussian(rng));
        std::vector<uint32_t> kw;
        const uint64_t nkw = 1 + bounded(rng, 4);
        for (uint64_t j = 0; j < nkw; ++j) kw.push_back(static_cast<uint32_t>(bounded(rng, kw_vocab)));
        store.docs.push_back(make_document(i, std::move(v), {}, {}, sorted_unique(std::move(kw))));
    }
    validate_corpus(store);
    return store;
}

std::vector<Candidate> candidates_of(const DocumentStore& store, uint32_t u,
                                     std::span<const uint32_t> ids) {
    std::vector<Candidate> out;
    for (uint32_t v : ids)
        out.push_back({v, hybrid_score(store.docs[u].vector, store.docs[v].vector)});
    std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    return out;
}

// O(k^2) re-evaluation of the detour definition straight from scratch.
std::vector<uint32_t> detour_oracle(const DocumentStore& store, uint32_t u,
                                    std::span<const Candidate> cands) {
    std::vector<uint32_t> counts(cands.size(), 0);
    for (std::size_t v = 0; v < cands.size(); ++v) {
        const Score dis_uv = -hybrid_score(store.docs[u].vector, store.docs[cands[v].id].vector);
        for (std::size_t x = 0; x < cands.size(); ++x) {
            if (x == v) continue;
            const Score dis_ux = -hybrid_score(store.docs[u].vector, store.docs[cands[x].id].vector);
            const Score dis_xv =
                -hybrid_score(store.docs[cands[x].id].vector, store.docs[cands[v].id].vector);
            if (std::max(dis_ux, dis_xv) < dis_uv) ++counts[v];
        }
    }
    return counts;
}

// Sequential scalar reference of the whole prune walk: first candidate kept,
// later ones kept iff the list has room and no kept w has IP(w,v) >= IP(v,v);
// dropped ones recycle when some shared keyword is uncovered.
PruneOutcome prune_oracle(const DocumentStore& store, uint32_t u, std::span<const Candidate> ordered,
                          uint32_t degree, bool per_neighbour) {
    PruneOutcome out;
    if (ordered.empty()) return out;
    out.kept.push_back(ordered[0].id);
    for (std::size_t v = 1; v < ordered.size(); ++v) {
        const FusedVector& vec = store.docs[ordered[v].id].vector;
        uint32_t pruner = UINT32_MAX;
        for (uint32_t w : out.kept) {
            if (hybrid_score(store.docs[w].vector, vec) >= vec.squared_norm) {
                pruner = w;
                break;
            }
        }
        if (pruner == UINT32_MAX && out.kept.size() < degree) {
            out.kept.push_back(ordered[v].id);
            continue;
        }
        auto shared =
            sorted_intersection(store.docs[u].keywords, store.docs[ordered[v].id].keywords);
        bool covered = true;
        for (uint32_t term : shared) {
            bool found = false;
            if (per_neighbour && pruner != UINT32_MAX) {
                found = sorted_contains(store.docs[pruner].keywords, term);
            } else {
                for (uint32_t w : out.kept)
                    if (sorted_contains(store.docs[w].keywords, term)) {
                        found = true;
                        break;
                    }
            }
            if (!found) {
                covered = false;
                break;
            }
        }
        if (!shared.empty() && !covered) out.recycled.push_back(ordered[v].id);
    }
    return out;
}

} // namespace

TEST_CASE("a single detourable route is counted, the direct edges stay clean") {
    // dis(A,X)=1, dis(X,Y)=1, dis(A,Y)=3 (dis = -inner product).
    DocumentStore store;
    store.docs.push_back(make_document(0, DenseVector{{1.0f, 0.0f, 0.0f}}, {}, {}));   // A
    store.docs.push_back(make_document(1, DenseVector{{-1.0f, 1.0f, 0.0f}}, {}, {}));  // X
    store.docs.push_back(make_document(2, DenseVector{{-3.0f, -4.0f, 0.0f}}, {}, {})); // Y
    validate_corpus(store);

    std::vector<Candidate> cands = candidates_of(store, 0, std::vector<uint32_t>{1, 2});
    REQUIRE(cands[0].id == 1); // X closer than Y
    ScoreMatrix pairs = candidate_pair_scores(store, cands);
    CHECK(pairs[1] == -1.0); // X·Y

    std::vector<uint32_t> counts = count_detourable_routes(cands, pairs);
    CHECK(counts[0] == 0); // X: no shorter two-leg route exists
    CHECK(counts[1] == 1); // Y: A->X->Y with max(1,1) < 3
}

TEST_CASE("equal distances everywhere mean zero detours (strict inequality)") {
    DocumentStore store;
    store.docs.push_back(make_document(0, DenseVector{{1.0f, 0.0f, 0.0f, 0.0f}}, {}, {}));
    store.docs.push_back(make_document(1, DenseVector{{0.0f, 1.0f, 0.0f, 0.0f}}, {}, {}));
    store.docs.push_back(make_document(2, DenseVector{{0.0f, 0.0f, 1.0f, 0.0f}}, {}, {}));
    store.docs.push_back(make_document(3, DenseVector{{0.0f, 0.0f, 0.0f, 1.0f}}, {}, {}));
    validate_corpus(store);

    std::vector<Candidate> cands = candidates_of(store, 0, std::vector<uint32_t>{1, 2, 3});
    ScoreMatrix pairs = candidate_pair_scores(store, cands);
    for (uint32_t c : count_detourable_routes(cands, pairs)) CHECK(c == 0);
}

TEST_CASE("random 16-candidate lists match the brute-force detour oracle") {
    DocumentStore store = random_store(60, 6, 16, 31);
    SplitMix64 rng(32);
    for (int trial = 0; trial < 20; ++trial) {
        const auto u = static_cast<uint32_t>(bounded(rng, store.size()));
        std::vector<uint32_t> ids;
        while (sorted_unique(ids).size() < 16) {
            const auto v = static_cast<uint32_t>(bounded(rng, store.size()));
            if (v != u) ids.push_back(v);
        }
        std::vector<Candidate> cands = candidates_of(store, u, sorted_unique(std::move(ids)));
        ScoreMatrix pairs = candidate_pair_scores(store, cands);
        CHECK(count_detourable_routes(cands, pairs) == detour_oracle(store, u, cands));
    }
}

TEST_CASE("ranking sorts by detours, breaks ties by similarity then id") {
    // 1-d values u=1, candidates 5,4,3: detour counts are 0,1,2 in that order.
    DocumentStore store;
    store.docs.push_back(make_document(0, DenseVector{{1.0f}}, {}, {}));
    store.docs.push_back(make_document(1, DenseVector{{5.0f}}, {}, {}));
    store.docs.push_back(make_document(2, DenseVector{{4.0f}}, {}, {}));
    store.docs.push_back(make_document(3, DenseVector{{3.0f}}, {}, {}));
    validate_corpus(store);

    // Feed them in the order (3,5,4) so the input counts read [2,0,1].
    std::vector<Candidate> cands;
    for (uint32_t id : {3u, 1u, 2u})
        cands.push_back({id, hybrid_score(store.docs[0].vector, store.docs[id].vector)});
    ScoreMatrix pairs = candidate_pair_scores(store, cands);
    std::vector<uint32_t> detours = rank_candidates(cands, pairs);

    CHECK(detours == std::vector<uint32_t>{0, 1, 2});
    CHECK(cands[0].id == 1);
    CHECK(cands[1].id == 2);
    CHECK(cands[2].id == 3);
    // The matrix moved with the candidates: entry (0,1) is now 5·4.
    CHECK(pairs[1] == 20.0);
}

TEST_CASE("with all counts equal the ranking is the similarity order") {
    DocumentStore store;
    store.docs.push_back(make_document(0, DenseVector{{1.0f, 1.0f, 1.0f, 0.0f}}, {}, {}));
    store.docs.push_back(make_document(1, DenseVector{{0.0f, 0.0f, 0.0f, 2.0f}}, {}, {}));
    store.docs.push_back(make_document(2, DenseVector{{0.5f, 0.0f, 0.0f, 0.0f}}, {}, {}));
    store.docs.push_back(make_document(3, DenseVector{{0.0f, 0.8f, 0.0f, 0.0f}}, {}, {}));
    validate_corpus(store);
    // Scores from node 0: id1 -> 0, id2 -> 0.5, id3 -> 0.8; pairwise products
    // are all 0, so no detours anywhere.
    std::vector<Candidate> cands;
    for (uint32_t id : {1u, 2u, 3u})
        cands.push_back({id, hybrid_score(store.docs[0].vector, store.docs[id].vector)});
    ScoreMatrix pairs = candidate_pair_scores(store, cands);
    rank_candidates(cands, pairs);
    CHECK(cands[0].id == 3);
    CHECK(cands[1].id == 2);
    CHECK(cands[2].id == 1);
}

TEST_CASE("ranking is invariant under input permutation") {
    DocumentStore store = random_store(40, 5, 8, 33);
    SplitMix64 rng(34);
    std::vector<uint32_t> ids;
    for (uint32_t v = 1; v <= 12; ++v) ids.push_back(v);

    std::vector<Candidate> base = candidates_of(store, 0, ids);
    ScoreMatrix base_pairs = candidate_pair_scores(store, base);
    rank_candidates(base, base_pairs);

    std::vector<Candidate> shuffled = candidates_of(store, 0, ids);
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[bounded(rng, i)]);
    ScoreMatrix pairs = candidate_pair_scores(store, shuffled);
    rank_candidates(shuffled, pairs);

    for (std::size_t i = 0; i < base.size(); ++i) CHECK(base[i].id == shuffled[i].id);
}

TEST_CASE("a dominated candidate is pruned: IP(X,G) >= IP(G,G)") {
    DocumentStore store;
    store.docs.push_back(make_document(0, DenseVector{{1.0f, 1.0f}}, {}, {}));  // u
    store.docs.push_back(make_document(1, DenseVector{{1.5f, 1.0f}}, {}, {}));  // X
    store.docs.push_back(make_document(2, DenseVector{{1.0f, 0.0f}}, {}, {}));  // G, IP(G,G)=1
    validate_corpus(store);

    std::vector<Candidate> ordered;
    for (uint32_t id : {1u, 2u})
        ordered.push_back({id, hybrid_score(store.docs[0].vector, store.docs[id].vector)});
    ScoreMatrix pairs = candidate_pair_scores(store, ordered);
    REQUIRE(pairs[1] == 1.5); // IP(X,G)

    PruneOutcome out = prune_neighbours(store, 0, ordered, pairs, 4, false);
    CHECK(out.kept == std::vector<uint32_t>{1});
    CHECK(out.recycled.empty()); // default keywords share nothing uncovered
}

TEST_CASE("mutually orthogonal candidates pass untouched up to the degree cap") {
    DocumentStore store;
    DenseVector u{{0.1f, 0.1f, 0.1f, 0.1f, 0.1f, 0.1f, 0.1f}};
    store.docs.push_back(make_document(0, std::move(u), {}, {}));
    for (uint32_t i = 0; i < 6; ++i) {
        DenseVector v{std::vector<float>(7, 0.0f)};
        v.values[i + 1] = 1.0f + 0.1f * static_cast<float>(i);
        store.docs.push_back(make_document(i + 1, std::move(v), {}, {}));
    }
    validate_corpus(store);

    std::vector<uint32_t> ids{1, 2, 3, 4, 5, 6};
    std::vector<Candidate> ordered = candidates_of(store, 0, ids);
    ScoreMatrix pairs = candidate_pair_scores(store, ordered);
    rank_candidates(ordered, pairs);

    PruneOutcome out = prune_neighbours(store, 0, ordered, pairs, 4, false);
    REQUIRE(out.kept.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(out.kept[i] == ordered[i].id);
}

TEST_CASE("shared keywords uncovered by the kept set recycle a pruned edge") {
    // u and v share {1,4}; the kept neighbour X covers only {1}, so the
    // uncovered 4 sends v to the keyword list.
    DocumentStore store;
    store.docs.push_back(
        make_document(0, DenseVector{{1.0f, 1.0f}}, {}, {}, std::vector<uint32_t>{1, 4})); // u
    store.docs.push_back(
        make_document(1, DenseVector{{1.5f, 1.0f}}, {}, {}, std::vector<uint32_t>{1})); // X
    store.docs.push_back(
        make_document(2, DenseVector{{1.0f, 0.0f}}, {}, {}, std::vector<uint32_t>{1, 4})); // v
    validate_corpus(store);

    std::vector<Candidate> ordered;
    for (uint32_t id : {1u, 2u})
        ordered.push_back({id, hybrid_score(store.docs[0].vector, store.docs[id].vector)});
    ScoreMatrix pairs = candidate_pair_scores(store, ordered);

    PruneOutcome out = prune_neighbours(store, 0, ordered, pairs, 4, false);
    CHECK(out.kept == std::vector<uint32_t>{1});
    CHECK(out.recycled == std::vector<uint32_t>{2});

    SUBCASE("covering the shared terms suppresses recycling") {
        store.docs[1].keywords = {1, 4};
        PruneOutcome covered = prune_neighbours(store, 0, ordered, pairs, 4, false);
        CHECK(covered.recycled.empty());
    }
    SUBCASE("disjoint keywords never recycle") {
        store.docs[2].keywords = {9};
        PruneOutcome disjoint = prune_neighbours(store, 0, ordered, pairs, 4, false);
        CHECK(disjoint.recycled.empty());
    }
}

TEST_CASE("the prune walk matches a sequential reference on random corpora") {
    DocumentStore store = random_store(100, 6, 10, 35);
    SplitMix64 rng(36);
    for (bool per_neighbour : {false, true}) {
        for (int trial = 0; trial < 30; ++trial) {
            const auto u = static_cast<uint32_t>(bounded(rng, store.size()));
            std::vector<uint32_t> ids;
            while (sorted_unique(ids).size() < 20) {
                const auto v = static_cast<uint32_t>(bounded(rng, store.size()));
                if (v != u) ids.push_back(v);
            }
            std::vector<Candidate> ordered = candidates_of(store, u, sorted_unique(std::move(ids)));
            ScoreMatrix pairs = candidate_pair_scores(store, ordered);
            rank_candidates(ordered, pairs);

            PruneOutcome got = prune_neighbours(store, u, ordered, pairs, 8, per_neighbour);
            PruneOutcome want = prune_oracle(store, u, ordered, 8, per_neighbour);
            CHECK(got.kept == want.kept);
            CHECK(got.recycled == want.recycled);
        }
    }
}

TEST_CASE("refined graphs have exact degree, no self-loops, no duplicates") {
    SynthParams sp;
    sp.docs = 500;
    sp.dense_dim = 8;
    sp.seed = 37;
    DocumentStore store = generate_corpus(sp).store;

    KnnBuildParams kp;
    kp.k = 16;
    kp.seed = 38;
    KnnGraph knn = build_knn_graph(store, kp);

    RefineParams rp;
    rp.degree = 8;
    RefineTrace trace;
    RefinedEdges edges = refine_graph(store, knn, rp, &trace);

    for (std::size_t u = 0; u < store.size(); ++u) {
        REQUIRE(edges.semantic[u].size() == rp.degree);
        std::set<uint32_t> seen;
        for (uint32_t v : edges.semantic[u]) {
            CHECK(v != u);
            CHECK(v < store.size());
            CHECK(seen.insert(v).second);
        }
        // Keyword lists stay disjoint from the final semantic list.
        for (uint32_t v : edges.keyword[u]) {
            CHECK(!seen.count(v));
            CHECK(v != u);
            CHECK(v < store.size());
        }
        // IP soundness of the kept set (pre-merge): later kept edges are
        // never dominated by an earlier one.
        const auto& kept = trace.kept[u];
        for (std::size_t i = 1; i < kept.size(); ++i) {
            const FusedVector& vi = store.docs[kept[i]].vector;
            for (std::size_t j = 0; j < i; ++j)
                CHECK(hybrid_score(store.docs[kept[j]].vector, vi) < vi.squared_norm);
        }
        // Trace detour counts agree with the brute-force oracle.
        if (u % 50 == 0)
            CHECK(trace.detours[u] ==
                  detour_oracle(store, static_cast<uint32_t>(u), trace.ordered[u]));
    }
}

TEST_CASE("mutual keepers list each other exactly once after the merge") {
    // Two tight pairs far apart plus filler; d=2 forces forward+reverse
    // overlap between mutual nearest neighbours.
    DocumentStore store;
    store.docs.push_back(make_document(0, DenseVector{{4.0f, 0.1f}}, {}, {}));
    store.docs.push_back(make_document(1, DenseVector{{4.1f, 0.0f}}, {}, {}));
    store.docs.push_back(make_document(2, DenseVector{{-4.0f, 0.2f}}, {}, {}));
    store.docs.push_back(make_document(3, DenseVector{{-3.9f, 0.0f}}, {}, {}));
    store.docs.push_back(make_document(4, DenseVector{{0.0f, 3.0f}}, {}, {}));
    store.docs.push_back(make_document(5, DenseVector{{0.1f, 2.9f}}, {}, {}));
    validate_corpus(store);

    KnnBuildParams kp;
    kp.k = 4;
    kp.seed = 39;
    KnnGraph knn = build_knn_graph(store, kp);
    RefineParams rp;
    rp.degree = 2;
    RefinedEdges edges = refine_graph(store, knn, rp);

    for (std::size_t u = 0; u < store.size(); ++u) {
        REQUIRE(edges.semantic[u].size() == 2);
        CHECK(edges.semantic[u][0] != edges.semantic[u][1]);
    }
    // 0 and 1 are mutual nearest neighbours; each should carry the other once.
    CHECK(std::count(edges.semantic[0].begin(), edges.semantic[0].end(), 1u) == 1);
    CHECK(std::count(edges.semantic[1].begin(), edges.semantic[1].end(), 0u) == 1);
}
