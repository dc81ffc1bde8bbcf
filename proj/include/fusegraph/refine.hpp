#pragma once

/// Edge refinery: turns raw k-NN lists into bounded-degree index edges.
///
/// Per node the pipeline is
///   1. rank candidates by how many detourable two-hop routes each edge has
///      (an edge u→v is detourable through x when both legs u→x and x→v are
///      shorter than u→v; fewer detours means the edge is harder to replace),
///   2. walk the ranked list keeping a candidate v only while the list is
///      not full and no kept neighbour w dominates it in the inner-product
///      sense (IP(w,v) >= IP(v,v) prunes v). Pruned candidates whose shared
///      keywords with the node are not covered by the kept set are recycled
///      onto a separate keyword edge list instead of being dropped,
///   3. merge: the final semantic list is the first degree/2 kept edges plus
///      up to degree/2 reverse edges (who kept *me*, earliest keepers first),
///      padded back up to exactly `degree` from the remaining kept edges and
///      then the ranked candidate list.
///
/// Distances are negated hybrid scores under unit path weights, so "shorter"
/// always means "higher score".

#include <cstdint>
#include <span>
#include <vector>

#include "fusegraph/knn_graph.hpp"
#include "fusegraph/types.hpp"

namespace fusegraph {

/// A candidate edge out of the node being refined.
struct Candidate {
    uint32_t id = 0;
    Score score = 0.0; ///< hybrid score between the node and this candidate
};

/// Row-major square matrix of pairwise candidate scores; entry [i*k + j] is
/// the hybrid score between candidates i and j of the same node.
using ScoreMatrix = std::vector<Score>;

struct RefineParams {
    uint32_t degree = 32;
    /// false: a pruned candidate is recycled when its keywords shared with
    /// the node are not jointly covered by the kept set's keywords.
    /// true: coverage is checked only against the neighbour that pruned it.
    bool per_neighbour_keyword_check = false;
    unsigned threads = 1;
};

/// Semantic and keyword adjacency produced by the refinery.
struct RefinedEdges {
    std::vector<std::vector<uint32_t>> semantic;
    std::vector<std::vector<uint32_t>> keyword;
};

/// Optional build diagnostics: per-node intermediate state, in the order the
/// pipeline saw it. Used by structural tests; skipped in normal builds.
struct RefineTrace {
    std::vector<std::vector<Candidate>> ordered; ///< candidates after ranking
    std::vector<std::vector<uint32_t>> detours;  ///< counts aligned to `ordered`
    std::vector<std::vector<uint32_t>> kept;     ///< survivors before the merge step
};

/// Scores every candidate pair of one node (the diagonal is 0; unused).
ScoreMatrix candidate_pair_scores(const DocumentStore& store, std::span<const Candidate> cands);

/// Detourable-route count per candidate edge: entry v counts candidates x
/// with max(dis(u,x), dis(x,v)) < dis(u,v).
std::vector<uint32_t> count_detourable_routes(std::span<const Candidate> cands,
                                              const ScoreMatrix& pairs);

/// Sorts candidates (and the score matrix with them) by ascending detour
/// count, then descending score, then ascending id. Returns the detour
/// counts aligned with the sorted order.
std::vector<uint32_t> rank_candidates(std::vector<Candidate>& cands, ScoreMatrix& pairs);

struct PruneOutcome {
    std::vector<uint32_t> kept;     ///< ids, in kept order (first candidate first)
    std::vector<uint32_t> recycled; ///< ids moved to the keyword edge list
};

/// The inner-product walk over a ranked candidate list (step 2 above).
PruneOutcome prune_neighbours(const DocumentStore& store, uint32_t node,
                              std::span<const Candidate> ordered, const ScoreMatrix& pairs,
                              uint32_t degree, bool per_neighbour_keyword_check);

/// Runs the full pipeline over every node of a k-NN graph.
RefinedEdges refine_graph(const DocumentStore& store, const KnnGraph& knn,
                          const RefineParams& params, RefineTrace* trace = nullptr);

} // namespace fusegraph
