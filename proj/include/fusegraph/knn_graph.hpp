#pragma once

/// Approximate k-nearest-neighbour graph construction over fused vectors.
///
/// The builder follows the classic neighbour-descent scheme: every node
/// starts with k random neighbours, then repeatedly refines its list by
/// scoring two-hop candidates (neighbours of neighbours, pulled through both
/// forward and reverse adjacency). Entries carry a `fresh` flag so each pair
/// is scored only while at least one side is new; iteration stops when an
/// update pass changes almost nothing or the iteration budget runs out.
///
/// Determinism: random initialisation derives one RNG per node from
/// (seed, node), candidate lists are deduplicated in sorted order, and list
/// updates happen in a double-buffered sweep, so rebuilds are byte-identical
/// for a given seed and worker counts never change the result.

#include <cstdint>
#include <vector>

#include "fusegraph/types.hpp"

namespace fusegraph {

/// One directed neighbour entry: target node, hybrid score under unit
/// weights, and whether the entry still needs to participate in joins.
struct KnnEntry {
    uint32_t id = 0;
    Score score = 0.0;
    bool fresh = true;
};

/// Fixed-degree neighbour lists, one per node, each sorted by descending
/// score (ties broken by ascending id).
struct KnnGraph {
    uint32_t k = 0;
    std::vector<std::vector<KnnEntry>> lists;

    std::size_t size() const noexcept { return lists.size(); }
};

struct KnnBuildParams {
    uint32_t k = 32;
    uint32_t max_iterations = 12;
    /// Stop when the fraction of replaced entries per pass drops below this.
    double convergence = 0.01;
    uint64_t seed = 42;
    unsigned threads = 1;
};

/// Seeds each node with k distinct random neighbours (never itself) and
/// scores them. Throws `corpus-too-small` if fewer than k+1 documents exist.
KnnGraph init_random_graph(const DocumentStore& store, uint32_t k, uint64_t seed,
                           unsigned threads);

/// One neighbour-descent pass over `graph`. Returns the number of list
/// entries that were replaced.
std::size_t nn_descent_iterate(const DocumentStore& store, KnnGraph& graph, unsigned threads);

/// Full build: random init followed by iterations until convergence.
KnnGraph build_knn_graph(const DocumentStore& store, const KnnBuildParams& params);

} // namespace fusegraph
