#pragma once

/// Online maintenance: batch insertion and mark-deletion, without a rebuild.
///
/// Insertion merges two candidate sources per new node — a beam search over
/// the existing graph and a neighbour-descent among the batch itself — then
/// runs the same refinery pipeline a build would. Existing nodes take new
/// reverse edges only by replacing their weakest reverse slot, so the work
/// on the old graph stays bounded.
///
/// Deletion only flags nodes: traversal keeps routing through them, final
/// results never include them.

#include <cstdint>
#include <span>
#include <vector>

#include "fusegraph/index.hpp"

namespace fusegraph {

struct InsertParams {
    /// Candidate-list width per new node; defaults to the build-time list
    /// width when 0.
    uint32_t knn_k = 0;
    uint32_t nn_descent_iterations = 10;
    unsigned threads = 1;
};

/// Appends `new_docs` to the index. Ids must be new, dimensions must match
/// the corpus. Logical edges and the entity map are extended for the new
/// nodes; existing nodes' logical edges are left untouched (bounded work).
void insert_batch(HybridIndex& index, std::vector<DocumentRecord> new_docs,
                  const InsertParams& params = {});

/// Flags the given doc ids as deleted. Throws `unknown-id` if any id is
/// absent. Idempotent on already-deleted ids.
void mark_delete(HybridIndex& index, std::span<const uint64_t> doc_ids);

} // namespace fusegraph
