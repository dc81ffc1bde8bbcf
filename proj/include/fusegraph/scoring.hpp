#pragma once

#include <span>
#include <vector>

#include "fusegraph/types.hpp"

namespace fusegraph {

/// Inner product of two equal-length dense vectors, accumulated in double.
double dense_dot(const DenseVector& a, const DenseVector& b);

/// Inner product of two sorted sparse vectors: sum of value products over
/// shared indices, accumulated in ascending index order. Uses a two-pointer
/// merge, or binary probes of the smaller support into the larger when the
/// sizes differ by 8x or more; both walk the intersection in the same order
/// so the result is bitwise identical either way.
double sparse_dot(const SparseVector& a, const SparseVector& b);

/// Same as sparse_dot but also reports the shared indices (ascending).
double sparse_dot_terms(const SparseVector& a, const SparseVector& b,
                        std::vector<uint32_t>& shared);

/// Composite similarity of a weighted query against a document vector:
/// dense dot + learned sparse dot + statistical sparse dot, accumulated in
/// that fixed order. When `shared_statistical` is non-null it receives the
/// intersecting statistical term ids (the side channel consumed by keyword
/// flagging and dynamic keyword-edge loading).
Score hybrid_score(const FusedVector& weighted_query, const FusedVector& doc,
                   std::vector<uint32_t>* shared_statistical = nullptr);

/// hybrid_score against each node in `ids`, in input order. Parallel over
/// ids; output does not depend on the worker count.
std::vector<Score> batch_scores(const FusedVector& weighted_query,
                                std::span<const uint32_t> ids,
                                const DocumentStore& store, unsigned threads = 1);

} // namespace fusegraph
