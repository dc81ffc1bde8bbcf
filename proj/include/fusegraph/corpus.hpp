#pragma once

#include <optional>
#include <string>

#include "fusegraph/types.hpp"

namespace fusegraph {

/// Per-path dimension statistics of a validated corpus.
struct CorpusSummary {
    std::size_t doc_count = 0;
    uint32_t dense_dim = 0;
    uint32_t learned_dim = 0;
    uint32_t statistical_dim = 0;
    std::size_t learned_nnz = 0;
    std::size_t statistical_nnz = 0;
};

/// Validates a single vector payload: finite values, strictly ascending
/// sparse indices, no explicit zeros. Throws named errors.
void validate_fused(const FusedVector& v, const std::string& where);

/// Validates the whole corpus: non-empty, uniform dense dimension, unique
/// doc ids, well-formed sparse parts. Fills the store's dimension fields
/// and returns the summary. Errors: "empty-corpus", "dim-mismatch",
/// "duplicate-id", "unsorted-sparse", "zero-sparse-value",
/// "nonfinite-value".
CorpusSummary validate_corpus(DocumentStore& store);

/// Applies the path weights to a query vector: dense scaled by w.dense,
/// learned entries by w.learned, statistical by w.statistical. Entries of a
/// zero-weight path are dropped. The entity weight is ignored here.
FusedVector build_query_vector(const FusedVector& query, const Weights& w);

/// Builds a DocumentRecord, defaulting keywords to the statistical support
/// when no explicit keyword list is given.
DocumentRecord make_document(uint64_t doc_id, DenseVector dense, SparseVector learned,
                             SparseVector statistical,
                             std::optional<std::vector<uint32_t>> keywords = std::nullopt,
                             std::vector<uint32_t> entities = {});

} // namespace fusegraph
