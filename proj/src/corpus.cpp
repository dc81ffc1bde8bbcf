#include "fusegraph/corpus.hpp"

#include <cmath>
#include <unordered_set>

#include "fusegraph/log.hpp"
#include "fusegraph/scoring.hpp"

namespace fusegraph {

namespace {

void validate_sparse(const SparseVector& v, const std::string& where, const char* path) {
    if (v.indices.size() != v.values.size())
        throw Error("unsorted-sparse", where + ": " + path + " index/value lengths differ");
    for (std::size_t i = 0; i < v.nnz(); ++i) {
        if (i > 0 && v.indices[i] <= v.indices[i - 1])
            throw Error("unsorted-sparse",
                        where + ": " + path + " indices must be strictly ascending");
        if (!std::isfinite(v.values[i]))
            throw Error("nonfinite-value", where + ": " + path + " holds a non-finite value");
        if (v.values[i] == 0.0f)
            throw Error("zero-sparse-value",
                        where + ": " + path + " stores an explicit zero at index " +
                            std::to_string(v.indices[i]));
    }
}

} // namespace

void validate_fused(const FusedVector& v, const std::string& where) {
    for (float x : v.dense.values)
        if (!std::isfinite(x))
            throw Error("nonfinite-value", where + ": dense holds a non-finite value");
    validate_sparse(v.learned, where, "learned");
    validate_sparse(v.statistical, where, "statistical");
}

CorpusSummary validate_corpus(DocumentStore& store) {
    if (store.docs.empty()) throw Error("empty-corpus", "corpus holds no documents");

    CorpusSummary summary;
    summary.doc_count = store.docs.size();
    summary.dense_dim = store.docs.front().vector.dense.dim();

    store.id_to_node.clear();
    store.id_to_node.reserve(store.docs.size());

    for (std::size_t n = 0; n < store.docs.size(); ++n) {
        DocumentRecord& doc = store.docs[n];
        const std::string where = "doc " + std::to_string(doc.doc_id);

        auto [it, fresh] = store.id_to_node.emplace(doc.doc_id, static_cast<uint32_t>(n));
        if (!fresh) throw Error("duplicate-id", where + ": id appears more than once");

        if (doc.vector.dense.dim() != summary.dense_dim)
            throw Error("dim-mismatch", where + ": dense dimension " +
                                            std::to_string(doc.vector.dense.dim()) +
                                            " differs from first doc's " +
                                            std::to_string(summary.dense_dim));
        validate_fused(doc.vector, where);

        if (!doc.vector.learned.empty())
            summary.learned_dim =
                std::max(summary.learned_dim, doc.vector.learned.indices.back() + 1);
        if (!doc.vector.statistical.empty())
            summary.statistical_dim =
                std::max(summary.statistical_dim, doc.vector.statistical.indices.back() + 1);
        summary.learned_nnz += doc.vector.learned.nnz();
        summary.statistical_nnz += doc.vector.statistical.nnz();

        doc.keywords = sorted_unique(std::move(doc.keywords));
        doc.entities = sorted_unique(std::move(doc.entities));
        finalize_fused(doc.vector);
    }

    store.dense_dim = summary.dense_dim;
    store.learned_dim = summary.learned_dim;
    store.statistical_dim = summary.statistical_dim;

    log::info("corpus: %zu docs, dense=%u learned=%u statistical=%u", summary.doc_count,
              summary.dense_dim, summary.learned_dim, summary.statistical_dim);
    return summary;
}

FusedVector build_query_vector(const FusedVector& query, const Weights& weights) {
    FusedVector out;
    out.dense.values.reserve(query.dense.values.size());
    for (float x : query.dense.values) out.dense.values.push_back(weights.dense * x);

    auto scale_sparse = [](const SparseVector& v, float w) {
        SparseVector out;
        if (w == 0.0f) return out; // whole path disabled; drop its terms
        out.indices = v.indices;
        out.values.reserve(v.values.size());
        for (float x : v.values) out.values.push_back(w * x);
        return out;
    };
    out.learned = scale_sparse(query.learned, weights.learned);
    out.statistical = scale_sparse(query.statistical, weights.statistical);
    finalize_fused(out);
    return out;
}

DocumentRecord make_document(uint64_t doc_id, DenseVector dense, SparseVector learned,
                             SparseVector statistical, std::optional<std::vector<uint32_t>> keywords,
                             std::vector<uint32_t> entities) {
    DocumentRecord doc;
    doc.doc_id = doc_id;
    doc.vector.dense = std::move(dense);
    doc.vector.learned = std::move(learned);
    doc.vector.statistical = std::move(statistical);
    if (keywords)
        doc.keywords = sorted_unique(std::move(*keywords));
    else
        doc.keywords = doc.vector.statistical.indices; // already ascending + unique
    doc.entities = sorted_unique(std::move(entities));
    finalize_fused(doc.vector);
    return doc;
}

} // namespace fusegraph
