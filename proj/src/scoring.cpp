#include "fusegraph/scoring.hpp"

#include <algorithm>

#include "fusegraph/error.hpp"
#include "fusegraph/parallel.hpp"

namespace fusegraph {

double dense_dot(const DenseVector& a, const DenseVector& b) {
    if (a.dim() != b.dim())
        throw Error("dim-mismatch", "dense dimensions differ: " + std::to_string(a.dim()) +
                                        " vs " + std::to_string(b.dim()));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        acc += static_cast<double>(a.values[i]) * static_cast<double>(b.values[i]);
    return acc;
}

namespace {

// Merge walk over two sorted index lists. Accumulates in ascending index
// order, which the binary-probe path below reproduces exactly.
double sparse_dot_merge(const SparseVector& a, const SparseVector& b,
                        std::vector<uint32_t>* shared) {
    double acc = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.nnz() && j < b.nnz()) {
        const uint32_t ia = a.indices[i], ib = b.indices[j];
        if (ia < ib) {
            ++i;
        } else if (ib < ia) {
            ++j;
        } else {
            acc += static_cast<double>(a.values[i]) * static_cast<double>(b.values[j]);
            if (shared) shared->push_back(ia);
            ++i;
            ++j;
        }
    }
    return acc;
}

// Walk the smaller list and binary-search the larger. Shared indices are
// visited in ascending order (the smaller list is sorted), so the
// accumulation sequence is identical to the merge walk.
double sparse_dot_probe(const SparseVector& small, const SparseVector& large,
                        std::vector<uint32_t>* shared) {
    double acc = 0.0;
    auto begin = large.indices.begin();
    for (std::size_t i = 0; i < small.nnz(); ++i) {
        const uint32_t idx = small.indices[i];
        auto it = std::lower_bound(begin, large.indices.end(), idx);
        if (it != large.indices.end() && *it == idx) {
            const std::size_t j = static_cast<std::size_t>(it - large.indices.begin());
            acc += static_cast<double>(small.values[i]) * static_cast<double>(large.values[j]);
            if (shared) shared->push_back(idx);
            begin = it + 1; // indices are ascending; never look back
        } else {
            begin = it;
        }
    }
    return acc;
}

constexpr std::size_t kProbeSkew = 8;

double sparse_dot_impl(const SparseVector& a, const SparseVector& b,
                       std::vector<uint32_t>* shared) {
    if (a.empty() || b.empty()) return 0.0;
    if (a.nnz() * kProbeSkew <= b.nnz()) return sparse_dot_probe(a, b, shared);
    if (b.nnz() * kProbeSkew <= a.nnz()) return sparse_dot_probe(b, a, shared);
    return sparse_dot_merge(a, b, shared);
}

} // namespace

double sparse_dot(const SparseVector& a, const SparseVector& b) {
    return sparse_dot_impl(a, b, nullptr);
}

double sparse_dot_terms(const SparseVector& a, const SparseVector& b,
                        std::vector<uint32_t>& shared) {
    shared.clear();
    return sparse_dot_impl(a, b, &shared);
}

Score hybrid_score(const FusedVector& weighted_query, const FusedVector& doc,
                   std::vector<uint32_t>* shared_statistical) {
    // Fixed path order (dense, learned, statistical) keeps the accumulation
    // sequence identical across call sites, so scores are bit-reproducible.
    double acc = dense_dot(weighted_query.dense, doc.dense);
    acc += sparse_dot(weighted_query.learned, doc.learned);
    if (shared_statistical)
        acc += sparse_dot_terms(weighted_query.statistical, doc.statistical, *shared_statistical);
    else
        acc += sparse_dot(weighted_query.statistical, doc.statistical);
    return acc;
}

std::vector<Score> batch_scores(const FusedVector& weighted_query,
                                std::span<const uint32_t> ids,
                                const DocumentStore& store, unsigned threads) {
    std::vector<Score> out(ids.size());
    parallel_for(ids.size(), threads, [&](std::size_t i) {
        out[i] = hybrid_score(weighted_query, store.doc(ids[i]).vector);
    });
    return out;
}

} // namespace fusegraph
