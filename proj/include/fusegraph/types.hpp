#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fusegraph/error.hpp"

namespace fusegraph {

/// Similarity value (larger = more similar). Distances used in pruning and
/// traversal are the negated similarity.
using Score = double;

inline Score to_distance(Score similarity) { return -similarity; }

/// Fixed-length dense embedding, 32-bit storage.
struct DenseVector {
    std::vector<float> values;

    std::size_t dim() const { return values.size(); }
};

/// Sparse term-weight vector, indices strictly ascending, values nonzero
/// and finite. Indices and values live in separate arrays (CSR-per-row).
struct SparseVector {
    std::vector<uint32_t> indices;
    std::vector<float> values;

    std::size_t nnz() const { return indices.size(); }
    bool empty() const { return indices.empty(); }
};

/// One document's (or query's) full vector payload: dense part plus the
/// learned and statistical sparse parts, concatenated conceptually into a
/// single inner-product space. squared_norm caches the self inner product
/// under unit path weights.
struct FusedVector {
    DenseVector dense;
    SparseVector learned;
    SparseVector statistical;
    double squared_norm = 0.0;
};

/// Per-path fusion weights. The entity weight is consumed only by the
/// traversal hop reward, never by vector fusion.
struct Weights {
    float dense = 1.0f;
    float learned = 1.0f;
    float statistical = 1.0f;
    float entity = 0.0f;
};

/// Throws "invalid-weights" unless all weights are >= 0, finite, and at
/// least one vector-path weight is positive.
void validate_weights(const Weights& w);

struct DocumentRecord {
    uint64_t doc_id = 0;
    FusedVector vector;
    std::vector<uint32_t> keywords; // sorted term ids
    std::vector<uint32_t> entities; // sorted entity ids
    bool deleted = false;
};

/// Query payload. The vector parts are the raw (pre-weighting) query
/// representations; build_query_vector applies the weights.
struct QuerySpec {
    FusedVector vector;
    Weights weights;
    std::vector<uint32_t> required_keywords; // sorted; empty = no constraint
    std::vector<uint32_t> entities;          // sorted; empty = no entity seeds
    uint32_t k = 10;
    uint32_t beam_width = 64;
    uint32_t max_entity_hops = 2; // logical edges load while hop < this
};

/// Throws a named validation error (invalid-k, beam-too-small,
/// entities-required, invalid-weights) when the query is malformed.
void validate_query(const QuerySpec& q);

struct Triplet {
    uint32_t source = 0;
    uint32_t relation = 0;
    uint32_t target = 0;

    friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Entity/relation triplet store. Adjacency is the undirected closure of
/// the triplets: each triplet is visible from both endpoints.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;
    explicit KnowledgeGraph(std::vector<Triplet> triplets);

    const std::vector<Triplet>& triplets() const { return triplets_; }
    bool empty() const { return triplets_.empty(); }

    /// (neighbor entity, relation) pairs sorted by neighbor then relation.
    std::span<const std::pair<uint32_t, uint32_t>> neighbors(uint32_t entity) const;

    bool has_relation(uint32_t a, uint32_t b) const;

    /// Smallest relation id linking a and b; throws if none exists.
    uint32_t relation_between(uint32_t a, uint32_t b) const;

    std::size_t degree(uint32_t entity) const { return neighbors(entity).size(); }

private:
    std::vector<Triplet> triplets_; // sorted by (source, relation, target), unique
    std::unordered_map<uint32_t, std::vector<std::pair<uint32_t, uint32_t>>> adjacency_;
};

/// Owning corpus container. Node ids are positions in docs; doc_id is the
/// external identifier carried through ingestion and results.
struct DocumentStore {
    uint32_t dense_dim = 0;
    uint32_t learned_dim = 0;     // vocabulary bound for the learned path
    uint32_t statistical_dim = 0; // vocabulary bound for the statistical path
    std::vector<DocumentRecord> docs;
    std::unordered_map<uint64_t, uint32_t> id_to_node;

    std::size_t size() const { return docs.size(); }
    const DocumentRecord& doc(uint32_t node) const {
        if (node >= docs.size()) throw Error("unknown-id", "node " + std::to_string(node) + " out of range");
        return docs[node];
    }
    /// Node index for an external doc id; throws "unknown-id".
    uint32_t node_of(uint64_t doc_id) const;
};

/// Computes and caches the self inner product under unit weights.
void finalize_fused(FusedVector& v);

/// Sorted-set helpers used for keyword and entity sets.
std::vector<uint32_t> sorted_unique(std::vector<uint32_t> ids);
bool sorted_contains(std::span<const uint32_t> sorted, uint32_t id);
std::vector<uint32_t> sorted_intersection(std::span<const uint32_t> a, std::span<const uint32_t> b);

} // namespace fusegraph
