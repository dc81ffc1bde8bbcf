#pragma once

/// Synthetic corpus generation for tests and benchmarks: clustered
/// unit-length Gaussian dense parts, Zipf-distributed sparse supports with
/// per-cluster topic blocks (vocabulary tracks topic, as in real corpora),
/// optional entities with a random knowledge graph, and optionally planted
/// two-hop entity chains whose answer documents are deliberately
/// vector-dissimilar to their queries (they are findable only through the
/// knowledge graph).

#include <cstdint>
#include <vector>

#include "fusegraph/rng.hpp"
#include "fusegraph/types.hpp"

namespace fusegraph {

struct SynthParams {
    uint32_t docs = 1000;
    uint32_t dense_dim = 16;
    uint32_t clusters = 20;
    float cluster_spread = 0.25f;

    uint32_t learned_vocab = 2000;
    uint32_t learned_nnz = 20;
    uint32_t statistical_vocab = 2000;
    uint32_t statistical_nnz = 20;
    double zipf_exponent = 1.1;

    uint32_t entity_vocab = 0;   ///< 0 disables entities entirely
    double entity_rate = 0.3;    ///< fraction of docs mentioning entities
    uint32_t max_entities_per_doc = 2;
    uint32_t kg_triplets = 0;    ///< random triplets over the entity vocab
    uint32_t relation_vocab = 8;

    /// Planted chains e0–e1–e2: one seed doc mentions e0, one bridge doc
    /// mentions e1, `answers_per_chain` answer docs mention e2. Chain
    /// entities are fresh ids above entity_vocab; answer vectors point away
    /// from the chain's query vector.
    uint32_t chains = 0;
    uint32_t answers_per_chain = 10;

    uint64_t seed = 1;
};

struct ChainInfo {
    uint32_t e0 = 0, e1 = 0, e2 = 0;
    uint64_t seed_doc = 0;
    uint64_t bridge_doc = 0;
    std::vector<uint64_t> answer_docs;
    FusedVector query_vector; ///< the vector the chain was planted against
};

struct SynthData {
    DocumentStore store; ///< validated; doc ids equal node positions
    KnowledgeGraph kg;
    std::vector<ChainInfo> chains;
};

SynthData generate_corpus(const SynthParams& params);

/// A query vector drawn from the same distribution as the documents.
FusedVector random_query_vector(const SynthParams& params, SplitMix64& rng);

/// (w_d, w_s, w_f) sampled uniformly on the probability simplex; w_k = 0.
Weights random_simplex_weights(SplitMix64& rng);

} // namespace fusegraph
