#include "fusegraph/synth.hpp"

#include <algorithm>
#include <cmath>

#include "fusegraph/corpus.hpp"

namespace fusegraph {

namespace {

/// Cumulative Zipf mass over ranks 1..vocab; index i is rank i+1.
std::vector<double> zipf_cumulative(uint32_t vocab, double exponent) {
    std::vector<double> cum(vocab);
    double total = 0.0;
    for (uint32_t r = 0; r < vocab; ++r) {
        total += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
        cum[r] = total;
    }
    for (double& c : cum) c /= total;
    return cum;
}

uint32_t zipf_draw(const std::vector<double>& cum, SplitMix64& rng) {
    const double u = uniform01(rng);
    return static_cast<uint32_t>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
}

/// One sparse vocabulary: a global Zipf distribution plus per-cluster topic
/// blocks, so documents of the same dense cluster also share terms. This
/// mirrors real corpora, where vocabulary tracks topic.
struct SparseModel {
    uint32_t vocab = 0;
    uint32_t block = 0;    ///< topic block width
    uint32_t n_blocks = 0;
    std::vector<double> global_cum;
    std::vector<double> block_cum;

    SparseModel(uint32_t vocab_size, uint32_t clusters, double exponent) : vocab(vocab_size) {
        if (vocab == 0) return;
        block = std::max(1u, vocab / std::max(clusters, 1u));
        n_blocks = std::max(1u, vocab / block);
        global_cum = zipf_cumulative(vocab, exponent);
        block_cum = zipf_cumulative(block, exponent);
    }

    /// ~60% of a document's terms come from its cluster's topic block; the
    /// rest follow the global head.
    SparseVector sample(uint32_t cluster, uint32_t nnz, SplitMix64& rng) const {
        SparseVector v;
        if (vocab == 0 || nnz == 0) return v;
        const uint32_t start = (cluster % n_blocks) * block;
        const uint32_t take = std::min(nnz, vocab);
        std::vector<uint32_t> picked;
        if (take == vocab) {
            picked.resize(take);
            for (uint32_t i = 0; i < take; ++i) picked[i] = i;
        }
        while (picked.size() < take) {
            const uint32_t idx = uniform01(rng) < 0.6 ? start + zipf_draw(block_cum, rng)
                                                      : zipf_draw(global_cum, rng);
            if (std::find(picked.begin(), picked.end(), idx) != picked.end()) continue;
            picked.push_back(idx);
        }
        std::sort(picked.begin(), picked.end());
        v.indices = std::move(picked);
        v.values.reserve(take);
        for (uint32_t i = 0; i < take; ++i)
            v.values.push_back(static_cast<float>(0.1 + 0.9 * uniform01(rng)));
        return v;
    }
};

void normalize(std::vector<float>& values) {
    double ss = 0.0;
    for (float x : values) ss += static_cast<double>(x) * x;
    if (ss <= 0.0) return;
    const auto inv = static_cast<float>(1.0 / std::sqrt(ss));
    for (float& x : values) x *= inv;
}

/// Unit-length cluster directions, like the normalized embeddings real
/// encoder models emit.
std::vector<std::vector<float>> make_centers(const SynthParams& p, SplitMix64& rng) {
    std::vector<std::vector<float>> centers(std::max<uint32_t>(p.clusters, 1));
    for (auto& c : centers) {
        c.resize(p.dense_dim);
        for (float& x : c) x = static_cast<float>(gaussian(rng));
        normalize(c);
    }
    return centers;
}

DenseVector sample_dense(const std::vector<std::vector<float>>& centers, uint32_t cluster,
                         float spread, SplitMix64& rng) {
    const auto& c = centers[cluster % centers.size()];
    DenseVector out;
    out.values.reserve(c.size());
    for (float x : c)
        out.values.push_back(x + spread * static_cast<float>(gaussian(rng)));
    normalize(out.values);
    return out;
}

} // namespace

FusedVector random_query_vector(const SynthParams& params, SplitMix64& rng) {
    // Re-derive the same cluster model the corpus used, so queries land in
    // populated regions of the space and all three paths agree on the topic.
    SplitMix64 center_rng(mix_seed(params.seed, 0));
    const auto centers = make_centers(params, center_rng);
    const SparseModel learned(params.learned_vocab, params.clusters, params.zipf_exponent);
    const SparseModel statistical(params.statistical_vocab, params.clusters,
                                  params.zipf_exponent);

    const auto cluster = static_cast<uint32_t>(bounded(rng, std::max(params.clusters, 1u)));
    FusedVector v;
    v.dense = sample_dense(centers, cluster, params.cluster_spread, rng);
    v.learned = learned.sample(cluster, params.learned_nnz, rng);
    v.statistical = statistical.sample(cluster, params.statistical_nnz, rng);
    finalize_fused(v);
    return v;
}

Weights random_simplex_weights(SplitMix64& rng) {
    double parts[3];
    double total = 0.0;
    for (double& p : parts) {
        p = -std::log(std::max(uniform01(rng), 1e-300));
        total += p;
    }
    Weights w;
    w.dense = static_cast<float>(parts[0] / total);
    w.learned = static_cast<float>(parts[1] / total);
    w.statistical = static_cast<float>(parts[2] / total);
    w.entity = 0.0f;
    return w;
}

SynthData generate_corpus(const SynthParams& params) {
    SynthData data;
    SplitMix64 center_rng(mix_seed(params.seed, 0));
    SplitMix64 rng(mix_seed(params.seed, 1));

    const auto centers = make_centers(params, center_rng);
    const SparseModel learned(params.learned_vocab, params.clusters, params.zipf_exponent);
    const SparseModel statistical(params.statistical_vocab, params.clusters,
                                  params.zipf_exponent);
    const uint32_t clusters = std::max(params.clusters, 1u);

    auto& docs = data.store.docs;
    uint64_t next_id = 0;
    auto sample_doc = [&](std::vector<uint32_t> entities) {
        const auto cluster = static_cast<uint32_t>(bounded(rng, clusters));
        docs.push_back(make_document(next_id++,
                                     sample_dense(centers, cluster, params.cluster_spread, rng),
                                     learned.sample(cluster, params.learned_nnz, rng),
                                     statistical.sample(cluster, params.statistical_nnz, rng),
                                     std::nullopt, std::move(entities)));
        return docs.back().doc_id;
    };

    for (uint32_t i = 0; i < params.docs; ++i) {
        std::vector<uint32_t> entities;
        if (params.entity_vocab > 0 && uniform01(rng) < params.entity_rate) {
            const auto count = 1 + bounded(rng, params.max_entities_per_doc);
            for (uint64_t e = 0; e < count; ++e)
                entities.push_back(static_cast<uint32_t>(bounded(rng, params.entity_vocab)));
        }
        sample_doc(std::move(entities));
    }

    std::vector<Triplet> triplets;
    if (params.entity_vocab > 1) {
        for (uint32_t t = 0; t < params.kg_triplets; ++t) {
            const auto s = static_cast<uint32_t>(bounded(rng, params.entity_vocab));
            auto o = static_cast<uint32_t>(bounded(rng, params.entity_vocab));
            if (o == s) o = (o + 1) % params.entity_vocab;
            const auto r = static_cast<uint32_t>(bounded(rng, std::max(params.relation_vocab, 1u)));
            triplets.push_back({s, r, o});
        }
    }

    // Planted chains use fresh entity ids so random KG noise cannot touch
    // them. The chain works only through the graph: the answers' vectors
    // point away from the query vector.
    for (uint32_t c = 0; c < params.chains; ++c) {
        ChainInfo chain;
        chain.e0 = params.entity_vocab + 3 * c;
        chain.e1 = chain.e0 + 1;
        chain.e2 = chain.e0 + 2;
        triplets.push_back({chain.e0, 0, chain.e1});
        triplets.push_back({chain.e1, 0, chain.e2});

        const auto qc = static_cast<uint32_t>(bounded(rng, clusters));
        FusedVector q;
        q.dense = sample_dense(centers, qc, params.cluster_spread, rng);
        q.learned = learned.sample(qc, params.learned_nnz, rng);
        q.statistical = statistical.sample(qc, params.statistical_nnz, rng);
        finalize_fused(q);
        chain.query_vector = q;

        chain.seed_doc = sample_doc({chain.e0});
        chain.bridge_doc = sample_doc({chain.e1});

        for (uint32_t a = 0; a < params.answers_per_chain; ++a) {
            DenseVector away;
            away.values.reserve(params.dense_dim);
            for (float x : q.dense.values)
                away.values.push_back(-x + 0.05f * static_cast<float>(gaussian(rng)));
            normalize(away.values);
            docs.push_back(make_document(next_id++, std::move(away), {}, {}, std::nullopt,
                                         {chain.e2}));
            chain.answer_docs.push_back(docs.back().doc_id);
        }
        data.chains.push_back(std::move(chain));
    }

    validate_corpus(data.store);
    data.kg = KnowledgeGraph(std::move(triplets));
    return data;
}

} // namespace fusegraph
