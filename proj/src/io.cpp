#include "fusegraph/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "fusegraph/corpus.hpp"
#include "fusegraph/error.hpp"

namespace fusegraph {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io-error", "cannot open " + path + " for reading");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io-error", "cannot open " + path + " for writing");
    return out;
}

/// Applies `fn` to every nonempty line; reports the line number on errors.
template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
    std::ifstream in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            fn(json::parse(line), lineno);
        } catch (const json::exception& e) {
            throw Error("bad-json", path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

SparseVector parse_sparse(const json& j) {
    SparseVector v;
    if (j.is_null()) return v;
    v.indices.reserve(j.size());
    v.values.reserve(j.size());
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2)
            throw Error("bad-json", "sparse entries must be [index, value] pairs");
        v.indices.push_back(pair[0].get<uint32_t>());
        v.values.push_back(pair[1].get<float>());
    }
    return v;
}

json sparse_to_json(const SparseVector& v) {
    json out = json::array();
    for (std::size_t i = 0; i < v.nnz(); ++i)
        out.push_back(json::array({v.indices[i], v.values[i]}));
    return out;
}

} // namespace

DocumentStore load_corpus(const std::string& path) {
    DocumentStore store;
    for_each_line(path, [&](const json& j, std::size_t) {
        DocumentRecord doc;
        doc.doc_id = j.at("id").get<uint64_t>();
        doc.vector.dense.values = j.at("dense").get<std::vector<float>>();
        doc.vector.learned = parse_sparse(j.value("learned", json::array()));
        doc.vector.statistical = parse_sparse(j.value("statistical", json::array()));
        if (j.contains("keywords"))
            doc.keywords = j.at("keywords").get<std::vector<uint32_t>>();
        else
            doc.keywords = doc.vector.statistical.indices;
        if (j.contains("entities"))
            doc.entities = j.at("entities").get<std::vector<uint32_t>>();
        store.docs.push_back(std::move(doc));
    });
    validate_corpus(store);
    return store;
}

KnowledgeGraph load_kg(const std::string& path) {
    std::vector<Triplet> triplets;
    for_each_line(path, [&](const json& j, std::size_t) {
        triplets.push_back({j.at("s").get<uint32_t>(), j.at("r").get<uint32_t>(),
                            j.at("t").get<uint32_t>()});
    });
    return KnowledgeGraph(std::move(triplets));
}

std::vector<QuerySpec> load_queries(const std::string& path, const QueryDefaults& defaults) {
    std::vector<QuerySpec> queries;
    for_each_line(path, [&](const json& j, std::size_t lineno) {
        QuerySpec q;
        if (j.contains("dense")) q.vector.dense.values = j.at("dense").get<std::vector<float>>();
        q.vector.learned = parse_sparse(j.value("learned", json::array()));
        q.vector.statistical = parse_sparse(j.value("statistical", json::array()));
        validate_fused(q.vector, "query " + std::to_string(lineno));
        finalize_fused(q.vector);
        if (j.contains("weights")) {
            const auto w = j.at("weights").get<std::vector<float>>();
            if (w.size() != 4)
                throw Error("invalid-weights", "query " + std::to_string(lineno) +
                                                   ": weights must hold 4 entries");
            q.weights = {w[0], w[1], w[2], w[3]};
        }
        if (j.contains("keywords"))
            q.required_keywords = sorted_unique(j.at("keywords").get<std::vector<uint32_t>>());
        if (j.contains("entities"))
            q.entities = sorted_unique(j.at("entities").get<std::vector<uint32_t>>());
        q.k = j.value("k", defaults.k);
        q.beam_width = j.value("beam", defaults.beam);
        q.max_entity_hops = defaults.max_entity_hops;
        queries.push_back(std::move(q));
    });
    return queries;
}

std::vector<TruthEntry> load_truth(const std::string& path) {
    std::vector<TruthEntry> truth;
    for_each_line(path, [&](const json& j, std::size_t) {
        TruthEntry t;
        t.qid = j.at("qid").get<uint64_t>();
        t.relevant = j.at("relevant").get<std::vector<uint64_t>>();
        truth.push_back(std::move(t));
    });
    return truth;
}

void write_corpus(const std::string& path, const DocumentStore& store) {
    std::ofstream out = open_output(path);
    for (const DocumentRecord& doc : store.docs) {
        json j;
        j["id"] = doc.doc_id;
        j["dense"] = doc.vector.dense.values;
        j["learned"] = sparse_to_json(doc.vector.learned);
        j["statistical"] = sparse_to_json(doc.vector.statistical);
        if (doc.keywords != doc.vector.statistical.indices) j["keywords"] = doc.keywords;
        if (!doc.entities.empty()) j["entities"] = doc.entities;
        out << j.dump() << '\n';
    }
}

void write_kg(const std::string& path, const KnowledgeGraph& kg) {
    std::ofstream out = open_output(path);
    for (const Triplet& t : kg.triplets()) {
        json j;
        j["s"] = t.source;
        j["r"] = t.relation;
        j["t"] = t.target;
        out << j.dump() << '\n';
    }
}

void write_queries(const std::string& path, std::span<const QuerySpec> queries) {
    std::ofstream out = open_output(path);
    for (const QuerySpec& q : queries) {
        json j;
        j["dense"] = q.vector.dense.values;
        j["learned"] = sparse_to_json(q.vector.learned);
        j["statistical"] = sparse_to_json(q.vector.statistical);
        j["weights"] = {q.weights.dense, q.weights.learned, q.weights.statistical,
                        q.weights.entity};
        j["keywords"] = q.required_keywords;
        j["entities"] = q.entities;
        j["k"] = q.k;
        j["beam"] = q.beam_width;
        out << j.dump() << '\n';
    }
}

void write_truth(const std::string& path, std::span<const TruthEntry> truth) {
    std::ofstream out = open_output(path);
    for (const TruthEntry& t : truth) {
        json j;
        j["qid"] = t.qid;
        j["relevant"] = t.relevant;
        out << j.dump() << '\n';
    }
}

void write_results(const std::string& path, std::span<const SearchResult> results) {
    std::ofstream out = open_output(path);
    for (std::size_t i = 0; i < results.size(); ++i) {
        const SearchResult& r = results[i];
        json hits = json::array();
        for (const SearchHit& h : r.hits) {
            json e;
            e["id"] = h.doc_id;
            e["score"] = h.score;
            hits.push_back(std::move(e));
        }
        json warnings = json::array();
        for (const std::string& w : r.warnings) warnings.push_back(w);
        if (!r.error.empty()) warnings.push_back("error: " + r.error);
        json j;
        j["qid"] = i;
        j["results"] = std::move(hits);
        j["warnings"] = std::move(warnings);
        out << j.dump() << '\n';
    }
}

void write_report_csv(const std::string& path, std::span<const BenchRow> rows) {
    std::ofstream out = open_output(path);
    out << "beam,qps,recall,ndcg,latency_ms\n";
    char line[256];
    for (const BenchRow& r : rows) {
        std::snprintf(line, sizeof line, "%u,%.3f,%.6f,%.6f,%.3f\n", r.beam, r.qps, r.recall,
                      r.ndcg, r.latency_ms);
        out << line;
    }
}

std::string format_report_table(std::span<const BenchRow> rows) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%8s %12s %10s %10s %12s\n", "beam", "qps", "recall",
                  "ndcg", "latency_ms");
    out << line;
    for (const BenchRow& r : rows) {
        std::snprintf(line, sizeof line, "%8u %12.1f %10.4f %10.4f %12.3f\n", r.beam, r.qps,
                      r.recall, r.ndcg, r.latency_ms);
        out << line;
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Binary index format
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'H', 'Y', 'B', 'G', 'R', 'I', 'X', '1'};
constexpr uint32_t kVersion = 1;

enum SectionId : uint32_t {
    kSectionDocs = 1,
    kSectionDense = 2,
    kSectionLearned = 3,
    kSectionStatistical = 4,
    kSectionKeywords = 5,
    kSectionEntities = 6,
    kSectionSemantic = 7,
    kSectionKeywordEdges = 8,
    kSectionLogicalEdges = 9,
    kSectionEntityMap = 10,
    kSectionNormOrder = 11,
    kSectionTriplets = 12,
};

enum HeaderFlags : uint32_t {
    kHasKeywordEdges = 1u << 0,
    kHasLogicalEdges = 1u << 1,
    kHasEntities = 1u << 2,
    kHasKg = 1u << 3,
};

uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u32(out, bits);
}

class Reader {
public:
    Reader(const std::string& bytes, std::size_t pos, std::size_t end)
        : bytes_(bytes), pos_(pos), end_(end) {}

    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    float f32() {
        const uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    uint8_t u8() {
        need(1);
        return static_cast<uint8_t>(bytes_[pos_++]);
    }

    std::size_t pos() const { return pos_; }
    bool done() const { return pos_ >= end_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > end_) throw Error("truncated-file", "index file ends mid-record");
    }

    const std::string& bytes_;
    std::size_t pos_;
    std::size_t end_;
};

void append_section(std::string& file, uint32_t id, const std::string& payload) {
    put_u32(file, id);
    put_u64(file, payload.size());
    put_u64(file, fnv1a(payload));
    file += payload;
}

std::string encode_id_lists(const std::vector<std::vector<uint32_t>>& lists) {
    std::string out;
    uint64_t total = 0;
    for (const auto& l : lists) total += l.size();
    put_u64(out, total);
    for (const auto& l : lists) put_u32(out, static_cast<uint32_t>(l.size()));
    for (const auto& l : lists)
        for (uint32_t v : l) put_u32(out, v);
    return out;
}

std::vector<std::vector<uint32_t>> decode_id_lists(Reader& r, std::size_t n) {
    const uint64_t total = r.u64();
    std::vector<std::vector<uint32_t>> lists(n);
    std::vector<uint32_t> counts(n);
    for (std::size_t i = 0; i < n; ++i) counts[i] = r.u32();
    uint64_t seen = 0;
    for (std::size_t i = 0; i < n; ++i) {
        lists[i].resize(counts[i]);
        for (uint32_t& v : lists[i]) v = r.u32();
        seen += counts[i];
    }
    if (seen != total) throw Error("truncated-file", "id-list section count mismatch");
    return lists;
}

std::string encode_sparse_column(const DocumentStore& store, bool learned) {
    std::string out;
    uint64_t total = 0;
    for (const auto& d : store.docs)
        total += (learned ? d.vector.learned : d.vector.statistical).nnz();
    put_u64(out, total);
    for (const auto& d : store.docs)
        put_u32(out, static_cast<uint32_t>(
                         (learned ? d.vector.learned : d.vector.statistical).nnz()));
    for (const auto& d : store.docs) {
        const SparseVector& v = learned ? d.vector.learned : d.vector.statistical;
        for (std::size_t i = 0; i < v.nnz(); ++i) {
            put_u32(out, v.indices[i]);
            put_f32(out, v.values[i]);
        }
    }
    return out;
}

void decode_sparse_column(Reader& r, DocumentStore& store, bool learned) {
    const std::size_t n = store.docs.size();
    r.u64(); // total, informational
    std::vector<uint32_t> counts(n);
    for (std::size_t i = 0; i < n; ++i) counts[i] = r.u32();
    for (std::size_t i = 0; i < n; ++i) {
        SparseVector& v = learned ? store.docs[i].vector.learned
                                  : store.docs[i].vector.statistical;
        v.indices.resize(counts[i]);
        v.values.resize(counts[i]);
        for (uint32_t j = 0; j < counts[i]; ++j) {
            v.indices[j] = r.u32();
            v.values[j] = r.f32();
        }
    }
}

} // namespace

uint64_t serialize_index(const HybridIndex& index, const std::string& path) {
    const std::size_t n = index.size();
    std::string file;
    file.append(kMagic, sizeof kMagic);
    put_u32(file, kVersion);

    uint32_t flags = 0;
    bool any_keyword_edges = false, any_logical = false, any_entities = false;
    for (std::size_t u = 0; u < n; ++u) {
        any_keyword_edges |= !index.keyword[u].empty();
        any_logical |= !index.logical[u].empty();
        any_entities |= !index.store.docs[u].entities.empty();
    }
    if (any_keyword_edges) flags |= kHasKeywordEdges;
    if (any_logical) flags |= kHasLogicalEdges;
    if (any_entities) flags |= kHasEntities;
    if (!index.kg.triplets().empty()) flags |= kHasKg;

    put_u64(file, n);
    put_u64(file, index.store.dense_dim);
    put_u64(file, index.store.learned_dim);
    put_u64(file, index.store.statistical_dim);
    put_u32(file, index.degree);
    put_u32(file, index.knn_k);
    put_u32(file, flags);
    put_u32(file, index.default_entity_hops);
    put_u32(file, index.logical_cap);
    put_u64(file, index.build_seed);

    {
        std::string s;
        for (const auto& d : index.store.docs) {
            put_u64(s, d.doc_id);
            s.push_back(d.deleted ? 1 : 0);
        }
        append_section(file, kSectionDocs, s);
    }
    {
        std::string s;
        for (const auto& d : index.store.docs)
            for (float v : d.vector.dense.values) put_f32(s, v);
        append_section(file, kSectionDense, s);
    }
    append_section(file, kSectionLearned, encode_sparse_column(index.store, true));
    append_section(file, kSectionStatistical, encode_sparse_column(index.store, false));
    {
        std::vector<std::vector<uint32_t>> kw(n);
        for (std::size_t u = 0; u < n; ++u) kw[u] = index.store.docs[u].keywords;
        append_section(file, kSectionKeywords, encode_id_lists(kw));
    }
    if (any_entities) {
        std::vector<std::vector<uint32_t>> ents(n);
        for (std::size_t u = 0; u < n; ++u) ents[u] = index.store.docs[u].entities;
        append_section(file, kSectionEntities, encode_id_lists(ents));
    }
    append_section(file, kSectionSemantic, encode_id_lists(index.semantic));
    if (any_keyword_edges) append_section(file, kSectionKeywordEdges, encode_id_lists(index.keyword));
    if (any_logical) {
        std::string s;
        uint64_t total = 0;
        for (const auto& l : index.logical) total += l.size();
        put_u64(s, total);
        for (const auto& l : index.logical) put_u32(s, static_cast<uint32_t>(l.size()));
        for (const auto& l : index.logical)
            for (const LogicalEdge& e : l) {
                put_u32(s, e.source);
                put_u32(s, e.relation);
                put_u32(s, e.target);
                put_u32(s, e.via);
            }
        append_section(file, kSectionLogicalEdges, s);
    }
    if (any_entities) {
        std::string s;
        put_u32(s, static_cast<uint32_t>(index.entity_map.size()));
        for (const auto& [entity, nodes] : index.entity_map) {
            put_u32(s, entity);
            put_u32(s, static_cast<uint32_t>(nodes.size()));
            for (uint32_t v : nodes) put_u32(s, v);
        }
        append_section(file, kSectionEntityMap, s);
    }
    {
        std::string s;
        for (uint32_t v : index.norm_order) put_u32(s, v);
        append_section(file, kSectionNormOrder, s);
    }
    if (!index.kg.triplets().empty()) {
        std::string s;
        put_u64(s, index.kg.triplets().size());
        for (const Triplet& t : index.kg.triplets()) {
            put_u32(s, t.source);
            put_u32(s, t.relation);
            put_u32(s, t.target);
        }
        append_section(file, kSectionTriplets, s);
    }

    std::ofstream out = open_output(path);
    out.write(file.data(), static_cast<std::streamsize>(file.size()));
    if (!out) throw Error("io-error", "failed writing " + path);
    return file.size();
}

HybridIndex deserialize_index(const std::string& path, bool validate) {
    std::ifstream in = open_input(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();

    if (bytes.size() < sizeof kMagic + 4 ||
        std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw Error("not-an-index", path + " lacks the index magic");

    Reader header(bytes, sizeof kMagic, bytes.size());
    const uint32_t version = header.u32();
    if (version != kVersion)
        throw Error("version-mismatch", "index format " + std::to_string(version) +
                                            ", expected " + std::to_string(kVersion));

    HybridIndex index;
    const uint64_t n = header.u64();
    index.store.dense_dim = header.u64();
    index.store.learned_dim = header.u64();
    index.store.statistical_dim = header.u64();
    index.degree = header.u32();
    index.knn_k = header.u32();
    const uint32_t flags = header.u32();
    index.default_entity_hops = header.u32();
    index.logical_cap = header.u32();
    index.build_seed = header.u64();

    index.store.docs.resize(n);
    index.semantic.resize(n);
    index.keyword.resize(n);
    index.logical.resize(n);

    uint32_t seen_sections = 0;
    std::size_t pos = header.pos();
    while (pos < bytes.size()) {
        Reader head(bytes, pos, bytes.size());
        const uint32_t id = head.u32();
        const uint64_t len = head.u64();
        const uint64_t sum = head.u64();
        const std::size_t payload_start = head.pos();
        if (payload_start + len > bytes.size())
            throw Error("truncated-file", "section " + std::to_string(id) +
                                              " extends past end of file");
        if (fnv1a(bytes.substr(payload_start, len)) != sum)
            throw Error("checksum-failure", "section " + std::to_string(id) +
                                                " is corrupted");

        Reader r(bytes, payload_start, payload_start + len);
        switch (id) {
        case kSectionDocs:
            for (uint64_t i = 0; i < n; ++i) {
                index.store.docs[i].doc_id = r.u64();
                index.store.docs[i].deleted = r.u8() != 0;
            }
            break;
        case kSectionDense:
            for (uint64_t i = 0; i < n; ++i) {
                auto& vals = index.store.docs[i].vector.dense.values;
                vals.resize(index.store.dense_dim);
                for (float& v : vals) v = r.f32();
            }
            break;
        case kSectionLearned:
            decode_sparse_column(r, index.store, true);
            break;
        case kSectionStatistical:
            decode_sparse_column(r, index.store, false);
            break;
        case kSectionKeywords: {
            auto lists = decode_id_lists(r, n);
            for (uint64_t i = 0; i < n; ++i) index.store.docs[i].keywords = std::move(lists[i]);
            break;
        }
        case kSectionEntities: {
            auto lists = decode_id_lists(r, n);
            for (uint64_t i = 0; i < n; ++i) index.store.docs[i].entities = std::move(lists[i]);
            break;
        }
        case kSectionSemantic:
            index.semantic = decode_id_lists(r, n);
            break;
        case kSectionKeywordEdges:
            index.keyword = decode_id_lists(r, n);
            break;
        case kSectionLogicalEdges: {
            r.u64();
            std::vector<uint32_t> counts(n);
            for (uint64_t i = 0; i < n; ++i) counts[i] = r.u32();
            for (uint64_t i = 0; i < n; ++i) {
                index.logical[i].resize(counts[i]);
                for (LogicalEdge& e : index.logical[i]) {
                    e.source = r.u32();
                    e.relation = r.u32();
                    e.target = r.u32();
                    e.via = r.u32();
                }
            }
            break;
        }
        case kSectionEntityMap: {
            const uint32_t keys = r.u32();
            for (uint32_t i = 0; i < keys; ++i) {
                const uint32_t entity = r.u32();
                const uint32_t count = r.u32();
                auto& nodes = index.entity_map[entity];
                nodes.resize(count);
                for (uint32_t& v : nodes) v = r.u32();
            }
            break;
        }
        case kSectionNormOrder:
            index.norm_order.resize(n);
            for (uint32_t& v : index.norm_order) v = r.u32();
            break;
        case kSectionTriplets: {
            const uint64_t count = r.u64();
            std::vector<Triplet> triplets(count);
            for (Triplet& t : triplets) {
                t.source = r.u32();
                t.relation = r.u32();
                t.target = r.u32();
            }
            index.kg = KnowledgeGraph(std::move(triplets));
            break;
        }
        default:
            throw Error("version-mismatch", "unknown section id " + std::to_string(id));
        }
        seen_sections |= 1u << id;
        pos = payload_start + len;
    }

    constexpr uint32_t required = (1u << kSectionDocs) | (1u << kSectionDense) |
                                  (1u << kSectionLearned) | (1u << kSectionStatistical) |
                                  (1u << kSectionKeywords) | (1u << kSectionSemantic) |
                                  (1u << kSectionNormOrder);
    if ((seen_sections & required) != required)
        throw Error("truncated-file", "index file is missing required sections");
    if ((flags & kHasKeywordEdges) && !(seen_sections & (1u << kSectionKeywordEdges)))
        throw Error("truncated-file", "keyword edge section missing");
    if ((flags & kHasLogicalEdges) && !(seen_sections & (1u << kSectionLogicalEdges)))
        throw Error("truncated-file", "logical edge section missing");
    if ((flags & kHasEntities) &&
        !(seen_sections & (1u << kSectionEntityMap)))
        throw Error("truncated-file", "entity sections missing");
    if ((flags & kHasKg) && !(seen_sections & (1u << kSectionTriplets)))
        throw Error("truncated-file", "knowledge graph section missing");

    index.store.id_to_node.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
        index.store.id_to_node[index.store.docs[i].doc_id] = static_cast<uint32_t>(i);
        finalize_fused(index.store.docs[i].vector);
    }
    if (validate) validate_index(index);
    return index;
}

} // namespace fusegraph
