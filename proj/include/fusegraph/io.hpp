#pragma once

/// File formats: JSON-lines ingestion/output and the binary index file.
///
/// The binary format is deterministic for a given index (fixed section
/// order, little-endian integers, 32-bit floats for payloads). Every section
/// carries an FNV-1a checksum; loads verify magic, version, checksums and
/// completeness, each with a distinct error code. Cached norms are
/// recomputed on load, so only raw 32-bit values ever touch the disk.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fusegraph/eval.hpp"
#include "fusegraph/index.hpp"
#include "fusegraph/search.hpp"
#include "fusegraph/types.hpp"

namespace fusegraph {

/// Loads {"id","dense","learned","statistical","keywords"?,"entities"?}
/// JSON-lines and validates the corpus.
DocumentStore load_corpus(const std::string& path);

/// Loads {"s","r","t"} JSON-lines.
KnowledgeGraph load_kg(const std::string& path);

struct QueryDefaults {
    uint32_t k = 10;
    uint32_t beam = 64;
    uint32_t max_entity_hops = 2;
};

/// Loads {"dense","learned","statistical","weights","keywords","entities",
/// "k","beam"} JSON-lines; absent fields fall back to `defaults`.
std::vector<QuerySpec> load_queries(const std::string& path, const QueryDefaults& defaults = {});

struct TruthEntry {
    uint64_t qid = 0;
    std::vector<uint64_t> relevant;
};

/// Loads {"qid","relevant"} JSON-lines.
std::vector<TruthEntry> load_truth(const std::string& path);

void write_corpus(const std::string& path, const DocumentStore& store);
void write_kg(const std::string& path, const KnowledgeGraph& kg);
void write_queries(const std::string& path, std::span<const QuerySpec> queries);
void write_truth(const std::string& path, std::span<const TruthEntry> truth);

/// One line per query: {"qid":i,"results":[{"id":…,"score":…}…],
/// "warnings":[…]}; a failed query contributes empty results and its error
/// string as a warning.
void write_results(const std::string& path, std::span<const SearchResult> results);

/// CSV with header "beam,qps,recall,ndcg,latency_ms".
void write_report_csv(const std::string& path, std::span<const BenchRow> rows);

/// Human-readable table of the same rows.
std::string format_report_table(std::span<const BenchRow> rows);

/// Writes the index; returns the byte count. Identical indexes serialize to
/// identical bytes.
uint64_t serialize_index(const HybridIndex& index, const std::string& path);

/// Loads an index file; `validate` additionally runs the full invariant
/// scan. Errors: "not-an-index" (bad magic), "version-mismatch",
/// "checksum-failure", "truncated-file", "io-error".
HybridIndex deserialize_index(const std::string& path, bool validate = false);

} // namespace fusegraph
