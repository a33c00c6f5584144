#pragma once

#include "thoughtmem/embedding.hpp"
#include "thoughtmem/lm.hpp"
#include "thoughtmem/memory.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace thoughtmem {

struct PipelineConfig {
    std::size_t top_k = 8;
    double epsilon = 0.85;
    std::size_t chunk_size_tokens = 500;
    std::size_t context_budget_tokens = 2000;

    void validate() const;
};

struct ThoughtOutcome {
    enum class Kind { accepted, rejected_low_confidence, rejected_redundant, no_thought };

    Kind kind = Kind::no_thought;
    std::string item_id;           // accepted
    double max_similarity = -1.0;  // rejected_redundant
    std::string matched_id;        // rejected_redundant
};

const char* thought_outcome_name(ThoughtOutcome::Kind kind);

// Full audit trail for one processed query.
struct QueryRecord {
    std::string query_id;
    std::string query_text;
    RetrievedSet retrieved;
    std::string answer_text;
    ThoughtOutcome outcome;
    std::map<std::string, std::int64_t> timings_us;
};

// Redundancy flag for a candidate thought: s=1 iff the maximum cosine
// similarity between the candidate and any stored item (chunks and
// thoughts alike) reaches epsilon. An empty store reports s=0 with
// max_similarity -1.
struct RedundancyResult {
    int s = 0;
    double max_similarity = -1.0;
    std::optional<std::string> matched_id;
};

RedundancyResult redundancy_check(const std::string& candidate_text, const MemoryStore& store,
                                  const Embedder& embedder, double epsilon);

// One full loop body: retrieve from the chunk/thought union, answer,
// generate a thought with confidence, check redundancy, and insert the
// thought only when confidence is 1 and it is not redundant. The store is
// untouched unless the outcome is `accepted`.
QueryRecord process_query(const std::string& query_id, const std::string& query_text,
                          MemoryStore& store, const LanguageModel& lm,
                          const Embedder& embedder, const PipelineConfig& config);

struct SessionResult {
    std::vector<std::string> answers;
    std::vector<QueryRecord> records;
};

// Processes queries strictly in order, so thoughts accepted for query i
// are retrievable by query i+1. A backend failure halts the session with
// the failing index (earlier accepted thoughts remain).
SessionResult run_session(const std::vector<std::string>& queries, MemoryStore& store,
                          const LanguageModel& lm, const Embedder& embedder,
                          const PipelineConfig& config);

// Appends one JSON line per QueryRecord to a session log file.
class AuditLog {
public:
    explicit AuditLog(std::filesystem::path path) : path_(std::move(path)) {}

    void append(const QueryRecord& record) const;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

struct AuditTallies {
    std::uint64_t accepted = 0;
    std::uint64_t rejected_redundant = 0;
    std::uint64_t rejected_low_confidence = 0;
    std::uint64_t no_thought = 0;
    std::uint64_t queries = 0;
};

AuditTallies tally_audit_log(const std::filesystem::path& path);

nlohmann::json query_record_to_json(const QueryRecord& record);

} // namespace thoughtmem
