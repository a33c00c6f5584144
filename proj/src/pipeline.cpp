#include "thoughtmem/pipeline.hpp"

#include "thoughtmem/errors.hpp"
#include "thoughtmem/hash.hpp"
#include "thoughtmem/text.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

namespace thoughtmem {

using nlohmann::json;

void PipelineConfig::validate() const {
    if (top_k == 0) throw Error(ErrorCode::invalid_config, "top_k must be positive");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw Error(ErrorCode::invalid_config, "epsilon must be in (0, 1]");
    }
    if (chunk_size_tokens == 0) {
        throw Error(ErrorCode::invalid_config, "chunk_size_tokens must be positive");
    }
    if (context_budget_tokens == 0) {
        throw Error(ErrorCode::invalid_config, "context_budget_tokens must be positive");
    }
}

const char* thought_outcome_name(ThoughtOutcome::Kind kind) {
    switch (kind) {
    case ThoughtOutcome::Kind::accepted: return "accepted";
    case ThoughtOutcome::Kind::rejected_low_confidence: return "rejected_low_confidence";
    case ThoughtOutcome::Kind::rejected_redundant: return "rejected_redundant";
    case ThoughtOutcome::Kind::no_thought: return "no_thought";
    }
    return "unknown";
}

RedundancyResult redundancy_check(const std::string& candidate_text, const MemoryStore& store,
                                  const Embedder& embedder, double epsilon) {
    auto scan = store.max_similarity(embedder.embed(candidate_text));
    RedundancyResult result;
    result.max_similarity = scan.max_similarity;
    result.matched_id = scan.matched_id;
    result.s = (scan.matched_id && scan.max_similarity >= epsilon) ? 1 : 0;
    return result;
}

namespace {

class StageTimer {
public:
    explicit StageTimer(std::map<std::string, std::int64_t>& sink) : sink_(sink) {}

    template <typename F>
    auto run(const std::string& stage, F&& fn) {
        auto begin = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record(stage, begin);
        } else {
            auto out = fn();
            record(stage, begin);
            return out;
        }
    }

private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point begin) {
        auto elapsed = std::chrono::steady_clock::now() - begin;
        sink_[stage] =
            std::chrono::duration_cast<std::chrono::microseconds>(elapsed).count();
    }

    std::map<std::string, std::int64_t>& sink_;
};

std::string mint_thought_id(const std::string& query_id, const std::string& text) {
    return "t-" + sha256_hex(query_id + "\n" + text).substr(0, 16);
}

} // namespace

QueryRecord process_query(const std::string& query_id, const std::string& query_text,
                          MemoryStore& store, const LanguageModel& lm,
                          const Embedder& embedder, const PipelineConfig& config) {
    config.validate();
    QueryRecord record;
    record.query_id = query_id;
    record.query_text = query_text;
    StageTimer timer(record.timings_us);

    const EmbeddingVector query_embedding = embedder.embed(query_text);
    record.retrieved = timer.run("retrieve", [&] {
        return store.retrieve_top_k(query_embedding, config.top_k);
    });
    record.retrieved.query_id = query_id;

    std::vector<std::string> retrieved_texts;
    retrieved_texts.reserve(record.retrieved.entries.size());
    for (const auto& entry : record.retrieved.entries) {
        retrieved_texts.push_back(store.get_item(entry.id).text());
    }

    record.answer_text = timer.run("answer", [&] {
        return lm.complete(
            render_answer_prompt(query_text, retrieved_texts, config.context_budget_tokens));
    });

    // A thought needs sources to attribute and an answer to distill; with
    // neither there is nothing to remember.
    if (record.retrieved.entries.empty() || trim(record.answer_text).empty()) {
        record.outcome.kind = ThoughtOutcome::Kind::no_thought;
        return record;
    }

    const ThoughtCandidate candidate = timer.run("thought", [&] {
        return parse_thought_response(
            lm.complete(render_thought_prompt(query_text, record.answer_text)));
    });

    if (candidate.confidence == 0) {
        record.outcome.kind = ThoughtOutcome::Kind::rejected_low_confidence;
        return record;
    }

    Thought thought;
    thought.thought_id = mint_thought_id(query_id, candidate.text);
    thought.text = candidate.text;
    thought.query_id = query_id;
    thought.immediate_sources = record.retrieved.ids();

    const MergeOutcome merged = timer.run("merge", [&] {
        return store.merge_thought(thought, embedder.embed(candidate.text), config.epsilon);
    });

    if (merged.redundant) {
        record.outcome.kind = ThoughtOutcome::Kind::rejected_redundant;
        record.outcome.max_similarity = merged.max_similarity;
        record.outcome.matched_id = merged.matched_id.value_or("");
    } else {
        record.outcome.kind = ThoughtOutcome::Kind::accepted;
        record.outcome.item_id = *merged.inserted_id;
    }
    return record;
}

SessionResult run_session(const std::vector<std::string>& queries, MemoryStore& store,
                          const LanguageModel& lm, const Embedder& embedder,
                          const PipelineConfig& config) {
    SessionResult result;
    result.answers.reserve(queries.size());
    result.records.reserve(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        char query_id[16];
        std::snprintf(query_id, sizeof(query_id), "q%06zu", i);
        try {
            auto record = process_query(query_id, queries[i], store, lm, embedder, config);
            result.answers.push_back(record.answer_text);
            result.records.push_back(std::move(record));
        } catch (const Error& e) {
            throw SessionError(i, e.code(), e.what());
        }
    }
    return result;
}

json query_record_to_json(const QueryRecord& record) {
    json retrieved = json::array();
    for (const auto& entry : record.retrieved.entries) {
        retrieved.push_back(
            {{"id", entry.id}, {"score", entry.score}, {"kind", item_kind_name(entry.kind)}});
    }
    json outcome{{"kind", thought_outcome_name(record.outcome.kind)}};
    if (record.outcome.kind == ThoughtOutcome::Kind::accepted) {
        outcome["item_id"] = record.outcome.item_id;
    } else if (record.outcome.kind == ThoughtOutcome::Kind::rejected_redundant) {
        outcome["max_similarity"] = record.outcome.max_similarity;
        outcome["matched_id"] = record.outcome.matched_id;
    }
    json timings = json::object();
    for (const auto& [stage, us] : record.timings_us) timings[stage] = us;
    return json{{"query_id", record.query_id},
                {"query", record.query_text},
                {"retrieved", retrieved},
                {"answer", record.answer_text},
                {"thought_outcome", outcome},
                {"timings_us", timings}};
}

void AuditLog::append(const QueryRecord& record) const {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) {
        throw Error(ErrorCode::io_failure, "cannot open audit log '" + path_.string() + "'");
    }
    auto line = query_record_to_json(record);
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    line["ts"] = stamp;
    out << line.dump() << '\n';
    if (!out) {
        throw Error(ErrorCode::io_failure, "failed writing audit log '" + path_.string() + "'");
    }
}

AuditTallies tally_audit_log(const std::filesystem::path& path) {
    AuditTallies tallies;
    std::ifstream in(path, std::ios::binary);
    if (!in) return tallies; // absent log means no recorded queries
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.contains("thought_outcome")) {
            throw Error(ErrorCode::malformed_record,
                        "audit log line " + std::to_string(line_number) + " is invalid");
        }
        ++tallies.queries;
        const auto kind = record["thought_outcome"].value("kind", std::string{});
        if (kind == "accepted") ++tallies.accepted;
        else if (kind == "rejected_redundant") ++tallies.rejected_redundant;
        else if (kind == "rejected_low_confidence") ++tallies.rejected_low_confidence;
        else ++tallies.no_thought;
    }
    return tallies;
}

} // namespace thoughtmem
