#pragma once

#include "thoughtmem/embedding.hpp"
#include "thoughtmem/lm.hpp"
#include "thoughtmem/memory.hpp"
#include "thoughtmem/metrics.hpp"
#include "thoughtmem/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace thoughtmem {

enum class EvalKind { abstract_single, abstract_multi, related_multi };

const char* eval_kind_name(EvalKind kind);
EvalKind parse_eval_kind(const std::string& name); // throws UnknownKind

struct EvalPaper {
    std::string title;
    std::string abstract;
    std::string main_content;
};

// One benchmark record. For related-multi cases the gold retrieval targets
// are the citation abstracts; the random abstracts are distractors.
struct EvalCase {
    EvalKind kind = EvalKind::abstract_single;
    std::vector<EvalPaper> papers; // 1 paper for single, 5 for multi
    std::string label;
    std::string own_abstract;                    // related-multi
    std::vector<std::string> citation_abstracts; // related-multi
    std::vector<std::string> random_abstracts;   // related-multi
    std::string query_override;                  // constructed fixtures only
    std::set<std::string> gold_chunk_ids;        // filled by prepare_cases
};

std::vector<EvalCase> load_eval_cases(EvalKind kind, const std::filesystem::path& path);

// Serializes a case back to its record form (normalized field order).
nlohmann::json eval_case_to_json(const EvalCase& eval_case);

// The retrieval query for a case; query_override wins when present.
std::string eval_case_query(const EvalCase& eval_case);

// Ingests every case's source texts into the store and fills each case's
// gold_chunk_ids: the case's own source chunks for abstract tasks, the
// citation-abstract chunks (never the random ones) for related-multi.
IngestReport prepare_cases(std::vector<EvalCase>& cases, MemoryStore& store,
                           const Embedder& embedder, std::size_t chunk_size_tokens);

struct ReportRow {
    std::string label;
    std::map<std::string, double> metrics;
};

struct ExperimentReport {
    std::string name;
    std::vector<ReportRow> rows;
    std::map<std::string, double> aggregate;
    nlohmann::json config_snapshot;
    std::vector<std::string> artifact_paths;
};

// Read-only evaluation of one case against a memory snapshot: retrieve,
// answer, score. Never updates thought memory.
struct CaseEvaluation {
    RetrievedSet retrieved;
    std::string answer;
    double rouge_f1 = 0.0;
    std::optional<CoverageResult> chunk_coverage;
};

CaseEvaluation evaluate_case(const EvalCase& eval_case, const MemoryStore& store,
                             const LanguageModel& lm, const Embedder& embedder,
                             const PipelineConfig& config);

// Six-chunk synthetic store reproducing the motivating retrieval scenario:
// a 2-item window over raw chunks reaches only half of the four gold
// chunks; two seedable thoughts (covering gold pairs) lift recall to 1.
struct CoverageScenario {
    struct ThoughtSeed {
        std::string id;
        std::string text;
        std::vector<std::string> sources;
    };

    std::unique_ptr<MemoryStore> store;
    HashedBowEmbedder embedder{256};
    std::string query;
    std::set<std::string> gold_chunk_ids;
    std::vector<ThoughtSeed> thought_seeds;

    void seed_thoughts();
    CoverageResult coverage_at_window(std::size_t window) const;
};

CoverageScenario build_coverage_scenario();

ExperimentReport run_coverage_experiment();

// For each ascending thought budget b, evaluates all cases against a
// snapshot holding only the first b accepted thoughts; one row per budget.
ExperimentReport run_scaling_experiment(const std::vector<EvalCase>& cases,
                                        const MemoryStore& store, const LanguageModel& lm,
                                        const Embedder& embedder, const PipelineConfig& config,
                                        const std::vector<std::size_t>& thought_budgets);

// Shuffles cases with the given seed, evolves memory on the first
// split_ratio of them, then evaluates the held-out rest twice: cold
// (thought memory emptied) and evolved.
ExperimentReport run_heldout_evolution(const std::vector<EvalCase>& cases, double split_ratio,
                                       MemoryStore& store, const LanguageModel& lm,
                                       const Embedder& embedder, const PipelineConfig& config,
                                       std::uint64_t shuffle_seed);

struct RankedQuery {
    std::string query;
    double rank = 0.0;
};

// Built-in probe set: six queries spanning low to high abstraction,
// ranked 1 (most concrete) to 6 (most abstract).
std::vector<RankedQuery> abstraction_probe_queries();

// Reports the mean abstraction level of each query's retrieved set next
// to the query's rank, plus the Spearman correlation of the two columns.
ExperimentReport run_abstraction_probe(const std::vector<RankedQuery>& queries_with_rank,
                                       const MemoryStore& store, const Embedder& embedder,
                                       const PipelineConfig& config);

// Average-rank Spearman correlation; empty when undefined (fewer than two
// points or zero variance in either column).
std::optional<double> spearman_rank_correlation(const std::vector<double>& xs,
                                                const std::vector<double>& ys);

void write_report_json(const ExperimentReport& report, const std::filesystem::path& path);
void write_report_csv(const ExperimentReport& report, const std::filesystem::path& path);

// Gnuplot-compatible columns pulled from row metrics.
void write_curve_dat(const ExperimentReport& report, const std::string& x_key,
                     const std::vector<std::string>& y_keys,
                     const std::filesystem::path& path);

} // namespace thoughtmem
