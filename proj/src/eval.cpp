#include "thoughtmem/eval.hpp"

#include "thoughtmem/corpus.hpp"
#include "thoughtmem/errors.hpp"
#include "thoughtmem/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace thoughtmem {

using nlohmann::json;

const char* eval_kind_name(EvalKind kind) {
    switch (kind) {
    case EvalKind::abstract_single: return "abstract-single";
    case EvalKind::abstract_multi: return "abstract-multi";
    case EvalKind::related_multi: return "related-multi";
    }
    return "unknown";
}

EvalKind parse_eval_kind(const std::string& name) {
    if (name == "abstract-single") return EvalKind::abstract_single;
    if (name == "abstract-multi") return EvalKind::abstract_multi;
    if (name == "related-multi") return EvalKind::related_multi;
    throw Error(ErrorCode::unknown_kind, "no case kind named '" + name + "'");
}

namespace {

constexpr std::size_t kMultiPaperCount = 5;

const char kAbstractQueryPrompt[] =
    "Please craft an abstract summarizing the key points from the provided text. The "
    "abstract should be of appropriate length and include the main theme, significant "
    "findings or arguments, and conclusions of the text. Ensure it captures the essence "
    "of the content in a clear, succinct manner";

const char kRelatedQueryPrompt[] =
    "Could you please write a related work for introducing this paper? Its abstract is: ";

const json& field(const json& record, const std::string& name) {
    auto it = record.find(name);
    if (it == record.end()) {
        throw Error(ErrorCode::missing_field, name);
    }
    return *it;
}

std::vector<std::string> string_list(const json& value, const std::string& name) {
    if (!value.is_array()) {
        throw Error(ErrorCode::missing_field, name + " must be an array of strings");
    }
    std::vector<std::string> out;
    out.reserve(value.size());
    for (const auto& entry : value) out.push_back(entry.get<std::string>());
    return out;
}

EvalCase case_from_record(EvalKind kind, const json& record) {
    EvalCase eval_case;
    eval_case.kind = kind;
    switch (kind) {
    case EvalKind::abstract_single: {
        EvalPaper paper;
        paper.title = field(record, "title").get<std::string>();
        paper.abstract = field(record, "abstract").get<std::string>();
        paper.main_content = field(record, "main_content").get<std::string>();
        eval_case.label = paper.abstract;
        eval_case.papers.push_back(std::move(paper));
        break;
    }
    case EvalKind::abstract_multi: {
        for (std::size_t i = 1; i <= kMultiPaperCount; ++i) {
            const std::string suffix = " " + std::to_string(i);
            EvalPaper paper;
            paper.title = field(record, "title" + suffix).get<std::string>();
            paper.abstract = field(record, "abstract" + suffix).get<std::string>();
            paper.main_content = field(record, "main_content" + suffix).get<std::string>();
            eval_case.papers.push_back(std::move(paper));
        }
        eval_case.label = field(record, "label").get<std::string>();
        break;
    }
    case EvalKind::related_multi: {
        EvalPaper paper;
        paper.title = field(record, "title").get<std::string>();
        eval_case.own_abstract = field(record, "own abstract").get<std::string>();
        eval_case.label = field(record, "own related work as label").get<std::string>();
        eval_case.citation_abstracts =
            string_list(field(record, "citations' abstracts"), "citations' abstracts");
        eval_case.random_abstracts =
            string_list(field(record, "other random abstracts"), "other random abstracts");
        eval_case.papers.push_back(std::move(paper));
        break;
    }
    }
    if (record.contains("query")) {
        eval_case.query_override = record["query"].get<std::string>();
    }
    return eval_case;
}

} // namespace

std::vector<EvalCase> load_eval_cases(EvalKind kind, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_failure, "cannot open '" + path.string() + "'");
    }
    std::vector<EvalCase> cases;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw Error(ErrorCode::malformed_record,
                        "line " + std::to_string(line_number) + " of '" + path.string() +
                            "' is not a JSON object");
        }
        try {
            cases.push_back(case_from_record(kind, record));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::missing_field) throw;
            throw Error(ErrorCode::malformed_record,
                        "line " + std::to_string(line_number) + ": " + e.what());
        }
    }
    return cases;
}

json eval_case_to_json(const EvalCase& eval_case) {
    json record = json::object();
    switch (eval_case.kind) {
    case EvalKind::abstract_single:
        record["title"] = eval_case.papers.at(0).title;
        record["abstract"] = eval_case.papers.at(0).abstract;
        record["main_content"] = eval_case.papers.at(0).main_content;
        break;
    case EvalKind::abstract_multi:
        for (std::size_t i = 0; i < eval_case.papers.size(); ++i) {
            const std::string suffix = " " + std::to_string(i + 1);
            record["title" + suffix] = eval_case.papers[i].title;
            record["abstract" + suffix] = eval_case.papers[i].abstract;
            record["main_content" + suffix] = eval_case.papers[i].main_content;
        }
        record["label"] = eval_case.label;
        break;
    case EvalKind::related_multi:
        record["title"] = eval_case.papers.at(0).title;
        record["own abstract"] = eval_case.own_abstract;
        record["own related work as label"] = eval_case.label;
        record["citations' abstracts"] = eval_case.citation_abstracts;
        record["other random abstracts"] = eval_case.random_abstracts;
        break;
    }
    if (!eval_case.query_override.empty()) record["query"] = eval_case.query_override;
    return record;
}

std::string eval_case_query(const EvalCase& eval_case) {
    if (!eval_case.query_override.empty()) return eval_case.query_override;
    switch (eval_case.kind) {
    case EvalKind::abstract_single:
        return std::string(kAbstractQueryPrompt) + "\nTitle: " + eval_case.papers.at(0).title;
    case EvalKind::abstract_multi: {
        std::string titles;
        for (const auto& paper : eval_case.papers) {
            if (!titles.empty()) titles += "; ";
            titles += paper.title;
        }
        return std::string(kAbstractQueryPrompt) + "\nTitles: " + titles;
    }
    case EvalKind::related_multi:
        return std::string(kRelatedQueryPrompt) + eval_case.own_abstract;
    }
    return eval_case.query_override;
}

namespace {

// Chunks one source text, inserts what is new, and returns all of its
// chunk ids (new and already present).
std::set<std::string> ingest_text(const std::string& doc_id, const std::string& text,
                                  MemoryStore& store, const Embedder& embedder,
                                  std::size_t chunk_size_tokens, IngestReport& report) {
    std::set<std::string> ids;
    Document doc{doc_id, text, {}};
    for (const auto& chunk : chunk_document(doc, chunk_size_tokens)) {
        if (store.contains(chunk.chunk_id)) {
            ++report.skipped;
        } else {
            store.insert_chunk(chunk, embedder.embed(chunk.text));
            ++report.added;
        }
        ids.insert(chunk.chunk_id);
    }
    return ids;
}

} // namespace

IngestReport prepare_cases(std::vector<EvalCase>& cases, MemoryStore& store,
                           const Embedder& embedder, std::size_t chunk_size_tokens) {
    IngestReport report;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        EvalCase& eval_case = cases[i];
        const std::string base = "case" + std::to_string(i);
        eval_case.gold_chunk_ids.clear();
        switch (eval_case.kind) {
        case EvalKind::abstract_single:
        case EvalKind::abstract_multi: {
            for (std::size_t p = 0; p < eval_case.papers.size(); ++p) {
                auto ids = ingest_text(base + ".paper" + std::to_string(p),
                                       eval_case.papers[p].main_content, store, embedder,
                                       chunk_size_tokens, report);
                eval_case.gold_chunk_ids.insert(ids.begin(), ids.end());
            }
            break;
        }
        case EvalKind::related_multi: {
            for (std::size_t c = 0; c < eval_case.citation_abstracts.size(); ++c) {
                auto ids = ingest_text(base + ".cite" + std::to_string(c),
                                       eval_case.citation_abstracts[c], store, embedder,
                                       chunk_size_tokens, report);
                eval_case.gold_chunk_ids.insert(ids.begin(), ids.end());
            }
            for (std::size_t r = 0; r < eval_case.random_abstracts.size(); ++r) {
                ingest_text(base + ".rand" + std::to_string(r), eval_case.random_abstracts[r],
                            store, embedder, chunk_size_tokens, report);
            }
            break;
        }
        }
    }
    return report;
}

CaseEvaluation evaluate_case(const EvalCase& eval_case, const MemoryStore& store,
                             const LanguageModel& lm, const Embedder& embedder,
                             const PipelineConfig& config) {
    CaseEvaluation out;
    const std::string query = eval_case_query(eval_case);
    out.retrieved = store.retrieve_top_k(embedder.embed(query), config.top_k);

    std::vector<std::string> texts;
    texts.reserve(out.retrieved.entries.size());
    for (const auto& entry : out.retrieved.entries) {
        texts.push_back(store.get_item(entry.id).text());
    }
    out.answer = lm.complete(render_answer_prompt(query, texts, config.context_budget_tokens));
    out.rouge_f1 = rouge_l_f1(out.answer, eval_case.label);

    if (!eval_case.gold_chunk_ids.empty() && !out.retrieved.entries.empty()) {
        std::set<std::string> retrieved_ids;
        for (const auto& entry : out.retrieved.entries) retrieved_ids.insert(entry.id);
        out.chunk_coverage = coverage(retrieved_ids, eval_case.gold_chunk_ids, store);
    }
    return out;
}

void CoverageScenario::seed_thoughts() {
    for (const auto& seed : thought_seeds) {
        Thought thought;
        thought.thought_id = seed.id;
        thought.text = seed.text;
        thought.query_id = "seed";
        thought.immediate_sources = seed.sources;
        store->insert_thought(thought, embedder.embed(seed.text));
    }
}

CoverageResult CoverageScenario::coverage_at_window(std::size_t window) const {
    auto retrieved = store->retrieve_top_k(embedder.embed(query), window);
    std::set<std::string> ids;
    for (const auto& entry : retrieved.entries) ids.insert(entry.id);
    return coverage(ids, gold_chunk_ids, *store);
}

CoverageScenario build_coverage_scenario() {
    CoverageScenario scenario;
    scenario.store = std::make_unique<MemoryStore>(scenario.embedder.dimension());
    scenario.query = "alpha beta gamma delta";
    scenario.gold_chunk_ids = {"K2", "K3", "K4", "K5"};

    const std::vector<std::pair<std::string, std::string>> chunks = {
        {"K1", "kappa lambda"}, {"K2", "alpha beta"},  {"K3", "gamma delta"},
        {"K4", "alpha theta"},  {"K5", "delta iota"},  {"K6", "mu nu"},
    };
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        DataChunk chunk;
        chunk.chunk_id = chunks[i].first;
        chunk.doc_id = "coverage";
        chunk.ordinal = i;
        chunk.text = chunks[i].second;
        chunk.token_count = token_count(chunk.text);
        scenario.store->insert_chunk(chunk, scenario.embedder.embed(chunk.text));
    }
    scenario.thought_seeds = {
        {"T23", "alpha beta gamma delta", {"K2", "K3"}},
        {"T45", "alpha beta gamma delta theta iota", {"K4", "K5"}},
    };
    return scenario;
}

ExperimentReport run_coverage_experiment() {
    auto scenario = build_coverage_scenario();
    ExperimentReport report;
    report.name = "coverage";
    report.config_snapshot = {{"window", 2},
                              {"gold", std::vector<std::string>(scenario.gold_chunk_ids.begin(),
                                                                scenario.gold_chunk_ids.end())}};
    auto raw = scenario.coverage_at_window(2);
    report.rows.push_back({"raw-only", {{"precision", raw.precision},
                                        {"recall", raw.recall},
                                        {"f1", raw.f1}}});
    scenario.seed_thoughts();
    auto seeded = scenario.coverage_at_window(2);
    report.rows.push_back({"with-thoughts", {{"precision", seeded.precision},
                                             {"recall", seeded.recall},
                                             {"f1", seeded.f1}}});
    for (const auto& key : {"precision", "recall", "f1"}) {
        double sum = 0.0;
        for (const auto& row : report.rows) sum += row.metrics.at(key);
        report.aggregate["mean_" + std::string(key)] =
            sum / static_cast<double>(report.rows.size());
    }
    return report;
}

namespace {

struct MeanTracker {
    double sum = 0.0;
    std::size_t count = 0;

    void add(double value) {
        sum += value;
        ++count;
    }
    bool any() const { return count > 0; }
    double mean() const { return sum / static_cast<double>(count); }
};

json config_to_json(const PipelineConfig& config) {
    return {{"top_k", config.top_k},
            {"epsilon", config.epsilon},
            {"chunk_size_tokens", config.chunk_size_tokens},
            {"context_budget_tokens", config.context_budget_tokens}};
}

// Evaluates every case against one snapshot; returns (mean_f1,
// mean_precision, mean_recall) with coverage means over the cases that
// have gold sets.
struct SnapshotMeans {
    MeanTracker f1;
    MeanTracker precision;
    MeanTracker recall;
};

SnapshotMeans evaluate_snapshot(const std::vector<EvalCase>& cases, const MemoryStore& store,
                                const LanguageModel& lm, const Embedder& embedder,
                                const PipelineConfig& config) {
    SnapshotMeans means;
    for (const auto& eval_case : cases) {
        auto eval = evaluate_case(eval_case, store, lm, embedder, config);
        means.f1.add(eval.rouge_f1);
        if (eval.chunk_coverage) {
            means.precision.add(eval.chunk_coverage->precision);
            means.recall.add(eval.chunk_coverage->recall);
        }
    }
    return means;
}

} // namespace

ExperimentReport run_scaling_experiment(const std::vector<EvalCase>& cases,
                                        const MemoryStore& store, const LanguageModel& lm,
                                        const Embedder& embedder, const PipelineConfig& config,
                                        const std::vector<std::size_t>& thought_budgets) {
    if (!std::is_sorted(thought_budgets.begin(), thought_budgets.end())) {
        throw Error(ErrorCode::invalid_config, "thought budgets must be ascending");
    }
    ExperimentReport report;
    report.name = "scaling";
    report.config_snapshot = config_to_json(config);
    report.config_snapshot["thought_budgets"] = thought_budgets;

    for (const auto budget : thought_budgets) {
        auto snapshot = store.clone_with_thought_budget(budget);
        auto means = evaluate_snapshot(cases, *snapshot, lm, embedder, config);
        ReportRow row;
        row.label = "budget=" + std::to_string(budget);
        row.metrics["thought_budget"] = static_cast<double>(budget);
        row.metrics["mean_f1"] = means.f1.any() ? means.f1.mean() : 0.0;
        if (means.precision.any()) {
            row.metrics["mean_precision"] = means.precision.mean();
            row.metrics["mean_recall"] = means.recall.mean();
        }
        report.rows.push_back(std::move(row));
    }

    for (const auto* key : {"mean_f1", "mean_precision", "mean_recall"}) {
        MeanTracker tracker;
        for (const auto& row : report.rows) {
            auto it = row.metrics.find(key);
            if (it != row.metrics.end()) tracker.add(it->second);
        }
        if (tracker.any()) report.aggregate[key] = tracker.mean();
    }
    return report;
}

ExperimentReport run_heldout_evolution(const std::vector<EvalCase>& cases, double split_ratio,
                                       MemoryStore& store, const LanguageModel& lm,
                                       const Embedder& embedder, const PipelineConfig& config,
                                       std::uint64_t shuffle_seed) {
    if (cases.size() < 2) {
        throw Error(ErrorCode::too_few_cases,
                    "need at least 2 cases, got " + std::to_string(cases.size()));
    }
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
        throw Error(ErrorCode::invalid_config, "split ratio must be in (0, 1)");
    }

    // Explicit Fisher-Yates so partitions are identical on every platform.
    std::vector<std::size_t> order(cases.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(shuffle_seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[rng() % (i + 1)]);
    }

    std::size_t evolution_count = static_cast<std::size_t>(
        std::floor(split_ratio * static_cast<double>(cases.size())));
    evolution_count = std::clamp<std::size_t>(evolution_count, 1, cases.size() - 1);

    std::vector<const EvalCase*> evolution_set;
    std::vector<std::pair<std::size_t, const EvalCase*>> test_set;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i < evolution_count) {
            evolution_set.push_back(&cases[order[i]]);
        } else {
            test_set.emplace_back(order[i], &cases[order[i]]);
        }
    }

    // Evolution phase: build thought memory, record nothing.
    for (std::size_t i = 0; i < evolution_set.size(); ++i) {
        char query_id[24];
        std::snprintf(query_id, sizeof(query_id), "evo%04zu", i);
        process_query(query_id, eval_case_query(*evolution_set[i]), store, lm, embedder,
                      config);
    }

    auto cold_store = store.clone_with_thought_budget(0);

    ExperimentReport report;
    report.name = "heldout-evolution";
    report.config_snapshot = config_to_json(config);
    report.config_snapshot["split_ratio"] = split_ratio;
    report.config_snapshot["shuffle_seed"] = shuffle_seed;
    report.config_snapshot["evolution_cases"] = evolution_count;
    report.config_snapshot["test_cases"] = test_set.size();

    SnapshotMeans cold_means;
    SnapshotMeans evolved_means;
    for (const auto& [case_index, eval_case] : test_set) {
        auto cold = evaluate_case(*eval_case, *cold_store, lm, embedder, config);
        auto evolved = evaluate_case(*eval_case, store, lm, embedder, config);
        const std::string suffix = "case" + std::to_string(case_index);

        ReportRow cold_row{"cold/" + suffix, {{"f1", cold.rouge_f1}}};
        cold_means.f1.add(cold.rouge_f1);
        if (cold.chunk_coverage) {
            cold_row.metrics["precision"] = cold.chunk_coverage->precision;
            cold_row.metrics["recall"] = cold.chunk_coverage->recall;
            cold_means.precision.add(cold.chunk_coverage->precision);
            cold_means.recall.add(cold.chunk_coverage->recall);
        }
        report.rows.push_back(std::move(cold_row));

        ReportRow evolved_row{"evolved/" + suffix, {{"f1", evolved.rouge_f1}}};
        evolved_means.f1.add(evolved.rouge_f1);
        if (evolved.chunk_coverage) {
            evolved_row.metrics["precision"] = evolved.chunk_coverage->precision;
            evolved_row.metrics["recall"] = evolved.chunk_coverage->recall;
            evolved_means.precision.add(evolved.chunk_coverage->precision);
            evolved_means.recall.add(evolved.chunk_coverage->recall);
        }
        report.rows.push_back(std::move(evolved_row));
    }

    report.aggregate["cold_mean_f1"] = cold_means.f1.any() ? cold_means.f1.mean() : 0.0;
    report.aggregate["evolved_mean_f1"] =
        evolved_means.f1.any() ? evolved_means.f1.mean() : 0.0;
    report.aggregate["delta_mean_f1"] =
        report.aggregate["evolved_mean_f1"] - report.aggregate["cold_mean_f1"];
    if (cold_means.recall.any() && evolved_means.recall.any()) {
        report.aggregate["cold_mean_recall"] = cold_means.recall.mean();
        report.aggregate["evolved_mean_recall"] = evolved_means.recall.mean();
        report.aggregate["delta_mean_recall"] =
            report.aggregate["evolved_mean_recall"] - report.aggregate["cold_mean_recall"];
        report.aggregate["cold_mean_precision"] = cold_means.precision.mean();
        report.aggregate["evolved_mean_precision"] = evolved_means.precision.mean();
    }
    return report;
}

std::vector<RankedQuery> abstraction_probe_queries() {
    return {
        {"How many benchmarks are used to test the model's long context understanding "
         "ability in this paper?",
         1.0},
        {"Please explain the term Minerva to me.", 2.0},
        {"What are the key methods introduced in this paper?", 3.0},
        {"What are some of the limitations of this study?", 4.0},
        {"Please craft an abstract summarizing the key points from the provided text.", 5.0},
        {"What are the broader future implications of user-centric utility in NLP model "
         "evaluation?",
         6.0},
    };
}

ExperimentReport run_abstraction_probe(const std::vector<RankedQuery>& queries_with_rank,
                                       const MemoryStore& store, const Embedder& embedder,
                                       const PipelineConfig& config) {
    if (store.size() == 0) {
        throw Error(ErrorCode::no_thoughts_in_store, "store has no items to probe");
    }
    ExperimentReport report;
    report.name = "abstraction-probe";
    report.config_snapshot = config_to_json(config);

    std::vector<double> ranks;
    std::vector<double> mean_levels;
    for (const auto& ranked : queries_with_rank) {
        auto retrieved = store.retrieve_top_k(embedder.embed(ranked.query), config.top_k);
        double level_sum = 0.0;
        for (const auto& entry : retrieved.entries) {
            level_sum += store.abstraction_level(entry.id);
        }
        const double mean_level =
            level_sum / static_cast<double>(retrieved.entries.size());
        ranks.push_back(ranked.rank);
        mean_levels.push_back(mean_level);
        report.rows.push_back({ranked.query, {{"rank", ranked.rank},
                                              {"mean_abstraction_level", mean_level}}});
    }

    MeanTracker level_tracker;
    for (double level : mean_levels) level_tracker.add(level);
    if (level_tracker.any()) {
        report.aggregate["mean_abstraction_level"] = level_tracker.mean();
    }
    if (auto rho = spearman_rank_correlation(ranks, mean_levels)) {
        report.aggregate["spearman"] = *rho;
    }
    return report;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

} // namespace

std::optional<double> spearman_rank_correlation(const std::vector<double>& xs,
                                                const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) return std::nullopt;
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const double n = static_cast<double>(xs.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mean_x += rx[i];
        mean_y += ry[i];
    }
    mean_x /= n;
    mean_y /= n;
    double cov = 0.0, var_x = 0.0, var_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = rx[i] - mean_x;
        const double dy = ry[i] - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if (var_x == 0.0 || var_y == 0.0) return std::nullopt;
    return cov / std::sqrt(var_x * var_y);
}

namespace {

json report_to_json(const ExperimentReport& report) {
    json rows = json::array();
    for (const auto& row : report.rows) {
        rows.push_back({{"label", row.label}, {"metrics", row.metrics}});
    }
    return json{{"experiment", report.name},
                {"config", report.config_snapshot},
                {"rows", rows},
                {"aggregate", report.aggregate},
                {"artifacts", report.artifact_paths}};
}

std::string csv_escape(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

} // namespace

void write_report_json(const ExperimentReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io_failure, "cannot open '" + path.string() + "' for writing");
    }
    out << report_to_json(report).dump(2) << '\n';
}

void write_report_csv(const ExperimentReport& report, const std::filesystem::path& path) {
    std::set<std::string> keys;
    for (const auto& row : report.rows) {
        for (const auto& [key, _] : row.metrics) keys.insert(key);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io_failure, "cannot open '" + path.string() + "' for writing");
    }
    out << "label";
    for (const auto& key : keys) out << ',' << csv_escape(key);
    out << '\n';
    std::ostringstream numbers;
    numbers.precision(12);
    for (const auto& row : report.rows) {
        out << csv_escape(row.label);
        for (const auto& key : keys) {
            out << ',';
            auto it = row.metrics.find(key);
            if (it != row.metrics.end()) {
                numbers.str("");
                numbers << it->second;
                out << numbers.str();
            }
        }
        out << '\n';
    }
}

void write_curve_dat(const ExperimentReport& report, const std::string& x_key,
                     const std::vector<std::string>& y_keys,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io_failure, "cannot open '" + path.string() + "' for writing");
    }
    out << "# " << x_key;
    for (const auto& key : y_keys) out << ' ' << key;
    out << '\n';
    out.precision(12);
    for (const auto& row : report.rows) {
        auto x = row.metrics.find(x_key);
        if (x == row.metrics.end()) continue;
        out << x->second;
        bool complete = true;
        std::ostringstream line;
        line.precision(12);
        for (const auto& key : y_keys) {
            auto y = row.metrics.find(key);
            if (y == row.metrics.end()) {
                complete = false;
                break;
            }
            line << ' ' << y->second;
        }
        if (complete) out << line.str();
        out << '\n';
    }
}

} // namespace thoughtmem
