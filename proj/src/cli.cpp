#include "thoughtmem/cli.hpp"

#include "thoughtmem/corpus.hpp"
#include "thoughtmem/errors.hpp"
#include "thoughtmem/eval.hpp"
#include "thoughtmem/memory.hpp"
#include "thoughtmem/pipeline.hpp"
#include "thoughtmem/service.hpp"
#include "thoughtmem/text.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

namespace thoughtmem {

using nlohmann::json;

namespace {

struct CliOptions {
    std::string config_path;
    ServiceConfig config;

    // Flag presence trackers so explicit flags override the config file.
    std::string store_path;
    std::string audit_log;
    std::string lm_backend;
    std::string scripted_fixture;
    std::string embedder_backend;
    std::size_t k = 0;
    double epsilon = -1.0;
    std::size_t chunk_size = 0;
    std::size_t context_budget = 0;
    std::size_t embed_dim = 0;
    std::string listen;

    void resolve() {
        if (!config_path.empty()) config = load_service_config(config_path);
        if (!store_path.empty()) config.store_path = store_path;
        if (!audit_log.empty()) config.audit_log = audit_log;
        if (!lm_backend.empty()) {
            if (lm_backend == "scripted") config.lm_backend = LmBackend::scripted;
            else if (lm_backend == "remote") config.lm_backend = LmBackend::remote;
            else throw Error(ErrorCode::invalid_config, "--lm must be scripted or remote");
        }
        if (!scripted_fixture.empty()) config.scripted_fixture = scripted_fixture;
        if (!embedder_backend.empty()) {
            if (embedder_backend == "hashed") {
                config.embedder_backend = EmbedderBackend::hashed;
            } else if (embedder_backend == "remote") {
                config.embedder_backend = EmbedderBackend::remote;
            } else {
                throw Error(ErrorCode::invalid_config, "--embedder must be hashed or remote");
            }
        }
        if (k != 0) config.pipeline.top_k = k;
        if (epsilon >= 0.0) config.pipeline.epsilon = epsilon;
        if (chunk_size != 0) config.pipeline.chunk_size_tokens = chunk_size;
        if (context_budget != 0) config.pipeline.context_budget_tokens = context_budget;
        if (embed_dim != 0) config.embed_dim = embed_dim;
        if (!listen.empty()) {
            auto colon = listen.rfind(':');
            if (colon == std::string::npos) {
                throw Error(ErrorCode::invalid_config, "--listen must be host:port");
            }
            config.listen_host = listen.substr(0, colon);
            config.listen_port = std::stoi(listen.substr(colon + 1));
        }
        config.pipeline.validate();
    }
};

void add_common_options(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--config", opts.config_path, "key = value configuration file");
    cmd->add_option("--store", opts.store_path, "memory store file");
    cmd->add_option("--audit-log", opts.audit_log, "session audit log (JSON lines)");
    cmd->add_option("--lm", opts.lm_backend, "LM backend: scripted | remote");
    cmd->add_option("--scripted-fixture", opts.scripted_fixture,
                    "prompt/completion fixture for the scripted backend");
    cmd->add_option("--embedder", opts.embedder_backend, "embedder: hashed | remote");
    cmd->add_option("--embed-dim", opts.embed_dim, "embedding dimension");
    cmd->add_option("-k,--top-k", opts.k, "retrieved items per query");
    cmd->add_option("--epsilon", opts.epsilon, "redundancy threshold in (0, 1]");
    cmd->add_option("--chunk-size", opts.chunk_size, "chunk size in tokens");
    cmd->add_option("--context-budget", opts.context_budget, "context budget in tokens");
}

std::unique_ptr<MemoryStore> open_store(const ServiceConfig& config,
                                        const Embedder& embedder) {
    if (std::filesystem::exists(config.store_path)) {
        return MemoryStore::restore(config.store_path, embedder);
    }
    return std::make_unique<MemoryStore>(embedder.dimension());
}

json item_json(const MemoryItem& item) {
    json out{{"id", item.id},
             {"kind", item_kind_name(item.kind)},
             {"text", item.text()},
             {"created_seq", item.created_seq}};
    if (item.kind == ItemKind::chunk) {
        const auto& chunk = std::get<DataChunk>(item.payload);
        out["doc_id"] = chunk.doc_id;
        out["ordinal"] = chunk.ordinal;
        out["token_count"] = chunk.token_count;
    } else {
        const auto& thought = std::get<Thought>(item.payload);
        out["query_id"] = thought.query_id;
        out["immediate_sources"] = thought.immediate_sources;
    }
    return out;
}

json outcome_json(const QueryRecord& record) {
    json outcome{{"kind", thought_outcome_name(record.outcome.kind)}};
    if (record.outcome.kind == ThoughtOutcome::Kind::accepted) {
        outcome["thought_id"] = record.outcome.item_id;
    } else if (record.outcome.kind == ThoughtOutcome::Kind::rejected_redundant) {
        outcome["max_similarity"] = record.outcome.max_similarity;
        outcome["matched_id"] = record.outcome.matched_id;
    }
    return outcome;
}

int run_ingest(const CliOptions& opts, const std::vector<std::string>& files,
               std::ostream& out) {
    auto embedder = make_embedder(opts.config);
    auto store = open_store(opts.config, *embedder);
    std::vector<Document> docs;
    for (const auto& file : files) {
        auto loaded = load_documents(file);
        docs.insert(docs.end(), loaded.begin(), loaded.end());
    }
    auto report = ingest_documents(docs, *store, *embedder,
                                   opts.config.pipeline.chunk_size_tokens);
    store->persist(opts.config.store_path);
    out << json{{"added", report.added},
                {"skipped", report.skipped},
                {"documents", docs.size()},
                {"store", opts.config.store_path.string()}}
               .dump()
        << '\n';
    return 0;
}

int run_query(const CliOptions& opts, const std::string& query_text, std::ostream& out,
              std::ostream& err) {
    auto embedder = make_embedder(opts.config);
    auto lm = make_language_model(opts.config);
    auto store = open_store(opts.config, *embedder);
    if (store->size() == 0) {
        err << "warning: store is empty; answering from the query alone\n";
    }
    const auto tallies = tally_audit_log(opts.config.audit_log);
    char query_id[16];
    std::snprintf(query_id, sizeof(query_id), "q%06llu",
                  static_cast<unsigned long long>(tallies.queries));
    auto record = process_query(query_id, query_text, *store, *lm, *embedder,
                                opts.config.pipeline);
    store->persist(opts.config.store_path);
    AuditLog(opts.config.audit_log).append(record);

    json retrieved = json::array();
    for (const auto& entry : record.retrieved.entries) {
        retrieved.push_back({{"id", entry.id},
                             {"score", entry.score},
                             {"kind", item_kind_name(entry.kind)}});
    }
    out << json{{"query_id", record.query_id},
                {"answer", record.answer_text},
                {"retrieved", retrieved},
                {"thought_outcome", outcome_json(record)}}
               .dump()
        << '\n';
    return 0;
}

int run_session_cmd(const CliOptions& opts, const std::string& queries_path,
                    std::ostream& out) {
    auto embedder = make_embedder(opts.config);
    auto lm = make_language_model(opts.config);
    auto store = open_store(opts.config, *embedder);

    std::ifstream in(queries_path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_failure, "cannot open '" + queries_path + "'");
    }
    std::vector<std::string> queries;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object() || !record.contains("query")) {
            throw Error(ErrorCode::malformed_record,
                        "line " + std::to_string(line_number) +
                            " must be {\"query\": string}");
        }
        queries.push_back(record["query"].get<std::string>());
    }

    AuditLog audit(opts.config.audit_log);
    try {
        auto result = run_session(queries, *store, *lm, *embedder, opts.config.pipeline);
        store->persist(opts.config.store_path);
        for (const auto& record : result.records) {
            audit.append(record);
            out << json{{"query_id", record.query_id},
                        {"answer", record.answer_text},
                        {"thought_outcome", outcome_json(record)}}
                       .dump()
                << '\n';
        }
    } catch (const SessionError&) {
        // Earlier accepted thoughts remain usable for a resumed session.
        store->persist(opts.config.store_path);
        throw;
    }
    return 0;
}

int run_inspect(const CliOptions& opts, const std::string& item_id, std::ostream& out) {
    auto embedder = make_embedder(opts.config);
    auto store = open_store(opts.config, *embedder);
    auto item = store->get_item(item_id);
    auto roots = store->root_source(item_id);
    out << json{{"item", item_json(item)},
                {"root_source", std::vector<std::string>(roots.begin(), roots.end())},
                {"abstraction_level", store->abstraction_level(item_id)}}
               .dump(2)
        << '\n';
    return 0;
}

int run_stats(const CliOptions& opts, std::ostream& out) {
    auto embedder = make_embedder(opts.config);
    auto store = open_store(opts.config, *embedder);
    const auto tallies = tally_audit_log(opts.config.audit_log);
    out << json{{"chunks", store->chunk_count()},
                {"thoughts", store->thought_count()},
                {"accepted", tallies.accepted},
                {"rejected_redundant", tallies.rejected_redundant},
                {"rejected_low_confidence", tallies.rejected_low_confidence}}
               .dump()
        << '\n';
    return 0;
}

struct EvalOptions {
    std::string experiment;
    std::string cases_path;
    std::string kind = "abstract-single";
    std::string out_dir = ".";
    std::vector<std::size_t> budgets{0, 1, 2, 4, 8, 16};
    double split_ratio = 0.5;
    std::uint64_t seed = 1;
};

int run_eval(const CliOptions& opts, const EvalOptions& eval_opts, std::ostream& out) {
    const std::filesystem::path out_dir = eval_opts.out_dir;
    std::filesystem::create_directories(out_dir);

    ExperimentReport report;
    if (eval_opts.experiment == "coverage") {
        report = run_coverage_experiment();
        auto scenario = build_coverage_scenario();
        scenario.seed_thoughts();
        const auto store_path = out_dir / "coverage.store";
        scenario.store->persist(store_path);
        report.artifact_paths.push_back(store_path.string());
    } else if (eval_opts.experiment == "scaling" || eval_opts.experiment == "heldout") {
        if (eval_opts.cases_path.empty()) {
            throw Error(ErrorCode::invalid_config,
                        eval_opts.experiment + " needs a cases file");
        }
        auto embedder = make_embedder(opts.config);
        auto lm = make_language_model(opts.config);
        auto cases = load_eval_cases(parse_eval_kind(eval_opts.kind), eval_opts.cases_path);
        MemoryStore store(embedder->dimension());
        prepare_cases(cases, store, *embedder, opts.config.pipeline.chunk_size_tokens);
        if (eval_opts.experiment == "scaling") {
            // Evolve over every case first; the runner then replays
            // ascending prefixes of the accepted thoughts.
            for (std::size_t i = 0; i < cases.size(); ++i) {
                char query_id[24];
                std::snprintf(query_id, sizeof(query_id), "evolve%04zu", i);
                process_query(query_id, eval_case_query(cases[i]), store, *lm, *embedder,
                              opts.config.pipeline);
            }
            report = run_scaling_experiment(cases, store, *lm, *embedder,
                                            opts.config.pipeline, eval_opts.budgets);
            const auto dat_path = out_dir / "scaling.dat";
            write_curve_dat(report, "thought_budget", {"mean_f1"}, dat_path);
            report.artifact_paths.push_back(dat_path.string());
        } else {
            report = run_heldout_evolution(cases, eval_opts.split_ratio, store, *lm,
                                           *embedder, opts.config.pipeline, eval_opts.seed);
            const auto dat_path = out_dir / "tradeoff.dat";
            write_curve_dat(report, "recall", {"precision"}, dat_path);
            report.artifact_paths.push_back(dat_path.string());
        }
    } else if (eval_opts.experiment == "abstraction") {
        auto embedder = make_embedder(opts.config);
        auto store = open_store(opts.config, *embedder);
        report = run_abstraction_probe(abstraction_probe_queries(), *store, *embedder,
                                       opts.config.pipeline);
    } else {
        throw Error(ErrorCode::unknown_kind,
                    "no experiment named '" + eval_opts.experiment +
                        "' (coverage, scaling, heldout, abstraction)");
    }

    const auto json_path = out_dir / (report.name + ".report.json");
    const auto csv_path = out_dir / (report.name + ".rows.csv");
    write_report_json(report, json_path);
    write_report_csv(report, csv_path);
    report.artifact_paths.push_back(json_path.string());
    report.artifact_paths.push_back(csv_path.string());
    write_report_json(report, json_path); // rewrite with final artifact list

    out << json{{"experiment", report.name},
                {"aggregate", report.aggregate},
                {"artifacts", report.artifact_paths}}
               .dump(2)
        << '\n';
    return 0;
}

int run_serve(const CliOptions& opts, std::ostream& out) {
    auto embedder_owned = make_embedder(opts.config);
    std::shared_ptr<const Embedder> embedder(std::move(embedder_owned));
    std::shared_ptr<const LanguageModel> lm(make_language_model(opts.config));
    std::shared_ptr<MemoryStore> store;
    if (std::filesystem::exists(opts.config.store_path)) {
        store = MemoryStore::restore(opts.config.store_path, *embedder);
    } else {
        store = std::make_shared<MemoryStore>(embedder->dimension());
    }
    MemoryService service(store, lm, embedder, opts.config);
    service.bind();
    out << "listening on " << opts.config.listen_host << ':' << opts.config.listen_port
        << '\n';
    out.flush();
    service.listen();
    return 0;
}

} // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Self-evolving retrieval memory engine"};
    app.require_subcommand(1);

    CliOptions opts;

    auto* ingest = app.add_subcommand("ingest", "chunk and embed documents into the store");
    std::vector<std::string> ingest_files;
    ingest->add_option("files", ingest_files, "text or JSONL document files")->required();
    add_common_options(ingest, opts);

    auto* query = app.add_subcommand("query", "answer one query and update thought memory");
    std::string query_text;
    query->add_option("text", query_text, "query text")->required();
    add_common_options(query, opts);

    auto* session = app.add_subcommand("session", "run a query session from a JSONL file");
    std::string session_path;
    session->add_option("queries", session_path, "JSONL file of {\"query\": ...} records")
        ->required();
    add_common_options(session, opts);

    auto* inspect = app.add_subcommand("inspect", "show an item with provenance");
    std::string inspect_id;
    inspect->add_option("item-id", inspect_id, "item id")->required();
    add_common_options(inspect, opts);

    auto* stats = app.add_subcommand("stats", "store and session counters");
    add_common_options(stats, opts);

    auto* eval = app.add_subcommand("eval", "run an experiment");
    EvalOptions eval_opts;
    eval->add_option("experiment", eval_opts.experiment,
                     "coverage | scaling | heldout | abstraction")
        ->required();
    eval->add_option("cases", eval_opts.cases_path, "JSONL case file");
    eval->add_option("--kind", eval_opts.kind,
                     "case kind: abstract-single | abstract-multi | related-multi");
    eval->add_option("--out", eval_opts.out_dir, "output directory for report artifacts");
    eval->add_option("--budgets", eval_opts.budgets, "ascending thought budgets");
    eval->add_option("--split-ratio", eval_opts.split_ratio, "evolution split in (0, 1)");
    eval->add_option("--seed", eval_opts.seed, "shuffle seed");
    add_common_options(eval, opts);

    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    serve->add_option("--listen", opts.listen, "host:port");
    add_common_options(serve, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n' << app.help();
        return 1;
    }

    try {
        opts.resolve();
        if (ingest->parsed()) return run_ingest(opts, ingest_files, out);
        if (query->parsed()) return run_query(opts, query_text, out, err);
        if (session->parsed()) return run_session_cmd(opts, session_path, out);
        if (inspect->parsed()) return run_inspect(opts, inspect_id, out);
        if (stats->parsed()) return run_stats(opts, out);
        if (eval->parsed()) return run_eval(opts, eval_opts, out);
        if (serve->parsed()) return run_serve(opts, out);
    } catch (const Error& e) {
        err << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

} // namespace thoughtmem
