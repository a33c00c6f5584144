#include "thoughtmem/service.hpp"

#include "thoughtmem/corpus.hpp"
#include "thoughtmem/errors.hpp"
#include "thoughtmem/text.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>

namespace thoughtmem {

using nlohmann::json;

void ServiceConfig::validate() const {
    pipeline.validate();
    if (embed_dim == 0) {
        throw Error(ErrorCode::invalid_config, "embed_dim must be positive");
    }
    if (lm_backend == LmBackend::scripted && scripted_fixture.empty()) {
        throw Error(ErrorCode::invalid_config,
                    "scripted LM backend needs scripted_fixture = <path>");
    }
    if (embedder_backend == EmbedderBackend::remote && embed_url.empty()) {
        throw Error(ErrorCode::invalid_config, "remote embedder needs embed_url = <url>");
    }
}

namespace {

std::string strip_quotes(const std::string& value) {
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\''))) {
        return value.substr(1, value.size() - 2);
    }
    return value;
}

} // namespace

ServiceConfig load_service_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_failure, "cannot open config '" + path.string() + "'");
    }
    ServiceConfig config;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::invalid_config,
                        "config line " + std::to_string(line_number) + " is not key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = strip_quotes(trim(stripped.substr(eq + 1)));
        try {
            if (key == "listen") {
                auto colon = value.rfind(':');
                if (colon == std::string::npos) {
                    throw Error(ErrorCode::invalid_config, "listen must be host:port");
                }
                config.listen_host = value.substr(0, colon);
                config.listen_port = std::stoi(value.substr(colon + 1));
            } else if (key == "store") {
                config.store_path = value;
            } else if (key == "audit_log") {
                config.audit_log = value;
            } else if (key == "k") {
                config.pipeline.top_k = std::stoull(value);
            } else if (key == "epsilon") {
                config.pipeline.epsilon = std::stod(value);
            } else if (key == "chunk_size_tokens") {
                config.pipeline.chunk_size_tokens = std::stoull(value);
            } else if (key == "context_budget_tokens") {
                config.pipeline.context_budget_tokens = std::stoull(value);
            } else if (key == "lm") {
                if (value == "scripted") config.lm_backend = LmBackend::scripted;
                else if (value == "remote") config.lm_backend = LmBackend::remote;
                else throw Error(ErrorCode::invalid_config, "lm must be scripted or remote");
            } else if (key == "scripted_fixture") {
                config.scripted_fixture = value;
            } else if (key == "temperature") {
                config.temperature = std::stod(value);
            } else if (key == "embedder") {
                if (value == "hashed") config.embedder_backend = EmbedderBackend::hashed;
                else if (value == "remote") config.embedder_backend = EmbedderBackend::remote;
                else {
                    throw Error(ErrorCode::invalid_config,
                                "embedder must be hashed or remote");
                }
            } else if (key == "embed_dim") {
                config.embed_dim = std::stoull(value);
            } else if (key == "embed_url") {
                config.embed_url = value;
            } else if (key == "embed_model") {
                config.embed_model = value;
            } else {
                throw Error(ErrorCode::invalid_config, "unknown config key '" + key + "'");
            }
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(ErrorCode::invalid_config,
                        "config line " + std::to_string(line_number) + ": " + e.what());
        }
    }
    config.validate();
    return config;
}

std::unique_ptr<Embedder> make_embedder(const ServiceConfig& config) {
    if (config.embedder_backend == EmbedderBackend::hashed) {
        return std::make_unique<HashedBowEmbedder>(config.embed_dim);
    }
    const char* key = std::getenv("THOUGHT_LLM_KEY");
    return std::make_unique<RemoteEmbedder>(config.embed_url, config.embed_model,
                                            key ? key : "", config.embed_dim);
}

std::unique_ptr<LanguageModel> make_language_model(const ServiceConfig& config) {
    if (config.lm_backend == LmBackend::scripted) {
        if (config.scripted_fixture.empty()) {
            throw Error(ErrorCode::invalid_config,
                        "scripted LM backend needs scripted_fixture = <path>");
        }
        return std::make_unique<ScriptedLanguageModel>(
            ScriptedLanguageModel::from_jsonl(config.scripted_fixture));
    }
    return std::make_unique<RemoteLanguageModel>(
        RemoteLanguageModel::from_env(config.temperature));
}

struct MemoryService::Impl {
    std::shared_ptr<MemoryStore> store;
    std::shared_ptr<const LanguageModel> lm;
    std::shared_ptr<const Embedder> embedder;
    ServiceConfig config;
    AuditLog audit;

    httplib::Server server;
    int bound_port = 0;

    // Writer gate: one mutating request (or maintenance hold) at a time.
    std::mutex writer_gate;
    std::atomic<bool> maintenance{false};

    std::mutex counter_mutex;
    AuditTallies tallies;
    std::uint64_t next_query = 0;

    Impl(std::shared_ptr<MemoryStore> s, std::shared_ptr<const LanguageModel> l,
         std::shared_ptr<const Embedder> e, ServiceConfig c)
        : store(std::move(s)), lm(std::move(l)), embedder(std::move(e)),
          config(std::move(c)), audit(config.audit_log) {
        tallies = tally_audit_log(config.audit_log);
        next_query = tallies.queries;
        install_routes();
    }

    static void send_error(httplib::Response& res, int status, const std::string& name,
                           const std::string& message) {
        res.status = status;
        res.set_content(json{{"error", name}, {"message", message}}.dump(),
                        "application/json");
    }

    void persist_store() { store->persist(config.store_path); }

    void handle_query(const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object() || !body.contains("query") ||
            !body["query"].is_string()) {
            send_error(res, 400, "MalformedRecord", "body must be {\"query\": string}");
            return;
        }
        const std::string query_text = body["query"].get<std::string>();
        if (trim(query_text).empty()) {
            send_error(res, 400, "EmptyText", "query is empty");
            return;
        }

        std::unique_lock gate(writer_gate, std::try_to_lock);
        if (!gate.owns_lock() || maintenance.load()) {
            send_error(res, 409, "ConcurrentWriter", "another writer holds the store");
            return;
        }

        std::string query_id;
        {
            std::lock_guard lock(counter_mutex);
            char buffer[16];
            std::snprintf(buffer, sizeof(buffer), "q%06llu",
                          static_cast<unsigned long long>(next_query++));
            query_id = buffer;
        }

        QueryRecord record;
        try {
            record = process_query(query_id, query_text, *store, *lm, *embedder,
                                   config.pipeline);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::backend_unavailable) {
                send_error(res, 503, e.name(), e.what());
            } else {
                send_error(res, 400, e.name(), e.what());
            }
            return;
        }
        persist_store();
        audit.append(record);
        {
            std::lock_guard lock(counter_mutex);
            ++tallies.queries;
            switch (record.outcome.kind) {
            case ThoughtOutcome::Kind::accepted: ++tallies.accepted; break;
            case ThoughtOutcome::Kind::rejected_redundant: ++tallies.rejected_redundant; break;
            case ThoughtOutcome::Kind::rejected_low_confidence:
                ++tallies.rejected_low_confidence;
                break;
            case ThoughtOutcome::Kind::no_thought: ++tallies.no_thought; break;
            }
        }

        json retrieved = json::array();
        for (const auto& entry : record.retrieved.entries) {
            retrieved.push_back({{"id", entry.id},
                                 {"score", entry.score},
                                 {"kind", item_kind_name(entry.kind)}});
        }
        json response{{"answer", record.answer_text},
                      {"retrieved", retrieved},
                      {"thought_outcome", thought_outcome_name(record.outcome.kind)}};
        if (record.outcome.kind == ThoughtOutcome::Kind::accepted) {
            response["thought_id"] = record.outcome.item_id;
        } else if (record.outcome.kind == ThoughtOutcome::Kind::rejected_redundant) {
            response["max_similarity"] = record.outcome.max_similarity;
            response["matched_id"] = record.outcome.matched_id;
        }
        res.set_content(response.dump(), "application/json");
    }

    void handle_ingest(const httplib::Request& req, httplib::Response& res) {
        std::vector<Document> docs;
        std::string line;
        std::istringstream body(req.body);
        std::size_t line_number = 0;
        while (std::getline(body, line)) {
            ++line_number;
            if (trim(line).empty()) continue;
            json record = json::parse(line, nullptr, false);
            if (record.is_discarded() || !record.is_object() || !record.contains("doc_id") ||
                !record.contains("text")) {
                send_error(res, 400, "MalformedRecord",
                           "line " + std::to_string(line_number) +
                               " must be {\"doc_id\", \"text\", ...}");
                return;
            }
            Document doc;
            doc.doc_id = record["doc_id"].get<std::string>();
            doc.text = record["text"].get<std::string>();
            if (record.contains("metadata") && record["metadata"].is_object()) {
                for (const auto& [key, value] : record["metadata"].items()) {
                    doc.metadata[key] = value.get<std::string>();
                }
            }
            docs.push_back(std::move(doc));
        }

        std::unique_lock gate(writer_gate, std::try_to_lock);
        if (!gate.owns_lock() || maintenance.load()) {
            send_error(res, 409, "ConcurrentWriter", "another writer holds the store");
            return;
        }
        IngestReport report;
        try {
            report = ingest_documents(docs, *store, *embedder,
                                      config.pipeline.chunk_size_tokens);
        } catch (const Error& e) {
            send_error(res, 400, e.name(), e.what());
            return;
        }
        persist_store();
        res.set_content(json{{"added", report.added}, {"skipped", report.skipped}}.dump(),
                        "application/json");
    }

    void handle_item(const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.path_params.at("id");
        if (!store->contains(id)) {
            send_error(res, 404, "UnknownItem", "no item with id '" + id + "'");
            return;
        }
        auto item = store->get_item(id);
        json response{{"id", item.id},
                      {"kind", item_kind_name(item.kind)},
                      {"text", item.text()},
                      {"created_seq", item.created_seq}};
        if (item.kind == ItemKind::chunk) {
            const auto& chunk = std::get<DataChunk>(item.payload);
            response["doc_id"] = chunk.doc_id;
            response["ordinal"] = chunk.ordinal;
            response["immediate_sources"] = json::array();
        } else {
            const auto& thought = std::get<Thought>(item.payload);
            response["query_id"] = thought.query_id;
            response["immediate_sources"] = thought.immediate_sources;
        }
        res.set_content(response.dump(), "application/json");
    }

    void handle_provenance(const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.path_params.at("id");
        if (!store->contains(id)) {
            send_error(res, 404, "UnknownItem", "no item with id '" + id + "'");
            return;
        }
        auto roots = store->root_source(id);
        res.set_content(
            json{{"root_source", std::vector<std::string>(roots.begin(), roots.end())},
                 {"abstraction_level", store->abstraction_level(id)}}
                .dump(),
            "application/json");
    }

    void handle_stats(const httplib::Request&, httplib::Response& res) {
        std::lock_guard lock(counter_mutex);
        res.set_content(json{{"chunks", store->chunk_count()},
                             {"thoughts", store->thought_count()},
                             {"accepted", tallies.accepted},
                             {"rejected_redundant", tallies.rejected_redundant},
                             {"rejected_low_confidence", tallies.rejected_low_confidence}}
                            .dump(),
                        "application/json");
    }

    void install_routes() {
        server.Post("/v1/query",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        handle_query(req, res);
                    });
        server.Post("/v1/ingest",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        handle_ingest(req, res);
                    });
        server.Get("/v1/items/:id/provenance",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       handle_provenance(req, res);
                   });
        server.Get("/v1/items/:id",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       handle_item(req, res);
                   });
        server.Get("/v1/stats", [this](const httplib::Request& req, httplib::Response& res) {
            handle_stats(req, res);
        });
        server.Get("/v1/healthz", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("ok", "text/plain");
        });
    }
};

MemoryService::MemoryService(std::shared_ptr<MemoryStore> store,
                             std::shared_ptr<const LanguageModel> lm,
                             std::shared_ptr<const Embedder> embedder, ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(store), std::move(lm), std::move(embedder),
                                   std::move(config))) {}

MemoryService::~MemoryService() {
    stop();
}

int MemoryService::bind_any_port() {
    impl_->bound_port = impl_->server.bind_to_any_port(impl_->config.listen_host);
    if (impl_->bound_port <= 0) {
        throw Error(ErrorCode::io_failure,
                    "cannot bind to " + impl_->config.listen_host);
    }
    return impl_->bound_port;
}

void MemoryService::bind() {
    if (!impl_->server.bind_to_port(impl_->config.listen_host, impl_->config.listen_port)) {
        throw Error(ErrorCode::io_failure,
                    "cannot bind to " + impl_->config.listen_host + ":" +
                        std::to_string(impl_->config.listen_port));
    }
    impl_->bound_port = impl_->config.listen_port;
}

void MemoryService::listen() {
    impl_->server.listen_after_bind();
}

void MemoryService::wait_ready() {
    impl_->server.wait_until_ready();
}

void MemoryService::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool MemoryService::begin_maintenance() {
    bool expected = false;
    return impl_->maintenance.compare_exchange_strong(expected, true);
}

void MemoryService::end_maintenance() {
    impl_->maintenance.store(false);
}

const MemoryStore& MemoryService::store() const {
    return *impl_->store;
}

} // namespace thoughtmem
