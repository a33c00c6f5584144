#pragma once

#include "thoughtmem/embedding.hpp"
#include "thoughtmem/lm.hpp"
#include "thoughtmem/memory.hpp"
#include "thoughtmem/pipeline.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace thoughtmem {

enum class LmBackend { scripted, remote };
enum class EmbedderBackend { hashed, remote };

struct ServiceConfig {
    std::string listen_host = "127.0.0.1";
    int listen_port = 8080;
    std::filesystem::path store_path = "memory.store";
    std::filesystem::path audit_log = "audit.jsonl";
    PipelineConfig pipeline;

    LmBackend lm_backend = LmBackend::scripted;
    std::filesystem::path scripted_fixture; // required for the scripted backend
    double temperature = 0.0;               // remote backend

    EmbedderBackend embedder_backend = EmbedderBackend::hashed;
    std::size_t embed_dim = 256;
    std::string embed_url;   // remote embedder
    std::string embed_model; // remote embedder

    void validate() const;
};

// Parses a flat key = value file ('#' comments, optional quotes).
ServiceConfig load_service_config(const std::filesystem::path& path);

std::unique_ptr<Embedder> make_embedder(const ServiceConfig& config);
std::unique_ptr<LanguageModel> make_language_model(const ServiceConfig& config);

// HTTP front end over the engine. Mutating endpoints persist the store
// after each request and are serialized through a single writer gate;
// a contended gate surfaces as 409 instead of queuing.
class MemoryService {
public:
    MemoryService(std::shared_ptr<MemoryStore> store, std::shared_ptr<const LanguageModel> lm,
                  std::shared_ptr<const Embedder> embedder, ServiceConfig config);
    ~MemoryService();

    MemoryService(const MemoryService&) = delete;
    MemoryService& operator=(const MemoryService&) = delete;

    // Binds to the configured host on any free port; returns the port.
    int bind_any_port();
    // Binds to the configured host:port.
    void bind();
    // Serves until stop(); call from a dedicated thread when embedding.
    void listen();
    // Blocks until the listener accepts connections.
    void wait_ready();
    void stop();

    // Holds the writer gate so external tooling can snapshot the store;
    // mutating requests receive 409 until released.
    bool begin_maintenance();
    void end_maintenance();

    const MemoryStore& store() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace thoughtmem
