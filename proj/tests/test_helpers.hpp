#pragma once

#include "thoughtmem/corpus.hpp"
#include "thoughtmem/embedding.hpp"
#include "thoughtmem/memory.hpp"
#include "thoughtmem/text.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace helpers {

inline thoughtmem::EmbeddingVector unit_axis(std::size_t dim, std::size_t axis) {
    std::vector<double> values(dim, 0.0);
    values[axis % dim] = 1.0;
    return thoughtmem::EmbeddingVector{std::move(values)};
}

inline thoughtmem::DataChunk make_chunk(const std::string& id, const std::string& text,
                                        const std::string& doc_id = "doc",
                                        std::size_t ordinal = 0) {
    thoughtmem::DataChunk chunk;
    chunk.chunk_id = id;
    chunk.doc_id = doc_id;
    chunk.ordinal = ordinal;
    chunk.text = text;
    chunk.token_count = thoughtmem::token_count(text);
    return chunk;
}

inline thoughtmem::Thought make_thought(const std::string& id, const std::string& text,
                                        std::vector<std::string> sources,
                                        const std::string& query_id = "q") {
    thoughtmem::Thought thought;
    thought.thought_id = id;
    thought.text = text;
    thought.query_id = query_id;
    thought.immediate_sources = std::move(sources);
    return thought;
}

// Random provenance graph: chunks first with probability decreasing over
// time, thoughts sourced from up to 8 existing items.
inline std::unique_ptr<thoughtmem::MemoryStore> random_store(std::mt19937_64& rng,
                                                             std::size_t item_count,
                                                             std::size_t dim = 8) {
    auto store = std::make_unique<thoughtmem::MemoryStore>(dim);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < item_count; ++i) {
        const std::string id = "i" + std::to_string(i);
        const bool must_chunk = ids.empty();
        if (must_chunk || rng() % 100 < 40) {
            store->insert_chunk(make_chunk(id, "chunk text " + std::to_string(i)),
                                unit_axis(dim, rng() % dim));
        } else {
            const std::size_t source_count = 1 + rng() % std::min<std::size_t>(8, ids.size());
            std::vector<std::string> sources;
            for (std::size_t s = 0; s < source_count; ++s) {
                sources.push_back(ids[rng() % ids.size()]);
            }
            store->insert_thought(make_thought(id, "thought text " + std::to_string(i),
                                               std::move(sources)),
                                  unit_axis(dim, rng() % dim));
        }
        ids.push_back(id);
    }
    return store;
}

// Unique temp path; the file is not created. The tag's extension (if any)
// is kept at the end so extension-based loaders see it.
inline std::filesystem::path temp_path(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    auto dir = std::filesystem::temp_directory_path() / "thoughtmem_tests";
    std::filesystem::create_directories(dir);
    const std::filesystem::path name(tag);
    return dir / (name.stem().string() + "-" + std::to_string(::getpid()) + "-" +
                  std::to_string(counter.fetch_add(1)) + name.extension().string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

} // namespace helpers
