#pragma once

#include "thoughtmem/corpus.hpp"
#include "thoughtmem/embedding.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace thoughtmem {

// A validated, query-derived abstraction. immediate_sources are the item
// ids retrieved for the originating query; they must all exist in the
// store before the thought is inserted, which makes the provenance graph
// acyclic by construction.
struct Thought {
    std::string thought_id;
    std::string text;
    std::string query_id;
    std::vector<std::string> immediate_sources;
    std::uint64_t created_seq = 0;
};

enum class ItemKind { chunk, thought };

const char* item_kind_name(ItemKind kind);

struct MemoryItem {
    std::string id;
    ItemKind kind = ItemKind::chunk;
    std::variant<DataChunk, Thought> payload;
    EmbeddingVector embedding;
    std::uint64_t created_seq = 0;

    const std::string& text() const;
};

struct ScoredItem {
    std::string id;
    double score = 0.0;
    ItemKind kind = ItemKind::chunk;
};

struct RetrievedSet {
    std::string query_id;
    std::vector<ScoredItem> entries; // descending score; ties by created_seq

    std::vector<std::string> ids() const;
};

struct SimilarityScan {
    double max_similarity = -1.0; // -1 when the store is empty
    std::optional<std::string> matched_id;
};

// Outcome of the atomic check-and-insert used by the pipeline's merge
// step: either the candidate was redundant (nothing inserted) or it was
// inserted and `inserted_id` is set.
struct MergeOutcome {
    bool redundant = false;
    double max_similarity = -1.0;
    std::optional<std::string> matched_id;
    std::optional<std::string> inserted_id;
};

// The union of raw knowledge chunks and accepted thoughts, with the
// provenance graph, embeddings, and insertion ordering. Reads take a
// shared lock, writes an exclusive one; composite check-and-insert is
// provided as a single atomic operation.
class MemoryStore {
public:
    explicit MemoryStore(std::size_t embed_dim);

    MemoryStore(const MemoryStore&) = delete;
    MemoryStore& operator=(const MemoryStore&) = delete;

    std::size_t embed_dim() const { return embed_dim_; }

    // Duplicate chunk_id is a no-op returning the existing item id.
    std::string insert_chunk(const DataChunk& chunk, const EmbeddingVector& embedding);

    // Validates that every immediate source exists. Duplicate thought_id is
    // a no-op returning the existing id.
    std::string insert_thought(const Thought& thought, const EmbeddingVector& embedding);

    // Atomically scans for the maximum similarity against all stored items
    // and inserts the thought only when that maximum is below epsilon.
    MergeOutcome merge_thought(const Thought& thought, const EmbeddingVector& embedding,
                               double epsilon);

    // Maximum cosine similarity between `embedding` and every stored item.
    SimilarityScan max_similarity(const EmbeddingVector& embedding) const;

    // Root source mapping: a chunk maps to itself; a thought maps to the
    // union of its sources' root sources. Always a set of chunk ids.
    std::set<std::string> root_source(const std::string& item_id) const;

    // 1.0 for chunks; 1 + mean source level for thoughts. Cached at insert
    // time (provenance edges never change).
    double abstraction_level(const std::string& item_id) const;

    RetrievedSet retrieve_top_k(const EmbeddingVector& query_embedding, std::size_t k) const;

    bool contains(const std::string& item_id) const;
    MemoryItem get_item(const std::string& item_id) const;
    std::vector<MemoryItem> items_snapshot() const;

    std::size_t size() const;
    std::size_t chunk_count() const;
    std::size_t thought_count() const;

    // After close() every mutating operation raises StoreClosed.
    void close();
    bool closed() const;

    void persist(const std::filesystem::path& path) const;
    static std::unique_ptr<MemoryStore> restore(const std::filesystem::path& path,
                                                const Embedder& embedder);

    // Copy holding all chunks plus the first `thought_budget` thoughts in
    // created_seq order. Ids are preserved; sequences are reassigned
    // compactly, keeping relative order.
    std::unique_ptr<MemoryStore> clone_with_thought_budget(std::size_t thought_budget) const;

private:
    std::string insert_chunk_locked(const DataChunk& chunk, const EmbeddingVector& embedding);
    std::string insert_thought_locked(const Thought& thought, const EmbeddingVector& embedding);
    SimilarityScan max_similarity_locked(const EmbeddingVector& embedding) const;
    std::size_t index_of(const std::string& item_id) const;
    void check_open() const;
    void check_dim(const EmbeddingVector& embedding) const;

    std::size_t embed_dim_;
    bool closed_ = false;
    std::vector<MemoryItem> items_;            // ordered by created_seq
    std::vector<double> levels_;               // abstraction level per item
    std::unordered_map<std::string, std::size_t> index_;
    mutable std::shared_mutex mutex_;
};

} // namespace thoughtmem
