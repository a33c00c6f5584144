#include "thoughtmem/memory.hpp"

#include "thoughtmem/errors.hpp"
#include "thoughtmem/hash.hpp"
#include "thoughtmem/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <mutex>

namespace thoughtmem {

using nlohmann::json;

const char* item_kind_name(ItemKind kind) {
    return kind == ItemKind::chunk ? "chunk" : "thought";
}

const std::string& MemoryItem::text() const {
    if (kind == ItemKind::chunk) return std::get<DataChunk>(payload).text;
    return std::get<Thought>(payload).text;
}

std::vector<std::string> RetrievedSet::ids() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.id);
    return out;
}

MemoryStore::MemoryStore(std::size_t embed_dim) : embed_dim_(embed_dim) {
    if (embed_dim_ == 0) {
        throw Error(ErrorCode::invalid_config, "store embedding dimension must be positive");
    }
}

void MemoryStore::check_open() const {
    if (closed_) throw Error(ErrorCode::store_closed, "store is closed for writing");
}

void MemoryStore::check_dim(const EmbeddingVector& embedding) const {
    if (embedding.dimension() != embed_dim_) {
        throw Error(ErrorCode::dimension_mismatch,
                    "embedding has dimension " + std::to_string(embedding.dimension()) +
                        ", store expects " + std::to_string(embed_dim_));
    }
}

std::size_t MemoryStore::index_of(const std::string& item_id) const {
    auto it = index_.find(item_id);
    if (it == index_.end()) {
        throw Error(ErrorCode::unknown_item, "no item with id '" + item_id + "'");
    }
    return it->second;
}

std::string MemoryStore::insert_chunk(const DataChunk& chunk, const EmbeddingVector& embedding) {
    std::unique_lock lock(mutex_);
    return insert_chunk_locked(chunk, embedding);
}

std::string MemoryStore::insert_chunk_locked(const DataChunk& chunk,
                                             const EmbeddingVector& embedding) {
    check_open();
    check_dim(embedding);
    if (auto it = index_.find(chunk.chunk_id); it != index_.end()) {
        return items_[it->second].id;
    }
    MemoryItem item;
    item.id = chunk.chunk_id;
    item.kind = ItemKind::chunk;
    item.payload = chunk;
    item.embedding = embedding;
    item.created_seq = items_.size();
    index_.emplace(item.id, items_.size());
    items_.push_back(std::move(item));
    levels_.push_back(1.0);
    return chunk.chunk_id;
}

std::string MemoryStore::insert_thought(const Thought& thought, const EmbeddingVector& embedding) {
    std::unique_lock lock(mutex_);
    return insert_thought_locked(thought, embedding);
}

std::string MemoryStore::insert_thought_locked(const Thought& thought,
                                               const EmbeddingVector& embedding) {
    check_open();
    check_dim(embedding);
    if (trim(thought.text).empty()) {
        throw Error(ErrorCode::empty_text, "thought text is empty");
    }
    if (thought.immediate_sources.empty()) {
        throw Error(ErrorCode::empty_source_list,
                    "thought '" + thought.thought_id + "' has no immediate sources");
    }
    if (auto it = index_.find(thought.thought_id); it != index_.end()) {
        return items_[it->second].id;
    }
    double level_sum = 0.0;
    for (const auto& source_id : thought.immediate_sources) {
        auto it = index_.find(source_id);
        if (it == index_.end()) {
            throw Error(ErrorCode::unknown_source,
                        "thought '" + thought.thought_id + "' references unknown source '" +
                            source_id + "'");
        }
        level_sum += levels_[it->second];
    }
    MemoryItem item;
    item.id = thought.thought_id;
    item.kind = ItemKind::thought;
    item.created_seq = items_.size();
    Thought stored = thought;
    stored.created_seq = item.created_seq;
    item.payload = std::move(stored);
    item.embedding = embedding;
    index_.emplace(item.id, items_.size());
    items_.push_back(std::move(item));
    levels_.push_back(1.0 + level_sum / static_cast<double>(thought.immediate_sources.size()));
    return thought.thought_id;
}

SimilarityScan MemoryStore::max_similarity_locked(const EmbeddingVector& embedding) const {
    check_dim(embedding);
    SimilarityScan scan;
    for (const auto& item : items_) {
        double score = cosine_similarity(embedding, item.embedding);
        if (!scan.matched_id || score > scan.max_similarity) {
            scan.max_similarity = score;
            scan.matched_id = item.id;
        }
    }
    return scan;
}

SimilarityScan MemoryStore::max_similarity(const EmbeddingVector& embedding) const {
    std::shared_lock lock(mutex_);
    return max_similarity_locked(embedding);
}

MergeOutcome MemoryStore::merge_thought(const Thought& thought, const EmbeddingVector& embedding,
                                        double epsilon) {
    std::unique_lock lock(mutex_);
    check_open();
    auto scan = max_similarity_locked(embedding);
    MergeOutcome outcome;
    outcome.max_similarity = scan.max_similarity;
    outcome.matched_id = scan.matched_id;
    if (scan.matched_id && scan.max_similarity >= epsilon) {
        outcome.redundant = true;
        return outcome;
    }
    outcome.inserted_id = insert_thought_locked(thought, embedding);
    return outcome;
}

std::set<std::string> MemoryStore::root_source(const std::string& item_id) const {
    std::shared_lock lock(mutex_);
    const std::size_t start = index_of(item_id);

    // Memoized union over the provenance graph; sources always have a
    // smaller index, so iterating sorted pending indices terminates.
    std::unordered_map<std::size_t, std::set<std::string>> memo;
    std::vector<std::size_t> stack{start};
    while (!stack.empty()) {
        std::size_t idx = stack.back();
        if (memo.count(idx)) {
            stack.pop_back();
            continue;
        }
        const MemoryItem& item = items_[idx];
        if (item.kind == ItemKind::chunk) {
            memo[idx] = {item.id};
            stack.pop_back();
            continue;
        }
        const auto& sources = std::get<Thought>(item.payload).immediate_sources;
        bool ready = true;
        for (const auto& source_id : sources) {
            std::size_t sidx = index_.at(source_id);
            if (!memo.count(sidx)) {
                stack.push_back(sidx);
                ready = false;
            }
        }
        if (!ready) continue;
        std::set<std::string> merged;
        for (const auto& source_id : sources) {
            const auto& part = memo[index_.at(source_id)];
            merged.insert(part.begin(), part.end());
        }
        memo[idx] = std::move(merged);
        stack.pop_back();
    }
    return memo[start];
}

double MemoryStore::abstraction_level(const std::string& item_id) const {
    std::shared_lock lock(mutex_);
    return levels_[index_of(item_id)];
}

RetrievedSet MemoryStore::retrieve_top_k(const EmbeddingVector& query_embedding,
                                         std::size_t k) const {
    std::shared_lock lock(mutex_);
    check_dim(query_embedding);
    std::vector<ScoredItem> scored;
    scored.reserve(items_.size());
    for (const auto& item : items_) {
        scored.push_back({item.id, cosine_similarity(query_embedding, item.embedding), item.kind});
    }
    const std::size_t take = std::min(k, scored.size());
    // Exhaustive scoring with a full deterministic order: descending score,
    // ties broken by ascending created_seq (scored is in seq order, and
    // stable_sort keeps it for equal scores).
    std::stable_sort(scored.begin(), scored.end(),
                     [](const ScoredItem& a, const ScoredItem& b) { return a.score > b.score; });
    scored.resize(take);
    RetrievedSet out;
    out.entries = std::move(scored);
    return out;
}

bool MemoryStore::contains(const std::string& item_id) const {
    std::shared_lock lock(mutex_);
    return index_.count(item_id) > 0;
}

MemoryItem MemoryStore::get_item(const std::string& item_id) const {
    std::shared_lock lock(mutex_);
    return items_[index_of(item_id)];
}

std::vector<MemoryItem> MemoryStore::items_snapshot() const {
    std::shared_lock lock(mutex_);
    return items_;
}

std::size_t MemoryStore::size() const {
    std::shared_lock lock(mutex_);
    return items_.size();
}

std::size_t MemoryStore::chunk_count() const {
    std::shared_lock lock(mutex_);
    std::size_t n = 0;
    for (const auto& item : items_) n += item.kind == ItemKind::chunk ? 1 : 0;
    return n;
}

std::size_t MemoryStore::thought_count() const {
    std::shared_lock lock(mutex_);
    std::size_t n = 0;
    for (const auto& item : items_) n += item.kind == ItemKind::thought ? 1 : 0;
    return n;
}

void MemoryStore::close() {
    std::unique_lock lock(mutex_);
    closed_ = true;
}

bool MemoryStore::closed() const {
    std::shared_lock lock(mutex_);
    return closed_;
}

namespace {

json item_to_json(const MemoryItem& item) {
    json record;
    record["id"] = item.id;
    record["kind"] = item_kind_name(item.kind);
    record["created_seq"] = item.created_seq;
    record["embedding"] = item.embedding.values;
    if (item.kind == ItemKind::chunk) {
        const auto& chunk = std::get<DataChunk>(item.payload);
        record["text"] = chunk.text;
        record["doc_id"] = chunk.doc_id;
        record["ordinal"] = chunk.ordinal;
    } else {
        const auto& thought = std::get<Thought>(item.payload);
        record["text"] = thought.text;
        record["query_id"] = thought.query_id;
        record["immediate_sources"] = thought.immediate_sources;
    }
    return record;
}

const json& require_field(const json& record, const char* field) {
    auto it = record.find(field);
    if (it == record.end()) {
        throw Error(ErrorCode::corrupt_file,
                    std::string("item record missing field '") + field + "'");
    }
    return *it;
}

} // namespace

void MemoryStore::persist(const std::filesystem::path& path) const {
    std::shared_lock lock(mutex_);
    std::string body;
    for (const auto& item : items_) {
        body += item_to_json(item).dump();
        body += '\n';
    }
    json header;
    header["format_version"] = 1;
    header["embed_dim"] = embed_dim_;
    header["item_count"] = items_.size();
    header["checksum"] = sha256_hex(body);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io_failure, "cannot open '" + path.string() + "' for writing");
    }
    out << header.dump() << '\n' << body;
    out.flush();
    if (!out) {
        throw Error(ErrorCode::io_failure, "failed writing '" + path.string() + "'");
    }
}

std::unique_ptr<MemoryStore> MemoryStore::restore(const std::filesystem::path& path,
                                                  const Embedder& embedder) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_failure, "cannot open '" + path.string() + "' for reading");
    }
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw Error(ErrorCode::corrupt_file, "missing header line");
    }
    json header = json::parse(header_line, nullptr, false);
    if (header.is_discarded() || !header.is_object()) {
        throw Error(ErrorCode::corrupt_file, "header is not a JSON object");
    }
    if (!header.contains("format_version") || header["format_version"].get<int>() != 1) {
        throw Error(ErrorCode::format_version_mismatch,
                    "expected format_version 1 in '" + path.string() + "'");
    }
    const auto embed_dim = header.value("embed_dim", std::size_t{0});
    if (embed_dim != embedder.dimension()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "file embed_dim " + std::to_string(embed_dim) + " does not match embedder " +
                        std::to_string(embedder.dimension()));
    }
    const auto item_count = header.value("item_count", std::size_t{0});
    const auto checksum = header.value("checksum", std::string{});

    std::string body;
    std::vector<std::string> lines;
    lines.reserve(item_count);
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
        body += line;
        body += '\n';
    }
    if (lines.size() != item_count || sha256_hex(body) != checksum) {
        throw Error(ErrorCode::corrupt_file, "checksum mismatch in '" + path.string() + "'");
    }

    auto store = std::make_unique<MemoryStore>(embed_dim);
    std::uint64_t prev_seq = 0;
    bool first = true;
    for (const auto& item_line : lines) {
        json record = json::parse(item_line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw Error(ErrorCode::corrupt_file, "item line is not a JSON object");
        }
        const auto kind = require_field(record, "kind").get<std::string>();
        const auto seq = require_field(record, "created_seq").get<std::uint64_t>();
        if (!first && seq <= prev_seq) {
            throw Error(ErrorCode::corrupt_file, "created_seq is not strictly increasing");
        }
        prev_seq = seq;
        first = false;
        EmbeddingVector embedding{require_field(record, "embedding").get<std::vector<double>>()};
        const auto text = require_field(record, "text").get<std::string>();
        if (kind == "chunk") {
            DataChunk chunk;
            chunk.chunk_id = require_field(record, "id").get<std::string>();
            chunk.doc_id = record.value("doc_id", std::string{});
            chunk.ordinal = record.value("ordinal", std::size_t{0});
            chunk.text = text;
            chunk.token_count = token_count(text);
            store->insert_chunk(chunk, embedding);
        } else if (kind == "thought") {
            Thought thought;
            thought.thought_id = require_field(record, "id").get<std::string>();
            thought.text = text;
            thought.query_id = record.value("query_id", std::string{});
            thought.immediate_sources =
                require_field(record, "immediate_sources").get<std::vector<std::string>>();
            // insert_thought re-validates that every source already exists,
            // which re-checks acyclicity after restore.
            store->insert_thought(thought, embedding);
        } else {
            throw Error(ErrorCode::corrupt_file, "unknown item kind '" + kind + "'");
        }
    }
    return store;
}

std::unique_ptr<MemoryStore> MemoryStore::clone_with_thought_budget(
    std::size_t thought_budget) const {
    std::shared_lock lock(mutex_);
    auto clone = std::make_unique<MemoryStore>(embed_dim_);
    std::size_t thoughts_taken = 0;
    for (const auto& item : items_) {
        if (item.kind == ItemKind::chunk) {
            clone->insert_chunk(std::get<DataChunk>(item.payload), item.embedding);
        } else {
            if (thoughts_taken >= thought_budget) continue;
            ++thoughts_taken;
            clone->insert_thought(std::get<Thought>(item.payload), item.embedding);
        }
    }
    return clone;
}

} // namespace thoughtmem
